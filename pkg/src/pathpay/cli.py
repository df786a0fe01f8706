"""Command-line front end.

Subcommands
-----------

``equilibria``    solve and tabulate UE and SO link flows and times
``scheme``        run the full guidance pipeline and the verification checks
``improvement``   per-VOT cost comparison against the no-policy equilibrium
``assign``        per-user guidance for a roster of subscribers/outsiders

All output files are deterministic: rerunning a subcommand with identical
inputs (and seed) reproduces them byte for byte. JSON floats carry 17
significant digits; the text tables round to display precision (0.1 min,
$0.01, 0.1 $/h).
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path

import numpy as np

from .equilibrium import average_time, solve_so, solve_ue
from .network import enumerate_paths, parse_network
from .scheme import (
    SchemeError,
    assign_outsider,
    assign_subscriber,
    cost_report,
    run_scheme,
)
from .verify import check_pareto, run_verification
from .vot import parse_vot

DEFAULT_SP_GRID = 201
DEFAULT_REPORT_GRID = 401


# -- deterministic JSON ------------------------------------------------------


def _format_float(value: float) -> str:
    if value != value or value in (float("inf"), float("-inf")):
        raise ValueError("cannot serialize non-finite float to JSON")
    text = format(float(value), ".17g")
    return text if any(ch in text for ch in ".eE") else text + ".0"


def dumps_json(obj, indent: int = 0) -> str:
    """Serialize with sorted keys and 17-significant-digit floats."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f'{inner}"{key}": {dumps_json(obj[key], indent + 1)}'
            for key in sorted(obj)
        ]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{inner}{dumps_json(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(obj, bool) or obj is None:
        return {True: "true", False: "false", None: "null"}[obj]
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _format_float(float(obj))
    if isinstance(obj, str):
        return '"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"'
    raise TypeError(f"cannot serialize {type(obj)!r}")


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as handle:
        handle.write(text)


# -- shared loading ----------------------------------------------------------


def _load_network(args):
    return parse_network(Path(args.network).read_text())


def _load_vot(args):
    dist, M = parse_vot(Path(args.vot).read_text())
    if args.classes is not None:
        M = args.classes
    return dist, M


def _row(label: str, cells, width: int = 12) -> str:
    return label.ljust(16) + "".join(str(c).rjust(width) for c in cells)


# -- subcommands -------------------------------------------------------------


def cmd_equilibria(args) -> int:
    net = _load_network(args)
    paths = enumerate_paths(net)
    so = solve_so(net, paths, tol=args.tol)
    ue = solve_ue(net, paths, tol=args.tol)

    ids = [ln.id for ln in net.links]
    lines = [
        _row("Link", [f"({i})" for i in ids]),
        _row("UE flow", [f"{v:.1f}" for v in ue.link_flows]),
        _row("UE time (min)", [f"{v:.1f}" for v in net.link_times(ue.link_flows)]),
        _row("SO flow", [f"{v:.1f}" for v in so.link_flows]),
        _row("SO time (min)", [f"{v:.1f}" for v in net.link_times(so.link_flows)]),
    ]
    if net.demand > 0:
        lines.append("")
        lines.append(
            f"Average time (min): UE {average_time(ue):.1f}, SO {average_time(so):.1f}"
        )
    text = "\n".join(lines) + "\n"

    payload = {
        "links": ids,
        "ue": _solution_dict(ue, net),
        "so": _solution_dict(so, net),
    }
    out = Path(args.out)
    _write(out / "equilibria.txt", text)
    _write(out / "equilibria.json", dumps_json(payload) + "\n")
    print(text, end="")
    return 0


def _solution_dict(sol, net) -> dict:
    data = {
        "flows": list(sol.link_flows),
        "times_min": list(net.link_times(sol.link_flows)),
        "path_flows": list(sol.path_flows),
        "path_times_min": list(sol.path_times),
        "total_flow_minutes": sol.total_time,
        "relative_gap": sol.relative_gap,
        "iterations": sol.iterations,
    }
    if net.demand > 0:
        data["average_min"] = sol.total_time / net.demand
    if sol.ue_time is not None:
        data["equilibrium_time_min"] = sol.ue_time
    return data


def cmd_scheme(args) -> int:
    net = _load_network(args)
    dist, M = _load_vot(args)
    result = run_scheme(net, dist, M, tol=args.tol)
    outcome = result.outcome
    paths = result.paths

    sp_grid = args.grid if args.grid is not None else DEFAULT_SP_GRID
    report = cost_report(outcome, result.ue, DEFAULT_REPORT_GRID)
    verification = run_verification(outcome, report, sp_grid=sp_grid)

    # per-path rows in enumeration order
    n = len(paths)
    rank_of = {path: rank for rank, path in enumerate(outcome.order)}
    entries = []
    for r in range(n):
        rank = rank_of[r]
        entries.append(
            {
                "path": list(paths.paths[r]),
                "label": paths.labels()[r],
                "time_min": float(outcome.sorted_times[rank]),
                "subscribers": float(result.assignment.subscriber_path_flows[r]),
                "outsiders": float(result.assignment.outsider_path_flows[r]),
                "share": float(outcome.rho[rank]),
                "vot_low": float(outcome.partition[rank]),
                "vot_high": float(outcome.partition[rank + 1]),
                "payment_usd": float(outcome.payments[rank]),
            }
        )

    labels = paths.labels()
    width = max(12, max(len(s) for s in labels) + 2)

    def vot_cell(e):
        if e["share"] <= 0:
            return "-"
        return f"({e['vot_low']:.1f},{e['vot_high']:.1f}]"

    def pay_cell(e):
        return f"{e['payment_usd']:.2f}" if e["share"] > 0 else "-"

    lines = [
        _row("Path", labels, width),
        _row("Time (min)", [f"{e['time_min']:.1f}" for e in entries], width),
        _row("Subscribers", [f"{e['subscribers']:.1f}" for e in entries], width),
        _row("Outsiders", [f"{e['outsiders']:.1f}" for e in entries], width),
        _row("VOT ($/h)", [vot_cell(e) for e in entries], width),
        _row("Payment ($)", [pay_cell(e) for e in entries], width),
        "",
        f"Verification: {'PASS' if verification.passed else 'FAIL'}"
        f" (worst misreport margin {verification.strategy_proof.worst_margin:.3e} $,"
        f" revenue residual {verification.revenue_neutral.residual:.3e} $)",
    ]
    text = "\n".join(lines) + "\n"

    payload = {
        "paths": entries,
        "subscriber_demand": net.subscriber_demand,
        "outsider_demand": net.outsider_demand,
        "weighted_cost": result.assignment.weighted_cost,
        "so_relative_gap": result.so.relative_gap,
        "ue_relative_gap": result.ue.relative_gap,
        "vot_classes": M,
    }
    out = Path(args.out)
    _write(out / "scheme.txt", text)
    _write(out / "scheme.json", dumps_json(payload) + "\n")
    _write(out / "verification.json", dumps_json(verification.to_dict()) + "\n")
    print(text, end="")
    if not verification.passed:
        print("verification failed", file=sys.stderr)
        return 1
    return 0


def cmd_improvement(args) -> int:
    net = _load_network(args)
    dist, M = _load_vot(args)
    result = run_scheme(net, dist, M, tol=args.tol)
    grid = args.grid if args.grid is not None else DEFAULT_REPORT_GRID
    report = cost_report(result.outcome, result.ue, grid)

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        [
            "beta",
            "subscriber_cost",
            "quitter_cost",
            "ue_cost",
            "improvement_subscriber_pct",
            "improvement_outsider_pct",
        ]
    )
    for i in range(report.beta_grid.size):
        writer.writerow(
            [
                _format_float(report.beta_grid[i]),
                _format_float(report.subscriber_cost[i]),
                _format_float(report.quitter_cost[i]),
                _format_float(report.ue_cost[i]),
                _csv_float(report.improvement_subscriber_pct[i]),
                _csv_float(report.improvement_outsider_pct[i]),
            ]
        )
    out = Path(args.out)
    _write(out / "improvement.csv", buf.getvalue())

    pareto = check_pareto(report)
    print(
        f"wrote {out / 'improvement.csv'} ({report.beta_grid.size} rows); "
        f"cost ordering {'PASS' if pareto.passed else 'FAIL'}"
    )
    return 0 if pareto.passed else 1


def _csv_float(value: float) -> str:
    return "" if value != value else _format_float(value)


def cmd_assign(args) -> int:
    net = _load_network(args)
    dist, M = _load_vot(args)
    result = run_scheme(net, dist, M, tol=args.tol)
    outcome = result.outcome
    labels = result.paths.labels()
    rng = np.random.default_rng(args.seed)

    rows = []
    with open(args.roster, newline="") as handle:
        reader = csv.DictReader(handle)
        required = {"user_id", "role", "vot"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            print(
                f"roster needs columns user_id, role, vot (got {reader.fieldnames})",
                file=sys.stderr,
            )
            return 1
        for lineno, row in enumerate(reader, start=2):
            role = (row["role"] or "").strip().lower()
            vot_text = (row["vot"] or "").strip()
            if role == "subscriber":
                if not vot_text:
                    print(
                        f"line {lineno}: subscriber {row['user_id']!r} missing VOT",
                        file=sys.stderr,
                    )
                    return 1
                guidance = assign_subscriber(outcome, float(vot_text))
                rows.append(
                    [
                        row["user_id"],
                        "subscriber",
                        labels[guidance.path],
                        f"{guidance.time_min:.1f}",
                        f"{guidance.payment:.2f}",
                    ]
                )
            elif role == "outsider":
                path = assign_outsider(outcome, rng)
                rank = outcome.order.index(path)
                rows.append(
                    [
                        row["user_id"],
                        "outsider",
                        labels[path],
                        f"{outcome.sorted_times[rank]:.1f}",
                        "",
                    ]
                )
            else:
                print(f"line {lineno}: unknown role {row['role']!r}", file=sys.stderr)
                return 1

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["user_id", "role", "path", "time_min", "payment_usd"])
    writer.writerows(rows)
    out = Path(args.out)
    _write(out / "assignments.csv", buf.getvalue())
    print(f"wrote {out / 'assignments.csv'} ({len(rows)} users)")
    return 0


# -- argument parsing --------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pathpay",
        description="Charge-and-subsidy path guidance for a single O-D network.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, vot: bool):
        p.add_argument("--network", required=True, help="network JSON file")
        if vot:
            p.add_argument("--vot", required=True, help="VOT distribution JSON file")
            p.add_argument(
                "--classes", type=int, default=None, help="override VOT class count"
            )
        p.add_argument("--tol", type=float, default=1e-8, help="solver relative gap")
        p.add_argument("--out", default="out", help="output directory")

    p = sub.add_parser("equilibria", help="UE and SO link flows and times")
    common(p, vot=False)
    p.set_defaults(func=cmd_equilibria)

    p = sub.add_parser("scheme", help="full pipeline plus verification")
    common(p, vot=True)
    p.add_argument("--grid", type=int, default=None, help="misreport lattice size")
    p.set_defaults(func=cmd_scheme)

    p = sub.add_parser("improvement", help="per-VOT cost comparison CSV")
    common(p, vot=True)
    p.add_argument("--grid", type=int, default=None, help="VOT grid size")
    p.set_defaults(func=cmd_improvement)

    p = sub.add_parser("assign", help="guidance for a user roster CSV")
    common(p, vot=True)
    p.add_argument("--roster", required=True, help="CSV with user_id, role, vot")
    p.add_argument("--seed", type=int, default=0, help="outsider sampling seed")
    p.set_defaults(func=cmd_assign)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
