"""Executable checks for the scheme's three guarantees.

Every check reports its worst margin even when it passes, so a regression
that merely erodes slack is still visible. The checks are pure functions of
their inputs and can run on any outcome, not just the bundled fixture.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scheme import CostReport, SchemeOutcome, MINUTES_PER_HOUR
from .vot import VotClassTable

SP_DEFAULT_GRID = 201
SP_TOL = 1e-9


class OracleError(ValueError):
    """Brute-force oracle cannot run on the given inputs."""


@dataclass(frozen=True, eq=False)
class StrategyProofResult:
    """Worst misreport margin over a (true VOT, declared VOT) lattice.

    ``worst_margin`` is min over all pairs of (cost when lying) minus (cost
    when truthful); non-negative means lying never helps.
    ``boundary_worst_abs`` is the largest absolute margin over the
    indifference pairs, where a subscriber sits exactly on a partition point
    and declares into the next interval.
    """

    passed: bool
    worst_margin: float
    worst_true: float
    worst_declared: float
    boundary_worst_abs: float
    grid: int
    tolerance: float = SP_TOL


@dataclass(frozen=True, eq=False)
class RevenueResult:
    passed: bool
    residual: float
    tolerance: float


@dataclass(frozen=True, eq=False)
class ParetoResult:
    """Worst margins of the cost chain no-policy >= quitter >= subscriber."""

    passed: bool
    worst_ue_vs_quit: float
    worst_quit_vs_join: float
    at_beta_ue_vs_quit: float
    at_beta_quit_vs_join: float


@dataclass(frozen=True, eq=False)
class VerificationReport:
    strategy_proof: StrategyProofResult
    revenue_neutral: RevenueResult
    pareto: ParetoResult

    @property
    def passed(self) -> bool:
        return (
            self.strategy_proof.passed
            and self.revenue_neutral.passed
            and self.pareto.passed
        )

    def to_dict(self) -> dict:
        sp = self.strategy_proof
        rn = self.revenue_neutral
        pa = self.pareto
        return {
            "passed": self.passed,
            "strategy_proof": {
                "passed": sp.passed,
                "worst_margin_usd": sp.worst_margin,
                "worst_true_vot": sp.worst_true,
                "worst_declared_vot": sp.worst_declared,
                "boundary_worst_abs_usd": sp.boundary_worst_abs,
                "grid": sp.grid,
                "tolerance_usd": sp.tolerance,
            },
            "revenue_neutral": {
                "passed": rn.passed,
                "residual_usd": rn.residual,
                "tolerance_usd": rn.tolerance,
            },
            "pareto": {
                "passed": pa.passed,
                "worst_ue_vs_quit_usd": pa.worst_ue_vs_quit,
                "worst_quit_vs_join_usd": pa.worst_quit_vs_join,
                "at_beta_ue_vs_quit": pa.at_beta_ue_vs_quit,
                "at_beta_quit_vs_join": pa.at_beta_quit_vs_join,
            },
        }


def _lattice_assignment(outcome: SchemeOutcome, values: np.ndarray) -> np.ndarray:
    """Rank (slow-to-fast position) each VOT in ``values`` maps to."""
    nonempty = np.flatnonzero(outcome.rho > 0)
    uppers = outcome.partition[1:][nonempty]
    ks = np.minimum(np.searchsorted(uppers, values, side="left"), len(nonempty) - 1)
    return nonempty[ks]


def check_strategy_proof(
    outcome: SchemeOutcome, grid: int = SP_DEFAULT_GRID
) -> StrategyProofResult:
    """Exhaustively search a VOT lattice for a profitable misreport.

    The lattice is a uniform grid over the support with every partition
    point spliced in, because the binding pairs sit exactly on interval
    boundaries.
    """
    if grid < 2:
        raise ValueError("grid must be >= 2")
    lo, hi = outcome.support
    lattice = np.unique(
        np.concatenate([np.linspace(lo, hi, grid), outcome.partition])
    )
    ranks = _lattice_assignment(outcome, lattice)
    times = outcome.sorted_times[ranks]
    pays = outcome.payments[ranks]

    hours = lattice / MINUTES_PER_HOUR
    # cost[i, j]: true VOT lattice[i], declared VOT lattice[j]
    cost = hours[:, None] * times[None, :] + pays[None, :]
    truthful = hours * times + pays
    margins = cost - truthful[:, None]

    flat = int(np.argmin(margins))
    i, j = divmod(flat, margins.shape[1])
    worst = float(margins[i, j])

    boundary_worst = 0.0
    n = len(outcome.rho)
    for b in range(1, n):
        point = outcome.partition[b]
        if not lo < point < hi:
            continue
        true_rank = int(_lattice_assignment(outcome, np.array([point]))[0])
        higher = np.flatnonzero((outcome.rho > 0) & (np.arange(n) > true_rank))
        if higher.size == 0:
            continue
        nxt = int(higher[0])
        lie = (
            outcome.sorted_times[nxt] * point / MINUTES_PER_HOUR
            + outcome.payments[nxt]
        )
        truth = (
            outcome.sorted_times[true_rank] * point / MINUTES_PER_HOUR
            + outcome.payments[true_rank]
        )
        boundary_worst = max(boundary_worst, abs(lie - truth))

    return StrategyProofResult(
        passed=worst >= -SP_TOL,
        worst_margin=worst,
        worst_true=float(lattice[i]),
        worst_declared=float(lattice[j]),
        boundary_worst_abs=boundary_worst,
        grid=grid,
    )


def check_revenue_neutral(outcome: SchemeOutcome) -> RevenueResult:
    """Expected payment over the path shares; zero means self-financing."""
    residual = float(outcome.rho @ outcome.payments)
    tol = 1e-9 * float(np.abs(outcome.payments).max(initial=0.0)) + 1e-12
    return RevenueResult(passed=abs(residual) <= tol, residual=residual, tolerance=tol)


def check_pareto(report: CostReport) -> ParetoResult:
    """Check no-policy cost >= quitter cost >= subscriber cost pointwise."""
    if report.beta_grid.size == 0:
        raise ValueError("cost report grid is empty")
    tol = 1e-9 * (1.0 + report.ue_cost)
    ue_vs_quit = report.ue_cost - report.quitter_cost
    quit_vs_join = report.quitter_cost - report.subscriber_cost
    i = int(np.argmin(ue_vs_quit))
    j = int(np.argmin(quit_vs_join))
    passed = bool(
        np.all(ue_vs_quit >= -tol) and np.all(quit_vs_join >= -tol)
    )
    return ParetoResult(
        passed=passed,
        worst_ue_vs_quit=float(ue_vs_quit[i]),
        worst_quit_vs_join=float(quit_vs_join[j]),
        at_beta_ue_vs_quit=float(report.beta_grid[i]),
        at_beta_quit_vs_join=float(report.beta_grid[j]),
    )


def run_verification(
    outcome: SchemeOutcome,
    report: CostReport,
    sp_grid: int = SP_DEFAULT_GRID,
) -> VerificationReport:
    return VerificationReport(
        strategy_proof=check_strategy_proof(outcome, grid=sp_grid),
        revenue_neutral=check_revenue_neutral(outcome),
        pareto=check_pareto(report),
    )


def reconstruct_payments(
    sorted_times: np.ndarray,
    partition: np.ndarray,
    rho: np.ndarray,
) -> np.ndarray:
    """Second, independent payment construction.

    Builds payments from the two defining conditions directly: consecutive
    payment differences equal the time drop priced at the boundary VOT, and
    the share-weighted payments sum to zero. Agreement with
    :func:`pathpay.scheme.compute_payments` pins down uniqueness.
    """
    sorted_times = np.asarray(sorted_times, dtype=float)
    partition = np.asarray(partition, dtype=float)
    rho = np.asarray(rho, dtype=float)
    n = sorted_times.size
    gap_value = (
        (sorted_times[:-1] - sorted_times[1:]) * partition[1:n] / MINUTES_PER_HOUR
    )
    base = np.concatenate([[0.0], np.cumsum(gap_value)])
    return base - float(rho @ base)


def greedy_weighted_cost(
    classes: VotClassTable,
    subscriber_path_totals: np.ndarray,
    times: np.ndarray,
) -> float:
    """Objective of the sort-and-fill assignment: given per-path subscriber
    totals, fill the fastest paths with the highest-VOT classes.

    This is the optimal class-to-path coupling for fixed totals, so it must
    match the LP objective when fed the LP's own totals.
    """
    totals = np.asarray(subscriber_path_totals, dtype=float)
    times = np.asarray(times, dtype=float)
    path_order = sorted(range(times.size), key=lambda r: (times[r], r))
    remaining = totals[path_order].copy()
    cost = 0.0
    pos = 0
    for m in range(classes.M - 1, -1, -1):
        demand = float(classes.class_demand[m])
        while demand > 1e-12:
            while pos < remaining.size and remaining[pos] <= 1e-12:
                pos += 1
            if pos >= remaining.size:
                if demand > 1e-7 * (1.0 + totals.sum()):
                    raise OracleError("path totals cannot absorb class demands")
                break
            take = min(demand, remaining[pos])
            cost += classes.class_mean[m] * times[path_order[pos]] * take
            remaining[pos] -= take
            demand -= take
    return cost


def brute_force_lp_oracle(
    classes: VotClassTable,
    subscriber_path_totals: np.ndarray,
    times: np.ndarray,
    step: float,
) -> float:
    """Exhaustive lattice minimum of the VOT-weighted routing cost.

    Enumerates every class-by-path flow matrix on a lattice of resolution
    ``step`` whose row sums hit the class demands and column sums hit the
    per-path totals, and returns the smallest weighted cost. Feasibility on
    the lattice requires every demand and total to be a multiple of
    ``step``. Exponential in the instance size, hence the small-instance
    guard.
    """
    totals = np.asarray(subscriber_path_totals, dtype=float)
    times = np.asarray(times, dtype=float)
    M, R = classes.M, totals.size
    if M > 5 or R > 4:
        raise OracleError("oracle is limited to M <= 5 and at most 4 paths")
    if step <= 0:
        raise OracleError("step must be positive")

    def to_units(values):
        units = np.rint(values / step).astype(int)
        if np.abs(units * step - values).max(initial=0.0) > 1e-9 * step * max(
            1.0, np.abs(values).max(initial=0.0)
        ):
            raise OracleError("lattice infeasible at given step")
        return units

    row_units = to_units(classes.class_demand)
    col_units = to_units(totals)
    if row_units.sum() != col_units.sum():
        raise OracleError("lattice infeasible at given step")

    weights = classes.class_mean[:, None] * times[None, :] * step
    best = np.inf

    def compositions(total: int, caps: list[int]):
        if len(caps) == 1:
            if total <= caps[0]:
                yield (total,)
            return
        for first in range(min(total, caps[0]) + 1):
            for rest in compositions(total - first, caps[1:]):
                yield (first, *rest)

    def recurse(m: int, caps: list[int], cost: float):
        nonlocal best
        if cost >= best:
            return
        if m == M:
            if all(c == 0 for c in caps):
                best = cost
            return
        if sum(caps) < row_units[m:].sum():
            return
        for combo in compositions(int(row_units[m]), caps):
            extra = sum(weights[m, r] * combo[r] for r in range(R))
            recurse(
                m + 1,
                [caps[r] - combo[r] for r in range(R)],
                cost + extra,
            )

    recurse(0, [int(u) for u in col_units], 0.0)
    if not np.isfinite(best):
        raise OracleError("lattice infeasible at given step")
    return float(best)
