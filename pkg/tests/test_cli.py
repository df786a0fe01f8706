import json

import pytest

from conftest import FIXTURE_DIR
from pathpay.cli import dumps_json, main

NETWORK = str(FIXTURE_DIR / "network.json")
VOT = str(FIXTURE_DIR / "vot.json")


def run(args):
    return main(args)


class TestJsonWriter:
    def test_floats_round_trip(self):
        values = [0.1, 1.0 / 3.0, 1e-17, 12345.678901234567, 2.0]
        text = dumps_json({"v": values})
        assert json.loads(text)["v"] == values

    def test_sorted_keys_and_types(self):
        text = dumps_json({"b": 1, "a": [True, None, "x\"y"]})
        assert text.index('"a"') < text.index('"b"')
        assert json.loads(text) == {"b": 1, "a": [True, None, 'x"y']}

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            dumps_json({"v": float("nan")})


class TestEquilibria:
    def test_fixture_tables(self, tmp_path, capsys):
        out = tmp_path / "o"
        assert run(["equilibria", "--network", NETWORK, "--out", str(out)]) == 0
        text = (out / "equilibria.txt").read_text()
        assert "SO flow" in text and "UE flow" in text
        assert "Average time (min)" in text
        data = json.loads((out / "equilibria.json").read_text())
        assert data["so"]["flows"] == pytest.approx([250, 750, 450, 550], abs=1e-3)
        assert data["ue"]["times_min"] == pytest.approx(
            [20.714, 20.714, 19.333, 19.333], abs=1e-3
        )
        assert data["ue"]["average_min"] == pytest.approx(40.048, abs=1e-3)
        assert data["so"]["average_min"] == pytest.approx(39.55, abs=1e-3)
        assert "SO flow" in capsys.readouterr().out

    def test_zero_demand_rows(self, tmp_path):
        net = tmp_path / "net.json"
        net.write_text(
            json.dumps(
                {
                    "nodes": ["A", "B"],
                    "links": [{"id": 1, "from": "A", "to": "B",
                               "cost": {"kind": "linear", "params": [1.0, 0.1]}}],
                    "demand": {"origin": "A", "destination": "B",
                               "total": 0.0, "subscribers": 0.0},
                }
            )
        )
        out = tmp_path / "o"
        assert run(["equilibria", "--network", str(net), "--out", str(out)]) == 0
        data = json.loads((out / "equilibria.json").read_text())
        assert data["so"]["flows"] == [0.0]
        assert data["ue"]["flows"] == [0.0]

    def test_missing_file(self, tmp_path, capsys):
        assert run(["equilibria", "--network", "nope.json",
                    "--out", str(tmp_path)]) == 1
        assert "error:" in capsys.readouterr().err


class TestScheme:
    def test_fixture_outputs(self, tmp_path):
        out = tmp_path / "o"
        assert run(["scheme", "--network", NETWORK, "--vot", VOT,
                    "--out", str(out)]) == 0
        data = json.loads((out / "scheme.json").read_text())
        by_label = {e["label"]: e for e in data["paths"]}
        assert by_label["(1)+(4)"]["payment_usd"] == pytest.approx(-1.367, abs=1e-3)
        assert by_label["(2)+(4)"]["payment_usd"] == pytest.approx(-0.650, abs=1e-3)
        assert by_label["(2)+(3)"]["payment_usd"] == pytest.approx(1.193, abs=1e-3)
        assert by_label["(1)+(4)"]["subscribers"] == pytest.approx(200.0, abs=1e-3)
        assert by_label["(1)+(4)"]["vot_low"] == pytest.approx(5.0, abs=1e-6)
        assert by_label["(1)+(4)"]["vot_high"] == pytest.approx(17.2, abs=1e-4)
        assert by_label["(1)+(3)"]["share"] == 0.0
        ver = json.loads((out / "verification.json").read_text())
        assert ver["passed"] is True
        text = (out / "scheme.txt").read_text()
        assert "Payment ($)" in text
        assert "-" in text  # the empty path renders as a dash

    def test_byte_identical_reruns(self, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        for out in (out1, out2):
            assert run(["scheme", "--network", NETWORK, "--vot", VOT,
                        "--out", str(out)]) == 0
        for name in ("scheme.json", "scheme.txt", "verification.json"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_class_override(self, tmp_path):
        out = tmp_path / "o"
        assert run(["scheme", "--network", NETWORK, "--vot", VOT,
                    "--classes", "50", "--out", str(out)]) == 0
        data = json.loads((out / "scheme.json").read_text())
        assert data["vot_classes"] == 50


class TestImprovement:
    def test_default_grid(self, tmp_path):
        out = tmp_path / "o"
        assert run(["improvement", "--network", NETWORK, "--vot", VOT,
                    "--out", str(out)]) == 0
        lines = (out / "improvement.csv").read_text().strip().splitlines()
        assert lines[0].split(",")[0] == "beta"
        assert len(lines) == 402  # header + 401 grid rows

    def test_grid_two_emits_endpoints(self, tmp_path):
        out = tmp_path / "o"
        assert run(["improvement", "--network", NETWORK, "--vot", VOT,
                    "--grid", "2", "--out", str(out)]) == 0
        lines = (out / "improvement.csv").read_text().strip().splitlines()
        assert len(lines) == 3
        assert float(lines[1].split(",")[0]) == 5.0
        assert float(lines[2].split(",")[0]) == 45.0


class TestAssign:
    def write_roster(self, path, rows):
        lines = ["user_id,role,vot"] + [",".join(r) for r in rows]
        path.write_text("\n".join(lines) + "\n")

    def test_mixed_roster(self, tmp_path):
        roster = tmp_path / "roster.csv"
        self.write_roster(
            roster,
            [("u1", "subscriber", "40"), ("u2", "outsider", ""),
             ("u3", "subscriber", "10")],
        )
        out = tmp_path / "o"
        assert run(["assign", "--network", NETWORK, "--vot", VOT,
                    "--roster", str(roster), "--seed", "7",
                    "--out", str(out)]) == 0
        lines = (out / "assignments.csv").read_text().strip().splitlines()
        assert lines[0] == "user_id,role,path,time_min,payment_usd"
        u1 = lines[1].split(",")
        assert u1[2] == "(2)+(3)" and u1[4] == "1.19"
        u3 = lines[3].split(",")
        assert u3[2] == "(1)+(4)" and u3[4] == "-1.37"
        u2 = lines[2].split(",")
        assert u2[1] == "outsider" and u2[4] == ""

    def test_seeded_determinism(self, tmp_path):
        roster = tmp_path / "roster.csv"
        self.write_roster(roster, [(f"u{i}", "outsider", "") for i in range(20)])
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            assert run(["assign", "--network", NETWORK, "--vot", VOT,
                        "--roster", str(roster), "--seed", "42",
                        "--out", str(out)]) == 0
            outs.append((out / "assignments.csv").read_bytes())
        assert outs[0] == outs[1]

    def test_missing_vot_rejected(self, tmp_path, capsys):
        roster = tmp_path / "roster.csv"
        self.write_roster(roster, [("u1", "subscriber", "")])
        assert run(["assign", "--network", NETWORK, "--vot", VOT,
                    "--roster", str(roster), "--out", str(tmp_path / "o")]) == 1
        assert "missing VOT" in capsys.readouterr().err

    def test_unknown_role_rejected(self, tmp_path, capsys):
        roster = tmp_path / "roster.csv"
        self.write_roster(roster, [("u1", "driver", "10")])
        assert run(["assign", "--network", NETWORK, "--vot", VOT,
                    "--roster", str(roster), "--out", str(tmp_path / "o")]) == 1
        assert "unknown role" in capsys.readouterr().err

    def test_vot_out_of_support_rejected(self, tmp_path, capsys):
        roster = tmp_path / "roster.csv"
        self.write_roster(roster, [("u1", "subscriber", "99")])
        assert run(["assign", "--network", NETWORK, "--vot", VOT,
                    "--roster", str(roster), "--out", str(tmp_path / "o")]) == 1
        assert "error:" in capsys.readouterr().err
