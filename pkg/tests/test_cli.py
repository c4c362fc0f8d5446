import io
import json
import subprocess
import sys

import numpy as np
import pytest

from qgames.cli import RunReport, Table, run
from qgames.scenario import bundled_names


def invoke(*argv: str) -> tuple[int, str]:
    buf = io.StringIO()
    code = run(list(argv), stdout=buf)
    return code, buf.getvalue()


def report(*argv: str) -> RunReport:
    code, out = invoke(*argv, "--format", "json")
    assert code == 0
    return RunReport.from_json(out)


class TestSubcommands:
    def test_payoff_classical(self):
        rep = report("payoff", "pd_classical")
        np.testing.assert_array_equal(rep.payoffs.cells, [[[3, 3], [0, 5]], [[5, 0], [1, 1]]])

    def test_classify_chicken(self):
        code, out = invoke("classify", "pd_entangled_3_5")
        assert code == 0
        assert "form: Chicken" in out
        assert report("classify", "pd_entangled_3_5").form["label"] == "Chicken"

    def test_classify_family_param(self):
        rep = report("classify", "family_a00_d11", "--param", "4/5")
        assert rep.form["label"] == "PrisonersDilemma"

    def test_nash(self):
        assert report("nash", "pd_classical").nash == [(1, 1)]
        assert report("nash", "pd_entangled_3_5").nash == [(0, 1), (1, 0)]

    def test_regions(self):
        rep = report("regions", "family_a00_d11")
        bps = rep.regions["breakpoints"]
        assert any(abs(b - 4 / 7) < 1e-9 for b in bps)
        assert any(abs(b - 2 / 3) < 1e-9 for b in bps)

    def test_regions_needs_family(self):
        code, _ = invoke("regions", "pd_classical")
        assert code == 2

    def test_curves_csv(self):
        code, out = invoke("curves", "family_a00_d11", "--grid", "11", "--format", "csv")
        assert code == 0
        lines = out.split("\n")
        assert lines[0] == "p,A_O1,A_O2,A_O3,A_O4,B_O1,B_O2,B_O3,B_O4"
        assert len(lines) == 13 and lines[-1] == ""
        assert "\r" not in out
        row = [float(x) for x in lines[6].split(",")]
        np.testing.assert_allclose(row, [0.5, 2, 2.5, 2.5, 2, 2, 2.5, 2.5, 2], atol=1e-12)

    def test_mixed_sweep(self):
        code, out = invoke("mixed-sweep", "pd_classical", "--rule", "paper", "--grid", "101", "--format", "csv")
        assert code == 0
        rows = [line.split(",") for line in out.strip().split("\n")[1:]]
        eps_half = [r for r in rows if float(r[0]) == 0.5]
        assert float(eps_half[0][1]) == pytest.approx(2.25, abs=1e-12)

    def test_mixed_sweep_derivative_rule(self):
        rep = report("mixed-sweep", "pd_classical", "--rule", "derivative", "--grid", "7")
        assert rep.extra["rule"] == "derivative"

    def test_channel_entangled(self):
        rep = report("channel", "pd_entangled_3_5")
        assert rep.channel["reproduction_max_diff"] < 1e-10
        assert rep.channel["game_factorization"]["correlated"] is True

    def test_channel_correlated_noise(self):
        rep = report("channel", "pd_correlated_noise")
        np.testing.assert_allclose(rep.payoffs.cells, [[[11 / 5, 11 / 5], [2, 3]], [[3, 2], [9 / 5, 9 / 5]]],
                                   atol=1e-12)
        assert rep.channel["noise_factorization"]["correlated"] is True

    def test_channel_noise_param(self):
        rep = report("channel", "pd_independent_noise", "--param", "0")
        np.testing.assert_allclose(rep.payoffs.cells, [[[3, 3], [0, 5]], [[5, 0], [1, 1]]], atol=1e-15)
        assert rep.channel["noise_factorization"]["correlated"] is False

    def test_dephase_check(self):
        rep = report("dephase-check", "pd_entangled_3_5")
        assert rep.extra["max_abs_diff"] <= 1e-12
        assert rep.extra["invariant"] is True

    def test_dephased_scenario_payoff(self):
        rep = report("payoff", "pd_dephased_3_5")
        np.testing.assert_allclose(rep.payoffs.cells, [[[11 / 5, 11 / 5], [2, 3]], [[3, 2], [9 / 5, 9 / 5]]],
                                   atol=1e-12)

    def test_ewl_three_strategies(self):
        rep = report("payoff", "ewl_bell_entangler")
        assert rep.payoffs.cells.shape == (3, 3, 2)
        np.testing.assert_allclose(rep.payoffs.cells[0, :, 0], [3, 0, 5], atol=1e-12)


class TestErrors:
    def test_validation_exit_code(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"schema_version": 1}', encoding="utf-8")
        code, _ = invoke("payoff", str(bad))
        assert code == 2

    def test_non_unitary_reported(self, tmp_path, capsys):
        doc = {
            "schema_version": 1, "name": "leaky", "subsystem_dims": [2, 2],
            "input_state": [{"label": "00", "prob": 1}],
            "alice_ops": [{"name": "Leak", "matrix": [[0.9, 0], [0, 1]]}],
            "bob_ops": [{"name": "I", "gate": "I"}],
            "outcomes": {"00": [3, 3], "01": [0, 5], "10": [5, 0], "11": [1, 1]},
        }
        path = tmp_path / "leaky.json"
        path.write_text(json.dumps(doc), encoding="utf-8")
        code, _ = invoke("payoff", str(path))
        assert code == 2
        assert "Leak" in capsys.readouterr().err

    def test_missing_file(self):
        assert invoke("payoff", "/nonexistent/scenario.json")[0] == 2

    def test_unknown_subcommand(self):
        with pytest.raises(SystemExit):
            invoke("frobnicate", "pd_classical")

    def test_invariant_exit_code(self, monkeypatch):
        from qgames import cli
        from qgames.errors import InvariantViolation

        def boom(doc, args):
            raise InvariantViolation("channel is not row-stochastic")

        monkeypatch.setitem(cli.HANDLERS, "channel", boom)
        assert invoke("channel", "pd_classical")[0] == 3


class TestDeterminism:
    @pytest.mark.parametrize("sub,scenario", [
        ("payoff", "pd_entangled_3_5"), ("regions", "family_b01_c10"), ("curves", "family_a00_d11"),
        ("channel", "pd_correlated_noise"), ("mixed-sweep", "pd_classical"), ("dephase-check", "pd_dephased_3_5"),
    ])
    def test_byte_identical_outputs(self, tmp_path, sub, scenario):
        first, second = tmp_path / "a", tmp_path / "b"
        assert invoke(sub, scenario, "--out", str(first))[0] == 0
        assert invoke(sub, scenario, "--out", str(second))[0] == 0
        names = sorted(p.name for p in first.iterdir())
        assert names == sorted(p.name for p in second.iterdir())
        assert f"{scenario}.{sub}.json" in names
        for nm in names:
            assert (first / nm).read_bytes() == (second / nm).read_bytes()
            assert b"\r" not in (first / nm).read_bytes()


class TestRoundTrip:
    @pytest.mark.parametrize("sub", ["payoff", "classify", "nash", "channel", "dephase-check"])
    def test_report_round_trip(self, sub):
        code, out = invoke(sub, "pd_entangled_3_5", "--format", "json")
        assert code == 0
        rep = RunReport.from_json(out)
        again = RunReport.from_json(rep.to_json())
        assert again.to_dict() == rep.to_dict()
        if rep.payoffs is not None:
            assert again.payoffs.max_abs_diff(rep.payoffs) <= 1e-12
        assert json.loads(out) == rep.to_dict()

    def test_csv_precision(self):
        t = Table(["x"], [[1 / 3]])
        assert t.to_csv() == "x\n0.33333333333333331\n"
        assert float(t.to_csv().split("\n")[1]) == 1 / 3


def test_all_bundled_payoff_run():
    for name in bundled_names():
        assert invoke("payoff", name)[0] == 0


def test_console_script_module():
    out = subprocess.run([sys.executable, "-m", "qgames.cli", "classify", "pd_entangled_3_5"],
                         capture_output=True, text=True, check=True)
    assert "Chicken" in out.stdout
