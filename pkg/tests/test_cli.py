"""Tests for the command-line interface."""

import csv
import json
from pathlib import Path

import pytest
from typer.testing import CliRunner

from twolevellaser.cli import app

CONFIG_DIR = Path(__file__).parent.parent / "configs"

runner = CliRunner()


def read_csv(path):
    lines = [line for line in Path(path).read_text().splitlines() if not line.startswith("#")]
    return list(csv.DictReader(lines))


@pytest.fixture
def above_config():
    return CONFIG_DIR / "above_threshold.yaml"


class TestAnalytic:
    """Tests for the analytic command."""

    def test_json_report(self, above_config, tmp_path):
        out = tmp_path / "report.json"
        result = runner.invoke(app, ["analytic", "-c", str(above_config), "-o", str(out)])
        assert result.exit_code == 0, result.output
        data = json.loads(out.read_text())
        values = {row["quantity"]: row for row in data["quantities"]}
        assert values["nbar"]["value"] == pytest.approx(0.90909, abs=1e-5)
        assert values["nbar"]["source"] == "Eq54"
        assert data["config"]["kappa"] == 20.0
        assert data["regime"]["variant"] == "above_threshold"

    def test_threshold_is_chaotic(self, tmp_path):
        out = tmp_path / "report.csv"
        result = runner.invoke(
            app,
            ["analytic", "-c", str(CONFIG_DIR / "threshold.yaml"), "-o", str(out), "--format", "csv"],
        )
        assert result.exit_code == 0, result.output
        values = {row["quantity"]: float(row["value"]) for row in read_csv(out)}
        assert values["dn2"] == pytest.approx(values["nbar"] ** 2)
        assert values["var_plus"] == pytest.approx(2 * values["nbar"])

    def test_no_pumping(self, above_config, tmp_path):
        out = tmp_path / "report.json"
        result = runner.invoke(
            app, ["analytic", "-c", str(above_config), "--set", "pump_rate=0", "-o", str(out)]
        )
        assert result.exit_code == 0, result.output
        data = json.loads(out.read_text())
        values = {row["quantity"]: row["value"] for row in data["quantities"]}
        assert values["nbar"] == 0.0
        assert values["dn2"] == 0.0
        assert data["config"]["pump_rate"] == 0.0
        assert data["regime"]["ratio"] == "inf"


class TestConfigErrors:
    """Configuration problems exit with code 1."""

    def test_missing_file(self, tmp_path):
        result = runner.invoke(app, ["analytic", "-c", str(tmp_path / "nope.yaml")])
        assert result.exit_code == 1
        assert "not found" in result.output

    def test_unknown_key(self, above_config):
        result = runner.invoke(app, ["analytic", "-c", str(above_config), "--set", "kapa=1"])
        assert result.exit_code == 1
        assert "kapa" in result.output

    def test_invalid_value(self, above_config):
        result = runner.invoke(app, ["analytic", "-c", str(above_config), "--set", "kappa=-1"])
        assert result.exit_code == 1
        assert "kappa" in result.output

    def test_malformed_override(self, above_config):
        result = runner.invoke(app, ["analytic", "-c", str(above_config), "--set", "kappa"])
        assert result.exit_code == 1

    def test_not_a_mapping(self, tmp_path):
        path = tmp_path / "list.yaml"
        path.write_text("- 1\n- 2\n")
        result = runner.invoke(app, ["analytic", "-c", str(path)])
        assert result.exit_code == 1


class TestBandFraction:
    """Tests for the bandfraction command (Fig. 1 data)."""

    def test_fig1_values(self, tmp_path):
        out = tmp_path / "z.csv"
        result = runner.invoke(
            app,
            ["bandfraction", "-c", str(CONFIG_DIR / "fig1.yaml"), "-o", str(out),
             "-l", "0", "-l", "0.5", "-l", "1", "-l", "2"],
        )
        assert result.exit_code == 0, result.output
        rows = read_csv(out)
        z = [float(row["z"]) for row in rows]
        assert z == pytest.approx([0.0, 0.66, 0.86, 0.96], abs=0.01)
        for row in rows[1:]:
            assert float(row["z_quad"]) == pytest.approx(float(row["z"]), rel=1e-8)

    def test_config_lambdas(self, tmp_path):
        out = tmp_path / "z.csv"
        result = runner.invoke(app, ["bandfraction", "-c", str(CONFIG_DIR / "fig1.yaml"), "-o", str(out)])
        assert result.exit_code == 0, result.output
        z = [float(row["z"]) for row in read_csv(out)]
        assert z == sorted(z)
        assert z[-1] >= 0.98

    def test_negative_lambda(self):
        result = runner.invoke(
            app, ["bandfraction", "-c", str(CONFIG_DIR / "fig1.yaml"), "--lambda=-1"]
        )
        assert result.exit_code == 1


class TestSpectrum:
    """Tests for the spectrum command."""

    def test_grid(self, above_config, tmp_path):
        out = tmp_path / "p.csv"
        result = runner.invoke(
            app,
            ["spectrum", "-c", str(above_config), "-o", str(out), "--set", "omega_points=11"],
        )
        assert result.exit_code == 0, result.output
        rows = read_csv(out)
        assert len(rows) == 11
        assert float(rows[5]["omega_offset"]) == pytest.approx(0.0)
        assert all(float(row["P"]) > 0 for row in rows)
        assert out.read_text().startswith("# config ")


class TestSimulate:
    """Tests for the simulate and compare commands."""

    def test_budget_exceeded(self, above_config):
        result = runner.invoke(
            app, ["simulate", "-c", str(above_config), "--set", "sample_budget=1000"]
        )
        assert result.exit_code == 2
        assert "sample_budget" in result.output

    def test_short_burn_in_is_config_error(self, above_config):
        result = runner.invoke(app, ["simulate", "-c", str(above_config), "--set", "burn_in=0.01"])
        assert result.exit_code == 1

    def test_deterministic_report(self, above_config, tmp_path):
        outputs = []
        for name in ("a.json", "b.json"):
            out = tmp_path / name
            result = runner.invoke(
                app,
                ["simulate", "-c", str(above_config), "--set", "n_traj=40", "--seed", "4",
                 "-o", str(out)],
            )
            assert result.exit_code == 0, result.output
            outputs.append(out.read_bytes())
        assert outputs[0] == outputs[1]
        data = json.loads(outputs[0])
        assert data["config"]["seed"] == 4
        assert data["config"]["n_traj"] == 40
        assert {"observable", "simulated", "analytic", "tolerance", "verdict"} <= set(
            data["comparisons"][0]
        )

    def test_dumps(self, above_config, tmp_path):
        result = runner.invoke(
            app,
            ["simulate", "-c", str(above_config), "--set", "n_traj=20",
             "-o", str(tmp_path / "r.csv"), "--format", "csv",
             "--dump-trajectory", str(tmp_path / "traj.csv"),
             "--dump-correlation", str(tmp_path / "g1.csv")],
        )
        assert result.exit_code == 0, result.output
        assert read_csv(tmp_path / "r.csv")[0]["observable"] == "mean_b"
        assert list(read_csv(tmp_path / "traj.csv")[0]) == ["t", "re_m", "im_m", "re_b", "im_b"]
        lags = read_csv(tmp_path / "g1.csv")
        assert float(lags[0]["lag"]) == 0.0

    def test_compare_exits_on_failed_verdict(self, above_config, tmp_path, monkeypatch):
        from twolevellaser.theory import analytics

        monkeypatch.setattr(analytics, "mean_photon_number", lambda params: 100.0)
        result = runner.invoke(
            app,
            ["compare", "-c", str(above_config), "--set", "n_traj=10", "-o", str(tmp_path / "r.json")],
        )
        assert result.exit_code == 3
        assert "comparisons failed" in result.output
        assert json.loads((tmp_path / "r.json").read_text())["all_passed"] is False


class TestPopulations:
    """Tests for the populations command."""

    def test_threshold_average(self, tmp_path):
        out = tmp_path / "pop.json"
        result = runner.invoke(
            app,
            ["populations", "-c", str(CONFIG_DIR / "threshold.yaml"), "-o", str(out),
             "--dump-ode", str(tmp_path / "ode.csv")],
        )
        assert result.exit_code == 0, result.output
        data = json.loads(out.read_text())
        assert data["steady_state"]["n_a"] == pytest.approx(50.0)
        jump_row = next(r for r in data["comparisons"] if r["observable"] == "n_a_jump_average")
        assert jump_row["source"] == "Eq40"
        assert jump_row["simulated"] / 100 == pytest.approx(0.5, abs=0.05)

        ode = read_csv(tmp_path / "ode.csv")
        assert float(ode[0]["n_a"]) == 0.0
        assert float(ode[-1]["n_a"]) == pytest.approx(50.0, rel=1e-3)

    def test_fixed_point_row(self, above_config, tmp_path):
        out = tmp_path / "pop.json"
        result = runner.invoke(
            app,
            ["populations", "-c", str(above_config), "-o", str(out), "--set", "jump_t_end=50"],
        )
        assert result.exit_code == 0, result.output
        data = json.loads(out.read_text())
        rows = {r["observable"]: r for r in data["comparisons"]}
        row = rows["n_a_ode_fixed_point"]
        assert row["analytic"] == pytest.approx(1000.0 / 11.0, rel=1e-12)
        assert row["simulated"] == pytest.approx(1000.0 / 11.0, rel=1e-12)
        assert row["verdict"] == "pass"
        ratio = rows["n_b_over_n_a_ode"]
        assert ratio["source"] == "Eq41"
        assert ratio["simulated"] == pytest.approx(0.1, rel=1e-12)
        assert ratio["verdict"] == "pass"

    def test_fixed_point_row_follows_ode(self, above_config, tmp_path, monkeypatch):
        from twolevellaser import simulation
        from twolevellaser.models import PopulationState

        real = simulation.ode_evolve

        def halfway(params, initial, t_end, dt_max):
            start = PopulationState.from_upper(initial.n_a / 2.0, params.n_atoms)
            return real(params, start, t_end, dt_max)

        monkeypatch.setattr(simulation, "ode_evolve", halfway)
        out = tmp_path / "pop.json"
        result = runner.invoke(
            app,
            ["populations", "-c", str(above_config), "-o", str(out), "--set", "jump_t_end=50"],
        )
        assert result.exit_code == 0, result.output
        rows = {r["observable"]: r for r in json.loads(out.read_text())["comparisons"]}
        assert rows["n_a_ode_fixed_point"]["verdict"] == "fail"
        assert rows["n_b_over_n_a_ode"]["verdict"] == "fail"

    def test_single_atom_fraction(self, above_config, tmp_path):
        out = tmp_path / "pop.json"
        result = runner.invoke(app, ["populations", "-c", str(above_config), "-o", str(out)])
        assert result.exit_code == 0, result.output
        data = json.loads(out.read_text())
        rows = {r["observable"]: r for r in data["comparisons"]}
        row = rows["single_atom_upper_fraction"]
        assert row["analytic"] == pytest.approx(2.0 / 2.2)
        assert data["single_atom"]["upper_probability"] == pytest.approx(2.0 / 2.2)
        assert data["single_atom"]["events"] > 100
        assert abs(row["simulated"] - row["analytic"]) <= 4.0 * row["standard_error"]


class TestValidate:
    """Tests for the validate command."""

    def test_valid(self, above_config):
        result = runner.invoke(app, ["validate", "-c", str(above_config)])
        assert result.exit_code == 0, result.output
        assert "Configuration valid" in result.output
        assert "kappa: 20.0" in result.output

    def test_invalid(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("g: 1.0\nkappa: 20.0\n")
        result = runner.invoke(app, ["validate", "-c", str(path)])
        assert result.exit_code == 1
        assert "pump_rate" in result.output
