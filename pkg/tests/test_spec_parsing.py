"""Tests for configuration parsing and validation."""

import math
from pathlib import Path

import pytest
import yaml

from twolevellaser.models.spec import LaserParams, RunConfig, SimConfig

CONFIG_DIR = Path(__file__).parent.parent / "configs"


class TestLaserParams:
    """Tests for LaserParams validation and derived constants."""

    def test_valid_params(self):
        params = LaserParams(g=1.0, kappa=20.0, pump_rate=2.0, n_atoms=100)
        assert params.gamma_c == pytest.approx(0.2)
        assert params.eta == pytest.approx(2.2)
        assert params.coupling_lambda == pytest.approx(0.1)
        assert params.omega0 == 0.0

    def test_from_rates(self):
        params = LaserParams.from_rates(gamma_c=0.2, pump_rate=4.8, kappa=0.8, n_atoms=100)
        assert params.g == pytest.approx(0.2)
        assert params.eta == pytest.approx(5.0)

    def test_from_rates_rejects_zero_gamma(self):
        with pytest.raises(ValueError, match="gamma_c"):
            LaserParams.from_rates(gamma_c=0.0, pump_rate=1.0, kappa=1.0, n_atoms=1)

    @pytest.mark.parametrize(
        "field, value",
        [("g", 0.0), ("kappa", -1.0), ("pump_rate", -0.1), ("n_atoms", 0)],
    )
    def test_out_of_range(self, field, value):
        data = {"g": 1.0, "kappa": 20.0, "pump_rate": 2.0, "n_atoms": 100}
        data[field] = value
        with pytest.raises(ValueError):
            LaserParams(**data)

    def test_frozen(self):
        params = LaserParams(g=1.0, kappa=20.0, pump_rate=2.0, n_atoms=100)
        with pytest.raises(ValueError):
            params.g = 2.0


class TestSimConfig:
    """Tests for SimConfig validation."""

    @pytest.fixture
    def params(self):
        return LaserParams(g=1.0, kappa=20.0, pump_rate=2.0, n_atoms=100)

    def test_burn_in_must_be_shorter(self):
        with pytest.raises(ValueError, match="burn_in"):
            SimConfig(dt=0.01, t_end=1.0, burn_in=1.0)

    def test_n_steps(self):
        config = SimConfig(dt=0.1, t_end=1.0)
        assert config.n_steps == 10
        assert config.requested_samples == pytest.approx(10.0)

    def test_euler_guard(self, params):
        config = SimConfig(dt=0.01, t_end=1.0, m_update="euler")
        errors = config.validate_for(params)
        assert len(errors) == 1
        assert "euler" in errors[0]

    def test_exact_ou_has_no_step_guard(self, params):
        config = SimConfig(dt=0.01, t_end=1.0, m_update="exact_ou")
        assert config.validate_for(params) == []

    def test_stationary_burn_in_guard(self, params):
        config = SimConfig(dt=0.001, t_end=10.0, burn_in=1.0)
        errors = config.validate_for(params, stationary=True)
        assert any("burn_in" in e for e in errors)


class TestRunConfig:
    """Tests for the flat configuration schema."""

    @pytest.fixture
    def valid_config_data(self):
        return {"g": 1.0, "kappa": 20.0, "pump_rate": 2.0, "n_atoms": 100}

    def test_defaults(self, valid_config_data):
        run = RunConfig.model_validate(valid_config_data)
        assert run.mode == "adiabatic"
        assert run.m_update == "exact_ou"
        assert run.lambdas == [0.5, 1.0, 2.0]

    def test_unknown_key_rejected(self, valid_config_data):
        valid_config_data["kapa"] = 1.0
        with pytest.raises(ValueError, match="kapa"):
            RunConfig.model_validate(valid_config_data)

    def test_negative_lambda_rejected(self, valid_config_data):
        valid_config_data["lambdas"] = [1.0, -0.5]
        with pytest.raises(ValueError, match="lambdas"):
            RunConfig.model_validate(valid_config_data)

    def test_initial_population_bounded(self, valid_config_data):
        valid_config_data["n_a0"] = 101
        with pytest.raises(ValueError, match="n_a0"):
            RunConfig.model_validate(valid_config_data)

    def test_omega_range(self, valid_config_data):
        valid_config_data.update(omega_min=1.0, omega_max=-1.0)
        with pytest.raises(ValueError, match="omega_min"):
            RunConfig.model_validate(valid_config_data)

    def test_resolved_sim_config(self, valid_config_data):
        run = RunConfig.model_validate(valid_config_data)
        sim = run.to_sim_config()
        eta = 2.2
        assert sim.dt == pytest.approx(0.05 / eta)
        assert sim.burn_in == pytest.approx(5.0 / eta)
        assert sim.t_end == pytest.approx(55.0 / eta)
        assert sim.validate_for(run.to_params(), stationary=True) == []

    def test_full_mode_step_resolves_kappa(self, valid_config_data):
        valid_config_data["mode"] = "full"
        sim = RunConfig.model_validate(valid_config_data).to_sim_config()
        assert sim.dt == pytest.approx(0.1 / 20.0)

    def test_max_lag_limited_by_window(self, valid_config_data):
        valid_config_data.update(t_end=10.0, burn_in=4.0)
        run = RunConfig.model_validate(valid_config_data)
        assert run.resolved_max_lag(run.to_sim_config()) == pytest.approx(3.0)

    def test_omega_grid(self, valid_config_data):
        valid_config_data["omega_points"] = 5
        grid = RunConfig.model_validate(valid_config_data).omega_grid()
        assert grid == pytest.approx([-100.0, -50.0, 0.0, 50.0, 100.0])

    def test_population_times(self, valid_config_data):
        pop_t_end, pop_dt_max, jump_t_end = RunConfig.model_validate(
            valid_config_data
        ).population_times()
        assert pop_t_end == pytest.approx(10.0 / 2.2)
        assert pop_dt_max == pytest.approx(pop_t_end / 200.0)
        assert jump_t_end == pytest.approx(2000.0 / 2.2)


class TestYAMLParsing:
    """Tests for the shipped configuration files."""

    @pytest.mark.parametrize("path", sorted(CONFIG_DIR.glob("*.yaml")), ids=lambda p: p.stem)
    def test_parse_config_file(self, path):
        with open(path) as f:
            data = yaml.safe_load(f)
        run = RunConfig.model_validate(data)
        sim = run.to_sim_config()
        assert sim.validate_for(run.to_params(), stationary=True) == []

    def test_fig1_rates(self):
        with open(CONFIG_DIR / "fig1.yaml") as f:
            params = RunConfig.model_validate(yaml.safe_load(f)).to_params()
        assert params.kappa == pytest.approx(0.8)
        assert params.eta == pytest.approx(5.0)

    def test_full_mode_ratio(self):
        with open(CONFIG_DIR / "full_mode.yaml") as f:
            params = RunConfig.model_validate(yaml.safe_load(f)).to_params()
        assert params.kappa / params.eta == pytest.approx(100.0)
        assert not math.isclose(params.gamma_c, 0.0)
