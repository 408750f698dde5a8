import pytest

from src.errors import ConfigError
from src.settings import REFERENCE_RESULTS, SolverConfig, reference_for


class TestSolverConfig:
    def test_defaults(self):
        cfg = SolverConfig()
        assert (cfg.mu0, cfg.tau0, cfg.delta, cfg.sigma, cfg.eps, cfg.xi) == (0.1, 1.0, 0.5, 1e-4, 1e-8, 1e4)
        assert cfg.mu_exponent == 1.8
        assert cfg.tau_factor == 0.6
        assert cfg.max_total_iters == 1000

    def test_from_env(self):
        cfg = SolverConfig.from_env({"IPR_MU0": "0.5", "IPR_MAX_ITER": "40", "IPR_EPS": " "})
        assert cfg.mu0 == 0.5
        assert cfg.max_total_iters == 40
        assert isinstance(cfg.max_total_iters, int)
        assert cfg.eps == 1e-8

    def test_from_env_rejects_garbage(self):
        with pytest.raises(ConfigError, match="IPR_TAU0"):
            SolverConfig.from_env({"IPR_TAU0": "fast"})

    def test_overrides_ignore_none(self):
        cfg = SolverConfig().with_overrides(mu0=None, xi=3.0)
        assert cfg.mu0 == 0.1
        assert cfg.xi == 3.0

    def test_unknown_override(self):
        with pytest.raises(ConfigError, match="warp"):
            SolverConfig().with_overrides(warp=9)

    @pytest.mark.parametrize("overrides", [
        {"delta": 1.0},
        {"sigma": 0.5},
        {"xi": 1.0},
        {"mu0": 0.0},
        {"tau_factor": 1.2},
        {"max_total_iters": 0},
    ])
    def test_invalid_values(self, overrides):
        with pytest.raises(ConfigError):
            SolverConfig(**overrides)


class TestReferenceResults:
    def test_every_entry_has_value_and_count(self):
        for name, entry in REFERENCE_RESULTS["problems"].items():
            assert "f" in entry and "iter" in entry, name

    def test_lookup_is_case_insensitive(self):
        assert reference_for("hs43")["f"] == pytest.approx(-44.0)
        assert reference_for("tp3")["status"] == "InfeasibleStationary"

    def test_missing(self):
        assert reference_for("HS999") is None
