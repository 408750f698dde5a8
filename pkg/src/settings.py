"""
Configuration: env, paths, reference results (single source of truth) and solver parameters.
"""
import os
import json
from dataclasses import dataclass, fields, replace
from pathlib import Path

from dotenv import load_dotenv

from src.errors import ConfigError

load_dotenv()

# Paths relative to repo root (parent of src/)
REPO_ROOT = Path(__file__).resolve().parent.parent
REFERENCE_RESULTS_PATH = REPO_ROOT / "src" / "config" / "reference-results.json"
MODELS_DIR = REPO_ROOT / "models"


def _load_reference_results():
    with open(REFERENCE_RESULTS_PATH, encoding="utf-8") as f:
        return json.load(f)


REFERENCE_RESULTS = _load_reference_results()


def reference_for(name: str):
    """Published values (f, iter, nf, ng) for a catalog problem, or None."""
    return REFERENCE_RESULTS["problems"].get(name.upper())


class Config:
    LOG_LEVEL = os.getenv("IPR_LOG_LEVEL", "WARNING").upper()

    # Run history
    DB_PATH = os.getenv("IPR_DB_PATH", "iprelax_runs.db")
    if not os.path.isabs(DB_PATH):
        DB_PATH = str(REPO_ROOT / DB_PATH)
    RECORD_RUNS = os.getenv("IPR_RECORD_RUNS", "false").lower() == "true"

    # Output
    DEFAULT_FORMAT = os.getenv("IPR_FORMAT", "table").lower()
    BATCH_WORKERS = int(os.getenv("IPR_BATCH_WORKERS", "4"))


# env var -> SolverConfig field
_ENV_FIELDS = {
    "IPR_MU0": "mu0",
    "IPR_TAU0": "tau0",
    "IPR_DELTA": "delta",
    "IPR_SIGMA": "sigma",
    "IPR_EPS": "eps",
    "IPR_XI": "xi",
    "IPR_MU_EXPONENT": "mu_exponent",
    "IPR_TAU_FACTOR": "tau_factor",
    "IPR_MAX_ITER": "max_total_iters",
    "IPR_MAX_BACKTRACKS": "max_backtracks",
}


@dataclass(frozen=True)
class SolverConfig:
    mu0: float = 0.1
    tau0: float = 1.0
    delta: float = 0.5
    sigma: float = 1e-4
    eps: float = 1e-8
    xi: float = 1e4
    mu_accept_factor: float = 10.0  # r-test gate: ||r||_inf <= 10 mu
    mu_exponent: float = 1.8
    mu_halve: float = 0.5
    tau_factor: float = 0.6
    g_floor: float = 1e-14  # g-test skipped when ||C|| is below this
    max_total_iters: int = 1000
    max_backtracks: int = 60
    mu_floor: float = 1e-9
    tau_floor: float = 1e-9
    rho_min: float = 1e-16
    max_reg_doublings: int = 20
    bfgs_damping: float = 0.2
    bfgs_gamma: float = 1e-8
    fj_weight_tol: float = 1e-3
    monitor: bool = False

    def __post_init__(self):
        positive = (
            "mu0", "tau0", "eps", "mu_accept_factor", "mu_exponent", "mu_halve",
            "tau_factor", "g_floor", "max_total_iters", "max_backtracks",
            "mu_floor", "tau_floor", "rho_min", "bfgs_gamma", "fj_weight_tol",
        )
        for name in positive:
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)!r}")
        if not 0.0 < self.delta < 1.0:
            raise ConfigError(f"delta must lie in (0, 1), got {self.delta!r}")
        if not 0.0 < self.sigma < 0.5:
            raise ConfigError(f"sigma must lie in (0, 1/2), got {self.sigma!r}")
        if not self.xi > 1.0:
            raise ConfigError(f"xi must exceed 1, got {self.xi!r}")
        if not 0.0 < self.mu_halve < 1.0 or not 0.0 < self.tau_factor < 1.0:
            raise ConfigError("mu_halve and tau_factor must lie in (0, 1)")
        if not 0.0 < self.bfgs_damping < 1.0:
            raise ConfigError(f"bfgs_damping must lie in (0, 1), got {self.bfgs_damping!r}")
        if self.max_reg_doublings < 0:
            raise ConfigError("max_reg_doublings must be non-negative")

    @classmethod
    def from_env(cls, environ=None) -> "SolverConfig":
        environ = os.environ if environ is None else environ
        types = {f.name: f.type for f in fields(cls)}
        values = {}
        for var, name in _ENV_FIELDS.items():
            raw = environ.get(var, "").strip()
            if not raw:
                continue
            try:
                values[name] = int(raw) if types[name] in (int, "int") else float(raw)
            except ValueError as exc:
                raise ConfigError(f"{var}={raw!r} is not a number") from exc
        return cls(**values)

    def with_overrides(self, **overrides) -> "SolverConfig":
        """Copy with the given fields replaced; None values are ignored."""
        known = {f.name for f in fields(self)}
        unknown = set(overrides) - known
        if unknown:
            raise ConfigError(f"unknown solver parameter(s): {', '.join(sorted(unknown))}")
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})
