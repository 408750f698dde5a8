"""
Data models for barrier parameters, multipliers, step results, iteration records and solve reports.
"""
import math
from dataclasses import dataclass, asdict, field
from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np

__all__ = [
    "SolveStatus",
    "InnerExit",
    "BarrierParams",
    "Multipliers",
    "NormalStepResult",
    "TangentialStepResult",
    "MeritState",
    "IterationRecord",
    "SolveReport",
]


class SolveStatus(str, Enum):
    APPROX_KKT = "ApproxKKT"
    SINGULAR_STATIONARY = "SingularStationary"
    INFEASIBLE_STATIONARY = "InfeasibleStationary"
    ITERATION_LIMIT = "IterationLimit"
    STEP_FAILURE = "StepFailure"

    @property
    def exit_code(self) -> int:
        return _EXIT_CODES[self]


_EXIT_CODES = {
    SolveStatus.APPROX_KKT: 0,
    SolveStatus.SINGULAR_STATIONARY: 2,
    SolveStatus.INFEASIBLE_STATIONARY: 3,
    SolveStatus.ITERATION_LIMIT: 4,
    SolveStatus.STEP_FAILURE: 5,
}


class InnerExit(str, Enum):
    R_TEST = "r_test"
    G_TEST = "g_test"
    BUDGET = "budget"


@dataclass(frozen=True)
class BarrierParams:
    mu: float
    tau: float

    def __post_init__(self):
        if not (self.mu > 0 and self.tau > 0):
            raise ValueError(f"barrier parameters must be positive (mu={self.mu!r}, tau={self.tau!r})")


@dataclass
class Multipliers:
    lam: np.ndarray   # equalities h(x) = 0
    beta: np.ndarray  # c(x) + t = 0
    nu: np.ndarray    # z - t = 0

    def stacked(self) -> np.ndarray:
        return np.concatenate([self.lam, self.beta, self.nu])


@dataclass
class NormalStepResult:
    p: np.ndarray
    model_reduction: float   # ||C|| - q^N(p; rho)
    eta: float
    cauchy_reduction: float  # guaranteed lower bound on model_reduction
    radius: float            # xi * ||R^-1 grad C C||


@dataclass
class TangentialStepResult:
    d: np.ndarray
    multipliers: Multipliers
    q_value: float
    regularization: float = 0.0


@dataclass
class MeritState:
    rho: float
    phi: float
    pi: float
    chi: float


@dataclass
class IterationRecord:
    l: int
    f: float
    v: float
    r_inf: float
    g_inf: Optional[float]
    mu: Optional[float]
    tau: Optional[float]
    k: Optional[int]

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class SolveReport:
    problem: str
    status: SolveStatus
    x: np.ndarray
    t: np.ndarray
    s: np.ndarray
    lam: np.ndarray
    f: float
    infeasibility: float
    records: List[IterationRecord] = field(default_factory=list)
    nf: int = 0
    ng: int = 0
    iters: int = 0
    diagnostics: Dict[str, Any] = field(default_factory=dict)
    violations: List[str] = field(default_factory=list)
    message: str = ""

    @property
    def exit_code(self) -> int:
        return self.status.exit_code

    def to_dict(self) -> Dict[str, Any]:
        """JSON-ready view: {problem, status, iterations, final, counters, diagnostics}; non-finite floats become None."""
        return {
            "problem": self.problem,
            "status": self.status.value,
            "iterations": [_plain(r.to_dict()) for r in self.records],
            "final": {
                "x": _plain(self.x),
                "f": _plain(float(self.f)),
                "infeasibility": _plain(float(self.infeasibility)),
                "t": _plain(self.t),
                "s": _plain(self.s),
                "lambda": _plain(self.lam),
            },
            "counters": {"nf": self.nf, "ng": self.ng, "iters": self.iters},
            "diagnostics": _plain(self.diagnostics),
            "violations": list(self.violations),
            "message": self.message,
        }


def _plain(value):
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_plain(v) for v in value]
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value
