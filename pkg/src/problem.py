"""
Smooth NLP interface: min f(x) s.t. h(x) = 0, c(x) <= 0, with gradient access.

Jacobians follow the column convention used throughout the solver:
jac_h(x) is n x m_e with columns grad h_i, jac_c(x) is n x m with columns grad c_j.
"""
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from src.errors import DerivativeCheckError, ProblemShapeError

__all__ = ["ProblemModel", "EvaluationCounter", "DerivativeReport", "check_derivatives"]

Vector = np.ndarray


@dataclass(frozen=True, eq=False)
class ProblemModel:
    name: str
    n: int
    m_e: int
    m: int
    f: Callable[[Vector], float]
    grad_f: Callable[[Vector], Vector]
    h: Optional[Callable[[Vector], Vector]] = None
    jac_h: Optional[Callable[[Vector], np.ndarray]] = None
    c: Optional[Callable[[Vector], Vector]] = None
    jac_c: Optional[Callable[[Vector], np.ndarray]] = None
    standard_start: Vector = field(default=None)
    description: str = ""

    def __post_init__(self):
        if self.n <= 0 or self.m_e < 0 or self.m < 0:
            raise ProblemShapeError(f"{self.name}: invalid sizes n={self.n}, m_e={self.m_e}, m={self.m}")
        if self.m_e and (self.h is None or self.jac_h is None):
            raise ProblemShapeError(f"{self.name}: m_e={self.m_e} but h/jac_h missing")
        if self.m and (self.c is None or self.jac_c is None):
            raise ProblemShapeError(f"{self.name}: m={self.m} but c/jac_c missing")
        start = np.zeros(self.n) if self.standard_start is None else np.array(self.standard_start, dtype=float)
        if start.shape != (self.n,):
            raise ProblemShapeError(f"{self.name}: standard start has shape {start.shape}, expected ({self.n},)")
        object.__setattr__(self, "standard_start", start)

    def eval_f(self, x: Vector) -> float:
        return float(self.f(x))

    def eval_grad_f(self, x: Vector) -> Vector:
        return self._vector(self.grad_f(x), self.n, "grad_f")

    def eval_h(self, x: Vector) -> Vector:
        if not self.m_e:
            return np.zeros(0)
        return self._vector(self.h(x), self.m_e, "h")

    def eval_c(self, x: Vector) -> Vector:
        if not self.m:
            return np.zeros(0)
        return self._vector(self.c(x), self.m, "c")

    def eval_jac_h(self, x: Vector) -> np.ndarray:
        if not self.m_e:
            return np.zeros((self.n, 0))
        return self._matrix(self.jac_h(x), self.m_e, "jac_h")

    def eval_jac_c(self, x: Vector) -> np.ndarray:
        if not self.m:
            return np.zeros((self.n, 0))
        return self._matrix(self.jac_c(x), self.m, "jac_c")

    def _vector(self, value, size: int, what: str) -> Vector:
        arr = np.asarray(value, dtype=float).reshape(-1)
        if arr.shape != (size,):
            raise ProblemShapeError(f"{self.name}: {what} has length {arr.size}, expected {size}")
        return arr

    def _matrix(self, value, cols: int, what: str) -> np.ndarray:
        arr = np.asarray(value, dtype=float)
        if arr.shape != (self.n, cols):
            raise ProblemShapeError(f"{self.name}: {what} has shape {arr.shape}, expected ({self.n}, {cols})")
        return arr


class EvaluationCounter:
    """Wraps a ProblemModel and counts objective (nf) and gradient (ng) evaluations."""

    def __init__(self, problem: ProblemModel):
        self.problem = problem
        self.nf = 0
        self.ng = 0

    def __getattr__(self, name):
        # sizes, name, standard_start ...
        return getattr(self.problem, name)

    def eval_f(self, x: Vector) -> float:
        self.nf += 1
        return self.problem.eval_f(x)

    def eval_grad_f(self, x: Vector) -> Vector:
        self.ng += 1
        return self.problem.eval_grad_f(x)

    def eval_h(self, x):
        return self.problem.eval_h(x)

    def eval_c(self, x):
        return self.problem.eval_c(x)

    def eval_jac_h(self, x):
        return self.problem.eval_jac_h(x)

    def eval_jac_c(self, x):
        return self.problem.eval_jac_c(x)


@dataclass
class DerivativeReport:
    grad_f: float
    jac_h: float
    jac_c: float

    @property
    def worst(self) -> float:
        return max(self.grad_f, self.jac_h, self.jac_c)

    def passed(self, tol: float = 1e-5) -> bool:
        return self.worst <= tol

    def to_dict(self):
        return {"grad_f": self.grad_f, "jac_h": self.jac_h, "jac_c": self.jac_c}


def _relative_error(analytic: np.ndarray, approx: np.ndarray) -> float:
    if analytic.size == 0:
        return 0.0
    denom = np.maximum(1.0, np.abs(analytic))
    return float(np.max(np.abs(analytic - approx) / denom))


def _probe(fn, x, evaluator: str) -> np.ndarray:
    value = np.atleast_1d(np.asarray(fn(x), dtype=float))
    if not np.all(np.isfinite(value)):
        raise DerivativeCheckError(evaluator, x)
    return value


def check_derivatives(p: ProblemModel, x, h_step: float = 1e-6) -> DerivativeReport:
    """Compare analytic derivatives against central differences at x."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("probe point must be finite")
    if not h_step > 0:
        raise ValueError("h_step must be positive")

    fd_grad = np.zeros(p.n)
    fd_jh = np.zeros((p.n, p.m_e))
    fd_jc = np.zeros((p.n, p.m))
    for i in range(p.n):
        xp = x.copy()
        xm = x.copy()
        xp[i] += h_step
        xm[i] -= h_step
        fd_grad[i] = (_probe(p.eval_f, xp, "eval_f")[0] - _probe(p.eval_f, xm, "eval_f")[0]) / (2 * h_step)
        if p.m_e:
            fd_jh[i, :] = (_probe(p.eval_h, xp, "eval_h") - _probe(p.eval_h, xm, "eval_h")) / (2 * h_step)
        if p.m:
            fd_jc[i, :] = (_probe(p.eval_c, xp, "eval_c") - _probe(p.eval_c, xm, "eval_c")) / (2 * h_step)

    return DerivativeReport(
        grad_f=_relative_error(_probe(p.eval_grad_f, x, "eval_grad_f"), fd_grad),
        jac_h=_relative_error(p.eval_jac_h(x), fd_jh),
        jac_c=_relative_error(p.eval_jac_c(x), fd_jc),
    )
