"""
Relaxation transform and the quantities of the barrier relaxation problem.

For fixed mu, tau > 0 the pair (z, y) solves z*y = tau*mu, z - y = t - tau*s with z, y > 0.
The iterate v = (x, t, s) needs no sign condition on t or s.

    F(v) = f(x) - mu * sum(ln z)
    C(v) = (h(x), c(x) + t, z - t)
"""
import logging
from typing import NamedTuple, Optional, Tuple

import numpy as np

from src.errors import NonFiniteEvaluation
from src.models import BarrierParams

logger = logging.getLogger(__name__)

__all__ = [
    "eval_zy",
    "eval_zy_derivatives",
    "eval_zy_mu_derivative",
    "ZyDerivatives",
    "RelaxPoint",
    "eval_F",
    "eval_C",
    "eval_gradF",
    "eval_jacC",
    "QOperator",
    "assemble_Q",
    "ScalingR",
    "scaling_R",
]

# materializing Q is only allowed for small systems
DENSE_Q_LIMIT = 200


# ---------- z, y ----------
def eval_zy(t, s, bp: BarrierParams) -> Tuple[np.ndarray, np.ndarray]:
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    tm = bp.tau * bp.mu
    w = bp.tau * s - t
    larger = 0.5 * (np.hypot(w, 2.0 * np.sqrt(tm)) + np.abs(w))
    smaller = tm / larger
    z = np.where(w <= 0.0, larger, smaller)
    y = np.where(w <= 0.0, smaller, larger)
    return z, y


class ZyDerivatives(NamedTuple):
    """Diagonals of the four Jacobian blocks; all cross terms are zero."""
    dz_dt: np.ndarray
    dy_dt: np.ndarray
    dz_ds: np.ndarray
    dy_ds: np.ndarray


def eval_zy_derivatives(z, y, bp: BarrierParams) -> ZyDerivatives:
    z = np.asarray(z, dtype=float)
    y = np.asarray(y, dtype=float)
    zy = z + y
    return ZyDerivatives(
        dz_dt=z / zy,
        dy_dt=-y / zy,
        dz_ds=-bp.tau * z / zy,
        dy_ds=bp.tau * y / zy,
    )


def eval_zy_mu_derivative(z, y, bp: BarrierParams) -> np.ndarray:
    """dz/dmu = dy/dmu = tau / (z + y)."""
    return bp.tau / (np.asarray(z, dtype=float) + np.asarray(y, dtype=float))


# ---------- Evaluation cache ----------
class _XEval:
    """Lazily evaluated problem data at one x; shared by points that differ only in t, s or (mu, tau)."""

    def __init__(self, problem, x: np.ndarray):
        self.problem = problem
        self.x = x
        self._cache = {}

    def _get(self, key: str, evaluator: str):
        if key not in self._cache:
            value = getattr(self.problem, evaluator)(self.x)
            if not np.all(np.isfinite(value)):
                raise NonFiniteEvaluation(evaluator, self.x)
            self._cache[key] = value
        return self._cache[key]

    @property
    def f(self) -> float:
        return self._get("f", "eval_f")

    @property
    def grad_f(self) -> np.ndarray:
        return self._get("grad_f", "eval_grad_f")

    @property
    def h(self) -> np.ndarray:
        return self._get("h", "eval_h")

    @property
    def c(self) -> np.ndarray:
        return self._get("c", "eval_c")

    @property
    def jac_h(self) -> np.ndarray:
        return self._get("jac_h", "eval_jac_h")

    @property
    def jac_c(self) -> np.ndarray:
        return self._get("jac_c", "eval_jac_c")


# ---------- RelaxPoint ----------
class RelaxPoint:
    """The extended iterate v = (x, t, s) with cached z, y, F, C and their derivatives."""

    def __init__(self, problem, x, t, s, bp: BarrierParams, _xeval: Optional[_XEval] = None):
        self.problem = problem
        self.x = np.array(x, dtype=float)
        self.t = np.array(t, dtype=float)
        self.s = np.array(s, dtype=float)
        if self.x.shape != (problem.n,) or self.t.shape != (problem.m,) or self.s.shape != (problem.m,):
            raise ValueError(
                f"point shapes x{self.x.shape} t{self.t.shape} s{self.s.shape} "
                f"do not match n={problem.n}, m={problem.m}"
            )
        self.bp = bp
        self.xeval = _xeval if _xeval is not None else _XEval(problem, self.x)
        self.z, self.y = eval_zy(self.t, self.s, bp)
        self._F = None
        self._C = None
        self._gradF = None
        self._jacC = None

    @property
    def n(self) -> int:
        return self.problem.n

    @property
    def m_e(self) -> int:
        return self.problem.m_e

    @property
    def m(self) -> int:
        return self.problem.m

    @property
    def v(self) -> np.ndarray:
        return np.concatenate([self.x, self.t, self.s])

    # ---------- Derived points ----------
    def with_s(self, s) -> "RelaxPoint":
        return RelaxPoint(self.problem, self.x, self.t, s, self.bp, _xeval=self.xeval)

    def with_params(self, bp: BarrierParams) -> "RelaxPoint":
        if bp == self.bp:
            return self
        return RelaxPoint(self.problem, self.x, self.t, self.s, bp, _xeval=self.xeval)

    def moved(self, d: np.ndarray, alpha: float = 1.0) -> "RelaxPoint":
        """v + alpha*d; x changes so problem data is re-evaluated on demand."""
        n, m = self.n, self.m
        return RelaxPoint(
            self.problem,
            self.x + alpha * d[:n],
            self.t + alpha * d[n:n + m],
            self.s + alpha * d[n + m:],
            self.bp,
        )

    # ---------- Relaxation quantities ----------
    @property
    def F(self) -> float:
        if self._F is None:
            barrier = np.sum(np.log(self.z)) if self.m else 0.0
            self._F = self.xeval.f - self.bp.mu * barrier
        return self._F

    @property
    def C(self) -> np.ndarray:
        if self._C is None:
            self._C = np.concatenate([self.xeval.h, self.xeval.c + self.t, self.z - self.t])
        return self._C

    @property
    def gradF(self) -> np.ndarray:
        if self._gradF is None:
            mu, tau = self.bp.mu, self.bp.tau
            zy = self.z + self.y
            self._gradF = np.concatenate([self.xeval.grad_f, -mu / zy, tau * mu / zy])
        return self._gradF

    @property
    def jacC(self) -> np.ndarray:
        if self._jacC is None:
            n, m_e, m = self.n, self.m_e, self.m
            zy = self.z + self.y
            J = np.zeros((n + 2 * m, m_e + 2 * m))
            J[:n, :m_e] = self.xeval.jac_h
            J[:n, m_e:m_e + m] = self.xeval.jac_c
            J[n:n + m, m_e:m_e + m] = np.eye(m)
            J[n:n + m, m_e + m:] = np.diag(-self.y / zy)
            J[n + m:, m_e + m:] = np.diag(-self.bp.tau * self.z / zy)
            self._jacC = J
        return self._jacC

    @property
    def f(self) -> float:
        return self.xeval.f

    def infeasibility(self) -> float:
        """||(h, max(0, c))|| of the original problem at x."""
        return float(np.linalg.norm(np.concatenate([self.xeval.h, np.maximum(0.0, self.xeval.c)])))

    def __repr__(self):
        return f"RelaxPoint(x={self.x!r}, t={self.t!r}, s={self.s!r}, mu={self.bp.mu:g}, tau={self.bp.tau:g})"


def _at(rp: RelaxPoint, bp: Optional[BarrierParams]) -> RelaxPoint:
    return rp if bp is None else rp.with_params(bp)


def eval_F(rp: RelaxPoint, bp: Optional[BarrierParams] = None) -> float:
    return _at(rp, bp).F


def eval_C(rp: RelaxPoint, bp: Optional[BarrierParams] = None) -> np.ndarray:
    return _at(rp, bp).C


def eval_gradF(rp: RelaxPoint, bp: Optional[BarrierParams] = None) -> np.ndarray:
    return _at(rp, bp).gradF


def eval_jacC(rp: RelaxPoint, bp: Optional[BarrierParams] = None) -> np.ndarray:
    return _at(rp, bp).jacC


# ---------- Q ----------
class QOperator:
    """
    Model Hessian: B on the x-block plus sum_j w_j (e_tj - tau e_sj)(e_tj - tau e_sj)^T,
    w_j = mu / (z_j + y_j)^2.
    """

    def __init__(self, B: np.ndarray, weights: np.ndarray, tau: float):
        self.B = B
        self.weights = weights
        self.tau = tau
        self.n = B.shape[0]
        self.m = weights.size

    @property
    def size(self) -> int:
        return self.n + 2 * self.m

    def _split(self, d):
        n, m = self.n, self.m
        return d[:n], d[n:n + m], d[n + m:]

    def matvec(self, d: np.ndarray) -> np.ndarray:
        dx, dt, ds = self._split(d)
        u = self.weights * (dt - self.tau * ds)
        return np.concatenate([self.B @ dx, u, -self.tau * u])

    def quad(self, d: np.ndarray) -> float:
        dx, dt, ds = self._split(d)
        return float(dx @ self.B @ dx + np.sum(self.weights * (dt - self.tau * ds) ** 2))

    def to_dense(self) -> np.ndarray:
        if self.size > DENSE_Q_LIMIT:
            raise ValueError(f"refusing to materialize Q of size {self.size} (limit {DENSE_Q_LIMIT})")
        n, m, tau = self.n, self.m, self.tau
        Q = np.zeros((self.size, self.size))
        Q[:n, :n] = self.B
        W = np.diag(self.weights)
        Q[n:n + m, n:n + m] = W
        Q[n:n + m, n + m:] = -tau * W
        Q[n + m:, n:n + m] = -tau * W
        Q[n + m:, n + m:] = tau * tau * W
        return Q


def assemble_Q(B: np.ndarray, rp: RelaxPoint, bp: Optional[BarrierParams] = None) -> QOperator:
    rp = _at(rp, bp)
    weights = rp.bp.mu / (rp.z + rp.y) ** 2
    return QOperator(np.asarray(B, dtype=float), weights, rp.bp.tau)


# ---------- R ----------
class ScalingR:
    """R = diag(1 (n+m times), tau (m times))."""

    def __init__(self, tau: float, n: int, m: int):
        self.diag = np.concatenate([np.ones(n + m), np.full(m, float(tau))])

    def apply(self, v: np.ndarray) -> np.ndarray:
        return self.diag * v

    def apply_inv(self, v: np.ndarray) -> np.ndarray:
        return v / self.diag

    def apply_inv2(self, v: np.ndarray) -> np.ndarray:
        return v / self.diag ** 2

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diag)


def scaling_R(bp: BarrierParams, n: int, m: int) -> ScalingR:
    return ScalingR(bp.tau, n, m)
