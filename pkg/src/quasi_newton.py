"""
Powell-damped BFGS approximation of the x-block Lagrangian Hessian.
"""
import logging
from dataclasses import dataclass, replace

import numpy as np

logger = logging.getLogger(__name__)

__all__ = ["BfgsState", "damped_bfgs_update", "lagrangian_gradient"]


@dataclass(frozen=True)
class BfgsState:
    B: np.ndarray
    damping_threshold: float = 0.2
    gamma: float = 1e-8
    updates: int = 0
    skipped: int = 0

    @classmethod
    def identity(cls, n: int, damping_threshold: float = 0.2, gamma: float = 1e-8) -> "BfgsState":
        return cls(np.eye(n), damping_threshold, gamma)


def lagrangian_gradient(grad_f, jac_h, jac_c, lam, beta) -> np.ndarray:
    """grad f + grad h lam + grad c beta."""
    return grad_f + jac_h @ lam + jac_c @ beta


def damped_bfgs_update(state: BfgsState, step, grad_diff) -> BfgsState:
    s = np.asarray(step, dtype=float)
    q = np.asarray(grad_diff, dtype=float)
    B = state.B
    Bs = B @ s
    b = float(s @ Bs)
    if np.linalg.norm(s) <= 1e-14 or b <= 1e-16 or not np.all(np.isfinite(q)):
        return replace(state, skipped=state.skipped + 1)

    sq = float(s @ q)
    if sq >= state.damping_threshold * b:
        theta = 1.0
    else:
        theta = (1.0 - state.damping_threshold) * b / (b - sq)
    r = theta * q + (1.0 - theta) * Bs
    sr = float(s @ r)

    B_new = B - np.outer(Bs, Bs) / b + np.outer(r, r) / sr
    B_new = 0.5 * (B_new + B_new.T)

    floor = state.gamma * max(1.0, float(np.linalg.norm(B_new, 2)))
    if not np.all(np.isfinite(B_new)) or np.linalg.eigvalsh(B_new)[0] < floor:
        logger.debug("BFGS update rejected: result not safely positive definite")
        return replace(state, skipped=state.skipped + 1)
    if theta < 1.0:
        logger.debug("BFGS update damped (theta=%.3f)", theta)
    return replace(state, B=B_new, updates=state.updates + 1)
