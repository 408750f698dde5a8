"""
Merit function phi(v; rho) = rho*F(v) + ||C(v)||, penalty update, backtracking and the dual safeguard.
"""
import logging
from typing import List, NamedTuple, Tuple

import numpy as np

from src.errors import LineSearchFailure, TinyPenaltyError
from src.models import NormalStepResult
from src.relaxation import QOperator, RelaxPoint, ScalingR
from src.steps import cauchy_data, constraint_decrease

logger = logging.getLogger(__name__)

__all__ = [
    "eval_merit",
    "eval_pi",
    "penalty_conditions",
    "update_penalty",
    "LineSearchResult",
    "line_search",
    "dual_safeguard",
]


def eval_merit(rp: RelaxPoint, rho: float) -> float:
    return rho * rp.F + float(np.linalg.norm(rp.C))


def eval_pi(rp: RelaxPoint, rho: float, d: np.ndarray) -> Tuple[float, float]:
    """(pi, chi): chi = ||C + grad C'd|| - ||C||, pi = rho*grad F'd + chi."""
    chi = -constraint_decrease(rp.C, rp.jacC.T @ d)
    return rho * float(rp.gradF @ d) + chi, chi


def penalty_conditions(rp: RelaxPoint, Q: QOperator, R: ScalingR, p: np.ndarray, d: np.ndarray,
                       rho: float, delta: float) -> Tuple[bool, bool]:
    """Whether rho passes the curvature gate on the Cauchy direction and the model-decrease test on d."""
    cn = float(np.linalg.norm(rp.C))
    if cn == 0.0:
        gate = True
    else:
        u, rjc = cauchy_data(rp, R)
        gate = rjc == 0.0 or 2.0 * rho * cn * Q.quad(u) / rjc ** 2 <= 1.0

    pi, chi = eval_pi(rp, rho, d)
    dqd = Q.quad(d)
    # q^N(p; rho) - ||C||
    model_change = 0.5 * rho * Q.quad(p) - constraint_decrease(rp.C, rp.jacC.T @ p)
    bound = (1.0 - delta) * model_change - 0.5 * rho * dqd
    # relative slack only: pi must be strictly negative
    tol = 1e-12 * max(abs(bound), abs(chi), rho * abs(float(rp.gradF @ d)))
    return gate, pi < 0.0 and pi <= bound + tol


def update_penalty(prev_rho: float, rp: RelaxPoint, Q: QOperator, R: ScalingR,
                   normal: NormalStepResult, d: np.ndarray, delta: float, rho_min: float = 1e-16) -> float:
    rho = prev_rho
    halvings = 0
    while True:
        gate, decrease = penalty_conditions(rp, Q, R, normal.p, d, rho, delta)
        if gate and decrease:
            if halvings:
                logger.debug("penalty halved %d time(s): %.3e -> %.3e", halvings, prev_rho, rho)
            return rho
        rho *= 0.5
        halvings += 1
        if rho < rho_min:
            raise TinyPenaltyError(
                f"penalty parameter fell below {rho_min:g}",
                {"prev_rho": prev_rho, "halvings": halvings, "norm_C": float(np.linalg.norm(rp.C))},
            )


class LineSearchResult(NamedTuple):
    alpha: float
    point: RelaxPoint
    phi: float
    trace: List[Tuple[float, float]]


def line_search(rp: RelaxPoint, rho: float, d: np.ndarray, pi: float, sigma: float, delta: float,
                max_backtracks: int = 60) -> LineSearchResult:
    """Largest alpha in {1, delta, delta^2, ...} with phi(v + alpha d) - phi(v) <= sigma*alpha*pi."""
    phi0 = eval_merit(rp, rho)
    if not pi < 0.0:
        raise LineSearchFailure(
            f"no descent predicted along d (pi={pi:.3e})",
            [],
            {"phi0": phi0, "pi": pi, "rho": rho, "norm_d": float(np.linalg.norm(d))},
        )

    trace: List[Tuple[float, float]] = []
    alpha = 1.0
    for _ in range(max_backtracks + 1):
        trial = rp.moved(d, alpha)
        try:
            phi = eval_merit(trial, rho)
        except ArithmeticError:
            phi = float("inf")
        trace.append((alpha, phi))
        if np.isfinite(phi) and phi - phi0 <= sigma * alpha * pi:
            return LineSearchResult(alpha, trial, phi, trace)
        alpha *= delta
    raise LineSearchFailure(
        f"no sufficient decrease after {max_backtracks} backtracks (pi={pi:.3e})",
        trace,
        {"phi0": phi0, "pi": pi, "rho": rho, "norm_d": float(np.linalg.norm(d))},
    )


def dual_safeguard(t_next, s_hat, mu: float) -> np.ndarray:
    """s_j = min(s_hat_j, mu / t_j) where t_j > 0, else s_hat_j."""
    t_next = np.asarray(t_next, dtype=float)
    s_hat = np.asarray(s_hat, dtype=float)
    positive = t_next > 0.0
    cap = np.divide(mu, t_next, out=np.full_like(t_next, np.inf), where=positive)
    return np.where(positive, np.minimum(s_hat, cap), s_hat)
