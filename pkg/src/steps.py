"""
Normal and tangential steps of one inner iteration.

Normal step p: approximately minimizes
    q^N(d; rho) = 0.5*rho*d'Qd + ||C + grad C' d||   s.t.  ||R d|| <= xi * ||R^-1 grad C C||
starting from the scaled Cauchy point.

Tangential step d: minimizes q(d) = grad F'd + 0.5*d'Qd  s.t.  grad C'(d - p) = 0,
solved by eliminating the (t, s) blocks and factoring the reduced KKT system in x.
"""
import logging

import numpy as np
from scipy import linalg
from scipy.optimize import minimize_scalar

from src.errors import DegenerateNormalStep, KktFactorizationError
from src.models import Multipliers, NormalStepResult, TangentialStepResult
from src.relaxation import QOperator, RelaxPoint, ScalingR

logger = logging.getLogger(__name__)

__all__ = ["normal_model", "constraint_decrease", "cauchy_data", "normal_step", "tangential_step",
           "solve_reduced_kkt"]


def constraint_decrease(C: np.ndarray, e: np.ndarray) -> float:
    """||C|| - ||C + e||, computed without cancellation when e is small relative to C."""
    base = float(np.linalg.norm(C))
    moved = float(np.linalg.norm(C + e))
    denom = base + moved
    if denom == 0.0:
        return 0.0
    return -(2.0 * float(C @ e) + float(e @ e)) / denom


def normal_model(rp: RelaxPoint, Q: QOperator, p: np.ndarray, rho: float) -> float:
    """q^N(p; rho)."""
    return 0.5 * rho * Q.quad(p) + float(np.linalg.norm(rp.C + rp.jacC.T @ p))


def cauchy_data(rp: RelaxPoint, R: ScalingR):
    """(u, ||R^-1 grad C C||) with u = R^-2 grad C C, the scaled steepest-descent direction."""
    g = rp.jacC @ rp.C
    return R.apply_inv2(g), float(np.linalg.norm(R.apply_inv(g)))


def _to_boundary(R: ScalingR, start: np.ndarray, end: np.ndarray, radius: float) -> np.ndarray:
    # largest theta in [0, 1] with ||R(start + theta (end - start))|| <= radius
    a_vec = R.apply(start)
    b_vec = R.apply(end - start)
    a = float(b_vec @ b_vec)
    if a == 0.0:
        return start
    b = 2.0 * float(a_vec @ b_vec)
    c = float(a_vec @ a_vec) - radius ** 2
    disc = max(b * b - 4.0 * a * c, 0.0)
    theta = (-b + np.sqrt(disc)) / (2.0 * a)
    return start + min(max(theta, 0.0), 1.0) * (end - start)


def normal_step(rp: RelaxPoint, Q: QOperator, R: ScalingR, rho: float, xi: float) -> NormalStepResult:
    dim = rp.n + 2 * rp.m
    C = rp.C
    cn = float(np.linalg.norm(C))
    if cn == 0.0:
        return NormalStepResult(np.zeros(dim), 0.0, 0.0, 0.0, 0.0)

    J = rp.jacC
    u, rjc = cauchy_data(rp, R)
    ju = float(np.linalg.norm(J.T @ u))
    if rjc == 0.0 or ju == 0.0:
        raise DegenerateNormalStep(f"R^-1 grad C C vanished with ||C|| = {cn:.3e}")

    eta = rjc ** 2 / ju ** 2
    radius = xi * rjc
    a_cauchy = min(1.0, eta)

    def reduction(p):
        # ||C|| - q^N(p; rho)
        return constraint_decrease(C, J.T @ p) - 0.5 * rho * Q.quad(p)

    candidates = [-a_cauchy * u]

    # best multiple of u inside the trust region (||R u|| = rjc, so alpha <= xi)
    res = minimize_scalar(lambda a: -reduction(-a * u), bounds=(0.0, xi), method="bounded",
                          options={"xatol": 1e-10 * max(1.0, xi)})
    if res.success:
        candidates.append(-float(res.x) * u)

    # Gauss-Newton: minimum R-norm solution of C + grad C' d = 0
    e, *_ = np.linalg.lstsq(J.T / R.diag, -C, rcond=None)
    d_gn = R.apply_inv(e)
    e_norm = float(np.linalg.norm(e))
    if np.all(np.isfinite(d_gn)) and e_norm > 0.0:
        if e_norm <= radius:
            candidates.append(d_gn)
        else:
            candidates.append(_to_boundary(R, candidates[0], d_gn, radius))
        # best multiple of the Gauss-Newton step inside the trust region
        top = min(1.0, radius / e_norm)
        res = minimize_scalar(lambda a: -reduction(a * d_gn), bounds=(0.0, top), method="bounded",
                              options={"xatol": 1e-10})
        if res.success:
            candidates.append(float(res.x) * d_gn)

    reductions = [reduction(p) for p in candidates]
    best = int(np.argmax(reductions))
    p = candidates[best]

    uqu = Q.quad(u)
    cauchy_reduction = 0.5 * a_cauchy * rjc ** 2 / cn ** 2 * (cn - rho * cn ** 2 * uqu / rjc ** 2)
    logger.debug("normal step: ||C||=%.3e eta=%.3e candidate=%d reduction=%.6e",
                 cn, eta, best, reductions[best])
    return NormalStepResult(
        p=p,
        model_reduction=reductions[best],
        eta=eta,
        cauchy_reduction=cauchy_reduction,
        radius=radius,
    )


# ---------- Tangential step ----------
def _inertia(K: np.ndarray):
    _, D, _ = linalg.ldl(K)
    eig = np.linalg.eigvalsh(D)
    tol = 1e-13 * max(1.0, float(np.max(np.abs(eig))) if eig.size else 1.0)
    return int(np.sum(eig > tol)), int(np.sum(eig < -tol)), int(np.sum(np.abs(eig) <= tol))


def solve_reduced_kkt(H: np.ndarray, A: np.ndarray, rhs: np.ndarray, max_doublings: int, scale: float):
    """
    Solve [H + dI, A; A', -dI][e; lam] = [rhs; 0], raising d from 0 until the
    matrix has inertia (n, m_e, 0). Returns (e, lam, d).
    """
    n, m_e = A.shape
    reg = 0.0
    first = 1e-8 * max(1.0, scale)
    for attempt in range(max_doublings + 2):
        K = np.zeros((n + m_e, n + m_e))
        K[:n, :n] = H + reg * np.eye(n)
        K[:n, n:] = A
        K[n:, :n] = A.T
        K[n:, n:] = -reg * np.eye(m_e)
        if np.all(np.isfinite(K)):
            pos, neg, zero = _inertia(K)
            if pos == n and neg == m_e and zero == 0:
                sol = linalg.solve(K, np.concatenate([rhs, np.zeros(m_e)]), assume_a="sym")
                if reg > 0.0:
                    logger.debug("reduced KKT regularized with %.3e", reg)
                return sol[:n], sol[n:], reg
        reg = first if attempt == 0 else 2.0 * reg
    raise KktFactorizationError(
        f"reduced KKT matrix has wrong inertia after {max_doublings} regularization doublings",
        {"last_regularization": reg / 2.0, "n": n, "m_e": m_e},
    )


def tangential_step(rp: RelaxPoint, Q: QOperator, p: np.ndarray, max_doublings: int = 20) -> TangentialStepResult:
    n, m = rp.n, rp.m
    mu, tau = rp.bp.mu, rp.bp.tau
    z, y = rp.z, rp.y
    zy = z + y
    B = Q.B
    jac_h = rp.xeval.jac_h
    jac_c = rp.xeval.jac_c
    grad_f = rp.xeval.grad_f

    p_x, p_t, p_s = p[:n], p[n:n + m], p[n + m:]
    w0 = p_t - tau * p_s

    H = B + (jac_c * (mu / z ** 2)) @ jac_c.T
    g = grad_f + B @ p_x + jac_c @ (mu / z - mu * w0 / (zy * z))
    e, lam, reg = solve_reduced_kkt(H, jac_h, -g, max_doublings, float(np.linalg.norm(B, 2)))

    a = jac_c.T @ e
    d_x = p_x + e
    d_t = p_t - a
    d_s = p_s + (y / (tau * z)) * a
    d = np.concatenate([d_x, d_t, d_s])

    dd = d_t - tau * d_s
    nu = mu / z - mu * dd / (zy * z)
    multipliers = Multipliers(lam=lam, beta=nu.copy(), nu=nu)
    q_value = float(rp.gradF @ d + 0.5 * Q.quad(d))
    return TangentialStepResult(d=d, multipliers=multipliers, q_value=q_value, regularization=reg)
