"""
Driver: initialization, residual tests, inner loop, outer parameter updates and classification.
Run with: python -m src.cli solve TP1
"""
import logging
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Tuple

import numpy as np

from src.errors import DegenerateNormalStep, LineSearchFailure, NonFiniteEvaluation, StalledStep, StepFailure
from src.merit import dual_safeguard, eval_merit, eval_pi, line_search, update_penalty
from src.models import (
    BarrierParams,
    InnerExit,
    IterationRecord,
    MeritState,
    Multipliers,
    SolveReport,
    SolveStatus,
)
from src.problem import EvaluationCounter, ProblemModel
from src.quasi_newton import BfgsState, damped_bfgs_update, lagrangian_gradient
from src.relaxation import RelaxPoint, assemble_Q, scaling_R
from src.settings import SolverConfig
from src.steps import normal_step, tangential_step

logger = logging.getLogger(__name__)

__all__ = [
    "InvariantMonitor",
    "InitialState",
    "InnerResult",
    "initialize",
    "residual_r",
    "residual_g",
    "inner_solve",
    "outer_solve",
    "classify",
    "update_parameters",
    "solve",
]


# ---------- Instrumented run mode ----------
class InvariantMonitor:
    """Collects violations of the per-step guarantees when enabled; a no-op otherwise."""

    def __init__(self, enabled: bool = False):
        self.enabled = enabled
        self.violations: List[str] = []
        self.checks = 0

    def _fail(self, message: str):
        logger.warning("invariant violated: %s", message)
        self.violations.append(message)

    def normal_step(self, where: str, R, normal):
        if not self.enabled:
            return
        self.checks += 1
        if np.linalg.norm(R.apply(normal.p)) > normal.radius + 1e-10:
            self._fail(f"{where}: normal step leaves the trust region")
        if normal.model_reduction < normal.cauchy_reduction - 1e-12:
            self._fail(f"{where}: normal step below Cauchy decrease "
                       f"({normal.model_reduction:.3e} < {normal.cauchy_reduction:.3e})")

    def penalty(self, where: str, prev_rho: float, rho: float):
        if not self.enabled:
            return
        self.checks += 1
        if rho > prev_rho:
            self._fail(f"{where}: penalty increased {prev_rho:.3e} -> {rho:.3e}")

    def step(self, where: str, phi0: float, phi_trial: float, phi_safe: float, alpha: float, pi: float, sigma: float):
        if not self.enabled:
            return
        self.checks += 1
        if not alpha > 0.0:
            self._fail(f"{where}: accepted step length {alpha!r}")
        if not phi_trial - phi0 <= sigma * alpha * pi < 0.0:
            self._fail(f"{where}: sufficient decrease failed (dphi={phi_trial - phi0:.3e}, "
                       f"sigma*alpha*pi={sigma * alpha * pi:.3e})")
        if not phi_safe < phi0:
            self._fail(f"{where}: merit did not decrease ({phi0:.6e} -> {phi_safe:.6e})")

    def safeguard(self, where: str, rp: RelaxPoint):
        if not self.enabled:
            return
        self.checks += 1
        slack = rp.z - rp.t
        tol = 1e-12 * np.maximum(1.0, np.abs(rp.t))
        if np.any(slack < -tol):
            self._fail(f"{where}: z - t = {float(np.min(slack)):.3e} after safeguard")


# ---------- Initialization ----------
class InitialState(NamedTuple):
    point: RelaxPoint
    merit: MeritState
    bfgs: BfgsState
    lam: np.ndarray


def initialize(p: ProblemModel, cfg: SolverConfig, x0=None) -> InitialState:
    x0 = p.standard_start if x0 is None else np.asarray(x0, dtype=float)
    bp = BarrierParams(cfg.mu0, cfg.tau0)
    c0 = p.eval_c(x0)
    if not np.all(np.isfinite(c0)):
        raise NonFiniteEvaluation("eval_c", x0)
    t0 = -c0
    positive = t0 > 0.0
    s0 = np.ones(p.m)
    s0[positive] = np.minimum(1.0, 0.95 * cfg.mu0 / t0[positive])

    rp = RelaxPoint(p, x0, t0, s0, bp)
    f0 = rp.f
    infeas = rp.infeasibility()
    rho0 = 100.0 if f0 == 0.0 else min(100.0, max(1.0, infeas / abs(f0)))

    # least-squares multiplier estimate for the equalities
    lam0 = np.zeros(p.m_e)
    if p.m_e:
        rhs = -(rp.xeval.grad_f + rp.xeval.jac_c @ s0)
        lam0, *_ = np.linalg.lstsq(rp.xeval.jac_h, rhs, rcond=None)

    merit = MeritState(rho=rho0, phi=eval_merit(rp, rho0), pi=0.0, chi=0.0)
    return InitialState(rp, merit, BfgsState.identity(p.n, cfg.bfgs_damping, cfg.bfgs_gamma), lam0)


# ---------- Residuals ----------
def residual_r(rp: RelaxPoint, lam: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(r, r1): r1 = grad f + grad h lam + grad c s is the dual-feasibility block of r = (r1, C)."""
    xe = rp.xeval
    r1 = xe.grad_f + xe.jac_h @ lam + xe.jac_c @ rp.s
    return np.concatenate([r1, rp.C]), r1


def residual_g(rp: RelaxPoint, g_floor: float = 1e-14) -> Optional[np.ndarray]:
    """Scaled infeasibility-stationarity residual, or None when ||C|| < g_floor."""
    cn = float(np.linalg.norm(rp.C))
    if cn < g_floor:
        return None
    xe = rp.xeval
    gap = rp.z - rp.t
    return np.concatenate([
        xe.jac_h @ xe.h + xe.jac_c @ gap,
        xe.c + rp.t - gap,
        rp.z * gap,
    ]) / cn


def _inf(v: Optional[np.ndarray]) -> Optional[float]:
    if v is None:
        return None
    return float(np.max(np.abs(v))) if v.size else 0.0


# ---------- Inner loop ----------
@dataclass
class InnerResult:
    point: RelaxPoint
    lam: np.ndarray
    multipliers: Multipliers
    exit: InnerExit
    k: int
    rho: float
    bfgs: BfgsState
    r: np.ndarray
    r1: np.ndarray
    g: Optional[np.ndarray]
    iters: int
    merit: Optional[MeritState] = None


_EPS100 = 100.0 * np.finfo(float).eps
_QUIET_STEPS = 3


def _noise_level(rp: RelaxPoint, rho: float) -> float:
    # roundoff scale of merit values at rp
    barrier = rp.bp.mu * float(np.sum(np.abs(np.log(rp.z))))
    return _EPS100 * (rho * (abs(rp.f) + barrier) + float(np.linalg.norm(rp.C)))


def inner_solve(p: ProblemModel, cfg: SolverConfig, mu: float, tau: float, warm: InnerResult,
                monitor: Optional[InvariantMonitor] = None) -> InnerResult:
    """
    Inner iterations at fixed (mu, tau), starting from warm. Exits via the r-test
    (||r||_inf <= 10 mu), the g-test (||g||_inf <= tau) or the cumulative iteration budget.

    The run also ends when merit progress is at roundoff level: no predicted decrease
    beyond the rounding error of pi, a failed line search with pi at merit noise, or
    three accepted steps in a row that each gain less than the noise. That is a g-test
    exit when ||C|| >= g_floor and StalledStep otherwise.
    """
    monitor = monitor or InvariantMonitor(False)
    bp = BarrierParams(mu, tau)
    rp = warm.point.with_params(bp)
    lam, multipliers = warm.lam, warm.multipliers
    rho, bfgs, iters = warm.rho, warm.bfgs, warm.iters
    merit = warm.merit
    R = scaling_R(bp, p.n, p.m)
    gate = cfg.mu_accept_factor * mu

    def done(exit_: InnerExit, k: int, r, r1, g=None) -> InnerResult:
        if g is None and exit_ != InnerExit.R_TEST:
            g = residual_g(rp, cfg.g_floor)
        return InnerResult(rp, lam, multipliers, exit_, k, rho, bfgs, r, r1, g, iters, merit)

    def stalled(k: int, r, r1, where: str, details: dict) -> InnerResult:
        cn = float(np.linalg.norm(rp.C))
        details = dict(details, norm_C=cn, rho=rho, k=k)
        if cn < cfg.g_floor:
            raise StalledStep(f"{where}: no merit decrease available at a feasible point", details)
        logger.info("%s: stalled at ||C||=%.3e, treated as a g-test exit", where, cn)
        return done(InnerExit.G_TEST, k, r, r1)

    r, r1 = residual_r(rp, lam)
    if _inf(r) <= gate:
        return done(InnerExit.R_TEST, 0, r, r1, residual_g(rp, cfg.g_floor))
    g = residual_g(rp, cfg.g_floor)
    if g is not None and _inf(g) <= tau:
        return done(InnerExit.G_TEST, 0, r, r1, g)

    k = 0
    quiet = 0
    while True:
        if iters >= cfg.max_total_iters:
            return done(InnerExit.BUDGET, k, r, r1)
        where = f"mu={mu:.3e} tau={tau:.3e} k={k}"

        Q = assemble_Q(bfgs.B, rp)
        try:
            normal = normal_step(rp, Q, R, rho, cfg.xi)
        except DegenerateNormalStep as exc:
            logger.debug("%s: %s", where, exc)
            return done(InnerExit.G_TEST, k, r, r1)
        monitor.normal_step(where, R, normal)

        tangential = tangential_step(rp, Q, normal.p, cfg.max_reg_doublings)
        d = tangential.d
        iters += 1
        k += 1

        # best pi over all rho' <= rho (pi is affine in rho), against its rounding error
        slope = float(rp.gradF @ d)
        _, chi = eval_pi(rp, rho, d)
        best_pi = min(rho * slope, 0.0) + chi
        pi_error = _EPS100 * (rho * float(np.linalg.norm(rp.gradF)) * float(np.linalg.norm(d))
                              + float(np.linalg.norm(rp.jacC.T @ d)))
        if best_pi >= -pi_error:
            return stalled(k, r, r1, where, {"best_pi": best_pi, "pi_error": pi_error,
                                             "norm_d": float(np.linalg.norm(d))})

        rho_next = update_penalty(rho, rp, Q, R, normal, d, cfg.delta, cfg.rho_min)
        monitor.penalty(where, rho, rho_next)
        pi, chi = eval_pi(rp, rho_next, d)
        phi0 = eval_merit(rp, rho_next)
        noise = _noise_level(rp, rho_next)
        try:
            ls = line_search(rp, rho_next, d, pi, cfg.sigma, cfg.delta, cfg.max_backtracks)
        except LineSearchFailure as exc:
            if -pi > 1e3 * noise:
                raise
            rho = rho_next
            return stalled(k, r, r1, where, dict(exc.diagnostics, noise=noise, backtracks=len(exc.trace)))

        new_rp = ls.point.with_s(dual_safeguard(ls.point.t, ls.point.s, mu))
        phi_safe = eval_merit(new_rp, rho_next)
        monitor.step(where, phi0, ls.phi, phi_safe, ls.alpha, pi, cfg.sigma)
        monitor.safeguard(where, new_rp)
        logger.debug("%s: rho=%.3e alpha=%.3e ||C||=%.3e ||d||=%.3e phi=%.6e",
                     where, rho_next, ls.alpha, np.linalg.norm(new_rp.C), np.linalg.norm(d), phi_safe)
        quiet = quiet + 1 if phi0 - phi_safe <= noise else 0

        old_rp = rp
        rp, rho = new_rp, rho_next
        merit = MeritState(rho=rho, phi=phi_safe, pi=pi, chi=chi)
        multipliers = tangential.multipliers
        lam = multipliers.lam

        r, r1 = residual_r(rp, lam)
        if _inf(r) <= gate:
            return done(InnerExit.R_TEST, k, r, r1, residual_g(rp, cfg.g_floor))
        g = residual_g(rp, cfg.g_floor)
        if g is not None and _inf(g) <= tau:
            return done(InnerExit.G_TEST, k, r, r1, g)
        if quiet >= _QUIET_STEPS:
            return stalled(k, r, r1, where, {"quiet_steps": quiet, "noise": noise})

        grad_old = lagrangian_gradient(old_rp.xeval.grad_f, old_rp.xeval.jac_h, old_rp.xeval.jac_c,
                                       multipliers.lam, multipliers.beta)
        grad_new = lagrangian_gradient(rp.xeval.grad_f, rp.xeval.jac_h, rp.xeval.jac_c,
                                       multipliers.lam, multipliers.beta)
        bfgs = damped_bfgs_update(bfgs, rp.x - old_rp.x, grad_new - grad_old)


# ---------- Classification ----------
def _stationarity_certificate(rp: RelaxPoint) -> float:
    xe = rp.xeval
    return _inf(xe.jac_h @ xe.h + xe.jac_c @ np.maximum(0.0, xe.c))


def _fj_weight(rp: RelaxPoint, lam: np.ndarray) -> float:
    scale = _inf(np.concatenate([lam, np.maximum(0.0, rp.s)]))
    return 1.0 / (1.0 + scale)


def _final_multipliers(last: InnerResult, cfg: SolverConfig) -> Multipliers:
    # QP multipliers at the final point itself, with no normal component
    rp = last.point
    try:
        Q = assemble_Q(last.bfgs.B, rp)
        return tangential_step(rp, Q, np.zeros(rp.n + 2 * rp.m), cfg.max_reg_doublings).multipliers
    except StepFailure as exc:
        logger.debug("final multipliers unavailable (%s); using the last step's", exc)
        return last.multipliers


def _relative_gap(a: np.ndarray, b: np.ndarray, ref: np.ndarray) -> float:
    return _inf(a - b) / max(1.0, _inf(ref))


def classify(last: InnerResult, mu: float, tau: float, cfg: SolverConfig) -> Tuple[SolveStatus, dict]:
    """
    Status of the final inner exit plus the certificate that backs it.

    For ApproxKKT the relaxation certificate holds the relative gaps
    ||beta - nu|| / max(1, ||beta||), ||nu - y/tau|| / max(1, ||nu||) and
    ||nu - s|| / max(1, ||s||) (infinity norms) at the final point.
    """
    rp = last.point
    infeas = rp.infeasibility()
    diagnostics = {"infeasibility": infeas, "mu": mu, "tau": tau, "last_exit": last.exit.value}

    if last.exit == InnerExit.BUDGET:
        return SolveStatus.ITERATION_LIMIT, diagnostics

    if last.exit == InnerExit.R_TEST and mu <= cfg.eps and tau > cfg.eps:
        weight = _fj_weight(rp, last.lam)
        diagnostics["fj_weight"] = weight
        if weight >= cfg.fj_weight_tol:
            m = _final_multipliers(last, cfg)
            diagnostics["relaxation_certificate"] = {
                "beta_minus_nu": _relative_gap(m.beta, m.nu, m.beta),
                "nu_minus_y_over_tau": _relative_gap(m.nu, rp.y / rp.bp.tau, m.nu),
                "nu_minus_s": _relative_gap(m.nu, rp.s, rp.s),
            }
            return SolveStatus.APPROX_KKT, diagnostics

    diagnostics["stationarity_certificate"] = _stationarity_certificate(rp)
    if infeas <= np.sqrt(cfg.eps):
        return SolveStatus.SINGULAR_STATIONARY, diagnostics
    return SolveStatus.INFEASIBLE_STATIONARY, diagnostics


# ---------- Outer loop ----------
def update_parameters(exit_: InnerExit, mu: float, tau: float, r1_inf: float, cfg: SolverConfig) -> Tuple[float, float]:
    """
    r-test exit: mu -> min(0.5 mu, ||r1||_inf^1.8). g-test exit: tau -> 0.6 tau.
    A value at or below eps snaps to its floor, the setting of the terminal pass.
    """
    if exit_ == InnerExit.R_TEST:
        mu_next = max(cfg.mu_floor, min(cfg.mu_halve * mu, r1_inf ** cfg.mu_exponent))
        return (cfg.mu_floor if mu_next <= cfg.eps else mu_next), tau
    tau_next = max(cfg.tau_floor, cfg.tau_factor * tau)
    return mu, (cfg.tau_floor if tau_next <= cfg.eps else tau_next)


def _row(l: int, res: InnerResult, mu, tau, k) -> IterationRecord:
    rp = res.point
    return IterationRecord(
        l=l,
        f=rp.f,
        v=rp.infeasibility(),
        r_inf=_inf(res.r),
        g_inf=_inf(res.g),
        mu=mu,
        tau=tau,
        k=k,
    )


def _report(p, counter, status, res: Optional[InnerResult], records, diagnostics, message="",
            monitor=None) -> SolveReport:
    if res is None:
        x = np.array(p.standard_start, dtype=float)
        t = s = np.zeros(p.m)
        lam = np.zeros(p.m_e)
        f = float("nan")
        infeas = float("nan")
        iters = 0
    else:
        rp = res.point
        x, t, s, lam = rp.x, rp.t, rp.s, res.lam
        f = rp.f
        infeas = rp.infeasibility()
        iters = res.iters
    return SolveReport(
        problem=p.name,
        status=status,
        x=x,
        t=t,
        s=s,
        lam=lam,
        f=f,
        infeasibility=infeas,
        records=records,
        nf=counter.nf,
        ng=counter.ng,
        iters=iters,
        diagnostics=diagnostics,
        violations=list(monitor.violations) if monitor else [],
        message=message,
    )


def outer_solve(p: ProblemModel, cfg: Optional[SolverConfig] = None, x0=None) -> SolveReport:
    cfg = cfg or SolverConfig()
    counter = EvaluationCounter(p)
    monitor = InvariantMonitor(cfg.monitor)
    records: List[IterationRecord] = []

    try:
        init = initialize(counter, cfg, x0)
        rp0 = init.point
        r0, r10 = residual_r(rp0, init.lam)
        state = InnerResult(
            point=rp0,
            lam=init.lam,
            multipliers=Multipliers(init.lam, rp0.s.copy(), rp0.s.copy()),
            exit=InnerExit.R_TEST,
            k=0,
            rho=init.merit.rho,
            bfgs=init.bfgs,
            r=r0,
            r1=r10,
            g=residual_g(rp0, cfg.g_floor),
            iters=0,
            merit=init.merit,
        )
    except (NonFiniteEvaluation, ArithmeticError) as exc:
        logger.error("%s: initial evaluation failed: %s", p.name, exc)
        return _report(p, counter, SolveStatus.STEP_FAILURE, None, records,
                       {"stage": "initialize"}, str(exc), monitor)

    records.append(_row(0, state, cfg.mu0, cfg.tau0, None))
    mu, tau = cfg.mu0, cfg.tau0
    terminal = False
    l = 0

    while True:
        try:
            res = inner_solve(counter, cfg, mu, tau, state, monitor)
        except StepFailure as exc:
            logger.warning("%s: step failure at mu=%.3e tau=%.3e: %s", p.name, mu, tau, exc)
            diagnostics = dict(exc.diagnostics, mu=mu, tau=tau, error=type(exc).__name__)
            return _report(p, counter, SolveStatus.STEP_FAILURE, state, records, diagnostics, str(exc), monitor)
        except ArithmeticError as exc:
            logger.warning("%s: evaluation failed at mu=%.3e tau=%.3e: %s", p.name, mu, tau, exc)
            diagnostics = {"mu": mu, "tau": tau, "error": type(exc).__name__}
            return _report(p, counter, SolveStatus.STEP_FAILURE, state, records, diagnostics, str(exc), monitor)

        l += 1
        state = res

        if res.exit == InnerExit.BUDGET or terminal:
            records.append(_row(l, res, None if terminal else mu, None if terminal else tau, res.k))
            status, diagnostics = classify(res, mu, tau, cfg)
            diagnostics["rho"] = res.rho
            if res.merit is not None:
                diagnostics["merit"] = {"phi": res.merit.phi, "pi": res.merit.pi, "chi": res.merit.chi}
            diagnostics["bfgs_updates"] = res.bfgs.updates
            diagnostics["bfgs_skipped"] = res.bfgs.skipped
            if cfg.monitor:
                diagnostics["monitor_checks"] = monitor.checks
            logger.info("%s: %s after %d iterations (nf=%d ng=%d)",
                        p.name, status.value, res.iters, counter.nf, counter.ng)
            return _report(p, counter, status, res, records, diagnostics, monitor=monitor)

        mu_next, tau_next = update_parameters(res.exit, mu, tau, _inf(res.r1), cfg)

        records.append(_row(l, res, mu_next, tau_next, res.k))
        logger.info("%s: l=%d %s exit after k=%d, mu %.3e -> %.3e, tau %.3e -> %.3e",
                    p.name, l, res.exit.value, res.k, mu, mu_next, tau, tau_next)
        mu, tau = mu_next, tau_next
        terminal = mu <= cfg.eps or tau <= cfg.eps


def solve(p: ProblemModel, cfg: Optional[SolverConfig] = None, **overrides) -> SolveReport:
    cfg = (cfg or SolverConfig()).with_overrides(**overrides)
    return outer_solve(p, cfg)
