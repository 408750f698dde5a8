import numpy as np
import pytest

from src.catalog import lookup_problem
from src.models import BarrierParams
from src.problem import ProblemModel
from src.relaxation import RelaxPoint


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def tp1():
    return lookup_problem("TP1")


def quadratic_problem(rng, n, m_e, m, name="RANDQP"):
    """f = 0.5 x'Gx + g'x, h = A_h'x + b_h, c = A_c'x + b_c with random well-scaled data."""
    M = rng.standard_normal((n, n))
    G = M @ M.T + np.eye(n)
    g = rng.standard_normal(n)
    A_h = rng.standard_normal((n, m_e))
    b_h = rng.standard_normal(m_e)
    A_c = rng.standard_normal((n, m))
    b_c = rng.standard_normal(m)
    return ProblemModel(
        name=name,
        n=n,
        m_e=m_e,
        m=m,
        f=lambda x: 0.5 * x @ G @ x + g @ x,
        grad_f=lambda x: G @ x + g,
        h=lambda x: A_h.T @ x + b_h,
        jac_h=lambda x: A_h,
        c=lambda x: A_c.T @ x + b_c,
        jac_c=lambda x: A_c,
        standard_start=np.zeros(n),
    )


def random_point(rng, problem, mu=None, tau=None):
    """Relaxation point with t, s of either sign and moderate (mu, tau)."""
    mu = rng.uniform(0.1, 1.0) if mu is None else mu
    tau = rng.uniform(0.5, 2.0) if tau is None else tau
    return RelaxPoint(
        problem,
        rng.standard_normal(problem.n),
        rng.uniform(-1.0, 1.0, problem.m),
        rng.uniform(-1.0, 1.0, problem.m),
        BarrierParams(mu, tau),
    )


def random_spd(rng, n):
    M = rng.standard_normal((n, n))
    return M @ M.T + np.eye(n)
