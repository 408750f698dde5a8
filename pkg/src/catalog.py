"""
Single source of truth for the built-in test problems.

TP1-TP3 are the three small hard cases (well-posed but hard for line-search
interior-point methods, degenerate, infeasible); the HS/CB entries are hand-coded
versions of small problems from the Hock-Schittkowski / CUTE collections.
Bounds are written as general inequalities c_j(x) <= 0 (x2 >= 0 becomes -x2 <= 0).
"""
from typing import Callable, Dict, List

import numpy as np

from src.errors import UnknownProblemError
from src.problem import ProblemModel

__all__ = ["CATALOG", "get_problem_names", "lookup_problem", "describe"]


def _a(*rows):
    return np.array(rows, dtype=float)


def tp1() -> ProblemModel:
    return ProblemModel(
        name="TP1",
        n=3,
        m_e=2,
        m=2,
        f=lambda x: x[0],
        grad_f=lambda x: _a(1.0, 0.0, 0.0),
        h=lambda x: _a(x[0] ** 2 - x[1] - 1.0, x[0] - x[2] - 2.0),
        jac_h=lambda x: _a([2.0 * x[0], 1.0], [-1.0, 0.0], [0.0, -1.0]),
        c=lambda x: _a(-x[1], -x[2]),
        jac_c=lambda x: _a([0.0, 0.0], [-1.0, 0.0], [0.0, -1.0]),
        standard_start=[-4.0, 1.0, 1.0],
        description="Waechter-Biegler example; minimizer (2, 3, 0)",
    )


def tp2() -> ProblemModel:
    return ProblemModel(
        name="TP2",
        n=2,
        m_e=0,
        m=3,
        f=lambda x: (x[0] - 2.0) ** 2 + x[1] ** 2,
        grad_f=lambda x: _a(2.0 * (x[0] - 2.0), 2.0 * x[1]),
        c=lambda x: _a(x[1] - (1.0 - x[0]) ** 3, -x[0], -x[1]),
        jac_c=lambda x: _a([3.0 * (1.0 - x[0]) ** 2, -1.0, 0.0], [1.0, 0.0, -1.0]),
        standard_start=[-2.0, -2.0],
        description="HS13; solution (1, 0) is a singular stationary point",
    )


def tp3() -> ProblemModel:
    return ProblemModel(
        name="TP3",
        n=2,
        m_e=0,
        m=4,
        f=lambda x: x[0] + x[1],
        grad_f=lambda x: _a(1.0, 1.0),
        c=lambda x: _a(
            x[0] ** 2 - x[1] + 1.0,
            x[0] ** 2 + x[1] + 1.0,
            -x[0] + x[1] ** 2 + 1.0,
            x[0] + x[1] ** 2 + 1.0,
        ),
        jac_c=lambda x: _a(
            [2.0 * x[0], 2.0 * x[0], -1.0, 1.0],
            [-1.0, 1.0, 2.0 * x[1], 2.0 * x[1]],
        ),
        standard_start=[3.0, 2.0],
        description="'isolated': infeasible, (0, 0) minimizes the infeasibility",
    )


def hs10() -> ProblemModel:
    return ProblemModel(
        name="HS10",
        n=2,
        m_e=0,
        m=1,
        f=lambda x: x[0] - x[1],
        grad_f=lambda x: _a(1.0, -1.0),
        c=lambda x: _a(3.0 * x[0] ** 2 - 2.0 * x[0] * x[1] + x[1] ** 2 - 1.0),
        jac_c=lambda x: _a([6.0 * x[0] - 2.0 * x[1]], [-2.0 * x[0] + 2.0 * x[1]]),
        standard_start=[-10.0, 10.0],
    )


def hs11() -> ProblemModel:
    return ProblemModel(
        name="HS11",
        n=2,
        m_e=0,
        m=1,
        f=lambda x: (x[0] - 5.0) ** 2 + x[1] ** 2 - 25.0,
        grad_f=lambda x: _a(2.0 * (x[0] - 5.0), 2.0 * x[1]),
        c=lambda x: _a(x[0] ** 2 - x[1]),
        jac_c=lambda x: _a([2.0 * x[0]], [-1.0]),
        standard_start=[4.9, 0.1],
    )


def hs12() -> ProblemModel:
    return ProblemModel(
        name="HS12",
        n=2,
        m_e=0,
        m=1,
        f=lambda x: 0.5 * x[0] ** 2 + x[1] ** 2 - x[0] * x[1] - 7.0 * x[0] - 7.0 * x[1],
        grad_f=lambda x: _a(x[0] - x[1] - 7.0, 2.0 * x[1] - x[0] - 7.0),
        c=lambda x: _a(4.0 * x[0] ** 2 + x[1] ** 2 - 25.0),
        jac_c=lambda x: _a([8.0 * x[0]], [2.0 * x[1]]),
        standard_start=[0.0, 0.0],
    )


def hs14() -> ProblemModel:
    return ProblemModel(
        name="HS14",
        n=2,
        m_e=1,
        m=1,
        f=lambda x: (x[0] - 2.0) ** 2 + (x[1] - 1.0) ** 2,
        grad_f=lambda x: _a(2.0 * (x[0] - 2.0), 2.0 * (x[1] - 1.0)),
        h=lambda x: _a(x[0] - 2.0 * x[1] + 1.0),
        jac_h=lambda x: _a([1.0], [-2.0]),
        c=lambda x: _a(0.25 * x[0] ** 2 + x[1] ** 2 - 1.0),
        jac_c=lambda x: _a([0.5 * x[0]], [2.0 * x[1]]),
        standard_start=[2.0, 2.0],
    )


def hs22() -> ProblemModel:
    return ProblemModel(
        name="HS22",
        n=2,
        m_e=0,
        m=2,
        f=lambda x: (x[0] - 2.0) ** 2 + (x[1] - 1.0) ** 2,
        grad_f=lambda x: _a(2.0 * (x[0] - 2.0), 2.0 * (x[1] - 1.0)),
        c=lambda x: _a(x[0] + x[1] - 2.0, x[0] ** 2 - x[1]),
        jac_c=lambda x: _a([1.0, 2.0 * x[0]], [1.0, -1.0]),
        standard_start=[2.0, 2.0],
    )


def hs29() -> ProblemModel:
    return ProblemModel(
        name="HS29",
        n=3,
        m_e=0,
        m=1,
        f=lambda x: -x[0] * x[1] * x[2],
        grad_f=lambda x: _a(-x[1] * x[2], -x[0] * x[2], -x[0] * x[1]),
        c=lambda x: _a(x[0] ** 2 + 2.0 * x[1] ** 2 + 4.0 * x[2] ** 2 - 48.0),
        jac_c=lambda x: _a([2.0 * x[0]], [4.0 * x[1]], [8.0 * x[2]]),
        standard_start=[1.0, 1.0, 1.0],
    )


def hs43() -> ProblemModel:
    def f(x):
        return (x[0] ** 2 + x[1] ** 2 + 2.0 * x[2] ** 2 + x[3] ** 2
                - 5.0 * x[0] - 5.0 * x[1] - 21.0 * x[2] + 7.0 * x[3])

    def c(x):
        return _a(
            x[0] ** 2 + x[1] ** 2 + x[2] ** 2 + x[3] ** 2 + x[0] - x[1] + x[2] - x[3] - 8.0,
            x[0] ** 2 + 2.0 * x[1] ** 2 + x[2] ** 2 + 2.0 * x[3] ** 2 - x[0] - x[3] - 10.0,
            2.0 * x[0] ** 2 + x[1] ** 2 + x[2] ** 2 + 2.0 * x[0] - x[1] - x[3] - 5.0,
        )

    def jac_c(x):
        return _a(
            [2.0 * x[0] + 1.0, 2.0 * x[0] - 1.0, 4.0 * x[0] + 2.0],
            [2.0 * x[1] - 1.0, 4.0 * x[1], 2.0 * x[1] - 1.0],
            [2.0 * x[2] + 1.0, 2.0 * x[2], 2.0 * x[2]],
            [2.0 * x[3] - 1.0, 4.0 * x[3] - 1.0, -1.0],
        )

    return ProblemModel(
        name="HS43",
        n=4,
        m_e=0,
        m=3,
        f=f,
        grad_f=lambda x: _a(2.0 * x[0] - 5.0, 2.0 * x[1] - 5.0, 4.0 * x[2] - 21.0, 2.0 * x[3] + 7.0),
        c=c,
        jac_c=jac_c,
        standard_start=[0.0, 0.0, 0.0, 0.0],
        description="Rosen-Suzuki",
    )


def _minimax(name: str, first, first_grad) -> ProblemModel:
    # min u s.t. first(x) - u <= 0, (2-x1)^2 + (2-x2)^2 - u <= 0, 2 exp(x2 - x1) - u <= 0
    def c(v):
        x1, x2, u = v
        return _a(
            first(x1, x2) - u,
            (2.0 - x1) ** 2 + (2.0 - x2) ** 2 - u,
            2.0 * np.exp(x2 - x1) - u,
        )

    def jac_c(v):
        x1, x2, _ = v
        g1 = first_grad(x1, x2)
        e = 2.0 * np.exp(x2 - x1)
        return _a(
            [g1[0], -2.0 * (2.0 - x1), -e],
            [g1[1], -2.0 * (2.0 - x2), e],
            [-1.0, -1.0, -1.0],
        )

    return ProblemModel(
        name=name,
        n=3,
        m_e=0,
        m=3,
        f=lambda v: v[2],
        grad_f=lambda v: _a(0.0, 0.0, 1.0),
        c=c,
        jac_c=jac_c,
        standard_start=[2.0, 2.0, 1.0],
        description="Charalambous-Bandler minimax",
    )


def cb2() -> ProblemModel:
    return _minimax("CB2", lambda a, b: a ** 2 + b ** 4, lambda a, b: (2.0 * a, 4.0 * b ** 3))


def cb3() -> ProblemModel:
    return _minimax("CB3", lambda a, b: a ** 4 + b ** 2, lambda a, b: (4.0 * a ** 3, 2.0 * b))


CATALOG: Dict[str, Callable[[], ProblemModel]] = {
    "TP1": tp1,
    "TP2": tp2,
    "TP3": tp3,
    "HS10": hs10,
    "HS11": hs11,
    "HS12": hs12,
    "HS14": hs14,
    "HS22": hs22,
    "HS29": hs29,
    "HS43": hs43,
    "CB2": cb2,
    "CB3": cb3,
}


def get_problem_names() -> List[str]:
    return list(CATALOG.keys())


def lookup_problem(name: str) -> ProblemModel:
    key = name.strip().upper()
    if key not in CATALOG:
        raise UnknownProblemError(name, get_problem_names())
    return CATALOG[key]()


def describe(problem: ProblemModel) -> str:
    return f"{problem.name} n={problem.n} me={problem.m_e} m={problem.m}"
