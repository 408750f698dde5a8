"""
Exceptions raised by the solver, the model parser and the problem layer.
"""
from typing import Any, Dict, List, Optional, Tuple


class SolverError(Exception):
    """Base class for everything this package raises on purpose."""


class ConfigError(SolverError, ValueError):
    pass


class UnknownProblemError(SolverError, LookupError):
    def __init__(self, name: str, available: List[str]):
        self.name = name
        self.available = list(available)
        super().__init__(f"unknown problem {name!r}; available: {', '.join(self.available)}")


class ProblemShapeError(SolverError, ValueError):
    pass


class NonFiniteEvaluation(SolverError, ArithmeticError):
    def __init__(self, evaluator: str, x):
        self.evaluator = evaluator
        super().__init__(f"{evaluator} returned a non-finite value at x={list(x)!r}")


class DerivativeCheckError(SolverError):
    def __init__(self, evaluator: str, x):
        self.evaluator = evaluator
        super().__init__(f"non-finite {evaluator} value at probe point x={list(x)!r}")


class _Positioned(SolverError):
    def __init__(self, message: str, line: int, column: int):
        self.line = line
        self.column = column
        self.message = message
        super().__init__(f"line {line}, column {column}: {message}")


class ModelSyntaxError(_Positioned):
    pass


class ModelDomainError(_Positioned, ArithmeticError):
    pass


class DegenerateNormalStep(SolverError):
    """R^-1 grad C C vanished while C did not: evidence of g-stationarity."""


class StepFailure(SolverError):
    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        self.diagnostics = dict(diagnostics or {})
        super().__init__(message)


class KktFactorizationError(StepFailure):
    pass


class TinyPenaltyError(StepFailure):
    pass


class LineSearchFailure(StepFailure):
    def __init__(self, message: str, trace: List[Tuple[float, float]], diagnostics=None):
        self.trace = list(trace)
        super().__init__(message, diagnostics)


class StalledStep(StepFailure):
    """Predicted merit decrease is at roundoff level at a point that is not infeasible."""
