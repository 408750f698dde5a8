"""
Expression trees for text models and forward-mode dual numbers for their derivatives.

A Dual carries a value and a gradient vector; seeding variable i with the unit
vector e_i gives the full gradient in a single pass over the tree.
"""
import math
from dataclasses import dataclass, field
from typing import Callable, Tuple, Union

import numpy as np

from src.errors import ModelDomainError

__all__ = ["ExprNode", "Dual", "evaluate", "evaluate_dual", "render", "FUNCTIONS", "is_constant"]

FUNCTIONS = ("sin", "cos", "exp", "ln", "sqrt")

KINDS = ("const", "var", "add", "sub", "mul", "div", "pow", "neg", "fn")


@dataclass(frozen=True)
class ExprNode:
    kind: str
    children: Tuple["ExprNode", ...] = ()
    value: float = 0.0   # constant value, or the integer exponent for "pow"
    name: str = ""       # variable or function name
    index: int = -1      # variable slot
    line: int = 0
    column: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown expression kind {self.kind!r}")

    # ---------- Constructors ----------
    @classmethod
    def const(cls, value: float, line: int = 0, column: int = 0) -> "ExprNode":
        return cls("const", value=float(value), line=line, column=column)

    @classmethod
    def var(cls, name: str, index: int, line: int = 0, column: int = 0) -> "ExprNode":
        return cls("var", name=name, index=index, line=line, column=column)

    @classmethod
    def binary(cls, kind: str, left: "ExprNode", right: "ExprNode", line: int = 0, column: int = 0) -> "ExprNode":
        return cls(kind, children=(left, right), line=line, column=column)

    @classmethod
    def neg(cls, operand: "ExprNode", line: int = 0, column: int = 0) -> "ExprNode":
        return cls("neg", children=(operand,), line=line, column=column)

    @classmethod
    def power(cls, base: "ExprNode", exponent: int, line: int = 0, column: int = 0) -> "ExprNode":
        return cls("pow", children=(base,), value=int(exponent), line=line, column=column)

    @classmethod
    def call(cls, fn: str, arg: "ExprNode", line: int = 0, column: int = 0) -> "ExprNode":
        if fn not in FUNCTIONS:
            raise ValueError(f"unknown function {fn!r}")
        return cls("fn", children=(arg,), name=fn, line=line, column=column)


def is_constant(node: ExprNode) -> bool:
    if node.kind == "var":
        return False
    return all(is_constant(ch) for ch in node.children)


# ---------- Dual numbers ----------
@dataclass
class Dual:
    value: float
    grad: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __add__(self, other: "Dual") -> "Dual":
        return Dual(self.value + other.value, self.grad + other.grad)

    def __sub__(self, other: "Dual") -> "Dual":
        return Dual(self.value - other.value, self.grad - other.grad)

    def __mul__(self, other: "Dual") -> "Dual":
        return Dual(self.value * other.value, other.value * self.grad + self.value * other.grad)

    def __truediv__(self, other: "Dual") -> "Dual":
        q = self.value / other.value
        return Dual(q, (self.grad - q * other.grad) / other.value)

    def __neg__(self) -> "Dual":
        return Dual(-self.value, -self.grad)

    def ipow(self, k: int) -> "Dual":
        if k == 0:
            return Dual(1.0, np.zeros_like(self.grad))
        return Dual(self.value ** k, k * self.value ** (k - 1) * self.grad)

    def apply(self, fn: str) -> "Dual":
        v = self.value
        if fn == "sin":
            return Dual(math.sin(v), math.cos(v) * self.grad)
        if fn == "cos":
            return Dual(math.cos(v), -math.sin(v) * self.grad)
        if fn == "exp":
            e = math.exp(v)
            return Dual(e, e * self.grad)
        if fn == "ln":
            return Dual(math.log(v), self.grad / v)
        r = math.sqrt(v)
        return Dual(r, self.grad / (2.0 * r))


Number = Union[float, Dual]

_SCALAR_FNS = {
    "sin": math.sin,
    "cos": math.cos,
    "exp": math.exp,
    "ln": math.log,
    "sqrt": math.sqrt,
}


def _fail(node: ExprNode, message: str):
    raise ModelDomainError(message, node.line, node.column)


def _walk(node: ExprNode, leaf: Callable[[ExprNode], Number], const: Callable[[float], Number], dual: bool) -> Number:
    kind = node.kind
    if kind == "const":
        return const(node.value)
    if kind == "var":
        return leaf(node)

    args = [_walk(ch, leaf, const, dual) for ch in node.children]
    if kind == "add":
        return args[0] + args[1]
    if kind == "sub":
        return args[0] - args[1]
    if kind == "mul":
        return args[0] * args[1]
    if kind == "neg":
        return -args[0]

    base = args[0].value if dual else args[0]
    if kind == "div":
        den = args[1].value if dual else args[1]
        if den == 0.0:
            _fail(node, "division by zero")
        return args[0] / args[1]
    if kind == "pow":
        k = int(node.value)
        if k < 0 and base == 0.0:
            _fail(node, f"zero raised to negative power {k}")
        try:
            return args[0].ipow(k) if dual else base ** k
        except OverflowError:
            _fail(node, f"overflow raising {base!r} to {k}")

    fn = node.name
    if fn == "ln" and base <= 0.0:
        _fail(node, f"ln of non-positive value {base!r}")
    if fn == "sqrt" and (base < 0.0 or (dual and base == 0.0)):
        _fail(node, f"sqrt of {'negative' if base < 0.0 else 'zero (derivative undefined)'} value {base!r}")
    try:
        return args[0].apply(fn) if dual else _SCALAR_FNS[fn](base)
    except OverflowError:
        _fail(node, f"{fn} overflow at {base!r}")


def evaluate(node: ExprNode, x) -> float:
    return float(_walk(node, lambda leaf: float(x[leaf.index]), float, dual=False))


def evaluate_dual(node: ExprNode, x) -> Dual:
    """Value and gradient in one pass (one seed direction per variable)."""
    x = np.asarray(x, dtype=float)
    n = x.size
    seeds = np.eye(n)
    zero = np.zeros(n)
    return _walk(
        node,
        lambda leaf: Dual(float(x[leaf.index]), seeds[leaf.index].copy()),
        lambda v: Dual(v, zero.copy()),
        dual=True,
    )


_OPS = {"add": "+", "sub": "-", "mul": "*", "div": "/"}


def render(node: ExprNode) -> str:
    """Fully parenthesized text that parses back to an equivalent tree."""
    kind = node.kind
    if kind == "const":
        return f"({node.value!r})" if node.value < 0 else repr(node.value)
    if kind == "var":
        return node.name
    if kind == "neg":
        return f"(-{render(node.children[0])})"
    if kind == "pow":
        return f"({render(node.children[0])}^{int(node.value)})"
    if kind == "fn":
        return f"{node.name}({render(node.children[0])})"
    left, right = node.children
    return f"({render(left)} {_OPS[kind]} {render(right)})"
