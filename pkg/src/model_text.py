"""
Text model format -> ProblemModel.

    # comment
    var x1=-2, x2=-2;
    min (x1-2)^2 + x2^2;
    s.t.
    (1-x1)^3 - x2 >= 0;
    x1 >= 0;

Statements end with ';'. Precedence: ^ (integer literal exponent) > unary - > * / > + -.
Constraints are normalized on parse: lhs = rhs -> h = lhs - rhs, lhs <= rhs -> c = lhs - rhs,
lhs >= rhs -> c = -(lhs - rhs).
"""
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.errors import ModelSyntaxError
from src.expr import FUNCTIONS, ExprNode, evaluate, evaluate_dual, is_constant, render
from src.problem import ProblemModel

logger = logging.getLogger(__name__)

__all__ = [
    "VarDecl",
    "Constraint",
    "ModelFile",
    "tokenize",
    "parse_model",
    "render_model",
    "compile_model",
    "load_model",
]


# ---------- Model file ----------
@dataclass(frozen=True)
class VarDecl:
    name: str
    initial: Optional[float] = None
    line: int = 0
    column: int = 0


@dataclass(frozen=True)
class Constraint:
    expr: ExprNode
    relation: str          # "=" or "<=" after normalization
    rhs: float = 0.0
    source_relation: str = ""
    line: int = 0


@dataclass
class ModelFile:
    variables: List[VarDecl]
    objective: ExprNode
    constraints: List[Constraint] = field(default_factory=list)
    name: str = "model"

    @property
    def equalities(self) -> List[Constraint]:
        return [c for c in self.constraints if c.relation == "="]

    @property
    def inequalities(self) -> List[Constraint]:
        return [c for c in self.constraints if c.relation == "<="]


# ---------- Tokenizer ----------
@dataclass(frozen=True)
class Token:
    kind: str   # NUM, ID, OP, ST, EOF
    text: str
    line: int
    column: int


_TOKEN_RE = re.compile(
    r"""
    (?P<WS>[ \t\r]+)
  | (?P<NL>\n)
  | (?P<COMMENT>\#[^\n]*)
  | (?P<ST>s\.t\.)
  | (?P<NUM>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<ID>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<OP><=|>=|==|[-+*/^(),;=])
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        column = pos - line_start + 1
        if not m:
            raise ModelSyntaxError(f"unexpected character {text[pos]!r}", line, column)
        kind = m.lastgroup
        if kind == "NL":
            line += 1
            line_start = m.end()
        elif kind not in ("WS", "COMMENT"):
            tokens.append(Token(kind, m.group(), line, column))
        pos = m.end()
    tokens.append(Token("EOF", "", line, pos - line_start + 1))
    return tokens


# ---------- Parser ----------
_RELATIONS = {"=": "=", "==": "=", "<=": "<=", ">=": ">="}


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0
        self.variables: List[VarDecl] = []
        self.slots: Dict[str, int] = {}

    # ---------- Token helpers ----------
    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def error(self, message: str, tok: Optional[Token] = None):
        tok = tok or self.tok
        raise ModelSyntaxError(message, tok.line, tok.column)

    def at(self, text: str) -> bool:
        return self.tok.kind == "OP" and self.tok.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            self.error(f"expected {text!r}, found {found!r}")
        return self.advance()

    def end_statement(self):
        # the final statement may omit its ';'
        if self.tok.kind == "EOF":
            return
        self.expect(";")

    # ---------- Statements ----------
    def parse(self) -> Tuple[List[VarDecl], ExprNode, List[Constraint]]:
        objective: Optional[ExprNode] = None
        constraints: List[Constraint] = []
        in_constraints = False
        while self.tok.kind != "EOF":
            tok = self.tok
            if self.at(";"):
                self.advance()
            elif tok.kind == "ID" and tok.text == "var":
                self.advance()
                self.parse_var_list()
                self.end_statement()
            elif tok.kind == "ID" and tok.text == "min":
                if objective is not None:
                    self.error("objective declared twice")
                self.advance()
                objective = self.parse_expr()
                self.end_statement()
            elif tok.kind == "ST":
                self.advance()
                in_constraints = True
            elif in_constraints:
                constraints.append(self.parse_constraint())
                self.end_statement()
            else:
                self.error(f"expected 'var', 'min' or 's.t.', found {tok.text!r}")
        if objective is None:
            self.error("missing 'min' objective")
        return self.variables, objective, constraints

    def parse_var_list(self):
        while True:
            tok = self.advance()
            if tok.kind != "ID":
                self.error(f"expected variable name, found {tok.text!r}", tok)
            if tok.text in FUNCTIONS or tok.text in ("var", "min"):
                self.error(f"{tok.text!r} is reserved", tok)
            if tok.text in self.slots:
                self.error(f"duplicate variable {tok.text!r}", tok)
            initial = None
            if self.at("="):
                self.advance()
                initial = self.parse_signed_number()
            self.slots[tok.text] = len(self.variables)
            self.variables.append(VarDecl(tok.text, initial, tok.line, tok.column))
            if not self.at(","):
                return
            self.advance()

    def parse_signed_number(self) -> float:
        sign = 1.0
        if self.at("-") or self.at("+"):
            sign = -1.0 if self.advance().text == "-" else 1.0
        tok = self.advance()
        if tok.kind != "NUM":
            self.error(f"expected number, found {tok.text!r}", tok)
        return sign * float(tok.text)

    def parse_constraint(self) -> Constraint:
        start = self.tok
        lhs = self.parse_expr()
        rel_tok = self.tok
        if rel_tok.kind != "OP" or rel_tok.text not in _RELATIONS:
            self.error(f"expected relation (=, <=, >=), found {rel_tok.text or 'end of input'!r}")
        self.advance()
        rhs = self.parse_expr()
        relation = _RELATIONS[rel_tok.text]

        if rhs.kind == "const" and rhs.value == 0.0:
            diff = lhs
        else:
            diff = ExprNode.binary("sub", lhs, rhs, rel_tok.line, rel_tok.column)
        if relation == ">=":
            return Constraint(ExprNode.neg(diff, rel_tok.line, rel_tok.column), "<=", 0.0, ">=", start.line)
        return Constraint(diff, relation, 0.0, relation, start.line)

    # ---------- Expressions ----------
    def parse_expr(self) -> ExprNode:
        node = self.parse_term()
        while self.at("+") or self.at("-"):
            op = self.advance()
            right = self.parse_term()
            node = ExprNode.binary("add" if op.text == "+" else "sub", node, right, op.line, op.column)
        return node

    def parse_term(self) -> ExprNode:
        node = self.parse_unary()
        while self.at("*") or self.at("/"):
            op = self.advance()
            right = self.parse_unary()
            node = ExprNode.binary("mul" if op.text == "*" else "div", node, right, op.line, op.column)
        return node

    def parse_unary(self) -> ExprNode:
        if self.at("-"):
            op = self.advance()
            return ExprNode.neg(self.parse_unary(), op.line, op.column)
        if self.at("+"):
            self.advance()
            return self.parse_unary()
        return self.parse_power()

    def parse_power(self) -> ExprNode:
        base = self.parse_primary()
        if not self.at("^"):
            return base
        op = self.advance()
        sign = 1
        if self.at("-") or self.at("+"):
            sign = -1 if self.advance().text == "-" else 1
        tok = self.advance()
        if tok.kind != "NUM" or not tok.text.isdigit():
            self.error("exponent must be an integer literal", tok)
        if self.at("^"):
            self.error("chained '^' needs parentheses")
        return ExprNode.power(base, sign * int(tok.text), op.line, op.column)

    def parse_primary(self) -> ExprNode:
        tok = self.advance()
        if tok.kind == "NUM":
            return ExprNode.const(float(tok.text), tok.line, tok.column)
        if tok.kind == "ID":
            if tok.text in FUNCTIONS:
                self.expect("(")
                arg = self.parse_expr()
                self.expect(")")
                return ExprNode.call(tok.text, arg, tok.line, tok.column)
            if tok.text not in self.slots:
                self.error(f"undeclared identifier {tok.text!r}", tok)
            return ExprNode.var(tok.text, self.slots[tok.text], tok.line, tok.column)
        if tok.kind == "OP" and tok.text == "(":
            node = self.parse_expr()
            self.expect(")")
            return node
        self.error(f"unexpected {tok.text or 'end of input'!r}", tok)


def parse_model(text: str, name: str = "model") -> ModelFile:
    variables, objective, constraints = _Parser(text).parse()
    return ModelFile(variables, objective, constraints, name)


def render_model(mf: ModelFile) -> str:
    decls = ", ".join(v.name if v.initial is None else f"{v.name}={v.initial!r}" for v in mf.variables)
    lines = [f"# {mf.name}"]
    if decls:
        lines.append(f"var {decls};")
    lines.append(f"min {render(mf.objective)};")
    if mf.constraints:
        lines.append("s.t.")
        for c in mf.constraints:
            lines.append(f"{render(c.expr)} {c.relation} {c.rhs!r};")
    return "\n".join(lines) + "\n"


# ---------- Compilation ----------
def _stack(nodes: List[ExprNode]):
    def values(x):
        return np.array([evaluate(node, x) for node in nodes], dtype=float)

    def jacobian(x):
        cols = [evaluate_dual(node, x).grad for node in nodes]
        return np.column_stack(cols) if cols else np.zeros((len(x), 0))

    return values, jacobian


def compile_model(mf: ModelFile) -> ProblemModel:
    if is_constant(mf.objective):
        logger.debug("%s: objective does not depend on any variable", mf.name)
    h, jac_h = _stack([c.expr for c in mf.equalities])
    c, jac_c = _stack([c.expr for c in mf.inequalities])
    objective = mf.objective
    start = [0.0 if v.initial is None else v.initial for v in mf.variables]
    return ProblemModel(
        name=mf.name,
        n=len(mf.variables),
        m_e=len(mf.equalities),
        m=len(mf.inequalities),
        f=lambda x: evaluate(objective, x),
        grad_f=lambda x: evaluate_dual(objective, x).grad,
        h=h if mf.equalities else None,
        jac_h=jac_h if mf.equalities else None,
        c=c if mf.inequalities else None,
        jac_c=jac_c if mf.inequalities else None,
        standard_start=start,
        description=f"text model ({len(mf.variables)} variables)",
    )


def load_model(path) -> ProblemModel:
    """Read, parse and compile a model file; the problem is named after the file stem."""
    path = Path(path)
    raw = path.read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        line = raw.count(b"\n", 0, exc.start) + 1
        column = exc.start - (raw.rfind(b"\n", 0, exc.start) + 1) + 1
        raise ModelSyntaxError(f"{path.name} is not UTF-8 text (byte 0x{raw[exc.start]:02x})",
                               line, column) from exc
    return compile_model(parse_model(text, name=path.stem.upper()))
