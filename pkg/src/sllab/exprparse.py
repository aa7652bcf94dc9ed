"""Scalar coefficient expressions: parsing, printing and evaluation.

Coefficient functions (weights, potentials, spectral densities, mass
functions) are written as short formulas such as ``(3*abs(x)+1)^(-4/3)``.
This module turns such text into an immutable AST over one free variable
and evaluates it at real points.  Domain violations raise
:class:`ExprDomainError` instead of producing NaN.

Grammar, loosest binding first::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' unary)?          # right-associative
    atom    := number | name | name '(' expr ')' | '(' expr ')'

The name ``pi`` is a reserved constant.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Optional, Union

__all__ = [
    "Expr", "Num", "Var", "Const", "Neg", "BinOp", "Call",
    "ExprError", "ExprSyntaxError", "ExprNameError", "ExprDomainError",
    "FUNCTIONS", "CONSTANTS", "parse", "evaluate", "to_text", "compile_expr",
    "free_variable", "Function",
]


class ExprError(ValueError):
    """Base class for expression errors."""


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class ExprNameError(ExprSyntaxError):
    """Unknown function name or a second free variable."""


class ExprDomainError(ExprError):
    def __init__(self, message: str, subexpr: str, argument: float):
        super().__init__(f"{message} in '{subexpr}' at argument {argument!r}")
        self.subexpr = subexpr
        self.argument = argument


# --------------------------------------------------------------------------
# AST
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float

    def __post_init__(self):
        if not (math.isfinite(self.value) and self.value >= 0.0):
            raise ValueError("numeric literals are finite and non-negative")


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


Expr = Union[Num, Var, Const, Neg, BinOp, Call]


def _sign(v: float) -> float:
    return float((v > 0) - (v < 0))


FUNCTIONS: dict[str, Callable[[float], float]] = {
    "sqrt": math.sqrt, "exp": math.exp, "log": math.log,
    "sin": math.sin, "cos": math.cos, "cosh": math.cosh, "sinh": math.sinh,
    "atan": math.atan, "abs": abs, "sign": _sign,
}

CONSTANTS = {"pi": math.pi}

# --------------------------------------------------------------------------
# Tokenizer and parser
# --------------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str, var: Optional[str], constants: frozenset):
        self.tokens = _tokenize(text)
        self.i = 0
        self.var = var
        self.constants = constants

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, pos = self.take()
        if val != value or kind == "end":
            what = "end of input" if kind == "end" else repr(val)
            raise ExprSyntaxError(f"expected {value!r}, found {what}", pos)

    def parse(self) -> Expr:
        node = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected token {val!r}", pos)
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Expr:
        kind, val, pos = self.take()
        if kind == "num":
            return Num(float(val))
        if kind == "name":
            if self.peek()[:2] == ("op", "("):
                if val not in FUNCTIONS:
                    raise ExprNameError(f"unknown function {val!r}", pos)
                self.take()
                arg = self.expr()
                self.expect(")")
                return Call(val, arg)
            if val in FUNCTIONS:
                raise ExprSyntaxError(f"function {val!r} needs an argument", pos)
            if val in self.constants:
                return Const(val)
            if self.var is None:
                self.var = val
            elif val != self.var:
                raise ExprNameError(
                    f"unknown variable {val!r} (free variable is {self.var!r})", pos)
            return Var(val)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect(")")
            return node
        what = "end of input" if kind == "end" else repr(val)
        raise ExprSyntaxError(f"unexpected {what}", pos)


def parse(text: str, var: Optional[str] = None,
          extra_constants: tuple[str, ...] = ()) -> Expr:
    """Parse *text* into an AST.

    ``var`` names the single free variable; when omitted, the first
    non-function, non-constant name becomes the variable and any other
    name is rejected.  ``extra_constants`` reserves further names as
    :class:`Const` nodes; the real evaluator only knows ``pi``, so those
    are meant for other evaluators walking the same tree.
    """
    if not isinstance(text, str) or not text.strip():
        raise ExprSyntaxError("empty expression", 0)
    constants = frozenset(CONSTANTS) | frozenset(extra_constants)
    return _Parser(text, var, constants).parse()


# --------------------------------------------------------------------------
# Printing
# --------------------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def _prec(node: Expr) -> int:
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return _PREC["neg"]
    return 5


def _num_text(v: float) -> str:
    if v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def to_text(node: Expr) -> str:
    """Print *node* so that ``parse(to_text(node)) == node``."""
    if isinstance(node, Num):
        return _num_text(node.value)
    if isinstance(node, (Var, Const)):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({to_text(node.arg)})"
    if isinstance(node, Neg):
        inner = to_text(node.operand)
        if _prec(node.operand) < _PREC["^"]:
            inner = f"({inner})"
        return "-" + inner
    p = _PREC[node.op]
    left, right = to_text(node.left), to_text(node.right)
    if node.op == "^":
        if _prec(node.left) <= p:
            left = f"({left})"
        if _prec(node.right) < p:
            right = f"({right})"
        return f"{left}^{right}"
    if _prec(node.left) < p:
        left = f"({left})"
    if _prec(node.right) <= p:
        right = f"({right})"
    return f"{left}{node.op}{right}"


# --------------------------------------------------------------------------
# Evaluation
# --------------------------------------------------------------------------

def _checked_call(func: str, v: float, node: Expr) -> float:
    if func == "sqrt" and v < 0:
        raise ExprDomainError("sqrt of negative number", to_text(node), v)
    if func == "log" and v <= 0:
        raise ExprDomainError("log of non-positive number", to_text(node), v)
    try:
        return FUNCTIONS[func](v)
    except (OverflowError, ValueError) as exc:
        raise ExprDomainError(str(exc), to_text(node), v) from None


def _checked_pow(b: float, p: float, node: Expr) -> float:
    if b < 0 and not float(p).is_integer():
        raise ExprDomainError("negative base with non-integer exponent", to_text(node), b)
    if b == 0 and p < 0:
        raise ExprDomainError("division by zero", to_text(node), b)
    try:
        return math.pow(b, p)
    except OverflowError:
        raise ExprDomainError("overflow", to_text(node), b) from None


def _checked_div(a: float, b: float, node: Expr) -> float:
    if b == 0:
        raise ExprDomainError("division by zero", to_text(node), b)
    return a / b


def compile_expr(node: Expr) -> Callable[[float], float]:
    """Build a fast closure ``f(x)`` equivalent to ``evaluate(node, x)``."""
    if isinstance(node, Num):
        v = node.value
        return lambda x: v
    if isinstance(node, Var):
        return lambda x: x
    if isinstance(node, Const):
        if node.name not in CONSTANTS:
            raise ExprError(f"constant {node.name!r} has no real value")
        v = CONSTANTS[node.name]
        return lambda x: v
    if isinstance(node, Neg):
        f = compile_expr(node.operand)
        return lambda x: -f(x)
    if isinstance(node, Call):
        f = compile_expr(node.arg)
        func = node.func
        if func in ("abs", "sign", "sin", "cos", "atan"):
            g = FUNCTIONS[func]
            return lambda x: g(f(x))
        return lambda x: _checked_call(func, f(x), node)
    fl, fr = compile_expr(node.left), compile_expr(node.right)
    op = node.op
    if op == "+":
        return lambda x: fl(x) + fr(x)
    if op == "-":
        return lambda x: fl(x) - fr(x)
    if op == "*":
        return lambda x: fl(x) * fr(x)
    if op == "/":
        def div(x):
            d = fr(x)
            if d == 0:
                raise ExprDomainError("division by zero", to_text(node), x)
            return fl(x) / d
        return div
    return lambda x: _checked_pow(fl(x), fr(x), node)


def evaluate(node: Expr, x: float) -> float:
    """Evaluate *node* at the real point *x* by walking the tree."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return float(x)
    if isinstance(node, Const):
        if node.name not in CONSTANTS:
            raise ExprError(f"constant {node.name!r} has no real value")
        return CONSTANTS[node.name]
    if isinstance(node, Neg):
        return -evaluate(node.operand, x)
    if isinstance(node, Call):
        return _checked_call(node.func, evaluate(node.arg, x), node)
    a, b = evaluate(node.left, x), evaluate(node.right, x)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if node.op == "/":
        return _checked_div(a, b, node)
    return _checked_pow(a, b, node)


def free_variable(node: Expr) -> Optional[str]:
    """Name of the free variable, or None for a constant expression."""
    if isinstance(node, Var):
        return node.name
    if isinstance(node, (Neg, Call)):
        return free_variable(node.operand if isinstance(node, Neg) else node.arg)
    if isinstance(node, BinOp):
        return free_variable(node.left) or free_variable(node.right)
    return None


class Function:
    """A parsed expression bundled with its text and a compiled evaluator.

    Instances are callable on floats and on numpy arrays (elementwise).
    """

    __slots__ = ("text", "var", "expr", "_f")

    def __init__(self, text: str, var: str = "x"):
        self.text = text
        self.var = var
        self.expr = parse(text, var)
        self._f = compile_expr(self.expr)

    def __call__(self, x):
        if isinstance(x, (int, float)):
            return self._f(float(x))
        import numpy as np
        arr = np.asarray(x, dtype=float)
        out = np.empty_like(arr)
        flat, res = arr.ravel(), out.ravel()
        for k, v in enumerate(flat):
            res[k] = self._f(float(v))
        return out if arr.ndim else float(out)

    def __repr__(self):
        return f"Function({self.text!r}, var={self.var!r})"

    def __eq__(self, other):
        return isinstance(other, Function) and (self.expr, self.var) == (other.expr, other.var)

    def __hash__(self):
        return hash((self.expr, self.var))
