"""Density expressions: a small arithmetic language for measure densities.

Grammar (EBNF)::

    expr    = term { ("+" | "-") term } ;
    term    = unary { ("*" | "/") unary } ;
    unary   = ("-" | "+") unary | power ;
    power   = primary [ "^" unary ] ;          (* right-associative *)
    primary = number | name | name "(" expr ")" | "(" expr ")" ;
    number  = digits [ "." digits ] [ ("e" | "E") [ "+" | "-" ] digits ]
            | "." digits [ exponent ] ;

``^`` binds tighter than unary minus (``-2^2 == -4``), unary minus binds
tighter than ``*`` and ``/``, which bind tighter than ``+`` and ``-``.
Functions: exp, log, sqrt, abs, sin, cos (one argument each).
Constants: pi, e.  Variables must be declared when parsing.

Evaluation is vectorised over numpy arrays.  Any domain violation or
non-finite result raises :class:`EvaluationError`; nothing is clipped.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Mapping, Union

import numpy as np

__all__ = [
    "DensityExpr",
    "ExprError",
    "ParseError",
    "UnknownIdentifierError",
    "ArityError",
    "EvaluationError",
    "parse",
    "FUNCTIONS",
    "CONSTANTS",
]

FUNCTIONS = ("exp", "log", "sqrt", "abs", "sin", "cos")
CONSTANTS = {"pi": math.pi, "e": math.e}
KNOWN_VARIABLES = frozenset({"t", "r", "theta"})


class ExprError(ValueError):
    """Base class for density-expression errors."""


class ParseError(ExprError):
    def __init__(self, message: str, position: int, source: str = ""):
        self.position = position
        self.source = source
        super().__init__(f"{message} at position {position}")


class UnknownIdentifierError(ParseError):
    pass


class ArityError(ParseError):
    pass


class EvaluationError(ExprError):
    """Raised when an expression is undefined at some binding.

    ``bindings`` holds the scalar variable values at the first offending point.
    """

    def __init__(self, message: str, bindings: Mapping[str, float]):
        self.bindings = dict(bindings)
        where = ", ".join(f"{k}={v!r}" for k, v in sorted(self.bindings.items()))
        super().__init__(f"{message} (at {where})" if where else message)


# --- AST -------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Union[Num, Var, Neg, BinOp, Call]


# --- lexer -----------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    pos: int


def _tokenize(source: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}", pos, source)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(_Token(kind, m.group(), pos))
        pos = m.end()
    tokens.append(_Token("end", "", len(source)))
    return tokens


# --- parser ----------------------------------------------------------------


class _Parser:
    def __init__(self, source: str, allowed_vars: frozenset[str]):
        self.source = source
        self.allowed = allowed_vars
        self.tokens = _tokenize(source)
        self.i = 0
        self.used: set[str] = set()

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def _advance(self) -> _Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def _expect(self, text: str) -> _Token:
        if self.tok.text != text:
            found = self.tok.text or "end of input"
            raise ParseError(f"expected {text!r}, found {found!r}", self.tok.pos, self.source)
        return self._advance()

    def parse(self) -> Node:
        node = self.expr()
        if self.tok.kind != "end":
            raise ParseError(f"unexpected token {self.tok.text!r}", self.tok.pos, self.source)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.tok.text in ("+", "-"):
            op = self._advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.tok.text in ("*", "/"):
            op = self._advance().text
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.tok.text == "-":
            self._advance()
            return Neg(self.unary())
        if self.tok.text == "+":
            self._advance()
            return self.unary()
        return self.power()

    def power(self) -> Node:
        base = self.primary()
        if self.tok.text == "^":
            self._advance()
            # exponent may itself carry a sign: 2^-1
            return BinOp("^", base, self.unary())
        return base

    def primary(self) -> Node:
        t = self.tok
        if t.kind == "num":
            self._advance()
            return Num(float(t.text))
        if t.kind == "name":
            self._advance()
            if self.tok.text == "(":
                if t.text not in FUNCTIONS:
                    raise UnknownIdentifierError(f"unknown function {t.text!r}", t.pos, self.source)
                self._advance()
                if self.tok.text == ")":
                    raise ArityError(f"{t.text} expects 1 argument, got 0", self.tok.pos, self.source)
                arg = self.expr()
                if self.tok.text == ",":
                    raise ArityError(f"{t.text} expects 1 argument, got more", self.tok.pos, self.source)
                self._expect(")")
                return Call(t.text, arg)
            if t.text in FUNCTIONS:
                raise ArityError(f"function {t.text!r} used without argument", t.pos, self.source)
            if t.text in self.allowed:
                self.used.add(t.text)
                return Var(t.text)
            if t.text in CONSTANTS:
                return Num(CONSTANTS[t.text])
            raise UnknownIdentifierError(f"unknown identifier {t.text!r}", t.pos, self.source)
        if t.text == "(":
            self._advance()
            node = self.expr()
            self._expect(")")
            return node
        found = t.text or "end of input"
        raise ParseError(f"unexpected {found!r}", t.pos, self.source)


# --- evaluation ------------------------------------------------------------


def _fail(message, mask, bindings):
    """Raise with the scalar bindings at the first index where ``mask`` holds."""
    idx = np.argwhere(np.atleast_1d(mask))[0] if np.ndim(mask) else None
    point = {}
    for name, val in bindings.items():
        arr = np.asarray(val, dtype=float)
        if idx is not None and arr.ndim:
            arr = np.broadcast_to(arr, np.shape(mask))[tuple(idx)]
        point[name] = float(arr)
    raise EvaluationError(message, point)


def _eval(node: Node, env: Mapping[str, np.ndarray], bindings) -> np.ndarray:
    if isinstance(node, Num):
        return np.float64(node.value)
    if isinstance(node, Var):
        return env[node.name]
    if isinstance(node, Neg):
        return -_eval(node.operand, env, bindings)
    if isinstance(node, Call):
        x = _eval(node.arg, env, bindings)
        f = node.func
        if f == "log":
            bad = x <= 0
            if np.any(bad):
                _fail("log of nonpositive value", bad, bindings)
            return np.log(x)
        if f == "sqrt":
            bad = x < 0
            if np.any(bad):
                _fail("sqrt of negative value", bad, bindings)
            return np.sqrt(x)
        with np.errstate(all="ignore"):
            out = {"exp": np.exp, "abs": np.abs, "sin": np.sin, "cos": np.cos}[f](x)
        bad = ~np.isfinite(out)
        if np.any(bad):
            _fail(f"{f} produced a non-finite value", bad, bindings)
        return out
    # BinOp
    a = _eval(node.left, env, bindings)
    b = _eval(node.right, env, bindings)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if node.op == "/":
        bad = b == 0
        if np.any(bad):
            _fail("division by zero", bad, bindings)
        return a / b
    # "^"
    a_arr, b_arr = np.broadcast_arrays(a, b)
    zero_neg = (a_arr == 0) & (b_arr < 0)
    if np.any(zero_neg):
        _fail("zero raised to a negative power", zero_neg, bindings)
    neg_frac = (a_arr < 0) & (b_arr != np.round(b_arr))
    if np.any(neg_frac):
        _fail("negative base with non-integer exponent", neg_frac, bindings)
    with np.errstate(all="ignore"):
        return np.power(a, b)


@dataclass(frozen=True)
class DensityExpr:
    """A parsed density expression.

    Instances are immutable; :meth:`eval` is pure and vectorised.
    """

    source: str
    ast: Node = field(repr=False, compare=False)
    variables: frozenset[str]
    used: frozenset[str] = frozenset()

    def __call__(self, **bindings):
        return self.eval(bindings)

    def eval(self, bindings: Mapping[str, object]) -> np.ndarray | float:
        missing = self.used - set(bindings)
        if missing:
            raise EvaluationError(f"unbound variable(s) {sorted(missing)}", {})
        env = {k: np.asarray(bindings[k], dtype=float) for k in self.used}
        with np.errstate(all="ignore"):
            out = _eval(self.ast, env, {k: env[k] for k in sorted(env)})
        shape = np.broadcast_shapes(*(v.shape for v in env.values())) if env else ()
        out = np.broadcast_to(np.asarray(out, dtype=float), shape)
        bad = ~np.isfinite(out)
        if np.any(bad):
            _fail("non-finite result", bad, env)
        if out.ndim == 0:
            return float(out)
        return np.array(out)


def parse(source: str, allowed_vars=KNOWN_VARIABLES) -> DensityExpr:
    """Parse ``source`` into a :class:`DensityExpr`.

    Only names in ``allowed_vars`` may appear as variables; the declared set
    is kept on the result even if some of them are unused.
    """
    if not isinstance(source, str) or not source.strip():
        raise ParseError("empty expression", 0, source if isinstance(source, str) else "")
    allowed = frozenset(allowed_vars)
    clash = allowed & (set(FUNCTIONS) | set(CONSTANTS))
    if clash:
        raise ExprError(f"variable names shadow builtins: {sorted(clash)}")
    p = _Parser(source, allowed)
    ast = p.parse()
    return DensityExpr(source, ast, allowed, frozenset(p.used))
