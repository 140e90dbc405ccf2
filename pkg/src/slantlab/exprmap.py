"""Tiny expression language with second-order forward-mode evaluation.

Expressions are written over declared variables, e.g. ``x1*cos(x2)``.
Supported: numeric literals, the constant ``pi``, ``+ - * /``, unary minus,
integer powers ``a^n`` (``**`` is accepted as a synonym), and the unary
functions sin, cos, tan, exp, log, sqrt, atan.

Precedence from tightest to loosest: ``^``, unary ``-``, ``* /``, ``+ -``.
Binary operators associate to the left.

Evaluation propagates truncated Taylor jets ``(value, gradient, hessian)``
through the tree, so first and second derivatives are exact up to round-off.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import (
    ArityError,
    DimensionError,
    EvaluationDomainError,
    ExprSyntaxError,
    UnknownIdentifierError,
)

FUNCTIONS = ("sin", "cos", "tan", "exp", "log", "sqrt", "atan")
CONSTANTS = {"pi": math.pi}


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Var:
    name: str
    index: int


@dataclass(frozen=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: int


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Union[Num, Const, Var, Neg, BinOp, Pow, Call]


@dataclass(frozen=True)
class Expression:
    """A parsed expression bound to an ordered parameter list."""

    root: Node
    params: tuple
    source: str = ""

    def __str__(self):
        return pretty(self.root)

    @property
    def nparams(self):
        return len(self.params)

    def free_variables(self):
        found = set()

        def walk(node):
            if isinstance(node, Var):
                found.add(node.name)
            elif isinstance(node, Neg):
                walk(node.arg)
            elif isinstance(node, BinOp):
                walk(node.left)
                walk(node.right)
            elif isinstance(node, Pow):
                walk(node.base)
            elif isinstance(node, Call):
                walk(node.arg)

        walk(self.root)
        return found

    def is_constant(self):
        return not self.free_variables()

    def __call__(self, x):
        return evaluate(self, x)


# ---------------------------------------------------------------------------
# Tokenizer and parser
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Token:
    kind: str  # num, ident, op, end
    text: str
    line: int
    col: int


def _tokenize(source):
    tokens = []
    i, line, col = 0, 1, 1
    n = len(source)
    while i < n:
        c = source[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c.isspace():
            i += 1
            col += 1
            continue
        start_col = col
        if c.isdigit() or (c == "." and i + 1 < n and source[i + 1].isdigit()):
            j = i
            while j < n and (source[j].isdigit() or source[j] == "."):
                j += 1
            if j < n and source[j] in "eE":
                k = j + 1
                if k < n and source[k] in "+-":
                    k += 1
                if k < n and source[k].isdigit():
                    j = k
                    while j < n and source[j].isdigit():
                        j += 1
            text = source[i:j]
            try:
                float(text)
            except ValueError:
                raise ExprSyntaxError(f"malformed number '{text}'", line, start_col) from None
            tokens.append(_Token("num", text, line, start_col))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            tokens.append(_Token("ident", source[i:j], line, start_col))
            col += j - i
            i = j
            continue
        if source.startswith("**", i):
            tokens.append(_Token("op", "^", line, start_col))
            i += 2
            col += 2
            continue
        if c in "+-*/^(),":
            tokens.append(_Token("op", c, line, start_col))
            i += 1
            col += 1
            continue
        raise ExprSyntaxError(f"unexpected character '{c}'", line, start_col)
    tokens.append(_Token("end", "", line, col))
    return tokens


class _Parser:
    def __init__(self, source, params):
        self.tokens = _tokenize(source)
        self.pos = 0
        self.params = {name: k for k, name in enumerate(params)}

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, message, tok=None, cls=ExprSyntaxError):
        tok = tok or self.peek()
        if tok.kind == "end":
            message = f"{message} at end of input"
        return cls(message, tok.line, tok.col)

    def expect(self, text):
        tok = self.peek()
        if tok.kind != "op" or tok.text != text:
            raise self.error(f"expected '{text}'")
        return self.advance()

    def parse(self):
        node = self.expr()
        if self.peek().kind != "end":
            raise self.error(f"unexpected token '{self.peek().text}'")
        return node

    def expr(self):
        node = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.advance().text
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.peek().kind == "op" and self.peek().text == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek().kind == "op" and self.peek().text == "^":
            self.advance()
            sign = 1
            if self.peek().kind == "op" and self.peek().text == "-":
                self.advance()
                sign = -1
            tok = self.peek()
            if tok.kind != "num" or not tok.text.isdigit():
                raise self.error("exponent must be an integer literal")
            self.advance()
            base = Pow(base, sign * int(tok.text))
            if self.peek().kind == "op" and self.peek().text == "^":
                raise self.error("chained powers need parentheses")
        return base

    def atom(self):
        tok = self.peek()
        if tok.kind == "num":
            self.advance()
            return Num(float(tok.text))
        if tok.kind == "ident":
            self.advance()
            name = tok.text
            if name in FUNCTIONS:
                if not (self.peek().kind == "op" and self.peek().text == "("):
                    raise self.error(f"function '{name}' requires parentheses")
                open_tok = self.advance()
                if self.peek().kind == "op" and self.peek().text == ")":
                    raise self.error(f"'{name}' takes exactly 1 argument, got 0", open_tok, ArityError)
                args = [self.expr()]
                while self.peek().kind == "op" and self.peek().text == ",":
                    self.advance()
                    args.append(self.expr())
                self.expect(")")
                if len(args) != 1:
                    raise self.error(
                        f"'{name}' takes exactly 1 argument, got {len(args)}", open_tok, ArityError
                    )
                return Call(name, args[0])
            if name in self.params:
                return Var(name, self.params[name])
            if name in CONSTANTS:
                return Const(name)
            raise self.error(f"unknown identifier '{name}'", tok, UnknownIdentifierError)
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        if tok.kind == "end":
            raise self.error("syntax error: expected an operand")
        raise self.error(f"syntax error: unexpected '{tok.text}'")


def parse(source: str, params: Sequence[str]) -> Expression:
    """Parse ``source`` into an :class:`Expression` over ``params``."""
    if not source or not source.strip():
        raise ExprSyntaxError("empty expression", 1, 1)
    params = tuple(params)
    if len(set(params)) != len(params):
        raise ValueError(f"duplicate parameter names in {params}")
    root = _Parser(source, params).parse()
    return Expression(root, params, source)


# ---------------------------------------------------------------------------
# Pretty printing
# ---------------------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _prec(node):
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return 3
    if isinstance(node, Pow):
        return 4
    return 5


def pretty(node: Node) -> str:
    """Render a tree with the minimal parentheses that re-parse to it."""
    if isinstance(node, Expression):
        node = node.root
    if isinstance(node, Num):
        text = repr(node.value)
        return f"({text})" if node.value < 0 else text
    if isinstance(node, Const):
        return node.name
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({pretty(node.arg)})"
    if isinstance(node, Neg):
        inner = pretty(node.arg)
        if _prec(node.arg) < 3 or isinstance(node.arg, Neg):
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(node, Pow):
        inner = pretty(node.base)
        if _prec(node.base) <= 4:
            inner = f"({inner})"
        return f"{inner}^{node.exponent}"
    if isinstance(node, BinOp):
        p = _PREC[node.op]
        left = pretty(node.left)
        if _prec(node.left) < p:
            left = f"({left})"
        right = pretty(node.right)
        if _prec(node.right) <= p:
            right = f"({right})"
        return f"{left} {node.op} {right}"
    raise TypeError(f"not an expression node: {node!r}")


# ---------------------------------------------------------------------------
# Jet evaluation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Jet2:
    """Value, gradient and (symmetric) hessian of a scalar expression."""

    value: float
    gradient: np.ndarray
    hessian: np.ndarray


class _Evaluator:
    def __init__(self, x, order):
        self.x = x
        self.n = len(x)
        self.order = order

    def const(self, c):
        g = np.zeros(self.n) if self.order >= 1 else None
        h = np.zeros((self.n, self.n)) if self.order >= 2 else None
        return (float(c), g, h)

    def compose(self, a, f0, f1, f2):
        """Chain rule for a scalar function with derivatives f1, f2 at a."""
        v, g, h = a
        gg = f1 * g if self.order >= 1 else None
        hh = f2 * np.outer(g, g) + f1 * h if self.order >= 2 else None
        return (f0, gg, hh)

    def eval(self, node):
        if isinstance(node, Num):
            return self.const(node.value)
        if isinstance(node, Const):
            return self.const(CONSTANTS[node.name])
        if isinstance(node, Var):
            v, g, h = self.const(self.x[node.index])
            if g is not None:
                g[node.index] = 1.0
            return (v, g, h)
        if isinstance(node, Neg):
            v, g, h = self.eval(node.arg)
            return (-v, None if g is None else -g, None if h is None else -h)
        if isinstance(node, BinOp):
            a = self.eval(node.left)
            b = self.eval(node.right)
            if node.op == "+":
                return self._lin(a, b, 1.0)
            if node.op == "-":
                return self._lin(a, b, -1.0)
            if node.op == "*":
                return self._mul(a, b)
            if b[0] == 0.0:
                raise EvaluationDomainError("division by zero", pretty(node))
            inv = self.compose(b, 1.0 / b[0], -1.0 / b[0] ** 2, 2.0 / b[0] ** 3)
            return self._mul(a, inv)
        if isinstance(node, Pow):
            a = self.eval(node.base)
            k = node.exponent
            v = a[0]
            if k == 0:
                return self.const(1.0)
            if v == 0.0 and k < 0:
                raise EvaluationDomainError("zero raised to a negative power", pretty(node))
            f0 = v ** k
            f1 = 1.0 if k == 1 else k * v ** (k - 1)
            f2 = 0.0 if k == 1 else k * (k - 1) * v ** (k - 2)
            return self.compose(a, f0, f1, f2)
        if isinstance(node, Call):
            a = self.eval(node.arg)
            v = a[0]
            fn = node.func
            if fn == "sin":
                s, c = math.sin(v), math.cos(v)
                return self.compose(a, s, c, -s)
            if fn == "cos":
                s, c = math.sin(v), math.cos(v)
                return self.compose(a, c, -s, -c)
            if fn == "tan":
                c = math.cos(v)
                if c == 0.0:
                    raise EvaluationDomainError("tan at a pole", pretty(node))
                t = math.tan(v)
                sec2 = 1.0 + t * t
                return self.compose(a, t, sec2, 2.0 * t * sec2)
            if fn == "exp":
                e = math.exp(v)
                return self.compose(a, e, e, e)
            if fn == "log":
                if v <= 0.0:
                    raise EvaluationDomainError(f"log of non-positive value {v!r}", pretty(node))
                return self.compose(a, math.log(v), 1.0 / v, -1.0 / (v * v))
            if fn == "sqrt":
                if v < 0.0 or (v == 0.0 and self.order >= 1):
                    raise EvaluationDomainError(f"sqrt of value {v!r}", pretty(node))
                r = math.sqrt(v)
                if self.order == 0:
                    return (r, None, None)
                return self.compose(a, r, 0.5 / r, -0.25 / (r * v))
            if fn == "atan":
                d = 1.0 / (1.0 + v * v)
                return self.compose(a, math.atan(v), d, -2.0 * v * d * d)
        raise TypeError(f"not an expression node: {node!r}")

    def _lin(self, a, b, s):
        g = a[1] + s * b[1] if self.order >= 1 else None
        h = a[2] + s * b[2] if self.order >= 2 else None
        return (a[0] + s * b[0], g, h)

    def _mul(self, a, b):
        va, ga, ha = a
        vb, gb, hb = b
        g = va * gb + vb * ga if self.order >= 1 else None
        h = None
        if self.order >= 2:
            cross = np.outer(ga, gb)
            h = va * hb + vb * ha + cross + cross.T
        return (va * vb, g, h)


def _check_point(e, x):
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != e.nparams:
        raise DimensionError(f"expected {e.nparams} parameters, got {x.shape[0]}")
    return x


def evaluate(e: Expression, x) -> float:
    """Plain value of ``e`` at ``x``."""
    x = _check_point(e, x)
    return _Evaluator(x, 0).eval(e.root)[0]


def eval_jet1(e: Expression, x):
    x = _check_point(e, x)
    v, g, _ = _Evaluator(x, 1).eval(e.root)
    return v, g


def eval_jet2(e: Expression, x) -> Jet2:
    """Exact value, gradient and hessian of ``e`` at ``x``."""
    x = _check_point(e, x)
    v, g, h = _Evaluator(x, 2).eval(e.root)
    return Jet2(v, g, h)


def eval_vector_map(components: Sequence[Expression], x, order=2):
    """Evaluate a vector of expressions.

    Returns ``(value, jacobian, hessians)`` with shapes ``(N,)``, ``(N, n)``
    and ``(N, n, n)``. With ``order=1`` hessians is ``None``; with ``order=0``
    only the value is filled in.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    N = len(components)
    n = x.shape[0]
    value = np.empty(N)
    jac = np.empty((N, n)) if order >= 1 else None
    hess = np.empty((N, n, n)) if order >= 2 else None
    for k, comp in enumerate(components):
        _check_point(comp, x)
        v, g, h = _Evaluator(x, order).eval(comp.root)
        value[k] = v
        if order >= 1:
            jac[k] = g
        if order >= 2:
            hess[k] = h
    return value, jac, hess


def parse_vector(sources: Sequence[str], params: Sequence[str]):
    return [parse(s, params) for s in sources]
