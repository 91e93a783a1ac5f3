"""A small expression language for test functions.

Grammar (``^`` binds tighter than unary minus, which binds tighter than
``* /``; binaries are left-associative, ``^`` right-associative)::

    expr     := term (("+" | "-") term)*
    term     := unary (("*" | "/") unary)*
    unary    := "-" unary | power
    power    := atom ("^" exponent)?
    exponent := "-"? NUMBER ("^" exponent)?
    atom     := NUMBER | VAR | FUNC "(" expr ("," expr)* ")" | "(" expr ")"

Variables are ``x`` in 1D and ``x1``, ``x2`` in 2D. Functions: ``abs``,
``exp`` (one argument), ``min``, ``max`` (two), ``ind(lo, hi)`` on ``x`` and
``ind2(lo1, hi1, lo2, hi2)`` on ``(x1, x2)``; indicator bounds must be
constant. Values are extended reals: indicators produce ``+inf`` off their box.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

from .core import GridSpec, ImproperFunction, SampledFunction


class DSLError(ValueError):
    pass


class ParseError(DSLError):
    def __init__(self, position: int, expected: set[str] | frozenset[str], found: str = ""):
        self.position = position
        self.expected = frozenset(expected)
        found = f", found {found!r}" if found else ""
        super().__init__(f"offset {position}: expected {' | '.join(sorted(self.expected))}{found}")


class EvalError(DSLError):
    def __init__(self, node: int | None, cause: str):
        self.node = node
        self.cause = cause
        where = f"node {node}" if node is not None else "expression"
        super().__init__(f"{where}: {cause}")


# ------------------------------------------------------------------- AST


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class Bin:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: float


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple["Expr", ...]


Expr = Union[Num, Var, Neg, Bin, Pow, Call]

FUNCS = {"abs": 1, "exp": 1, "min": 2, "max": 2, "ind": 2, "ind2": 4}
VARS = {"x", "x1", "x2"}

# ------------------------------------------------------------------ lexer

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>\S))"
)


@dataclass(frozen=True)
class _Tok:
    kind: str  # num | name | op | end
    text: str
    pos: int


def _lex(src: str) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(src):
        if src[pos:].strip() == "":
            break
        m = _TOKEN.match(src, pos)
        start = m.start(m.lastgroup)
        if m.lastgroup == "op" and m.group("op") not in "+-*/^(),":
            raise ParseError(start, {"number", "variable", "function", "operator"}, m.group("op"))
        toks.append(_Tok(m.lastgroup, m.group(m.lastgroup), start))
        pos = m.end()
    toks.append(_Tok("end", "", len(src)))
    return toks


# ----------------------------------------------------------------- parser


class _Parser:
    def __init__(self, src: str):
        self.toks = _lex(src)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def fail(self, expected):
        raise ParseError(self.tok.pos, expected, self.tok.text)

    def take(self, text: str) -> bool:
        if self.tok.kind == "op" and self.tok.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text: str):
        if not self.take(text):
            self.fail({repr(text)})

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok.kind != "end":
            self.fail({"operator", "end of input"})
        return e

    def expr(self) -> Expr:
        left = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.tok.text
            self.i += 1
            left = Bin(op, left, self.term())
        return left

    def term(self) -> Expr:
        left = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.tok.text
            self.i += 1
            left = Bin(op, left, self.unary())
        return left

    def unary(self) -> Expr:
        if self.take("-"):
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.take("^"):
            return Pow(base, self.exponent())
        return base

    def exponent(self) -> float:
        pos = self.tok.pos
        sign = -1.0 if self.take("-") else 1.0
        if self.tok.kind != "num":
            self.fail({"number"} if sign < 0 else {"number", "'-'"})
        value = sign * float(self.tok.text)
        self.i += 1
        if self.take("^"):
            try:
                value = math.pow(value, self.exponent())
            except (OverflowError, ValueError, ZeroDivisionError):
                raise ParseError(pos, {"representable constant exponent"})
        if not math.isfinite(value):
            raise ParseError(pos, {"representable constant exponent"})
        return value

    def atom(self) -> Expr:
        tok = self.tok
        if tok.kind == "num":
            if not math.isfinite(float(tok.text)):
                raise ParseError(tok.pos, {"finite number"}, tok.text)
            self.i += 1
            return Num(float(tok.text))
        if tok.kind == "name":
            self.i += 1
            if tok.text in VARS:
                return Var(tok.text)
            if tok.text in FUNCS:
                return self.call(tok)
            raise ParseError(tok.pos, {"variable", "function"}, tok.text)
        if self.take("("):
            e = self.expr()
            self.expect(")")
            return e
        self.fail({"number", "variable", "function", "'('", "'-'"})

    def call(self, name_tok: _Tok) -> Expr:
        self.expect("(")
        args = [self.expr()]
        while self.take(","):
            args.append(self.expr())
        arity = FUNCS[name_tok.text]
        if len(args) != arity:
            if len(args) < arity:
                self.fail({"','"})
            raise ParseError(name_tok.pos, {f"{arity} argument(s) for {name_tok.text}"})
        self.expect(")")
        if name_tok.text in ("ind", "ind2") and any(free_vars(a) for a in args):
            raise ParseError(name_tok.pos, {"constant indicator bounds"})
        return Call(name_tok.text, tuple(args))


def parse(src: str) -> Expr:
    return _Parser(src).parse()


def free_vars(e: Expr) -> set[str]:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Num):
        return set()
    if isinstance(e, Neg):
        return free_vars(e.arg)
    if isinstance(e, Pow):
        return free_vars(e.base)
    if isinstance(e, Bin):
        return free_vars(e.left) | free_vars(e.right)
    if e.name == "ind":
        return {"x"}
    if e.name == "ind2":
        return {"x1", "x2"}
    return set().union(*(free_vars(a) for a in e.args))


def infer_dim(e: Expr) -> int:
    names = free_vars(e)
    if names & {"x1", "x2"}:
        if "x" in names:
            raise DSLError("cannot mix x with x1/x2")
        return 2
    return 1


# ---------------------------------------------------------------- printer


def to_text(e: Expr) -> str:
    """Fully parenthesised text that parses back to the same tree."""
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        return f"(-{to_text(e.arg)})"
    if isinstance(e, Bin):
        return f"({to_text(e.left)} {e.op} {to_text(e.right)})"
    if isinstance(e, Pow):
        base = to_text(e.base)
        if isinstance(e.base, Pow):
            base = f"({base})"
        return f"{base}^{e.exponent!r}"
    return f"{e.name}({', '.join(to_text(a) for a in e.args)})"


# -------------------------------------------------------------- evaluator


def _fail(mask: np.ndarray, cause: str):
    bad = np.flatnonzero(np.broadcast_to(mask, mask.shape).ravel())
    raise EvalError(int(bad[0]) if bad.size else None, cause)


def _guard(v: np.ndarray, what: str) -> np.ndarray:
    if np.isnan(v).any():
        _fail(np.isnan(v), f"{what} is undefined")
    if np.isneginf(v).any():
        _fail(np.isneginf(v), f"{what} gives -inf")
    return v


def evaluate(e: Expr, env: Mapping[str, np.ndarray]) -> np.ndarray:
    """Evaluate on arrays of variable values; every error names the first bad entry."""
    shape = np.broadcast(*env.values()).shape if env else ()
    with np.errstate(all="ignore"):
        return np.broadcast_to(_eval(e, env), shape).astype(np.float64)


def _eval(e: Expr, env) -> np.ndarray:
    if isinstance(e, Num):
        return np.float64(e.value)
    if isinstance(e, Var):
        if e.name not in env:
            raise EvalError(None, f"variable {e.name} is not bound")
        return np.asarray(env[e.name], dtype=np.float64)
    if isinstance(e, Neg):
        return _guard(-_eval(e.arg, env), "negation")
    if isinstance(e, Pow):
        return _pow(_eval(e.base, env), e.exponent)
    if isinstance(e, Bin):
        a, b = _eval(e.left, env), _eval(e.right, env)
        if e.op == "+":
            return _guard(a + b, "sum")
        if e.op == "-":
            return _guard(a - b, "difference")
        if e.op == "*":
            a, b = np.broadcast_arrays(a, b)
            out = a * b
            # 0 * inf = 0
            out = np.where((a == 0) | (b == 0), 0.0, out)
            return _guard(out, "product")
        zero = np.asarray(b) == 0
        if zero.any():
            _fail(np.broadcast_to(zero, np.broadcast(a, b).shape), "division by zero")
        return _guard(a / b, "quotient")
    return _call(e, env)


def _pow(base: np.ndarray, p: float) -> np.ndarray:
    base = np.asarray(base)
    if p < 0 and (base == 0).any():
        _fail(base == 0, "zero to a negative power")
    if not float(p).is_integer() and (base < 0).any():
        _fail(base < 0, "negative base to a fractional power")
    if np.isfinite(base).all() and np.isinf(out := np.power(base, p)).any():
        _fail(np.isinf(out), "power overflows")
    return _guard(np.power(base, p), "power")


def _call(e: Call, env) -> np.ndarray:
    if e.name in ("ind", "ind2"):
        bounds = [float(_eval(a, env)) for a in e.args]
        names = ("x",) if e.name == "ind" else ("x1", "x2")
        inside = True
        for k, name in enumerate(names):
            if name not in env:
                raise EvalError(None, f"{e.name} needs variable {name}")
            lo, hi = bounds[2 * k], bounds[2 * k + 1]
            v = np.asarray(env[name])
            inside = inside & (v >= lo) & (v <= hi)
        return np.where(inside, 0.0, np.inf)
    args = [_eval(a, env) for a in e.args]
    if e.name == "abs":
        return np.abs(args[0])
    if e.name == "exp":
        a = args[0]
        out = np.exp(a)
        if (np.isinf(out) & np.isfinite(a)).any():
            _fail(np.isinf(out) & np.isfinite(a), "exp overflows")
        return out
    if e.name == "min":
        return np.minimum(*args)
    return np.maximum(*args)


def variables_for(grid: GridSpec) -> dict[str, np.ndarray]:
    pts = grid.points
    if grid.dim == 1:
        return {"x": pts[:, 0]}
    return {"x1": pts[:, 0], "x2": pts[:, 1]}


def sample(e: Expr, grid: GridSpec) -> SampledFunction:
    """Evaluate ``e`` at every node of ``grid``."""
    allowed = {"x"} if grid.dim == 1 else {"x1", "x2"}
    extra = free_vars(e) - allowed
    if extra:
        raise DSLError(f"variables {sorted(extra)} do not match a {grid.dim}D grid")
    vals = evaluate(e, variables_for(grid))
    if grid.dim == 1 and vals.shape == ():
        vals = np.full(grid.size, float(vals))
    vals = np.broadcast_to(vals, (grid.size,))
    f = SampledFunction(grid, vals)
    if not f.is_proper:
        raise ImproperFunction("expression is +inf at every node")
    return f
