"""Coefficient expressions f(n), g(n), ... : a tiny grammar over the step index ``n``.

Grammar (EBNF)::

    expr    = term { ("+" | "-") term } ;
    term    = unary { ("*" | "/") unary } ;
    unary   = "-" unary | power ;
    power   = primary [ "^" unary ] ;          (* right-associative *)
    primary = number | "n" | ident "(" expr { "," expr } ")" | "(" expr ")" ;
    number  = digits [ "." digits ] [ ("e" | "E") [ "+" | "-" ] digits ] ;
    ident   = "exp" | "log" | "log10" | "sqrt" | "floor" | "abs" | "pow" | "uniform" ;

``uniform(lo, hi)`` draws from a counter-based stream keyed by
``(trial_seed, n, draw_counter)``, so evaluation is reproducible regardless of
the order in which coefficients are evaluated.
"""

from __future__ import annotations

import hashlib
import math
import re
import struct
from dataclasses import dataclass
from typing import Union

GENERATOR_ID = "blake2b-64(le64 seed, le64 n, le64 counter) >> 11, scaled by 2**-53"

# Coefficient slot i starts its draw counter at i * STREAM_STRIDE so that
# f(n) and g(n) never share draws within one step.
STREAM_STRIDE = 1 << 32

_MASK64 = (1 << 64) - 1


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, offset: int, text: str = ""):
        self.offset = offset
        self.text = text
        super().__init__(f"{message} at byte offset {offset}")


class ExprDomainError(ArithmeticError):
    """Evaluation left the real domain (log of a non-positive value, 0 division, ...)."""


# --- AST -------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str = "n"


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


@dataclass(frozen=True)
class Uniform:
    lo: "Expr"
    hi: "Expr"


Expr = Union[Num, Var, Neg, BinOp, Call, Uniform]

FUNCTIONS = {
    "exp": 1,
    "log": 1,
    "log10": 1,
    "sqrt": 1,
    "floor": 1,
    "abs": 1,
    "pow": 2,
    "uniform": 2,
}


# --- parsing ---------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<id>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^(),]))"
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    raw = text.encode("utf-8")
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            start = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ExprSyntaxError(f"unexpected character {text[start]!r}", _byte_offset(text, start), text)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), _byte_offset(text, start)))
        pos = m.end()
    tokens.append(("end", "", len(raw)))
    return tokens


def _byte_offset(text: str, index: int) -> int:
    return len(text[:index].encode("utf-8"))


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, off = self.take()
        if val != value or kind != "op":
            found = "end of input" if kind == "end" else repr(val)
            raise ExprSyntaxError(f"expected {value!r}, found {found}", off, self.text)

    def parse(self) -> Expr:
        e = self.expr()
        kind, val, off = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {val!r}", off, self.text)
        return e

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
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.primary()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def primary(self) -> Expr:
        kind, val, off = self.take()
        if kind == "num":
            return Num(float(val))
        if kind == "id":
            if val == "n":
                return Var("n")
            if val not in FUNCTIONS:
                raise ExprSyntaxError(f"unknown identifier {val!r}", off, self.text)
            self.expect("(")
            args = [self.expr()]
            while self.peek()[:2] == ("op", ","):
                self.take()
                args.append(self.expr())
            self.expect(")")
            if len(args) != FUNCTIONS[val]:
                raise ExprSyntaxError(
                    f"{val} takes {FUNCTIONS[val]} argument(s), got {len(args)}", off, self.text
                )
            if val == "uniform":
                return Uniform(args[0], args[1])
            return Call(val, tuple(args))
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(val)
        raise ExprSyntaxError(f"expected a number, 'n', a function or '(', found {found}", off, self.text)


def parse(text: str) -> Expr:
    return _Parser(text).parse()


def to_text(e: Expr) -> str:
    """Fully parenthesised rendering; ``parse(to_text(e)) == e``."""
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Var):
        return "n"
    if isinstance(e, Neg):
        return f"(-{to_text(e.arg)})"
    if isinstance(e, BinOp):
        return f"({to_text(e.left)} {e.op} {to_text(e.right)})"
    if isinstance(e, Uniform):
        return f"uniform({to_text(e.lo)}, {to_text(e.hi)})"
    if isinstance(e, Call):
        return f"{e.name}({', '.join(to_text(a) for a in e.args)})"
    raise TypeError(f"not an expression node: {e!r}")


def walk(e: Expr):
    yield e
    if isinstance(e, Neg):
        yield from walk(e.arg)
    elif isinstance(e, BinOp):
        yield from walk(e.left)
        yield from walk(e.right)
    elif isinstance(e, Uniform):
        yield from walk(e.lo)
        yield from walk(e.hi)
    elif isinstance(e, Call):
        for a in e.args:
            yield from walk(a)


def has_random(e: Expr) -> bool:
    return any(isinstance(x, Uniform) for x in walk(e))


def depends_on_n(e: Expr) -> bool:
    return any(isinstance(x, Var) for x in walk(e))


def is_constant(e: Expr) -> bool:
    return not (has_random(e) or depends_on_n(e))


# --- evaluation ------------------------------------------------------------

def uniform01(trial_seed: int, n: int, counter: int) -> float:
    """Counter-based draw in [0, 1): a keyed hash of (seed, n, counter)."""
    key = struct.pack("<QQQ", trial_seed & _MASK64, n & _MASK64, counter & _MASK64)
    word = int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little")
    return (word >> 11) * (1.0 / 9007199254740992.0)


@dataclass
class EvalContext:
    n: int
    trial_seed: int = 0
    draw_counter: int = 0

    def next_uniform(self) -> float:
        u = uniform01(self.trial_seed, self.n, self.draw_counter)
        self.draw_counter += 1
        return u


def _checked(fn, *args):
    try:
        v = fn(*args)
    except (ValueError, OverflowError) as exc:
        raise ExprDomainError(f"{getattr(fn, '__name__', fn)}{args}: {exc}") from None
    if isinstance(v, complex) or not math.isfinite(v):
        raise ExprDomainError(f"{getattr(fn, '__name__', fn)}{args} is not a finite real")
    return float(v)


def _pow(x: float, y: float) -> float:
    if x < 0 and not float(y).is_integer():
        raise ExprDomainError(f"negative base {x!r} with non-integer exponent {y!r}")
    if x == 0 and y < 0:
        raise ExprDomainError("zero raised to a negative power")
    return _checked(math.pow, x, y)


def _log(x):
    if x <= 0:
        raise ExprDomainError(f"log of non-positive value {x!r}")
    return math.log(x)


def _log10(x):
    if x <= 0:
        raise ExprDomainError(f"log10 of non-positive value {x!r}")
    return math.log10(x)


def _sqrt(x):
    if x < 0:
        raise ExprDomainError(f"sqrt of negative value {x!r}")
    return math.sqrt(x)


_UNARY = {
    "exp": math.exp,
    "log": _log,
    "log10": _log10,
    "sqrt": _sqrt,
    "floor": lambda x: float(math.floor(x)),
    "abs": abs,
}


def evaluate(e: Expr, ctx: EvalContext) -> float:
    """Evaluate ``e`` at ``ctx.n``; random nodes consume draws left to right."""
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        return float(ctx.n)
    if isinstance(e, Neg):
        return -evaluate(e.arg, ctx)
    if isinstance(e, BinOp):
        a = evaluate(e.left, ctx)
        b = evaluate(e.right, ctx)
        if e.op == "+":
            return _checked(lambda x, y: x + y, a, b)
        if e.op == "-":
            return _checked(lambda x, y: x - y, a, b)
        if e.op == "*":
            return _checked(lambda x, y: x * y, a, b)
        if e.op == "/":
            if b == 0:
                raise ExprDomainError("division by zero")
            return _checked(lambda x, y: x / y, a, b)
        return _pow(a, b)
    if isinstance(e, Uniform):
        lo = evaluate(e.lo, ctx)
        hi = evaluate(e.hi, ctx)
        return lo + (hi - lo) * ctx.next_uniform()
    if isinstance(e, Call):
        args = [evaluate(a, ctx) for a in e.args]
        if e.name == "pow":
            return _pow(*args)
        return _checked(_UNARY[e.name], args[0])
    raise TypeError(f"not an expression node: {e!r}")


def eval_at(e: Expr, n: int, trial_seed: int = 0, stream: int = 0) -> float:
    return evaluate(e, EvalContext(n, trial_seed, stream * STREAM_STRIDE))


def as_expr(x) -> Expr:
    if isinstance(x, (Num, Var, Neg, BinOp, Call, Uniform)):
        return x
    if isinstance(x, (int, float)):
        return Num(float(x)) if x >= 0 else Neg(Num(-float(x)))
    return parse(str(x))
