"""Integer symbolic expressions used for shapes, strides, loop bounds, and volumes.

Expressions are immutable trees over:

- integer literals,
- named symbols,
- binary ``+``, ``-``, ``*``, floor ``/`` and floor ``%``,
- n-ary ``Min`` / ``Max`` calls.

Division and modulo follow floor semantics (the sign of ``a % b`` follows
``b``), which is what Python's ``//`` and ``%`` already implement for ints.
Division by zero is always an error, never a value.

The only rewriting ever performed is constant folding plus trivial identities
(``x+0``, ``x*1``, ``x*0``, ``x/1``, ``x%1``); no algebraic simplification.
"""

from __future__ import annotations

import functools
import re
from dataclasses import dataclass
from typing import Callable, Mapping, Union


class ExpressionError(Exception):
    """Base class for expression parsing and evaluation failures."""


class ParseError(ExpressionError):
    def __init__(self, message: str, text: str, pos: int):
        super().__init__(f"{message} at position {pos} in {text!r}")
        self.text = text
        self.pos = pos


class UnboundSymbolError(ExpressionError):
    def __init__(self, name: str):
        super().__init__(f"unbound symbol {name!r}")
        self.name = name


class EvaluationError(ExpressionError):
    pass


@dataclass(frozen=True, slots=True)
class Lit:
    value: int

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True, slots=True)
class Sym:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class BinOp:
    op: str  # one of + - * / %
    left: "SymExpr"
    right: "SymExpr"

    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True, slots=True)
class Call:
    fn: str  # "Min" or "Max"
    args: tuple["SymExpr", ...]

    def __str__(self) -> str:
        return to_text(self)


SymExpr = Union[Lit, Sym, BinOp, Call]

_CALL_NAMES = ("Min", "Max")
_ADD_OPS = ("+", "-")
_MUL_OPS = ("*", "/", "%")

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<int>\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/%(),]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            # Skip trailing whitespace cleanly, reject anything else.
            if text[pos:].strip() == "":
                break
            raise ParseError("unexpected character", text, pos)
        if m.group("int") is not None:
            tokens.append(("int", m.group("int"), m.start("int")))
        elif m.group("ident") is not None:
            tokens.append(("ident", m.group("ident"), m.start("ident")))
        else:
            tokens.append(("op", m.group("op"), m.start("op")))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    """Recursive descent over::

        expr  := term (('+'|'-') term)*
        term  := unary (('*'|'/'|'%') unary)*
        unary := ['-'] atom
        atom  := INT | IDENT | IDENT '(' expr (',' expr)* ')' | '(' expr ')'
    """

    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.i]

    def next(self) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str) -> None:
        kind, value, pos = self.next()
        if kind != "op" or value != op:
            raise ParseError(f"expected {op!r}", self.text, pos)

    def parse(self) -> SymExpr:
        e = self.expr()
        kind, _, pos = self.peek()
        if kind != "end":
            raise ParseError("trailing input", self.text, pos)
        return e

    def expr(self) -> SymExpr:
        e = self.term()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in _ADD_OPS:
                self.next()
                e = BinOp(value, e, self.term())
            else:
                return e

    def term(self) -> SymExpr:
        e = self.unary()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in _MUL_OPS:
                self.next()
                e = BinOp(value, e, self.unary())
            else:
                return e

    def unary(self) -> SymExpr:
        kind, value, _ = self.peek()
        if kind == "op" and value == "-":
            self.next()
            inner = self.atom()
            if isinstance(inner, Lit):
                return Lit(-inner.value)
            return BinOp("-", Lit(0), inner)
        return self.atom()

    def atom(self) -> SymExpr:
        kind, value, pos = self.next()
        if kind == "int":
            return Lit(int(value))
        if kind == "ident":
            peek_kind, peek_value, _ = self.peek()
            if peek_kind == "op" and peek_value == "(":
                if value not in _CALL_NAMES:
                    raise ParseError(f"unknown function {value!r}", self.text, pos)
                self.next()
                args = [self.expr()]
                while True:
                    k, v, p = self.next()
                    if k == "op" and v == ",":
                        args.append(self.expr())
                    elif k == "op" and v == ")":
                        break
                    else:
                        raise ParseError("expected ',' or ')'", self.text, p)
                return Call(value, tuple(args))
            return Sym(value)
        if kind == "op" and value == "(":
            e = self.expr()
            self.expect_op(")")
            return e
        raise ParseError("expected integer, name, or '('", self.text, pos)


def parse_expr(text: str) -> SymExpr:
    """Parse ``text`` into an expression tree.

    :raises ParseError: on malformed input, with the failing position.
    """
    return _Parser(text).parse()


def as_expr(value: "SymExpr | int | str") -> SymExpr:
    """Coerce an int, string, or existing tree into a :data:`SymExpr`."""
    if isinstance(value, int):
        return Lit(value)
    if isinstance(value, str):
        return parse_expr(value)
    return value


_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2, "%": 2}


def to_text(expr: SymExpr) -> str:
    """Render ``expr`` so that re-parsing yields a structurally equal tree."""

    def render(e: SymExpr, parent_prec: int, right_side: bool) -> str:
        if isinstance(e, Lit):
            s = str(e.value)
            # A negative literal needs parens when it follows an operator,
            # otherwise "a--1" style output would not re-tokenize.
            if e.value < 0 and parent_prec > 0:
                return f"({s})"
            return s
        if isinstance(e, Sym):
            return e.name
        if isinstance(e, Call):
            inner = ", ".join(render(a, 0, False) for a in e.args)
            return f"{e.fn}({inner})"
        prec = _PRECEDENCE[e.op]
        if e.op == "-" and e.left == Lit(0) and not isinstance(e.right, Lit):
            # Unary minus form; parsing "-atom" rebuilds the same 0 - atom tree.
            return f"(-{render(e.right, 3, True)})" if parent_prec > 0 else f"-{render(e.right, 3, True)}"
        left = render(e.left, prec, False)
        right = render(e.right, prec + 1, True)
        text = f"{left} {e.op} {right}"
        needs_parens = prec < parent_prec or (prec == parent_prec and right_side)
        return f"({text})" if needs_parens else text

    return render(expr, 0, False)


def free_symbols(expr: SymExpr) -> frozenset[str]:
    if isinstance(expr, Lit):
        return frozenset()
    if isinstance(expr, Sym):
        return frozenset((expr.name,))
    if isinstance(expr, BinOp):
        return free_symbols(expr.left) | free_symbols(expr.right)
    return frozenset().union(*(free_symbols(a) for a in expr.args))


def evaluate(expr: SymExpr, bindings: Mapping[str, int]) -> int:
    """Exact integer evaluation under a full set of bindings.

    :raises UnboundSymbolError: if a symbol is missing from ``bindings``.
    :raises EvaluationError: on division or modulo by zero.
    """
    if isinstance(expr, Lit):
        return expr.value
    if isinstance(expr, Sym):
        try:
            return int(bindings[expr.name])
        except KeyError:
            raise UnboundSymbolError(expr.name) from None
    if isinstance(expr, BinOp):
        a = evaluate(expr.left, bindings)
        b = evaluate(expr.right, bindings)
        op = expr.op
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if b == 0:
            raise EvaluationError(f"division by zero in {to_text(expr)!r}")
        return a // b if op == "/" else a % b
    values = [evaluate(a, bindings) for a in expr.args]
    return min(values) if expr.fn == "Min" else max(values)


def _division_free(expr: SymExpr) -> bool:
    if isinstance(expr, BinOp):
        if expr.op in ("/", "%"):
            return False
        return _division_free(expr.left) and _division_free(expr.right)
    if isinstance(expr, Call):
        return all(_division_free(a) for a in expr.args)
    return True


def fold(expr: SymExpr) -> SymExpr:
    """Constant-fold bottom-up without changing evaluation results.

    Division or modulo by a literal zero is left in place so the error still
    surfaces at evaluation time, and rules that would discard a subtree
    (x - x, x * 0, x % 1) only apply when the subtree contains no division
    that could fail under some bindings.
    """
    if isinstance(expr, (Lit, Sym)):
        return expr
    if isinstance(expr, Call):
        args = tuple(fold(a) for a in expr.args)
        if len(args) == 1:
            return args[0]
        if all(isinstance(a, Lit) for a in args):
            values = [a.value for a in args]
            return Lit(min(values) if expr.fn == "Min" else max(values))
        return Call(expr.fn, args)

    left = fold(expr.left)
    right = fold(expr.right)
    op = expr.op
    if isinstance(left, Lit) and isinstance(right, Lit):
        if not (op in ("/", "%") and right.value == 0):
            return Lit(evaluate(BinOp(op, left, right), {}))
    if op == "+":
        if left == Lit(0):
            return right
        if right == Lit(0):
            return left
    elif op == "-":
        if right == Lit(0):
            return left
        if left == right and _division_free(left):
            return Lit(0)
    elif op == "*":
        if left == Lit(1):
            return right
        if right == Lit(1):
            return left
        if left == Lit(0) and _division_free(right):
            return Lit(0)
        if right == Lit(0) and _division_free(left):
            return Lit(0)
    elif op == "/":
        if right == Lit(1):
            return left
    elif op == "%":
        if right == Lit(1) and _division_free(left):
            return Lit(0)
    return BinOp(op, left, right)


def substitute(expr: SymExpr, bindings: Mapping[str, "SymExpr | int"]) -> SymExpr:
    """Replace symbols by expressions or ints, then constant-fold.

    Symbols absent from ``bindings`` stay symbolic; substitution itself never
    fails.
    """

    def walk(e: SymExpr) -> SymExpr:
        if isinstance(e, Lit):
            return e
        if isinstance(e, Sym):
            if e.name in bindings:
                return as_expr(bindings[e.name])
            return e
        if isinstance(e, BinOp):
            return BinOp(e.op, walk(e.left), walk(e.right))
        return Call(e.fn, tuple(walk(a) for a in e.args))

    return fold(walk(expr))


@functools.lru_cache(maxsize=None)
def compile_expr(expr: SymExpr) -> Callable[[Mapping[str, int]], int]:
    """Compile a tree into a fast callable; semantics match :func:`evaluate`.

    Used by re-evaluation hot paths that run one expression against many
    parameter sets.
    """

    def gen(e: SymExpr) -> str:
        if isinstance(e, Lit):
            return repr(e.value)
        if isinstance(e, Sym):
            return f"b[{e.name!r}]"
        if isinstance(e, Call):
            if len(e.args) == 1:
                return gen(e.args[0])
            fn = "min" if e.fn == "Min" else "max"
            return f"{fn}({', '.join(gen(a) for a in e.args)})"
        op = "//" if e.op == "/" else e.op
        return f"({gen(e.left)} {op} {gen(e.right)})"

    code = eval(  # noqa: S307 - source is generated from the validated tree
        f"lambda b: {gen(expr)}", {"__builtins__": {}, "min": min, "max": max}
    )

    def call(bindings: Mapping[str, int]) -> int:
        try:
            return code(bindings)
        except KeyError as exc:
            raise UnboundSymbolError(exc.args[0]) from None
        except ZeroDivisionError:
            raise EvaluationError(f"division by zero in {to_text(expr)!r}") from None

    return call


def mul_chain(factors: list[SymExpr]) -> SymExpr:
    """Left-associated product of ``factors`` (``Lit(1)`` for an empty list)."""
    if not factors:
        return Lit(1)
    out = factors[0]
    for f in factors[1:]:
        out = BinOp("*", out, f)
    return out
