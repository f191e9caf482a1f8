"""Logical data movement, operation counts, and arithmetic intensity.

These are the global-view metrics: every memlet gets the number of bytes it
moves over a full program execution (volume times element size), every
tasklet gets an operation count from its parsed code, and every node gets
an intensity ratio of operations per byte incident to it.

All quantities are derived once per program into a compiled model, so
re-evaluating under new symbol values is just running a few thousand
precompiled lambdas; that is what keeps interactive parameter sweeps fast.
"""

from __future__ import annotations

import functools
import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Union

from . import ir
from .symbolic import ExpressionError, compile_expr, fold, mul_chain

INTRINSICS = {"abs": 1, "min": 1, "max": 1, "sqrt": 1, "exp": 1, "tanh": 1, "fma": 2}

_seq = itertools.count(1)


class TaskletSyntaxError(Exception):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at offset {pos})")
        self.pos = pos


class MetricError(Exception):
    """Evaluation failure tagged with the owning node or edge path."""

    def __init__(self, path: str, cause: Exception):
        super().__init__(f"{path}: {cause}")
        self.path = path
        self.cause = cause


####################################################################
# Tasklet language
#
# statements: IDENT '=' expr, separated by newlines or ';'
# expr: +,-,*,/,% with the usual precedence, unary minus, parentheses,
# integer literals, connector/local identifiers, intrinsic calls.


@dataclass(frozen=True)
class Num:
    value: int


@dataclass(frozen=True)
class Name:
    id: str


@dataclass(frozen=True)
class Neg:
    operand: "TaskletExpr"


@dataclass(frozen=True)
class Bin:
    op: str
    left: "TaskletExpr"
    right: "TaskletExpr"


@dataclass(frozen=True)
class Intrinsic:
    fn: str
    args: tuple["TaskletExpr", ...]


TaskletExpr = Union[Num, Name, Neg, Bin, Intrinsic]


@dataclass(frozen=True)
class Assign:
    target: str
    value: TaskletExpr


_TOK = re.compile(
    r"[ \t]*(?:(?P<int>\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/%(),=])|(?P<sep>[;\n]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOK.match(text, pos)
        if m is None:
            raise TaskletSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str):
        kind, value, pos = self.next()
        if kind != "op" or value != op:
            raise TaskletSyntaxError(f"expected {op!r}, found {value or 'end'!r}", pos)

    def statements(self) -> list[Assign]:
        out = []
        while True:
            while self.peek()[0] == "sep":
                self.next()
            if self.peek()[0] == "end":
                return out
            kind, target, pos = self.next()
            if kind != "ident":
                raise TaskletSyntaxError("statement must start with a name", pos)
            self.expect_op("=")
            out.append(Assign(target, self.expr()))
            kind, value, pos = self.peek()
            if kind not in ("sep", "end"):
                raise TaskletSyntaxError(f"unexpected {value!r} after statement", pos)

    def expr(self) -> TaskletExpr:
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.next()[1]
            node = Bin(op, node, self.term())
        return node

    def term(self) -> TaskletExpr:
        node = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/%":
            op = self.next()[1]
            node = Bin(op, node, self.unary())
        return node

    def unary(self) -> TaskletExpr:
        if self.peek()[0] == "op" and self.peek()[1] == "-":
            self.next()
            return Neg(self.unary())
        return self.atom()

    def atom(self) -> TaskletExpr:
        kind, value, pos = self.next()
        if kind == "int":
            return Num(int(value))
        if kind == "ident":
            if self.peek()[0] == "op" and self.peek()[1] == "(":
                if value not in INTRINSICS:
                    raise TaskletSyntaxError(f"unknown intrinsic {value!r}", pos)
                self.next()
                args = [self.expr()]
                while self.peek()[0] == "op" and self.peek()[1] == ",":
                    self.next()
                    args.append(self.expr())
                self.expect_op(")")
                if value == "fma" and len(args) != 3:
                    raise TaskletSyntaxError("fma takes exactly 3 arguments", pos)
                return Intrinsic(value, tuple(args))
            return Name(value)
        if kind == "op" and value == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise TaskletSyntaxError(f"unexpected {value or 'end'!r}", pos)


@functools.lru_cache(maxsize=1024)
def parse_tasklet(code: str) -> tuple[Assign, ...]:
    return tuple(_Parser(code).statements())


def _expr_ops(node: TaskletExpr) -> int:
    if isinstance(node, (Num, Name)):
        return 0
    if isinstance(node, Neg):
        # sign flips are free in this cost model
        return _expr_ops(node.operand)
    if isinstance(node, Bin):
        return 1 + _expr_ops(node.left) + _expr_ops(node.right)
    return INTRINSICS[node.fn] + sum(_expr_ops(a) for a in node.args)


def count_arithmetic_ops(tasklet: ir.Tasklet) -> int:
    """Operator applications plus intrinsic calls; assignments are free."""
    return sum(_expr_ops(stmt.value) for stmt in parse_tasklet(tasklet.code))


def tasklet_free_names(code: str) -> frozenset[str]:
    """Names read before being assigned; these must be input connectors."""
    assigned: set[str] = set()
    free: set[str] = set()

    def walk(node):
        if isinstance(node, Name):
            if node.id not in assigned:
                free.add(node.id)
        elif isinstance(node, Neg):
            walk(node.operand)
        elif isinstance(node, Bin):
            walk(node.left)
            walk(node.right)
        elif isinstance(node, Intrinsic):
            for a in node.args:
                walk(a)

    for stmt in parse_tasklet(code):
        walk(stmt.value)
        assigned.add(stmt.target)
    return frozenset(free)


####################################################################
# Metric computation


@dataclass(frozen=True)
class MetricSet:
    bindings: dict
    edge_bytes: dict          # edge id -> int
    tasklet_ops: dict         # node path -> (ops per execution, total ops)
    intensity: dict           # node path -> Fraction or None
    sequence: int


class _CompiledModel:
    """Everything about one program that does not depend on bindings."""

    def __init__(self, program: ir.Program):
        self.program = program
        self.index = ir.index_of(program)
        self.edge_fns = {}
        for eid, info in self.index.edges.items():
            volume = fold(ir.derived_volume(program, info))
            esize = program.container(info.memlet.container).element_size
            self.edge_fns[eid] = (compile_expr(volume), esize)

        self.tasklet_static = {}
        self.scope_paths = {}
        for path, info in self.index.nodes.items():
            if isinstance(info.node, ir.Tasklet):
                try:
                    per_exec = count_arithmetic_ops(info.node)
                except TaskletSyntaxError as exc:
                    raise MetricError(path, exc) from None
                trips = fold(mul_chain([s.trip_count_expr() for s in info.scopes]))
                self.tasklet_static[path] = (per_exec, compile_expr(trips))
            elif isinstance(info.node, ir.MapScope):
                self.scope_paths[path] = info

        # incident edge ids per node path, for intensity denominators
        self.incident = {path: [] for path in self.index.nodes}
        for eid, info in self.index.edges.items():
            for endpoint in (info.src_path, info.dst_path):
                if endpoint in self.incident:
                    self.incident[endpoint].append(eid)

    def evaluate(self, bindings: Mapping[str, int]) -> MetricSet:
        b = dict(bindings)
        edge_bytes = {}
        for eid, (fn, esize) in self.edge_fns.items():
            try:
                edge_bytes[eid] = fn(b) * esize
            except ExpressionError as exc:
                raise MetricError(eid, exc) from None

        tasklet_ops = {}
        for path, (per_exec, trips_fn) in self.tasklet_static.items():
            try:
                tasklet_ops[path] = (per_exec, per_exec * trips_fn(b))
            except ExpressionError as exc:
                raise MetricError(path, exc) from None

        intensity = {}
        for path in self.index.nodes:
            if path in self.tasklet_static:
                ops = tasklet_ops[path][1]
            elif path in self.scope_paths:
                prefix = path + "/"
                ops = sum(
                    total for p, (_, total) in tasklet_ops.items()
                    if p.startswith(prefix)
                )
            else:
                ops = 0
            denom = sum(edge_bytes[eid] for eid in self.incident[path])
            intensity[path] = Fraction(ops, denom) if denom else None

        return MetricSet(
            bindings=b,
            edge_bytes=edge_bytes,
            tasklet_ops=tasklet_ops,
            intensity=intensity,
            sequence=next(_seq),
        )


@functools.lru_cache(maxsize=64)
def _model(program: ir.Program) -> _CompiledModel:
    return _CompiledModel(program)


def compute_metrics(program: ir.Program, bindings: Mapping[str, int]) -> MetricSet:
    """Full MetricSet under the given symbol values.

    Bindings must cover every program symbol; map parameters are never part
    of the metric expressions (volumes aggregate over them).
    """
    return _model(program).evaluate(bindings)


# re-evaluation under new bindings is the same compiled path
reevaluate = compute_metrics
