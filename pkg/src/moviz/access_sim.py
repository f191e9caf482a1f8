"""Exact access-trace generation by iteration-space enumeration.

The playback order is fixed and documented, not a claim about parallel
execution: states run in program order, siblings in topological order with
declaration order breaking ties, map points enumerate lexicographically
with the last-declared parameter fastest, and within one iteration point a
tasklet consumes its read memlets in declaration order before producing its
writes. Subset elements enumerate row-major over the subset ranges.

Traces can get large; simulation refuses to start when the statically
computed event total exceeds a budget (default 10^7) unless the caller
raises it explicitly.
"""

from __future__ import annotations

import itertools
import struct
from collections import Counter
from dataclasses import dataclass
from typing import BinaryIO, Iterable, Mapping, NamedTuple, TextIO

from . import ir
from .symbolic import ExpressionError, compile_expr, evaluate, fold

DEFAULT_EVENT_BUDGET = 10**7

Point = tuple[tuple[str, int], ...]
Element = tuple[str, tuple[int, ...]]


class SimulationError(Exception):
    pass


class BudgetExceededError(SimulationError):
    def __init__(self, expected: int, budget: int):
        super().__init__(
            f"simulation would produce {expected} events, over the budget of "
            f"{budget}; raise max_events to run it anyway"
        )
        self.expected = expected
        self.budget = budget


class OutOfBoundsError(SimulationError):
    def __init__(self, edge_id: str, point: Point, container: str, indices):
        pt = ", ".join(f"{n}={v}" for n, v in point) or "top level"
        super().__init__(
            f"edge {edge_id} at {pt} accesses {container}{list(indices)} "
            f"outside the container's shape"
        )
        self.edge_id = edge_id
        self.point = point
        self.container = container
        self.indices = tuple(indices)


class AccessEvent(NamedTuple):
    time: int
    point: Point
    edge: str
    container: str
    indices: tuple[int, ...]
    kind: str


@dataclass(frozen=True)
class AccessTrace:
    bindings: dict
    events: tuple[AccessEvent, ...]
    shapes: dict  # container -> evaluated extent tuple

    def __len__(self) -> int:
        return len(self.events)


def enumerate_iteration_space(program: ir.Program, bindings: Mapping[str, int]) -> list[Point]:
    """All iteration points that execute at least one tasklet, in order.

    A point assigns a value to every enclosing map parameter, outermost
    scope first; the last-declared parameter of each scope varies fastest.
    """
    points: list[Point] = []
    seen: set[Point] = set()

    def visit(graph: ir.Graph, env: dict, point: Point):
        for node in ir.local_topological_order(graph):
            if isinstance(node, ir.Tasklet):
                if point not in seen:
                    seen.add(point)
                    points.append(point)
            elif isinstance(node, ir.MapScope):
                try:
                    axes = [r.evaluate(env) for r in node.ranges]
                except ExpressionError as exc:
                    raise SimulationError(f"{node.id}: {exc}") from None
                for values in itertools.product(*axes):
                    sub_env = dict(env)
                    sub_env.update(zip(node.params, values))
                    visit(graph=node.body, env=sub_env,
                          point=point + tuple(zip(node.params, values)))

    for state in program.states:
        visit(state.graph, dict(bindings), ())
    return points


def expected_event_count(program: ir.Program, bindings: Mapping[str, int]) -> int:
    """Closed-form trace length: sum of derived volumes of tasklet edges."""
    index = ir.index_of(program)
    total = 0
    for info in index.edges.values():
        if isinstance(info.src_node, ir.Tasklet) or isinstance(info.dst_node, ir.Tasklet):
            expr = fold(ir.derived_volume(program, info))
            total += evaluate(expr, bindings)
    return total


def _subset_fns(memlet: ir.Memlet):
    fns = []
    for r in memlet.subset:
        fns.append(
            (compile_expr(fold(r.begin)), compile_expr(fold(r.end)),
             compile_expr(fold(r.step)))
        )
    return fns


def _walk_events(program: ir.Program, bindings: Mapping[str, int]):
    """Yield (point, edge_id, container, indices, kind) in playback order."""
    index = ir.index_of(program)

    fire_plan: dict[str, list] = {}
    for graph_path, edges in index.edges_by_graph.items():
        for e in edges:
            for kind, endpoint in (("read", e.dst_path), ("write", e.src_path)):
                if e.memlet.kind != kind:
                    continue
                node = index.nodes.get(endpoint)
                if node and isinstance(node.node, ir.Tasklet):
                    fire_plan.setdefault(endpoint, []).append((e, _subset_fns(e.memlet)))

    def run_graph(graph_path: str, graph: ir.Graph, env: dict, point: Point):
        for node in ir.local_topological_order(graph):
            path = f"{graph_path}/{node.id}"
            if isinstance(node, ir.Tasklet):
                # reads for this tasklet, then writes, declaration order each
                reads, writes = [], []
                for item in fire_plan.get(path, []):
                    (writes if item[0].memlet.kind == "write" else reads).append(item)
                for e, fns in reads + writes:
                    axes = []
                    for begin_fn, end_fn, step_fn in fns:
                        try:
                            axes.append(
                                range(begin_fn(env), end_fn(env) + 1, step_fn(env))
                            )
                        except ExpressionError as exc:
                            raise SimulationError(f"{e.id}: {exc}") from None
                    for indices in itertools.product(*axes):
                        yield point, e.id, e.memlet.container, indices, e.memlet.kind
            elif isinstance(node, ir.MapScope):
                try:
                    axes = [r.evaluate(env) for r in node.ranges]
                except ExpressionError as exc:
                    raise SimulationError(f"{path}: {exc}") from None
                for values in itertools.product(*axes):
                    sub_env = dict(env)
                    sub_env.update(zip(node.params, values))
                    yield from run_graph(
                        path, node.body, sub_env,
                        point + tuple(zip(node.params, values)),
                    )

    for state in program.states:
        yield from run_graph(state.name, state.graph, dict(bindings), ())


def simulate_accesses(
    program: ir.Program,
    bindings: Mapping[str, int],
    max_events: int = DEFAULT_EVENT_BUDGET,
) -> AccessTrace:
    bindings = dict(bindings)
    expected = expected_event_count(program, bindings)
    if expected > max_events:
        raise BudgetExceededError(expected, max_events)

    shapes = {
        c.name: tuple(evaluate(e, bindings) for e in c.shape)
        for c in program.containers
    }
    events = []
    time = 0
    for point, edge_id, container, indices, kind in _walk_events(program, bindings):
        shape = shapes[container]
        for i, n in zip(indices, shape):
            if i < 0 or i >= n:
                raise OutOfBoundsError(edge_id, point, container, indices)
        events.append(AccessEvent(time, point, edge_id, container, indices, kind))
        time += 1
    return AccessTrace(bindings=bindings, events=tuple(events), shapes=shapes)


####################################################################
# Derived views


@dataclass(frozen=True)
class AccessCountMap:
    total: dict       # (container, indices) -> count
    reads: dict
    writes: dict


def access_counts(trace: AccessTrace, events: Iterable[AccessEvent] | None = None) -> AccessCountMap:
    total: Counter = Counter()
    reads: Counter = Counter()
    writes: Counter = Counter()
    for ev in trace.events if events is None else events:
        key = (ev.container, ev.indices)
        total[key] += 1
        (reads if ev.kind == "read" else writes)[key] += 1
    return AccessCountMap(dict(total), dict(reads), dict(writes))


def related_accesses(trace: AccessTrace, selected: list[Element]) -> dict:
    """Co-access counts summed per selection, each excluding itself."""
    for container, indices in selected:
        shape = trace.shapes.get(container)
        if shape is None or len(indices) != len(shape) or any(
            i < 0 or i >= n for i, n in zip(indices, shape)
        ):
            raise SimulationError(f"selected element {container}{list(indices)} out of range")
    by_point: dict[Point, list[Element]] = {}
    for ev in trace.events:
        by_point.setdefault(ev.point, []).append((ev.container, ev.indices))
    out: Counter = Counter()
    for sel in selected:
        for accessed in by_point.values():
            if sel in accessed:
                for other in accessed:
                    if other != sel:
                        out[other] += 1
    return dict(out)


def trace_window(trace: AccessTrace, t0: int, t1: int) -> list[AccessEvent]:
    if not (0 <= t0 <= t1 <= len(trace.events)):
        raise SimulationError(
            f"window [{t0}, {t1}) outside trace of length {len(trace.events)}"
        )
    return list(trace.events[t0:t1])


def filter_trace(trace: AccessTrace, pins: Mapping[str, int]) -> list[AccessEvent]:
    """Events whose iteration point agrees with every pinned parameter."""
    out = []
    for ev in trace.events:
        point = dict(ev.point)
        if all(point.get(name) == value for name, value in pins.items()):
            out.append(ev)
    return out


####################################################################
# Export

_TEXT_HEADER = "# time  point  edge  container  indices  kind"


def export_text(trace: AccessTrace, out: TextIO) -> None:
    out.write(_TEXT_HEADER + "\n")
    for ev in trace.events:
        point = ",".join(f"{n}={v}" for n, v in ev.point) or "-"
        indices = ",".join(str(i) for i in ev.indices)
        out.write(f"{ev.time} {point} {ev.edge} {ev.container} [{indices}] {ev.kind}\n")


def read_text(inp: TextIO) -> list[AccessEvent]:
    events = []
    for line in inp:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        time, point_s, edge, container, indices_s, kind = line.split(" ")
        point = ()
        if point_s != "-":
            point = tuple(
                (n, int(v)) for n, v in (p.split("=") for p in point_s.split(","))
            )
        indices = tuple(int(x) for x in indices_s.strip("[]").split(","))
        events.append(AccessEvent(int(time), point, edge, container, indices, kind))
    return events


_MAGIC = b"MVAT"
_VERSION = 1


def _write_table(out: BinaryIO, names: list[str]) -> None:
    out.write(struct.pack("<I", len(names)))
    for name in names:
        raw = name.encode("utf-8")
        out.write(struct.pack("<I", len(raw)))
        out.write(raw)


def _read_table(inp: BinaryIO) -> list[str]:
    (n,) = struct.unpack("<I", inp.read(4))
    return [inp.read(struct.unpack("<I", inp.read(4))[0]).decode("utf-8") for _ in range(n)]


def export_binary(trace: AccessTrace, out: BinaryIO) -> None:
    """Compact trace stream; every event field is a little-endian 32-bit int.

    Layout: magic, version, binding table (name index, value pairs), string
    tables for edge ids / container names / parameter names, event count,
    then per event: time, edge, container, kind (0 read / 1 write), point
    arity + (param, value) pairs, index arity + indices.
    """
    edges = sorted({ev.edge for ev in trace.events})
    containers = sorted(trace.shapes)
    params = sorted({n for ev in trace.events for n, _ in ev.point} | set(trace.bindings))
    edge_ix = {e: i for i, e in enumerate(edges)}
    cont_ix = {c: i for i, c in enumerate(containers)}
    param_ix = {p: i for i, p in enumerate(params)}

    out.write(_MAGIC)
    out.write(struct.pack("<I", _VERSION))
    _write_table(out, edges)
    _write_table(out, containers)
    _write_table(out, params)
    out.write(struct.pack("<I", len(trace.bindings)))
    for name, value in sorted(trace.bindings.items()):
        out.write(struct.pack("<Ii", param_ix[name], value))
    out.write(struct.pack("<I", len(trace.events)))
    for ev in trace.events:
        out.write(
            struct.pack(
                "<IIII", ev.time, edge_ix[ev.edge], cont_ix[ev.container],
                0 if ev.kind == "read" else 1,
            )
        )
        out.write(struct.pack("<I", len(ev.point)))
        for name, value in ev.point:
            out.write(struct.pack("<Ii", param_ix[name], value))
        out.write(struct.pack("<I", len(ev.indices)))
        out.write(struct.pack(f"<{len(ev.indices)}i", *ev.indices))


def read_binary(inp: BinaryIO) -> tuple[dict, list[AccessEvent]]:
    if inp.read(4) != _MAGIC:
        raise SimulationError("not a binary trace stream")
    (version,) = struct.unpack("<I", inp.read(4))
    if version != _VERSION:
        raise SimulationError(f"unsupported trace version {version}")
    edges = _read_table(inp)
    containers = _read_table(inp)
    params = _read_table(inp)
    (nb,) = struct.unpack("<I", inp.read(4))
    bindings = {}
    for _ in range(nb):
        pi, value = struct.unpack("<Ii", inp.read(8))
        bindings[params[pi]] = value
    (n,) = struct.unpack("<I", inp.read(4))
    events = []
    for _ in range(n):
        time, ei, ci, kind = struct.unpack("<IIII", inp.read(16))
        (np_,) = struct.unpack("<I", inp.read(4))
        point = []
        for _ in range(np_):
            pi, value = struct.unpack("<Ii", inp.read(8))
            point.append((params[pi], value))
        (ni,) = struct.unpack("<I", inp.read(4))
        indices = struct.unpack(f"<{ni}i", inp.read(4 * ni))
        events.append(
            AccessEvent(
                time, tuple(point), edges[ei], containers[ci], indices,
                "read" if kind == 0 else "write",
            )
        )
    return bindings, events
