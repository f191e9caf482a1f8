"""Program representation for data-movement analysis.

A program is a set of symbolic parameters, data containers, and an ordered
list of states. Each state holds a dataflow graph whose nodes are container
access points, tasklets (atomic computations bound to named connectors), and
map scopes (parametric parallel loops that own a nested body graph).

Memlets are the edges: each one names the container it moves, a per-dimension
subset (expressions may reference map parameters of enclosing scopes), an
optional explicit volume, and whether it is a read or a write relative to the
container.

Two kinds of memlets appear in practice:

- scope boundary edges in a state graph, between an access node and a map
  node, summarizing everything that crosses into or out of the scope;
- body edges inside a map, between an access node (usually declared in an
  enclosing graph) and a tasklet connector, describing the elements touched
  per iteration point.

Edges may reference nodes declared in enclosing graphs; identifiers are
resolved innermost first. Within one state the node identifiers must be
unique across the whole scope tree so resolution is unambiguous.

The JSON document format mirrors the in-memory types one to one; see
``parse_program`` for the accepted shape.
"""

from __future__ import annotations

import functools
import heapq
import json
from dataclasses import dataclass, field
from typing import Any, Iterator, Mapping, Union

from .symbolic import (
    BinOp,
    ExpressionError,
    Lit,
    SymExpr,
    as_expr,
    evaluate,
    fold,
    free_symbols,
    mul_chain,
    parse_expr,
    to_text,
)


class ProgramFormatError(Exception):
    """Raised for documents that cannot be turned into a Program at all."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class ValidationError(Exception):
    """Raised by load_program when validation reports errors."""

    def __init__(self, diagnostics: list["Diagnostic"]):
        lines = "; ".join(str(d) for d in diagnostics)
        super().__init__(f"program failed validation: {lines}")
        self.diagnostics = diagnostics


@dataclass(frozen=True, slots=True)
class Diagnostic:
    severity: str  # "error" or "warning"
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.severity} at {self.path}: {self.message}"


@dataclass(frozen=True, slots=True)
class SymbolDecl:
    name: str
    default: int | None = None


@dataclass(frozen=True, slots=True)
class Container:
    """An n-dimensional data container.

    ``strides`` are in elements; when omitted the layout is row-major
    (last dimension contiguous). ``start_offset`` is in elements and shifts
    every address within the container's allocation.
    """

    name: str
    shape: tuple[SymExpr, ...]
    element_size: int
    strides: tuple[SymExpr, ...] | None = None
    start_offset: SymExpr = Lit(0)

    @property
    def rank(self) -> int:
        return len(self.shape)

    def stride_exprs(self) -> tuple[SymExpr, ...]:
        if self.strides is not None:
            return self.strides
        out: list[SymExpr] = []
        for d in range(self.rank):
            out.append(fold(mul_chain(list(self.shape[d + 1 :]))))
        return tuple(out)


@dataclass(frozen=True, slots=True)
class Range:
    """Inclusive begin..end with a positive step."""

    begin: SymExpr
    end: SymExpr
    step: SymExpr = Lit(1)

    def size_expr(self) -> SymExpr:
        span = BinOp("-", self.end, self.begin)
        return fold(BinOp("+", BinOp("/", span, self.step), Lit(1)))

    def evaluate(self, bindings: Mapping[str, int]) -> range:
        b = evaluate(self.begin, bindings)
        e = evaluate(self.end, bindings)
        s = evaluate(self.step, bindings)
        if s < 1:
            raise ExpressionError(f"range step must be >= 1, got {s}")
        return range(b, e + 1, s)


@dataclass(frozen=True, slots=True)
class AccessNode:
    id: str
    container: str


@dataclass(frozen=True, slots=True)
class Tasklet:
    id: str
    code: str
    inputs: tuple[str, ...] = ()
    outputs: tuple[str, ...] = ()


@dataclass(frozen=True, slots=True)
class Memlet:
    src: str
    dst: str
    container: str
    subset: tuple[Range, ...]
    kind: str  # "read" or "write"
    src_conn: str | None = None
    dst_conn: str | None = None
    volume: SymExpr | None = None


@dataclass(frozen=True, slots=True)
class Graph:
    nodes: tuple["Node", ...] = ()
    edges: tuple[Memlet, ...] = ()


@dataclass(frozen=True, slots=True)
class MapScope:
    """A parametric loop nest level owning a nested body graph.

    Iteration is deterministic: points enumerate lexicographically with the
    last parameter fastest. The ``ordered`` flag marks scopes whose
    semantics require sequential execution; enumeration order is identical
    either way.
    """

    id: str
    params: tuple[str, ...]
    ranges: tuple[Range, ...]
    body: Graph
    ordered: bool = False

    def trip_count_expr(self) -> SymExpr:
        return fold(mul_chain([r.size_expr() for r in self.ranges]))


Node = Union[AccessNode, Tasklet, MapScope]


@dataclass(frozen=True, slots=True)
class State:
    name: str
    graph: Graph


@dataclass(frozen=True, slots=True)
class Program:
    name: str
    symbols: tuple[SymbolDecl, ...]
    containers: tuple[Container, ...]
    states: tuple[State, ...]

    def container(self, name: str) -> Container:
        for c in self.containers:
            if c.name == name:
                return c
        raise KeyError(name)

    def default_bindings(self) -> dict[str, int]:
        return {s.name: s.default for s in self.symbols if s.default is not None}


####################################################################
# Document parsing


def _req(obj: dict, key: str, path: str) -> Any:
    if key not in obj:
        raise ProgramFormatError(path, f"missing required field {key!r}")
    return obj[key]


def _expr(value: Any, path: str) -> SymExpr:
    if isinstance(value, bool):
        raise ProgramFormatError(path, "expected an expression, got a boolean")
    if isinstance(value, int):
        return Lit(value)
    if isinstance(value, str):
        try:
            return parse_expr(value)
        except ExpressionError as exc:
            raise ProgramFormatError(path, f"bad expression: {exc}") from None
    raise ProgramFormatError(path, f"expected an expression, got {type(value).__name__}")


def _parse_range(doc: Any, path: str) -> Range:
    if not isinstance(doc, dict):
        raise ProgramFormatError(path, "expected an object with begin/end")
    begin = _expr(_req(doc, "begin", path), f"{path}.begin")
    end = _expr(_req(doc, "end", path), f"{path}.end")
    step = _expr(doc.get("step", 1), f"{path}.step")
    return Range(begin, end, step)


def _parse_edge(doc: Any, path: str) -> Memlet:
    if not isinstance(doc, dict):
        raise ProgramFormatError(path, "expected an edge object")
    subset_doc = _req(doc, "subset", path)
    if not isinstance(subset_doc, list):
        raise ProgramFormatError(f"{path}.subset", "expected a list of ranges")
    subset = tuple(
        _parse_range(r, f"{path}.subset[{i}]") for i, r in enumerate(subset_doc)
    )
    kind = _req(doc, "kind", path)
    if kind not in ("read", "write"):
        raise ProgramFormatError(f"{path}.kind", f"expected read or write, got {kind!r}")
    volume = doc.get("volume")
    return Memlet(
        src=str(_req(doc, "src", path)),
        dst=str(_req(doc, "dst", path)),
        container=str(_req(doc, "container", path)),
        subset=subset,
        kind=kind,
        src_conn=doc.get("src_conn"),
        dst_conn=doc.get("dst_conn"),
        volume=None if volume is None else _expr(volume, f"{path}.volume"),
    )


def _parse_node(doc: Any, path: str) -> Node:
    if not isinstance(doc, dict):
        raise ProgramFormatError(path, "expected a node object")
    node_id = str(_req(doc, "id", path))
    node_type = _req(doc, "type", path)
    if node_type == "access":
        return AccessNode(id=node_id, container=str(_req(doc, "container", path)))
    if node_type == "tasklet":
        return Tasklet(
            id=node_id,
            code=str(_req(doc, "code", path)),
            inputs=tuple(doc.get("inputs", ())),
            outputs=tuple(doc.get("outputs", ())),
        )
    if node_type == "map":
        params = _req(doc, "params", path)
        ranges_doc = _req(doc, "ranges", path)
        if not isinstance(params, list) or not all(isinstance(p, str) for p in params):
            raise ProgramFormatError(f"{path}.params", "expected a list of names")
        if not isinstance(ranges_doc, list):
            raise ProgramFormatError(f"{path}.ranges", "expected a list of ranges")
        ranges = tuple(
            _parse_range(r, f"{path}.ranges[{i}]") for i, r in enumerate(ranges_doc)
        )
        body = _parse_graph(_req(doc, "body", path), f"{path}.body")
        return MapScope(
            id=node_id,
            params=tuple(params),
            ranges=ranges,
            body=body,
            ordered=bool(doc.get("ordered", False)),
        )
    raise ProgramFormatError(f"{path}.type", f"unknown node type {node_type!r}")


def _parse_graph(doc: Any, path: str) -> Graph:
    if not isinstance(doc, dict):
        raise ProgramFormatError(path, "expected an object with nodes/edges")
    nodes_doc = doc.get("nodes", [])
    edges_doc = doc.get("edges", [])
    if not isinstance(nodes_doc, list):
        raise ProgramFormatError(f"{path}.nodes", "expected a list")
    if not isinstance(edges_doc, list):
        raise ProgramFormatError(f"{path}.edges", "expected a list")
    nodes = tuple(_parse_node(n, f"{path}.nodes[{i}]") for i, n in enumerate(nodes_doc))
    edges = tuple(_parse_edge(e, f"{path}.edges[{i}]") for i, e in enumerate(edges_doc))
    return Graph(nodes=nodes, edges=edges)


def parse_program(doc: "dict | str") -> Program:
    """Build a Program from a JSON document (text or already-decoded dict).

    This only checks document structure; semantic checks live in
    :func:`validate`.
    """
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise ProgramFormatError("$", f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ProgramFormatError("$", "expected a JSON object")

    symbols = []
    for i, s in enumerate(doc.get("symbols", [])):
        path = f"symbols[{i}]"
        if isinstance(s, str):
            symbols.append(SymbolDecl(s))
            continue
        if not isinstance(s, dict):
            raise ProgramFormatError(path, "expected a name or an object")
        default = s.get("default")
        if default is not None and not isinstance(default, int):
            raise ProgramFormatError(f"{path}.default", "expected an integer")
        symbols.append(SymbolDecl(str(_req(s, "name", path)), default))

    containers = []
    for i, c in enumerate(doc.get("containers", [])):
        path = f"containers[{i}]"
        if not isinstance(c, dict):
            raise ProgramFormatError(path, "expected a container object")
        shape_doc = _req(c, "shape", path)
        if not isinstance(shape_doc, list) or not shape_doc:
            raise ProgramFormatError(f"{path}.shape", "expected a non-empty list")
        shape = tuple(_expr(e, f"{path}.shape[{d}]") for d, e in enumerate(shape_doc))
        element_size = _req(c, "element_size", path)
        if not isinstance(element_size, int) or element_size < 1:
            raise ProgramFormatError(f"{path}.element_size", "expected a positive integer")
        strides_doc = c.get("strides")
        strides = None
        if strides_doc is not None:
            if not isinstance(strides_doc, list):
                raise ProgramFormatError(f"{path}.strides", "expected a list")
            strides = tuple(
                _expr(e, f"{path}.strides[{d}]") for d, e in enumerate(strides_doc)
            )
        containers.append(
            Container(
                name=str(_req(c, "name", path)),
                shape=shape,
                element_size=element_size,
                strides=strides,
                start_offset=_expr(c.get("start_offset", 0), f"{path}.start_offset"),
            )
        )

    states = []
    for i, s in enumerate(doc.get("states", [])):
        path = f"states[{i}]"
        if not isinstance(s, dict):
            raise ProgramFormatError(path, "expected a state object")
        states.append(State(name=str(_req(s, "name", path)), graph=_parse_graph(s, path)))

    return Program(
        name=str(doc.get("name", "program")),
        symbols=tuple(symbols),
        containers=tuple(containers),
        states=tuple(states),
    )


####################################################################
# Serialization


def _range_to_dict(r: Range) -> dict:
    out = {"begin": to_text(r.begin), "end": to_text(r.end)}
    if r.step != Lit(1):
        out["step"] = to_text(r.step)
    return out


def _node_to_dict(n: Node) -> dict:
    if isinstance(n, AccessNode):
        return {"id": n.id, "type": "access", "container": n.container}
    if isinstance(n, Tasklet):
        return {
            "id": n.id,
            "type": "tasklet",
            "code": n.code,
            "inputs": list(n.inputs),
            "outputs": list(n.outputs),
        }
    out = {
        "id": n.id,
        "type": "map",
        "params": list(n.params),
        "ranges": [_range_to_dict(r) for r in n.ranges],
        "body": _graph_to_dict(n.body),
    }
    if n.ordered:
        out["ordered"] = True
    return out


def _edge_to_dict(e: Memlet) -> dict:
    out: dict[str, Any] = {"src": e.src, "dst": e.dst}
    if e.src_conn is not None:
        out["src_conn"] = e.src_conn
    if e.dst_conn is not None:
        out["dst_conn"] = e.dst_conn
    out["container"] = e.container
    out["subset"] = [_range_to_dict(r) for r in e.subset]
    if e.volume is not None:
        out["volume"] = to_text(e.volume)
    out["kind"] = e.kind
    return out


def _graph_to_dict(g: Graph) -> dict:
    return {
        "nodes": [_node_to_dict(n) for n in g.nodes],
        "edges": [_edge_to_dict(e) for e in g.edges],
    }


def to_dict(program: Program) -> dict:
    doc: dict[str, Any] = {"name": program.name}
    if program.symbols:
        doc["symbols"] = [
            {"name": s.name} if s.default is None else {"name": s.name, "default": s.default}
            for s in program.symbols
        ]
    doc["containers"] = []
    for c in program.containers:
        cd: dict[str, Any] = {
            "name": c.name,
            "shape": [to_text(e) for e in c.shape],
            "element_size": c.element_size,
        }
        if c.strides is not None:
            cd["strides"] = [to_text(e) for e in c.strides]
        if c.start_offset != Lit(0):
            cd["start_offset"] = to_text(c.start_offset)
        doc["containers"].append(cd)
    doc["states"] = [{"name": s.name, **_graph_to_dict(s.graph)} for s in program.states]
    return doc


def serialize(program: Program) -> str:
    return json.dumps(to_dict(program), indent=2)


####################################################################
# Scope-aware indexing


@dataclass(frozen=True)
class EdgeInfo:
    """A memlet plus everything needed to reason about it in context."""

    id: str
    state: str
    graph_path: str
    memlet: Memlet
    scopes: tuple[MapScope, ...]  # enclosing maps, outermost first
    src_path: str
    dst_path: str
    src_node: Node | None
    dst_node: Node | None


@dataclass(frozen=True)
class NodeInfo:
    path: str
    state: str
    graph_path: str
    node: Node
    scopes: tuple[MapScope, ...]


class ProgramIndex:
    """Resolved node paths, edge identities, and scope chains for a program.

    Edge ids have the form ``<graph path>#e<index>``; node paths the form
    ``<graph path>/<node id>``. Graph paths are the state name followed by
    the ids of enclosing map scopes.
    """

    def __init__(self, program: Program):
        self.program = program
        self.nodes: dict[str, NodeInfo] = {}
        self.edges: dict[str, EdgeInfo] = {}
        self.edges_by_graph: dict[str, list[EdgeInfo]] = {}
        self._collect()

    def _collect(self) -> None:
        for state in self.program.states:
            chain: list[tuple[str, Graph]] = [(state.name, state.graph)]
            self._collect_graph(state.name, state.graph, chain, (), state.name)

    def _collect_graph(
        self,
        graph_path: str,
        graph: Graph,
        chain: list[tuple[str, Graph]],
        scopes: tuple[MapScope, ...],
        state_name: str,
    ) -> None:
        for node in graph.nodes:
            path = f"{graph_path}/{node.id}"
            self.nodes[path] = NodeInfo(path, state_name, graph_path, node, scopes)
        for idx, edge in enumerate(graph.edges):
            edge_id = f"{graph_path}#e{idx}"
            src_path = self._resolve(edge.src, chain)
            dst_path = self._resolve(edge.dst, chain)
            info = EdgeInfo(
                id=edge_id,
                state=state_name,
                graph_path=graph_path,
                memlet=edge,
                scopes=scopes,
                src_path=src_path or edge.src,
                dst_path=dst_path or edge.dst,
                src_node=self.nodes[src_path].node if src_path else None,
                dst_node=self.nodes[dst_path].node if dst_path else None,
            )
            self.edges[edge_id] = info
            self.edges_by_graph.setdefault(graph_path, []).append(info)
        for node in graph.nodes:
            if isinstance(node, MapScope):
                sub_path = f"{graph_path}/{node.id}"
                chain.append((sub_path, node.body))
                self._collect_graph(
                    sub_path, node.body, chain, scopes + (node,), state_name
                )
                chain.pop()

    def _resolve(self, node_id: str, chain: list[tuple[str, Graph]]) -> str | None:
        for graph_path, graph in reversed(chain):
            for node in graph.nodes:
                if node.id == node_id:
                    return f"{graph_path}/{node.id}"
        return None

    def node_edges(self, path: str) -> list[EdgeInfo]:
        return [e for e in self.edges.values() if path in (e.src_path, e.dst_path)]

    def tasklet_edges(self, path: str, kind: str) -> list[EdgeInfo]:
        out = [
            e
            for e in self.edges.values()
            if e.memlet.kind == kind and path in (e.src_path, e.dst_path)
        ]
        out.sort(key=lambda e: e.id)
        return out


@functools.lru_cache(maxsize=64)
def index_of(program: Program) -> ProgramIndex:
    return ProgramIndex(program)


def derived_volume(program: Program, edge: "EdgeInfo | str") -> SymExpr:
    """Number of elements an edge moves over the whole execution.

    An explicit ``volume`` wins; otherwise the product of the subset range
    sizes times the trip counts of every enclosing map scope.
    """
    if isinstance(edge, str):
        edge = index_of(program).edges[edge]
    if edge.memlet.volume is not None:
        return edge.memlet.volume
    factors = [r.size_expr() for r in edge.memlet.subset]
    for scope in edge.scopes:
        factors.append(scope.trip_count_expr())
    return fold(mul_chain(factors))


####################################################################
# Ordering


def local_topological_order(graph: Graph) -> list[Node]:
    """Topological order over a graph's own nodes.

    Only edges whose endpoints both resolve locally impose ordering; ties
    break by declaration order. Raises ValueError on a cycle.
    """
    ids = {n.id: i for i, n in enumerate(graph.nodes)}
    indeg = [0] * len(graph.nodes)
    succ: list[list[int]] = [[] for _ in graph.nodes]
    for e in graph.edges:
        if e.src in ids and e.dst in ids and e.src != e.dst:
            succ[ids[e.src]].append(ids[e.dst])
            indeg[ids[e.dst]] += 1
    ready = [i for i, d in enumerate(indeg) if d == 0]
    heapq.heapify(ready)
    out = []
    while ready:
        i = heapq.heappop(ready)
        out.append(graph.nodes[i])
        for j in succ[i]:
            indeg[j] -= 1
            if indeg[j] == 0:
                heapq.heappush(ready, j)
    if len(out) != len(graph.nodes):
        raise ValueError("graph contains a cycle")
    return out


####################################################################
# Validation


def _check_expr_symbols(
    expr: SymExpr, known: set[str], path: str, out: list[Diagnostic]
) -> None:
    for name in sorted(free_symbols(expr) - known):
        out.append(Diagnostic("error", path, f"undeclared symbol {name!r}"))


def validate(program: Program) -> list[Diagnostic]:
    """Semantic checks; returns diagnostics instead of raising.

    Numeric range checks run only when the program's symbol defaults cover
    the expressions involved.
    """
    out: list[Diagnostic] = []
    symbols = {s.name for s in program.symbols}
    defaults = program.default_bindings()

    seen = set()
    for i, s in enumerate(program.symbols):
        if s.name in seen:
            out.append(Diagnostic("error", f"symbols[{i}]", f"duplicate symbol {s.name!r}"))
        seen.add(s.name)

    container_names = set()
    for i, c in enumerate(program.containers):
        path = f"containers[{i}]"
        if c.name in container_names:
            out.append(Diagnostic("error", path, f"duplicate container {c.name!r}"))
        container_names.add(c.name)
        if c.strides is not None and len(c.strides) != len(c.shape):
            out.append(
                Diagnostic(
                    "error",
                    f"{path}.strides",
                    f"{len(c.strides)} strides for rank {len(c.shape)}",
                )
            )
        for d, e in enumerate(c.shape):
            _check_expr_symbols(e, symbols, f"{path}.shape[{d}]", out)
        for d, e in enumerate(c.strides or ()):
            _check_expr_symbols(e, symbols, f"{path}.strides[{d}]", out)
        _check_expr_symbols(c.start_offset, symbols, f"{path}.start_offset", out)
        if defaults.keys() >= {n for e in c.shape for n in free_symbols(e)}:
            for d, e in enumerate(c.shape):
                if evaluate(e, defaults) < 1:
                    out.append(
                        Diagnostic(
                            "error",
                            f"{path}.shape[{d}]",
                            "extent evaluates to less than 1 under defaults",
                        )
                    )

    state_names = set()
    for state in program.states:
        if state.name in state_names:
            out.append(
                Diagnostic("error", state.name, f"duplicate state name {state.name!r}")
            )
        state_names.add(state.name)
        _validate_graph(
            program, state.name, state.graph, symbols, set(), defaults, out, set()
        )

    # Connector attachment: every tasklet connector used by exactly one memlet.
    index = ProgramIndex(program)
    attach: dict[tuple[str, str, str], int] = {}
    for e in index.edges.values():
        m = e.memlet
        if isinstance(e.dst_node, Tasklet) and m.dst_conn is not None:
            attach[(e.dst_path, "in", m.dst_conn)] = (
                attach.get((e.dst_path, "in", m.dst_conn), 0) + 1
            )
        if isinstance(e.src_node, Tasklet) and m.src_conn is not None:
            attach[(e.src_path, "out", m.src_conn)] = (
                attach.get((e.src_path, "out", m.src_conn), 0) + 1
            )
    for path, info in index.nodes.items():
        if not isinstance(info.node, Tasklet):
            continue
        for conn in info.node.inputs:
            n = attach.get((path, "in", conn), 0)
            if n != 1:
                out.append(
                    Diagnostic(
                        "error",
                        path,
                        f"input connector {conn!r} attached by {n} memlets, expected 1",
                    )
                )
        for conn in info.node.outputs:
            n = attach.get((path, "out", conn), 0)
            if n != 1:
                out.append(
                    Diagnostic(
                        "error",
                        path,
                        f"output connector {conn!r} attached by {n} memlets, expected 1",
                    )
                )
    return out


def _validate_graph(
    program: Program,
    graph_path: str,
    graph: Graph,
    symbols: set[str],
    params_in_scope: set[str],
    defaults: Mapping[str, int],
    out: list[Diagnostic],
    ids_in_state: set[str],
) -> None:
    known = symbols | params_in_scope
    container_names = {c.name for c in program.containers}
    local_ids = set()
    for node in graph.nodes:
        path = f"{graph_path}/{node.id}"
        if node.id in ids_in_state:
            out.append(Diagnostic("error", path, f"duplicate node id {node.id!r} in state"))
        ids_in_state.add(node.id)
        local_ids.add(node.id)
        if isinstance(node, AccessNode) and node.container not in container_names:
            out.append(
                Diagnostic("error", path, f"undeclared container {node.container!r}")
            )
        if isinstance(node, MapScope):
            if len(node.params) != len(node.ranges):
                out.append(
                    Diagnostic(
                        "error",
                        path,
                        f"{len(node.params)} params but {len(node.ranges)} ranges",
                    )
                )
            for p in node.params:
                if p in known:
                    out.append(
                        Diagnostic(
                            "error", path, f"parameter {p!r} shadows an enclosing name"
                        )
                    )
            if len(set(node.params)) != len(node.params):
                out.append(Diagnostic("error", path, "duplicate map parameters"))
            for d, r in enumerate(node.ranges):
                rpath = f"{path}.ranges[{d}]"
                for e in (r.begin, r.end, r.step):
                    _check_expr_symbols(e, known, rpath, out)
                needed = free_symbols(r.begin) | free_symbols(r.end) | free_symbols(r.step)
                if needed <= defaults.keys():
                    step = evaluate(r.step, defaults)
                    if step < 1:
                        out.append(
                            Diagnostic(
                                "error", rpath, f"step evaluates to {step} under defaults"
                            )
                        )
                    elif evaluate(r.begin, defaults) > evaluate(r.end, defaults) + 1:
                        out.append(
                            Diagnostic(
                                "error",
                                rpath,
                                "begin exceeds end+1 under defaults",
                            )
                        )

    try:
        local_topological_order(graph)
    except ValueError:
        out.append(Diagnostic("error", graph_path, "graph contains a cycle"))

    index = None  # resolution for edges is re-done lightly here
    for i, edge in enumerate(graph.edges):
        path = f"{graph_path}#e{i}"
        if edge.container not in container_names:
            out.append(Diagnostic("error", path, f"undeclared container {edge.container!r}"))
        else:
            rank = program.container(edge.container).rank
            if len(edge.subset) != rank:
                out.append(
                    Diagnostic(
                        "error",
                        path,
                        f"subset rank {len(edge.subset)} does not match container rank {rank}",
                    )
                )
        for r in edge.subset:
            for e in (r.begin, r.end, r.step):
                _check_expr_symbols(e, known, path, out)
        if edge.volume is not None:
            _check_expr_symbols(edge.volume, known, path, out)

    for node in graph.nodes:
        if isinstance(node, MapScope):
            _validate_graph(
                program,
                f"{graph_path}/{node.id}",
                node.body,
                symbols,
                params_in_scope | set(node.params),
                defaults,
                out,
                ids_in_state,
            )

    # Endpoint shape checks need full resolution; run them only at state level
    # where the whole subtree has been indexed.
    if "/" not in graph_path and "#" not in graph_path:
        _validate_endpoints(program, graph_path, out)


def _validate_endpoints(program: Program, state_name: str, out: list[Diagnostic]) -> None:
    index = ProgramIndex(program)
    for e in index.edges.values():
        if e.state != state_name:
            continue
        if e.src_node is None:
            out.append(Diagnostic("error", e.id, f"unknown source node {e.memlet.src!r}"))
            continue
        if e.dst_node is None:
            out.append(Diagnostic("error", e.id, f"unknown destination node {e.memlet.dst!r}"))
            continue
        src, dst = e.src_node, e.dst_node
        if e.memlet.kind == "read":
            ok = isinstance(src, AccessNode) and isinstance(dst, (Tasklet, MapScope))
        else:
            ok = isinstance(src, (Tasklet, MapScope)) and isinstance(dst, AccessNode)
        if not ok:
            out.append(
                Diagnostic(
                    "error",
                    e.id,
                    f"{e.memlet.kind} memlet must connect an access node "
                    f"{'to' if e.memlet.kind == 'read' else 'from'} a tasklet or map scope",
                )
            )
            continue
        access = src if isinstance(src, AccessNode) else dst
        if access.container != e.memlet.container:
            out.append(
                Diagnostic(
                    "error",
                    e.id,
                    f"memlet container {e.memlet.container!r} does not match "
                    f"access node container {access.container!r}",
                )
            )
        if isinstance(dst, Tasklet) and e.memlet.dst_conn is not None:
            if e.memlet.dst_conn not in dst.inputs:
                out.append(
                    Diagnostic(
                        "error", e.id, f"unknown input connector {e.memlet.dst_conn!r}"
                    )
                )
        if isinstance(src, Tasklet) and e.memlet.src_conn is not None:
            if e.memlet.src_conn not in src.outputs:
                out.append(
                    Diagnostic(
                        "error", e.id, f"unknown output connector {e.memlet.src_conn!r}"
                    )
                )


def load_program(doc: "dict | str") -> Program:
    """Parse and validate; raises if any error-severity diagnostic is found."""
    program = parse_program(doc)
    diagnostics = [d for d in validate(program) if d.severity == "error"]
    if diagnostics:
        raise ValidationError(diagnostics)
    return program


def load_program_file(path: str) -> Program:
    with open(path, "r", encoding="utf-8") as f:
        return load_program(f.read())


def iter_graphs(program: Program) -> Iterator[tuple[str, Graph, tuple[MapScope, ...]]]:
    """Yield (graph path, graph, enclosing scopes) for every graph."""

    def walk(path: str, graph: Graph, scopes: tuple[MapScope, ...]):
        yield path, graph, scopes
        for node in graph.nodes:
            if isinstance(node, MapScope):
                yield from walk(f"{path}/{node.id}", node.body, scopes + (node,))

    for state in program.states:
        yield from walk(state.name, state.graph, ())
