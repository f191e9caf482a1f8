"""Fully associative LRU cache model at cache-line granularity.

Containers are laid out sequentially in declaration order, each base
rounded up to the next line boundary, so lines are never shared across
containers and per-container layout analysis stays reproducible. Stack
distances follow the classic LRU-stack definition: the distance of a line
reference is the number of distinct lines referenced since its previous
reference, infinite on first touch. An element overlapping several lines
produces one line-event per line; all lines of one access record their
distance against the stack state at the start of the event, in ascending
line order, before any of them moves to the top.

Classification is split from distance computation on purpose: distances
are threshold-independent, so changing the capacity threshold only
re-buckets existing numbers.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Mapping, NamedTuple

import numpy as np

from . import ir
from .access_sim import AccessTrace
from .symbolic import evaluate

COLD = math.inf

_BRUTE_FORCE_LIMIT = 10**6


class CacheModelError(Exception):
    pass


@dataclass(frozen=True, slots=True)
class CacheConfig:
    line_size: int = 64
    capacity_threshold: int | float = COLD

    def __post_init__(self):
        ls = self.line_size
        if not isinstance(ls, int) or ls <= 0 or ls & (ls - 1):
            raise CacheModelError(f"line_size must be a positive power of two, got {ls!r}")
        t = self.capacity_threshold
        if t != COLD and (not isinstance(t, int) or t < 1):
            raise CacheModelError(
                f"capacity_threshold must be a positive line count or infinite, got {t!r}"
            )


@dataclass(frozen=True, slots=True)
class Placement:
    base: int
    start_offset: int
    strides: tuple[int, ...]
    shape: tuple[int, ...]
    element_size: int
    span: int  # bytes, from base

    def address(self, indices) -> int:
        off = self.start_offset
        for i, s in zip(indices, self.strides):
            off += i * s
        return self.base + off * self.element_size

    def address_array(self) -> np.ndarray:
        """Byte address of every element, shaped like the container."""
        off = np.full((), self.start_offset, dtype=np.int64)
        for d, (n, s) in enumerate(zip(self.shape, self.strides)):
            axis = np.arange(n, dtype=np.int64) * s
            off = np.expand_dims(off, -1) + axis.reshape(
                (1,) * d + (n,) if off.ndim else (n,)
            )
        return self.base + off * self.element_size


@dataclass(frozen=True, slots=True)
class MemoryMap:
    line_size: int
    placements: dict  # container name -> Placement

    def address(self, container: str, indices) -> int:
        p = self._placement(container, indices)
        return p.address(indices)

    def lines_of(self, container: str, indices) -> range:
        p = self._placement(container, indices)
        a = p.address(indices)
        return range(a // self.line_size, (a + p.element_size - 1) // self.line_size + 1)

    def _placement(self, container: str, indices) -> Placement:
        p = self.placements.get(container)
        if p is None:
            raise CacheModelError(f"unknown container {container!r}")
        if len(indices) != len(p.shape) or any(
            i < 0 or i >= n for i, n in zip(indices, p.shape)
        ):
            raise CacheModelError(
                f"element {container}{list(indices)} outside shape {list(p.shape)}"
            )
        return p


def _check_injective(name: str, shape, strides):
    dims = [(abs(s), n) for s, n in zip(strides, shape) if n > 1]
    if any(s == 0 for s, _ in dims):
        raise CacheModelError(f"container {name!r}: zero stride on an extent > 1")
    dims.sort(reverse=True)
    ok = True
    tail = 0
    for s, n in reversed(dims):
        if s < tail + 1:
            ok = False
            break
        tail += s * (n - 1)
    if ok:
        return
    total = math.prod(n for _, n in dims)
    if total > _BRUTE_FORCE_LIMIT:
        raise CacheModelError(
            f"container {name!r}: cannot verify layout injectivity for "
            f"{total} elements with irregular strides"
        )
    offsets = np.zeros((), dtype=np.int64)
    for d, (s, n) in enumerate(dims):
        axis = np.arange(n, dtype=np.int64) * s
        offsets = np.expand_dims(offsets, -1) + axis.reshape(
            (1,) * d + (n,) if offsets.ndim else (n,)
        )
    if np.unique(offsets).size != total:
        raise CacheModelError(f"container {name!r}: strides map distinct elements to one address")


def build_memory_map(
    program: ir.Program, bindings: Mapping[str, int], config: CacheConfig
) -> MemoryMap:
    line = config.line_size
    placements = {}
    cursor = 0
    for c in program.containers:
        shape = tuple(evaluate(e, bindings) for e in c.shape)
        strides = tuple(evaluate(e, bindings) for e in c.stride_exprs())
        offset = evaluate(c.start_offset, bindings)
        esize = c.element_size
        if any(s < 0 for s in strides) or offset < 0:
            raise CacheModelError(f"container {c.name!r}: negative stride or offset")
        _check_injective(c.name, shape, strides)
        span_elems = offset + sum(s * (n - 1) for s, n in zip(strides, shape)) + 1
        base = -(-cursor // line) * line
        placements[c.name] = Placement(
            base=base, start_offset=offset, strides=strides, shape=shape,
            element_size=esize, span=span_elems * esize,
        )
        cursor = base + span_elems * esize
    return MemoryMap(line_size=line, placements=placements)


def line_mates(
    container: str, indices, config: CacheConfig, memory_map: MemoryMap
) -> set:
    """All elements sharing a cache line with the queried one, itself included."""
    line = memory_map.line_size
    lines = memory_map.lines_of(container, tuple(indices))
    lo = lines.start * line
    hi = lines.stop * line
    out = set()
    for name, p in memory_map.placements.items():
        if p.base >= hi or p.base + p.span <= lo:
            continue
        addr = p.address_array()
        mask = (addr < hi) & (addr + p.element_size > lo)
        for idx in np.argwhere(mask):
            out.add((name, tuple(int(i) for i in idx)))
    return out


####################################################################
# Stack distances


class LineEvent(NamedTuple):
    time: int        # access event time in the trace
    container: str
    indices: tuple
    edge: str
    line: int
    distance: float  # COLD (inf) on first touch


@dataclass(frozen=True)
class StackDistanceProfile:
    bindings: dict
    records: tuple  # LineEvent per (event, line), trace order
    per_element: dict  # (container, indices) -> tuple of distances
    histogram: dict  # distance -> count, COLD bin keyed by math.inf


class _Fenwick:
    def __init__(self, n: int):
        self.n = n
        self.tree = [0] * (n + 1)

    def add(self, i: int, v: int):
        i += 1
        while i <= self.n:
            self.tree[i] += v
            i += i & -i

    def prefix(self, i: int) -> int:
        i += 1
        s = 0
        while i > 0:
            s += self.tree[i]
            i -= i & -i
        return s


def stack_distances(
    trace: AccessTrace, config: CacheConfig, memory_map: MemoryMap
) -> StackDistanceProfile:
    events = [
        (ev, memory_map.lines_of(ev.container, ev.indices)) for ev in trace.events
    ]
    total = sum(len(lines) for _, lines in events)
    fen = _Fenwick(total)
    last: dict[int, int] = {}
    records = []
    per_element: dict = {}
    histogram: Counter = Counter()
    pos = 0
    for ev, lines in events:
        start = pos
        measured = []
        for ln in lines:  # ranges ascend, matching the ascending-line rule
            prev = last.get(ln)
            if prev is None:
                d = COLD
            else:
                d = fen.prefix(start - 1) - fen.prefix(prev)
            measured.append((ln, d))
        for ln, d in measured:
            prev = last.get(ln)
            if prev is not None:
                fen.add(prev, -1)
            fen.add(pos, 1)
            last[ln] = pos
            pos += 1
            records.append(LineEvent(ev.time, ev.container, ev.indices, ev.edge, ln, d))
            per_element.setdefault((ev.container, ev.indices), []).append(d)
            histogram[d] += 1
    return StackDistanceProfile(
        bindings=dict(trace.bindings),
        records=tuple(records),
        per_element={k: tuple(v) for k, v in per_element.items()},
        histogram=dict(histogram),
    )


_STAT_MODES = ("min", "median", "max")


def distance_stats(profile: StackDistanceProfile, mode: str) -> dict:
    if mode not in _STAT_MODES:
        raise CacheModelError(f"unknown statistic {mode!r}, expected one of {_STAT_MODES}")
    out = {}
    for elem, distances in profile.per_element.items():
        ordered = sorted(distances)  # COLD (inf) sorts above every finite value
        if mode == "min":
            out[elem] = ordered[0]
        elif mode == "max":
            out[elem] = ordered[-1]
        else:
            out[elem] = ordered[(len(ordered) - 1) // 2]
    return out


####################################################################
# Miss classification and movement


class MissCounts(NamedTuple):
    cold: int
    capacity: int
    hit: int

    @property
    def misses(self) -> int:
        return self.cold + self.capacity


@dataclass(frozen=True)
class MissStats:
    bindings: dict
    threshold: int | float
    per_element: dict   # (container, indices) -> MissCounts
    per_container: dict  # container -> MissCounts
    per_edge: dict      # edge id -> miss count
    total: MissCounts


def classify_misses(profile: StackDistanceProfile, config: CacheConfig) -> MissStats:
    t = config.capacity_threshold
    per_element: dict = {}
    per_container: dict = {}
    per_edge: Counter = Counter()
    cold = capacity = hit = 0
    elem_acc: dict = {}
    cont_acc: dict = {}
    for rec in profile.records:
        if rec.distance == COLD:
            bucket = 0
            cold += 1
        elif rec.distance >= t:
            bucket = 1
            capacity += 1
        else:
            bucket = 2
            hit += 1
        e = elem_acc.setdefault((rec.container, rec.indices), [0, 0, 0])
        e[bucket] += 1
        c = cont_acc.setdefault(rec.container, [0, 0, 0])
        c[bucket] += 1
        if bucket != 2:
            per_edge[rec.edge] += 1
    for k, v in elem_acc.items():
        per_element[k] = MissCounts(*v)
    for k, v in cont_acc.items():
        per_container[k] = MissCounts(*v)
    return MissStats(
        bindings=profile.bindings,
        threshold=t,
        per_element=per_element,
        per_container=per_container,
        per_edge=dict(per_edge),
        total=MissCounts(cold, capacity, hit),
    )


def physical_movement(
    program: ir.Program,
    miss_stats: MissStats,
    config: CacheConfig,
    bindings: Mapping[str, int],
) -> tuple[dict, dict]:
    """Bytes actually moved: misses times line size, per container and per edge.

    Each miss is attributed to the memlet whose event produced it, so edge
    totals conserve the per-container totals.
    """
    if dict(bindings) != miss_stats.bindings:
        raise CacheModelError("miss statistics were computed under different bindings")
    line = config.line_size
    per_container = {
        name: counts.misses * line for name, counts in miss_stats.per_container.items()
    }
    index = ir.index_of(program)
    per_edge = {}
    for edge_id, misses in miss_stats.per_edge.items():
        if edge_id not in index.edges:
            raise CacheModelError(f"miss statistics refer to unknown edge {edge_id!r}")
        per_edge[edge_id] = misses * line
    return per_container, per_edge
