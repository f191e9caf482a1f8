"""Analysis façade: one loaded program, cached derived results, HTTP API.

A session owns the program plus the current symbol bindings and cache
configuration. Every derived result (metrics, trace, distance profile,
miss statistics) is cached under the state it was computed from, so
repeated queries never re-simulate; a monotonically increasing state
version lets clients detect that an answer belongs to an older state.

Color positions are computed here, not in the client, so CLI reports and
the web UI render identically.
"""

from __future__ import annotations

import math
import threading
from typing import Mapping

from . import access_sim, cache, heatmap, ir, movement
from .symbolic import ExpressionError, evaluate


class SessionError(Exception):
    def __init__(self, status: int, message: str, **extra):
        super().__init__(message)
        self.status = status
        self.message = message
        self.extra = extra


class StaleStateError(SessionError):
    def __init__(self, expected: int, actual: int):
        super().__init__(
            409, f"state version {expected} is stale, session is at {actual}"
        )


class AnalysisSession:
    """Single-program session with version-stamped caches."""

    def __init__(
        self,
        program: ir.Program,
        bindings: Mapping[str, int] | None = None,
        config: cache.CacheConfig | None = None,
    ):
        self.program = program
        self.bindings = dict(
            program.default_bindings() if bindings is None else bindings
        )
        self.config = config or cache.CacheConfig()
        self.palette = heatmap.DEFAULT_PALETTE
        self.version = 0
        self._lock = threading.RLock()
        self._cache: dict = {}
        self._hits = 0
        self._misses = 0

    # ---- state mutation (single writer) ----

    def set_params(self, bindings: Mapping) -> int:
        declared = {s.name for s in self.program.symbols}
        clean = {}
        for name, value in dict(bindings).items():
            if name not in declared:
                raise SessionError(400, f"unknown symbol {name!r}")
            if not isinstance(value, int) or isinstance(value, bool):
                raise SessionError(400, f"symbol {name!r} needs an integer value")
            clean[name] = value
        with self._lock:
            merged = dict(self.program.default_bindings())
            merged.update(clean)
            if merged != self.bindings:
                self.bindings = merged
                self.version += 1
            return self.version

    def set_config(
        self,
        line_size: int | None = None,
        capacity_threshold=None,
        palette=None,
    ) -> int:
        with self._lock:
            new = cache.CacheConfig(
                line_size=self.config.line_size if line_size is None else line_size,
                capacity_threshold=self.config.capacity_threshold
                if capacity_threshold is None
                else capacity_threshold,
            )
            new_palette = self.palette if palette is None else tuple(palette)
            if new != self.config or new_palette != self.palette:
                self.config = new
                self.palette = new_palette
                self.version += 1
            return self.version

    # ---- cached derivations ----

    def _cached(self, key, compute):
        with self._lock:
            if key in self._cache:
                self._hits += 1
                return self._cache[key]
            started = self.version
        value = compute()
        with self._lock:
            if self.version != started:
                raise StaleStateError(started, self.version)
            self._misses += 1
            self._cache[key] = value
            return value

    def _bkey(self):
        return tuple(sorted(self.bindings.items()))

    def metrics(self) -> movement.MetricSet:
        b = self._bkey()
        return self._cached(
            ("metrics", b), lambda: movement.compute_metrics(self.program, self.bindings)
        )

    def trace(self, max_events: int | None = None) -> access_sim.AccessTrace:
        b = self._bkey()
        budget = access_sim.DEFAULT_EVENT_BUDGET if max_events is None else max_events
        return self._cached(
            ("trace", b),
            lambda: access_sim.simulate_accesses(self.program, self.bindings, budget),
        )

    def memory_map(self) -> cache.MemoryMap:
        key = ("memmap", self._bkey(), self.config.line_size)
        return self._cached(
            key, lambda: cache.build_memory_map(self.program, self.bindings, self.config)
        )

    def profile(self) -> cache.StackDistanceProfile:
        key = ("profile", self._bkey(), self.config.line_size)

        def compute():
            return cache.stack_distances(self.trace(), self.config, self.memory_map())

        return self._cached(key, compute)

    def miss_stats(self) -> cache.MissStats:
        key = ("misses", self._bkey(), self.config.line_size, self.config.capacity_threshold)
        return self._cached(
            key, lambda: cache.classify_misses(self.profile(), self.config)
        )

    def cache_stats(self) -> dict:
        with self._lock:
            return {"hits": self._hits, "misses": self._misses, "entries": len(self._cache)}


####################################################################
# Report documents


def _fraction_doc(value):
    if value is None:
        return None
    return {"value": float(value), "exact": f"{value.numerator}/{value.denominator}"}


def _fit_positions(values: dict, method: str, palette) -> tuple[dict, dict]:
    present = {k: v for k, v in values.items() if v is not None}
    if not present:
        return {}, {"min": None, "max": None, "center": None}
    scale = heatmap.fit(list(present.values()), method, palette=palette)
    lo, hi = heatmap.scale_bounds(scale)
    doc = {}
    for key, v in present.items():
        pos = heatmap.position(scale, v)
        doc[key] = {"position": pos, "color": list(heatmap.color(pos, scale.palette))}
    return doc, {"min": lo, "max": hi, "center": heatmap.scale_center(scale)}


def movement_overlay(session: AnalysisSession, method: str) -> dict:
    metrics = session.metrics()
    values = {e: float(v) for e, v in metrics.edge_bytes.items()}
    positions, bounds = _fit_positions(values, method, session.palette)
    edges = {
        e: {"bytes": metrics.edge_bytes[e], **positions[e]} for e in positions
    }
    return {
        "version": session.version,
        "scale": method,
        "bounds": bounds,
        "palette": [list(stop) for stop in _palette_doc(session.palette)],
        "edges": edges,
    }


def intensity_overlay(session: AnalysisSession, method: str) -> dict:
    metrics = session.metrics()
    values = {
        p: (None if v is None else float(v)) for p, v in metrics.intensity.items()
    }
    positions, bounds = _fit_positions(values, method, session.palette)
    nodes = {}
    for path, frac in metrics.intensity.items():
        entry = {"intensity": _fraction_doc(frac)}
        entry.update(positions.get(path, {"position": None, "color": None}))
        nodes[path] = entry
    return {
        "version": session.version,
        "scale": method,
        "bounds": bounds,
        "palette": [list(stop) for stop in _palette_doc(session.palette)],
        "nodes": nodes,
    }


def _palette_doc(palette):
    return [(pos, list(rgb)) for pos, rgb in palette]


def _element_key(container: str, indices) -> str:
    return f"{container}[{','.join(str(i) for i in indices)}]"


def global_report(session: AnalysisSession, method: str) -> dict:
    metrics = session.metrics()
    overlay = movement_overlay(session, method)
    return {
        "program": session.program.name,
        "bindings": dict(session.bindings),
        "scale": method,
        "edges": overlay["edges"],
        "bounds": overlay["bounds"],
        "tasklets": {
            path: {"per_execution": per, "total": total}
            for path, (per, total) in metrics.tasklet_ops.items()
        },
        "intensity": {p: _fraction_doc(v) for p, v in metrics.intensity.items()},
    }


def local_report(session: AnalysisSession) -> dict:
    trace = session.trace()
    counts = access_sim.access_counts(trace)
    stats = session.miss_stats()
    per_container, per_edge = cache.physical_movement(
        session.program, stats, session.config, session.bindings
    )
    threshold = session.config.capacity_threshold
    return {
        "program": session.program.name,
        "bindings": dict(session.bindings),
        "config": {
            "line_size": session.config.line_size,
            "capacity_threshold": "inf" if threshold == math.inf else threshold,
        },
        "trace": {
            "events": len(trace),
            "containers": {
                name: sum(
                    n for (c, _), n in counts.total.items() if c == name
                )
                for name in trace.shapes
            },
        },
        "misses": {
            name: {"cold": m.cold, "capacity": m.capacity, "hit": m.hit}
            for name, m in stats.per_container.items()
        },
        "physical_movement": {
            "containers": per_container,
            "edges": per_edge,
        },
    }


def render_text(report: dict) -> str:
    lines = [f"program: {report['program']}"]
    if report.get("bindings"):
        lines.append(
            "bindings: " + ", ".join(f"{k}={v}" for k, v in sorted(report["bindings"].items()))
        )
    if "edges" in report:
        lines.append(f"scale: {report['scale']}")
        lines.append("edge bytes:")
        for edge_id in sorted(report["edges"]):
            e = report["edges"][edge_id]
            lines.append(f"  {edge_id}: {e['bytes']} (position {e['position']:.3f})")
        lines.append("operational intensity:")
        for path in sorted(report["intensity"]):
            frac = report["intensity"][path]
            shown = "n/a" if frac is None else frac["exact"]
            lines.append(f"  {path}: {shown}")
    if "trace" in report:
        cfg = report["config"]
        lines.append(
            f"cache: line {cfg['line_size']} B, threshold {cfg['capacity_threshold']}"
        )
        lines.append(f"trace events: {report['trace']['events']}")
        lines.append("misses (cold/capacity/hit):")
        for name in sorted(report["misses"]):
            m = report["misses"][name]
            lines.append(f"  {name}: {m['cold']}/{m['capacity']}/{m['hit']}")
        lines.append("physical movement (bytes):")
        for name in sorted(report["physical_movement"]["containers"]):
            lines.append(f"  {name}: {report['physical_movement']['containers'][name]}")
    return "\n".join(lines) + "\n"


####################################################################
# HTTP API


def _parse_indices(raw: str) -> tuple:
    try:
        return tuple(int(part) for part in raw.split(","))
    except ValueError:
        raise SessionError(400, f"malformed element indices {raw!r}") from None


def _check_element(session: AnalysisSession, container: str, indices) -> None:
    try:
        c = session.program.container(container)
    except KeyError:
        raise SessionError(404, f"unknown container {container!r}") from None
    try:
        shape = tuple(evaluate(e, session.bindings) for e in c.shape)
    except ExpressionError as exc:
        raise SessionError(422, str(exc), element=_element_key(container, indices))
    if len(indices) != len(shape) or any(
        i < 0 or i >= n for i, n in zip(indices, shape)
    ):
        raise SessionError(
            404, f"element {_element_key(container, indices)} outside shape {list(shape)}"
        )


def _check_version(session: AnalysisSession, version) -> None:
    if version is not None and version != session.version:
        raise StaleStateError(version, session.version)


def _check_scale(method: str) -> None:
    if method not in heatmap.METHODS:
        raise SessionError(
            400, f"unknown scale {method!r}, expected one of {sorted(heatmap.METHODS)}"
        )


def _parse_pins(raw: str | None) -> dict:
    if not raw:
        return {}
    pins = {}
    for part in raw.split(","):
        name, eq, value = part.partition("=")
        if not eq:
            raise SessionError(400, f"malformed pin {part!r}, expected name=value")
        try:
            pins[name.strip()] = int(value)
        except ValueError:
            raise SessionError(400, f"pin {name!r} needs an integer value") from None
    return pins


def create_app(session: AnalysisSession, static_dir: str | None = None):
    from fastapi import Body, FastAPI, Query, Request
    from fastapi.responses import JSONResponse

    app = FastAPI(title="moviz analysis service")

    @app.exception_handler(SessionError)
    async def _session_error(request: Request, exc: SessionError):
        body = {"error": exc.message, "version": session.version}
        body.update(exc.extra)
        return JSONResponse(status_code=exc.status, content=body)

    def run(fn):
        """Translate analysis failures into structured HTTP errors."""
        try:
            return fn()
        except access_sim.OutOfBoundsError as exc:
            raise SessionError(
                422, str(exc), element=_element_key(exc.container, exc.indices)
            ) from None
        except access_sim.BudgetExceededError as exc:
            raise SessionError(422, str(exc)) from None
        except (
            access_sim.SimulationError,
            cache.CacheModelError,
            movement.MetricError,
            ExpressionError,
        ) as exc:
            raise SessionError(422, str(exc)) from None

    @app.get("/api/program")
    def get_program():
        index = ir.index_of(session.program)
        shapes = {}
        for c in session.program.containers:
            try:
                shapes[c.name] = [evaluate(e, session.bindings) for e in c.shape]
            except ExpressionError:
                shapes[c.name] = None
        maps = {}
        for path, info in index.nodes.items():
            if isinstance(info.node, ir.MapScope):
                try:
                    ranges = [
                        [evaluate(r.begin, session.bindings),
                         evaluate(r.end, session.bindings),
                         evaluate(r.step, session.bindings)]
                        for r in info.node.ranges
                    ]
                except ExpressionError:
                    ranges = None
                maps[path] = {"params": list(info.node.params), "ranges": ranges}
        return {
            "version": session.version,
            "name": session.program.name,
            "doc": ir.to_dict(session.program),
            "shapes": shapes,
            "maps": maps,
            "edges": [
                {
                    "id": e.id,
                    "state": e.state,
                    "graph": e.graph_path,
                    "src": e.src_path,
                    "dst": e.dst_path,
                    "container": e.memlet.container,
                    "kind": e.memlet.kind,
                }
                for e in index.edges.values()
            ],
        }

    @app.get("/api/params")
    def get_params():
        return {"version": session.version, "bindings": dict(session.bindings)}

    @app.post("/api/params")
    def post_params(payload: dict = Body(default={})):
        bindings = payload.get("bindings", payload)
        if not isinstance(bindings, dict):
            raise SessionError(400, "expected an object of symbol bindings")
        version = session.set_params(bindings)
        return {"version": version, "bindings": dict(session.bindings)}

    @app.get("/api/config")
    def get_config():
        t = session.config.capacity_threshold
        return {
            "version": session.version,
            "line_size": session.config.line_size,
            "capacity_threshold": "inf" if t == math.inf else t,
            "palette": [list(stop) for stop in _palette_doc(session.palette)],
        }

    @app.post("/api/config")
    def post_config(payload: dict = Body(default={})):
        line_size = payload.get("line_size")
        threshold = payload.get("capacity_threshold")
        if threshold in ("inf", "infinite"):
            threshold = math.inf
        palette = payload.get("palette")
        if palette is not None:
            try:
                palette = tuple(
                    (float(pos), (int(r), int(g), int(b))) for pos, (r, g, b) in palette
                )
            except (TypeError, ValueError):
                raise SessionError(400, "malformed palette, expected [position, [r,g,b]] stops")
        try:
            version = session.set_config(line_size, threshold, palette)
        except cache.CacheModelError as exc:
            raise SessionError(400, str(exc)) from None
        return get_config() | {"version": version}

    @app.get("/api/overlays/movement")
    def overlay_movement(scale: str = "linear", version: int | None = None):
        _check_version(session, version)
        _check_scale(scale)
        return run(lambda: movement_overlay(session, scale))

    @app.get("/api/overlays/intensity")
    def overlay_intensity(scale: str = "linear", version: int | None = None):
        _check_version(session, version)
        _check_scale(scale)
        return run(lambda: intensity_overlay(session, scale))

    @app.post("/api/simulate")
    def simulate(payload: dict = Body(default={})):
        max_events = payload.get("max_events")
        if max_events is not None and (not isinstance(max_events, int) or max_events < 1):
            raise SessionError(400, "max_events must be a positive integer")
        trace = run(lambda: session.trace(max_events))
        return {
            "version": session.version,
            "events": len(trace),
            "containers": {name: list(shape) for name, shape in trace.shapes.items()},
        }

    @app.get("/api/trace")
    def get_trace(
        frm: int = Query(default=0, alias="from"),
        to: int | None = None,
        version: int | None = None,
    ):
        _check_version(session, version)
        trace = run(session.trace)
        end = len(trace) if to is None else to
        window = run(lambda: access_sim.trace_window(trace, frm, end))
        return {
            "version": session.version,
            "total": len(trace),
            "events": [
                {
                    "time": ev.time,
                    "point": [[n, v] for n, v in ev.point],
                    "edge": ev.edge,
                    "container": ev.container,
                    "indices": list(ev.indices),
                    "kind": ev.kind,
                }
                for ev in window
            ],
        }

    @app.get("/api/counts")
    def get_counts(pin: str | None = None, version: int | None = None):
        _check_version(session, version)
        pins = _parse_pins(pin)
        trace = run(session.trace)
        events = access_sim.filter_trace(trace, pins) if pins else None
        counts = access_sim.access_counts(trace, events)
        containers: dict = {name: [] for name in trace.shapes}
        for (name, indices), total in sorted(counts.total.items()):
            containers[name].append(
                {
                    "indices": list(indices),
                    "total": total,
                    "reads": counts.reads.get((name, indices), 0),
                    "writes": counts.writes.get((name, indices), 0),
                }
            )
        return {
            "version": session.version,
            "pins": pins,
            "shapes": {name: list(shape) for name, shape in trace.shapes.items()},
            "containers": containers,
        }

    @app.get("/api/element/{container}/{indices}/linemates")
    def element_linemates(container: str, indices: str, version: int | None = None):
        _check_version(session, version)
        idx = _parse_indices(indices)
        _check_element(session, container, idx)
        mm = run(session.memory_map)
        mates = run(lambda: cache.line_mates(container, idx, session.config, mm))
        return {
            "version": session.version,
            "element": _element_key(container, idx),
            "address": mm.address(container, idx),
            "lines": list(mm.lines_of(container, idx)),
            "mates": [
                {"container": c, "indices": list(i)} for c, i in sorted(mates)
            ],
        }

    @app.get("/api/element/{container}/{indices}/related")
    def element_related(
        container: str,
        indices: str,
        also: list[str] = Query(default=[]),
        version: int | None = None,
    ):
        _check_version(session, version)
        selected = [(container, _parse_indices(indices))]
        for extra in also:
            name, colon, raw = extra.partition(":")
            if not colon:
                raise SessionError(400, f"malformed selection {extra!r}, expected container:indices")
            selected.append((name, _parse_indices(raw)))
        for name, idx in selected:
            _check_element(session, name, idx)
        trace = run(session.trace)
        related = run(lambda: access_sim.related_accesses(trace, selected))
        return {
            "version": session.version,
            "selected": [_element_key(c, i) for c, i in selected],
            "related": [
                {"container": c, "indices": list(i), "count": n}
                for (c, i), n in sorted(related.items())
            ],
        }

    @app.get("/api/element/{container}/{indices}/distances")
    def element_distances(
        container: str, indices: str, mode: str = "median", version: int | None = None
    ):
        _check_version(session, version)
        idx = _parse_indices(indices)
        _check_element(session, container, idx)
        profile = run(session.profile)
        distances = profile.per_element.get((container, idx), ())
        try:
            stats = cache.distance_stats(profile, mode)
        except cache.CacheModelError as exc:
            raise SessionError(400, str(exc)) from None
        value = stats.get((container, idx))
        return {
            "version": session.version,
            "element": _element_key(container, idx),
            "mode": mode,
            "value": "cold" if value == math.inf else value,
            "distances": ["cold" if d == math.inf else d for d in distances],
        }

    @app.get("/api/misses")
    def get_misses(version: int | None = None):
        _check_version(session, version)
        stats = run(session.miss_stats)
        t = stats.threshold
        return {
            "version": session.version,
            "capacity_threshold": "inf" if t == math.inf else t,
            "total": {"cold": stats.total.cold, "capacity": stats.total.capacity,
                      "hit": stats.total.hit},
            "containers": {
                name: {"cold": m.cold, "capacity": m.capacity, "hit": m.hit}
                for name, m in stats.per_container.items()
            },
            "elements": [
                {
                    "container": c,
                    "indices": list(i),
                    "cold": m.cold,
                    "capacity": m.capacity,
                    "hit": m.hit,
                }
                for (c, i), m in sorted(stats.per_element.items())
            ],
        }

    @app.get("/api/movement/physical")
    def get_physical(version: int | None = None):
        _check_version(session, version)
        stats = run(session.miss_stats)
        per_container, per_edge = run(
            lambda: cache.physical_movement(
                session.program, stats, session.config, session.bindings
            )
        )
        return {
            "version": session.version,
            "line_size": session.config.line_size,
            "containers": per_container,
            "edges": per_edge,
        }

    @app.get("/api/stats")
    def get_stats():
        return {
            "version": session.version,
            "program": session.program.name,
            "cache": session.cache_stats(),
        }

    if static_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
