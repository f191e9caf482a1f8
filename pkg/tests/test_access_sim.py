import copy
import io
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from moviz import access_sim as sim
from moviz import ir

import _oracle


@pytest.fixture(scope="module")
def outer():
    return ir.load_program_file("fixtures/outer.json")


@pytest.fixture(scope="module")
def outer_trace(outer):
    return sim.simulate_accesses(outer, outer.default_bindings())


@pytest.fixture(scope="module")
def conv():
    return ir.load_program_file("fixtures/conv3d.json")


@pytest.fixture(scope="module")
def hdiff_doc():
    with open("fixtures/hdiff.json") as f:
        return json.load(f)


def test_outer_trace_shape(outer_trace):
    assert len(outer_trace) == 36
    assert outer_trace.events[0] == sim.AccessEvent(
        0, (("i", 0), ("j", 0)), "main/op#e0", "A", (0,), "read"
    )
    assert outer_trace.events[35] == sim.AccessEvent(
        35, (("i", 2), ("j", 3)), "main/op#e2", "C", (2, 3), "write"
    )


def test_times_are_dense(outer_trace):
    assert [e.time for e in outer_trace.events] == list(range(36))


def test_reads_precede_writes_within_point(outer_trace):
    by_point = {}
    for ev in outer_trace.events:
        by_point.setdefault(ev.point, []).append(ev.kind)
    for kinds in by_point.values():
        assert kinds == ["read", "read", "write"]


def test_iteration_space(outer):
    points = sim.enumerate_iteration_space(outer, {})
    assert len(points) == 12
    assert points[0] == (("i", 0), ("j", 0))
    assert points[1] == (("i", 0), ("j", 1))  # last param fastest
    assert points[-1] == (("i", 2), ("j", 3))


def test_outer_counts(outer_trace):
    counts = sim.access_counts(outer_trace)
    for i in range(3):
        assert counts.total[("A", (i,))] == 4
    for j in range(4):
        assert counts.total[("B", (j,))] == 3
    for i in range(3):
        for j in range(4):
            assert counts.total[("C", (i, j))] == 1
            assert counts.writes[("C", (i, j))] == 1
            assert ("C", (i, j)) not in counts.reads


def test_count_conservation(outer_trace):
    counts = sim.access_counts(outer_trace)
    assert sum(counts.total.values()) == len(outer_trace)
    for key, n in counts.total.items():
        assert counts.reads.get(key, 0) + counts.writes.get(key, 0) == n


def test_related_single_selection(outer_trace):
    rel = sim.related_accesses(outer_trace, [("B", (0,))])
    expect = {("A", (i,)): 1 for i in range(3)}
    expect.update({("C", (i, 0)): 1 for i in range(3)})
    assert rel == expect


def test_related_selections_stack(outer_trace):
    rel = sim.related_accesses(outer_trace, [("A", (1,)), ("B", (2,))])
    # the shared point (i=1, j=2) contributes C[1,2] once per selection
    assert rel[("C", (1, 2))] == 2
    # each selection sees the other at that point, never itself
    assert rel[("A", (1,))] == 1
    assert rel[("B", (2,))] == 1


def test_related_rejects_unknown_element(outer_trace):
    with pytest.raises(sim.SimulationError):
        sim.related_accesses(outer_trace, [("A", (7,))])
    with pytest.raises(sim.SimulationError):
        sim.related_accesses(outer_trace, [("D", (0,))])


def test_conv_counts(conv):
    trace = sim.simulate_accesses(conv, {})
    assert len(trace) == 13824
    counts = sim.access_counts(trace)
    for co in range(2):
        for ci in range(3):
            for ky in range(4):
                for kx in range(4):
                    assert counts.total[("weights", (co, ci, ky, kx))] == 36
    assert counts.total[("input", (0, 0, 0))] == 2
    assert counts.total[("input", (2, 0, 0))] == 2
    assert counts.total[("input", (0, 4, 4))] == 32


def test_matches_reference_walk(outer, outer_trace):
    expect = _oracle.trace(outer, {})
    got = [(e.point, e.edge, e.container, e.indices, e.kind) for e in outer_trace.events]
    assert got == expect


def test_determinism(conv):
    a = sim.simulate_accesses(conv, {})
    b = sim.simulate_accesses(conv, {})
    assert a.events == b.events


@given(
    i=st.integers(min_value=1, max_value=4),
    j=st.integers(min_value=1, max_value=4),
    k=st.integers(min_value=1, max_value=3),
)
@settings(max_examples=20, deadline=None)
def test_trace_length_identity(i, j, k):
    # trace length equals the sum of derived volumes over tasklet edges
    prog = ir.load_program_file("fixtures/hdiff.json")
    bindings = {"I": i, "J": j, "K": k}
    assert sim.expected_event_count(prog, bindings) == 15 * i * j * k
    assert len(sim.simulate_accesses(prog, bindings)) == 15 * i * j * k


@given(st.data())
@settings(max_examples=25, deadline=None)
def test_related_counts_symmetric(outer_trace, data):
    elements = sorted({(e.container, e.indices) for e in outer_trace.events})
    a = data.draw(st.sampled_from(elements))
    b = data.draw(st.sampled_from(elements))
    ra = sim.related_accesses(outer_trace, [a])
    rb = sim.related_accesses(outer_trace, [b])
    assert ra.get(b, 0) == rb.get(a, 0)


@given(
    i=st.integers(min_value=0, max_value=3),
    k=st.integers(min_value=0, max_value=2),
)
@settings(max_examples=12, deadline=None)
def test_pinning_matches_filtered_trace(hdiff_doc, i, k):
    bindings = {"I": 4, "J": 4, "K": 3}
    prog = ir.parse_program(hdiff_doc)
    full = sim.simulate_accesses(prog, bindings)
    filtered = sim.filter_trace(full, {"i": i, "k": k})

    pinned_doc = copy.deepcopy(hdiff_doc)
    map_node = pinned_doc["states"][0]["nodes"][2]
    for param, value in (("i", i), ("k", k)):
        axis = map_node["params"].index(param)
        map_node["ranges"][axis] = {"begin": str(value), "end": str(value), "step": "1"}
    pinned = sim.simulate_accesses(ir.parse_program(pinned_doc), bindings)

    assert [(e.point, e.edge, e.container, e.indices, e.kind) for e in filtered] == [
        (e.point, e.edge, e.container, e.indices, e.kind) for e in pinned.events
    ]


def test_window(outer_trace):
    w = sim.trace_window(outer_trace, 0, 3)
    assert [e.time for e in w] == [0, 1, 2]
    assert sim.trace_window(outer_trace, 36, 36) == []
    with pytest.raises(sim.SimulationError):
        sim.trace_window(outer_trace, 3, 2)
    with pytest.raises(sim.SimulationError):
        sim.trace_window(outer_trace, 0, 37)
    with pytest.raises(sim.SimulationError):
        sim.trace_window(outer_trace, -1, 2)


def test_budget_guard(outer):
    with pytest.raises(sim.BudgetExceededError) as err:
        sim.simulate_accesses(outer, {}, max_events=10)
    assert err.value.expected == 36
    # raising the cap runs it
    assert len(sim.simulate_accesses(outer, {}, max_events=36)) == 36


def test_budget_counts_without_running():
    prog = ir.load_program_file("fixtures/hdiff.json")
    big = {"I": 256, "J": 256, "K": 160}
    assert sim.expected_event_count(prog, big) == 15 * 256 * 256 * 160
    with pytest.raises(sim.BudgetExceededError):
        sim.simulate_accesses(prog, big)


def test_out_of_bounds_is_reported():
    doc = {
        "name": "oob",
        "containers": [{"name": "A", "shape": [3], "element_size": 8}],
        "states": [
            {
                "name": "s",
                "nodes": [
                    {"id": "A", "type": "access", "container": "A"},
                    {
                        "id": "t", "type": "tasklet", "code": "y = x + 1",
                        "inputs": ["x"], "outputs": [],
                    },
                ],
                "edges": [
                    {
                        "src": "A", "dst": "t", "dst_conn": "x",
                        "container": "A",
                        "subset": [{"begin": "0", "end": "3", "step": "1"}],
                        "kind": "read",
                    }
                ],
            }
        ],
    }
    prog = ir.parse_program(doc)
    with pytest.raises(sim.OutOfBoundsError) as err:
        sim.simulate_accesses(prog, {})
    assert err.value.indices == (3,)
    assert "s#e0" in str(err.value)


def test_text_roundtrip(outer_trace):
    buf = io.StringIO()
    sim.export_text(outer_trace, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0].startswith("#")
    assert lines[1] == "0 i=0,j=0 main/op#e0 A [0] read"
    assert len(lines) == 37
    buf.seek(0)
    assert sim.read_text(buf) == list(outer_trace.events)


def test_binary_roundtrip(outer_trace):
    buf = io.BytesIO()
    sim.export_binary(outer_trace, buf)
    buf.seek(0)
    bindings, events = sim.read_binary(buf)
    assert bindings == outer_trace.bindings
    assert events == list(outer_trace.events)


def test_binary_rejects_garbage():
    with pytest.raises(sim.SimulationError):
        sim.read_binary(io.BytesIO(b"nope"))
