"""Operation counting, logical movement bytes, and intensity ratios."""

import pathlib
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from moviz import ir, movement
from moviz.movement import (
    MetricError,
    TaskletSyntaxError,
    compute_metrics,
    count_arithmetic_ops,
    parse_tasklet,
    reevaluate,
    tasklet_free_names,
)

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


def tl(code: str) -> ir.Tasklet:
    return ir.Tasklet("t", code)


@pytest.mark.parametrize(
    "code,expected",
    [
        ("c = a * b", 1),
        ("o = a", 0),
        ("o = (a + b) * c + d", 3),
        ("o = fma(a, b, c)", 2),
        ("o = sqrt(x) + exp(y)", 3),
        ("o = abs(a - b)", 2),
        ("o = min(a, b, c)", 1),
        ("o = -a", 0),
        ("o = -(a + b)", 1),
        ("o = a % 2 + a / 2", 3),
        ("t0 = a + b\nt1 = t0 * t0\no = t1", 2),
        ("t0 = a + b; o = t0 - 1", 2),
    ],
)
def test_op_counts(code, expected):
    assert count_arithmetic_ops(tl(code)) == expected


def test_hdiff_tasklet_counts_34_ops():
    p = ir.load_program_file(str(FIXTURES / "hdiff.json"))
    tasklet = ir.index_of(p).nodes["main/stencil/diff"].node
    assert count_arithmetic_ops(tasklet) == 34


def test_syntax_errors_carry_position():
    for code in ["c =", "= a", "c = a +", "c = foo(a)", "c = (a", "c a"]:
        with pytest.raises(TaskletSyntaxError) as e:
            parse_tasklet(code)
        assert e.value.pos >= 0


def test_fma_arity_checked():
    with pytest.raises(TaskletSyntaxError):
        parse_tasklet("o = fma(a, b)")


def test_free_names():
    assert tasklet_free_names("t0 = a + b\no = t0 * c") == {"a", "b", "c"}
    assert tasklet_free_names("o = 1") == frozenset()


####################################################################
# MetricSet over fixtures


@pytest.fixture(scope="module")
def outer():
    return ir.load_program_file(str(FIXTURES / "outer.json"))


@pytest.fixture(scope="module")
def hdiff():
    return ir.load_program_file(str(FIXTURES / "hdiff.json"))


def test_outer_edge_bytes_and_ops(outer):
    m = compute_metrics(outer, {})
    assert m.edge_bytes["main/op#e0"] == 96   # A feeds 12 iterations of 8 bytes
    assert m.edge_bytes["main/op#e1"] == 96
    assert m.edge_bytes["main/op#e2"] == 96
    assert m.edge_bytes["main#e0"] == 24      # boundary summary: whole A once
    assert m.tasklet_ops["main/op/mult"] == (1, 12)


def test_outer_tasklet_intensity(outer):
    m = compute_metrics(outer, {})
    assert m.intensity["main/op/mult"] == Fraction(1, 24)


def test_outer_map_intensity(outer):
    # 12 ops over the 24+32+96 boundary bytes
    m = compute_metrics(outer, {})
    assert m.intensity["main/op"] == Fraction(12, 152)


def test_access_node_intensity_is_zero(outer):
    m = compute_metrics(outer, {})
    assert m.intensity["main/A"] == 0


def test_hdiff_boundary_bytes_at_defaults(hdiff):
    m = compute_metrics(hdiff, {"I": 8, "J": 8, "K": 5})
    assert m.edge_bytes["main#e2"] == 2560          # out_field write: 8*8*5*8
    assert m.edge_bytes["main#e0"] == 720 * 8       # in_field full halo


def test_hdiff_parametric_reevaluation(hdiff):
    m = reevaluate(hdiff, {"I": 256, "J": 256, "K": 160})
    assert m.edge_bytes["main#e0"] == 86_528_000


def test_hdiff_map_intensity_is_one_at_defaults(hdiff):
    m = compute_metrics(hdiff, {"I": 8, "J": 8, "K": 5})
    assert m.intensity["main/stencil"] == Fraction(1, 1)
    assert m.tasklet_ops["main/stencil/diff"] == (34, 34 * 320)


def test_determinism(hdiff):
    b = {"I": 8, "J": 8, "K": 5}
    m1 = compute_metrics(hdiff, b)
    m2 = compute_metrics(hdiff, b)
    assert m1.edge_bytes == m2.edge_bytes
    assert m1.tasklet_ops == m2.tasklet_ops
    assert m1.intensity == m2.intensity
    assert m2.sequence > m1.sequence


def test_doubling_a_symbol_scales_only_its_edges(hdiff):
    base = compute_metrics(hdiff, {"I": 8, "J": 8, "K": 5})
    doubled = compute_metrics(hdiff, {"I": 8, "J": 8, "K": 10})
    # coeff boundary volume I*J*K is linear in K
    assert doubled.edge_bytes["main#e1"] == 2 * base.edge_bytes["main#e1"]


@given(st.integers(min_value=1, max_value=64), st.integers(min_value=1, max_value=4))
def test_volume_scaling_is_exact(n, k):
    p = ir.load_program({
        "name": "scal",
        "symbols": [{"name": "N"}],
        "containers": [{"name": "A", "shape": ["N"], "element_size": 8}],
        "states": [{
            "name": "s",
            "nodes": [
                {"id": "A", "type": "access", "container": "A"},
                {"id": "m", "type": "map", "params": ["i"],
                 "ranges": [{"begin": 0, "end": "N - 1"}],
                 "body": {"nodes": [{"id": "t", "type": "tasklet", "code": "o = x",
                                     "inputs": ["x"], "outputs": ["o"]}],
                          "edges": [
                              {"src": "A", "dst": "t", "dst_conn": "x",
                               "container": "A",
                               "subset": [{"begin": "i", "end": "i"}],
                               "kind": "read"},
                              {"src": "t", "src_conn": "o", "dst": "A2",
                               "container": "A",
                               "subset": [{"begin": "i", "end": "i"}],
                               "kind": "write"}]}},
                {"id": "A2", "type": "access", "container": "A"},
            ],
            "edges": [],
        }],
    })
    m1 = compute_metrics(p, {"N": n})
    m2 = compute_metrics(p, {"N": k * n})
    assert m2.edge_bytes["s/m#e0"] == k * m1.edge_bytes["s/m#e0"]


def test_missing_binding_names_element(hdiff):
    with pytest.raises(MetricError) as e:
        compute_metrics(hdiff, {"I": 8, "J": 8})
    assert e.value.path


def test_bad_tasklet_code_reports_node_path():
    p = ir.load_program({
        "name": "bad",
        "containers": [{"name": "A", "shape": [1], "element_size": 8}],
        "states": [{
            "name": "s",
            "nodes": [
                {"id": "A", "type": "access", "container": "A"},
                {"id": "t", "type": "tasklet", "code": "o = ??", "inputs": [],
                 "outputs": ["o"]},
            ],
            "edges": [{"src": "t", "src_conn": "o", "dst": "A", "container": "A",
                       "subset": [{"begin": 0, "end": 0}], "kind": "write"}],
        }],
    })
    with pytest.raises(MetricError) as e:
        compute_metrics(p, {})
    assert e.value.path == "s/t"


def test_zero_incident_bytes_reports_undefined_intensity():
    p = ir.load_program({
        "name": "iso",
        "containers": [{"name": "A", "shape": [1], "element_size": 8}],
        "states": [{"name": "s",
                    "nodes": [{"id": "A", "type": "access", "container": "A"}],
                    "edges": []}],
    })
    m = compute_metrics(p, {})
    assert m.intensity["s/A"] is None
