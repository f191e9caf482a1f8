"""Program loading, validation, indexing, and derived volumes."""

import copy
import json
import pathlib

import pytest

from moviz import ir
from moviz.symbolic import Lit, evaluate, parse_expr

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"

ALL_FIXTURES = sorted(FIXTURES.glob("*.json"))


def load(name: str) -> ir.Program:
    return ir.load_program_file(str(FIXTURES / name))


def outer_doc() -> dict:
    with open(FIXTURES / "outer.json") as f:
        return json.load(f)


def test_outer_fixture_structure():
    p = load("outer.json")
    assert [c.name for c in p.containers] == ["A", "B", "C"]
    assert [tuple(evaluate(e, {}) for e in c.shape) for c in p.containers] == [
        (3,),
        (4,),
        (3, 4),
    ]
    maps = [n for n in p.states[0].graph.nodes if isinstance(n, ir.MapScope)]
    assert len(maps) == 1
    assert maps[0].params == ("i", "j")
    assert [r.evaluate({}) for r in maps[0].ranges] == [range(0, 3), range(0, 4)]
    tasklets = [n for n in maps[0].body.nodes if isinstance(n, ir.Tasklet)]
    assert len(tasklets) == 1


def test_hdiff_fixture_valid_with_three_symbols():
    p = load("hdiff.json")
    assert {s.name for s in p.symbols} == {"I", "J", "K"}
    assert ir.validate(p) == []
    in_field = p.container("in_field")
    shape = tuple(evaluate(e, {"I": 8, "J": 8, "K": 5}) for e in in_field.shape)
    assert shape == (12, 12, 5)


@pytest.mark.parametrize("path", ALL_FIXTURES, ids=lambda p: p.stem)
def test_all_fixtures_validate_clean(path):
    p = ir.load_program_file(str(path))
    assert ir.validate(p) == []


@pytest.mark.parametrize("path", ALL_FIXTURES, ids=lambda p: p.stem)
def test_serialize_round_trip(path):
    p = ir.load_program_file(str(path))
    assert ir.parse_program(ir.serialize(p)) == p


def test_undeclared_container_named_in_error():
    doc = outer_doc()
    doc["states"][0]["nodes"][0]["container"] = "X"
    diags = ir.validate(ir.parse_program(doc))
    assert any("'X'" in d.message for d in diags)


def test_rank_mismatch_diagnostic():
    doc = outer_doc()
    # 1-D subset into the 2-D container C
    doc["states"][0]["edges"][2]["subset"] = [{"begin": 0, "end": 2}]
    diags = ir.validate(ir.parse_program(doc))
    assert sum("rank" in d.message for d in diags) == 1


def test_map_step_zero_diagnostic():
    doc = outer_doc()
    doc["states"][0]["nodes"][2]["ranges"][0]["step"] = 0
    diags = ir.validate(ir.parse_program(doc))
    assert len([d for d in diags if "step" in d.message]) == 1
    with pytest.raises(ir.ValidationError):
        ir.load_program(doc)


def test_empty_range_is_allowed():
    doc = outer_doc()
    doc["states"][0]["nodes"][2]["ranges"][0] = {"begin": 1, "end": 0}
    assert ir.validate(ir.parse_program(doc)) == []


def test_inverted_range_diagnostic():
    doc = outer_doc()
    doc["states"][0]["nodes"][2]["ranges"][0] = {"begin": 2, "end": 0}
    diags = ir.validate(ir.parse_program(doc))
    assert any("begin exceeds end" in d.message for d in diags)


def test_param_shadowing_diagnostic():
    doc = outer_doc()
    doc["symbols"] = [{"name": "i"}]
    diags = ir.validate(ir.parse_program(doc))
    assert any("shadows" in d.message for d in diags)


def test_unattached_connector_diagnostic():
    doc = outer_doc()
    body = doc["states"][0]["nodes"][2]["body"]
    del body["edges"][1]  # b no longer fed
    diags = ir.validate(ir.parse_program(doc))
    assert any("'b'" in d.message and "0 memlets" in d.message for d in diags)


def test_doubly_attached_connector_diagnostic():
    doc = outer_doc()
    body = doc["states"][0]["nodes"][2]["body"]
    body["edges"].append(copy.deepcopy(body["edges"][0]))
    diags = ir.validate(ir.parse_program(doc))
    assert any("2 memlets" in d.message for d in diags)


def test_read_modify_write_through_one_access_node_is_cyclic():
    doc = {
        "name": "rmw",
        "containers": [{"name": "A", "shape": [4], "element_size": 8}],
        "states": [
            {
                "name": "s",
                "nodes": [
                    {"id": "A", "type": "access", "container": "A"},
                    {"id": "t", "type": "tasklet", "code": "y = x + 1",
                     "inputs": ["x"], "outputs": ["y"]},
                ],
                "edges": [
                    {"src": "A", "dst": "t", "dst_conn": "x", "container": "A",
                     "subset": [{"begin": 0, "end": 0}], "kind": "read"},
                    {"src": "t", "src_conn": "y", "dst": "A", "container": "A",
                     "subset": [{"begin": 0, "end": 0}], "kind": "write"},
                ],
            }
        ],
    }
    diags = ir.validate(ir.parse_program(doc))
    assert any("cycle" in d.message for d in diags)


def test_memlet_container_must_match_access_node():
    doc = outer_doc()
    doc["states"][0]["edges"][0]["container"] = "B"
    doc["states"][0]["edges"][0]["subset"] = [{"begin": 0, "end": 3}]
    diags = ir.validate(ir.parse_program(doc))
    assert any("does not match" in d.message for d in diags)


def test_duplicate_node_id_within_state():
    doc = outer_doc()
    doc["states"][0]["nodes"][2]["body"]["nodes"][0]["id"] = "A"
    diags = ir.validate(ir.parse_program(doc))
    assert any("duplicate node id" in d.message for d in diags)


####################################################################
# Format errors


def test_missing_field_is_path_addressed():
    with pytest.raises(ir.ProgramFormatError) as e:
        ir.parse_program({"containers": [{"name": "A"}]})
    assert e.value.path == "containers[0]"


def test_bad_expression_is_path_addressed():
    doc = outer_doc()
    doc["containers"][0]["shape"] = ["3 +"]
    with pytest.raises(ir.ProgramFormatError) as e:
        ir.parse_program(doc)
    assert "shape[0]" in e.value.path


def test_unknown_node_type_rejected():
    doc = outer_doc()
    doc["states"][0]["nodes"][0]["type"] = "reduce"
    with pytest.raises(ir.ProgramFormatError):
        ir.parse_program(doc)


def test_bad_kind_rejected():
    doc = outer_doc()
    doc["states"][0]["edges"][0]["kind"] = "readwrite"
    with pytest.raises(ir.ProgramFormatError):
        ir.parse_program(doc)


def test_invalid_json_text():
    with pytest.raises(ir.ProgramFormatError):
        ir.parse_program("{not json")


####################################################################
# Derived volumes


def test_outer_body_edge_volume_is_twelve():
    p = load("outer.json")
    idx = ir.index_of(p)
    a_edge = idx.edges["main/op#e0"]
    assert evaluate(ir.derived_volume(p, a_edge), {}) == 12
    c_edge = idx.edges["main/op#e2"]
    assert evaluate(ir.derived_volume(p, c_edge), {}) == 12


def test_explicit_volume_wins():
    doc = outer_doc()
    doc["symbols"] = [{"name": "I", "default": 8}, {"name": "J", "default": 8},
                      {"name": "K", "default": 5}]
    doc["states"][0]["edges"][0]["volume"] = "I * J * K"
    p = ir.load_program(doc)
    edge = ir.index_of(p).edges["main#e0"]
    assert evaluate(ir.derived_volume(p, edge), p.default_bindings()) == 320


def test_nesting_multiplies_derived_volume():
    """Wrapping the same edge in one more map scales its volume by the trip count."""
    inner = {
        "nodes": [{"id": "t", "type": "tasklet", "code": "y = x",
                   "inputs": ["x"], "outputs": ["y"]}],
        "edges": [
            {"src": "A", "dst": "t", "dst_conn": "x", "container": "A",
             "subset": [{"begin": "i", "end": "i"}], "kind": "read"},
            {"src": "t", "src_conn": "y", "dst": "Out", "container": "Out",
             "subset": [{"begin": "i", "end": "i"}], "kind": "write"},
        ],
    }

    def with_outer(n):
        nodes = [
            {"id": "A", "type": "access", "container": "A"},
            {"id": "inner", "type": "map", "params": ["i"],
             "ranges": [{"begin": 0, "end": 5}], "body": inner},
            {"id": "Out", "type": "access", "container": "Out"},
        ]
        if n:
            nodes[1] = {"id": "outer", "type": "map", "params": ["r"],
                        "ranges": [{"begin": 0, "end": n - 1}],
                        "body": {"nodes": [nodes[1]], "edges": []}}
        return ir.load_program({
            "name": "nest",
            "containers": [{"name": "A", "shape": [6], "element_size": 8},
                           {"name": "Out", "shape": [6], "element_size": 8}],
            "states": [{"name": "s", "nodes": nodes, "edges": []}],
        })

    flat = with_outer(0)
    nested = with_outer(7)
    v_flat = evaluate(ir.derived_volume(flat, "s/inner#e0"), {})
    v_nested = evaluate(ir.derived_volume(nested, "s/outer/inner#e0"), {})
    assert v_nested == 7 * v_flat


def test_default_strides_are_a_bijection():
    c = ir.Container("X", (Lit(3), Lit(4), Lit(5)), 8)
    strides = [evaluate(s, {}) for s in c.stride_exprs()]
    assert strides == [20, 5, 1]
    seen = set()
    for i in range(3):
        for j in range(4):
            for k in range(5):
                seen.add(i * 20 + j * 5 + k)
    assert seen == set(range(60))


####################################################################
# Index and ordering


def test_edge_ids_and_scope_resolution():
    p = load("outer.json")
    idx = ir.index_of(p)
    assert set(idx.edges_by_graph) == {"main", "main/op"}
    body_a = idx.edges["main/op#e0"]
    # A in the body resolves to the state-level access node
    assert body_a.src_path == "main/A"
    assert isinstance(body_a.src_node, ir.AccessNode)
    assert body_a.scopes[0].id == "op"
    boundary = idx.edges["main#e0"]
    assert boundary.scopes == ()
    assert boundary.dst_path == "main/op"


def test_topological_order_breaks_ties_by_declaration():
    p = load("outer.json")
    order = [n.id for n in ir.local_topological_order(p.states[0].graph)]
    assert order == ["A", "B", "op", "C"]


def test_topological_order_rejects_cycles():
    g = ir.Graph(
        nodes=(ir.AccessNode("a", "A"), ir.AccessNode("b", "A")),
        edges=(
            ir.Memlet("a", "b", "A", (ir.Range(Lit(0), Lit(0)),), "read"),
            ir.Memlet("b", "a", "A", (ir.Range(Lit(0), Lit(0)),), "read"),
        ),
    )
    with pytest.raises(ValueError):
        ir.local_topological_order(g)


def test_range_size_expression():
    r = ir.Range(parse_expr("0"), parse_expr("N - 1"), parse_expr("2"))
    assert evaluate(r.size_expr(), {"N": 9}) == 5
    assert r.evaluate({"N": 9}) == range(0, 9, 2)
