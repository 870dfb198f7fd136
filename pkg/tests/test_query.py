import copy
import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from causal_atlas.builder import build_atlas
from causal_atlas.canon import RelType
from causal_atlas.errors import NotFound
from causal_atlas.ingest import Lcm, RawEdge
from causal_atlas.io import write_tables
from causal_atlas.query import (
    QUERY_KINDS,
    SQL_KINDS,
    backbone,
    counterfactual_diff,
    do_cut,
    emit_sql,
    mechanisms,
    mutual_influence,
    provenance,
    run_query,
    soft_do,
    sql_float,
    sql_int,
    sql_string,
    two_hop_paths,
)
from causal_atlas.synth import random_lcms
from sql_oracle import native_rows, query_params, rows_agree, sql_rows

BIPEDALISM_TOP7 = [
    ("INFLUENCES", "metabolic efficiency during long-distance travel", 15, 1.4624),
    ("INCREASES", "energy efficiency during locomotion in early hominins", 13, 1.3282),
    ("INCREASES", "energy efficiency during long-distance locomotion", 13, 1.2644),
    ("INFLUENCES", "endurance capacity (heat dissipation, etc.)", 13, 1.2557),
    ("INCREASES", "energy efficiency (metabolic resources)", 12, 1.2093),
    ("INFLUENCES", "structural adaptation of femoral/tibial bones", 11, 1.2010),
    ("INFLUENCES", "stride length and pelvic mechanics", 11, 1.1029),
]


def small_atlas(*edges):
    """edges as (src, rel, dst, mass)"""
    return build_atlas([Lcm("d", f"m{i}", edges=(RawEdge(s, r, t),), score=w) for i, (s, r, t, w) in enumerate(edges)])


def random_atlas(seed, n_concepts=8):
    return build_atlas(random_lcms(random.Random(seed), n_concepts=n_concepts))


seeds = st.integers(0, 2**32)


# -- backbone / mechanisms / provenance ------------------------------------------------

def test_backbone_golden_rows(golden_atlas):
    rows = backbone(golden_atlas, 8)
    assert [(r.rel_type.value, r.src, r.dst, r.support_lcms) for r in rows[:7]] == [
        (rel, "bipedalism", dst, n) for rel, dst, n, _ in BIPEDALISM_TOP7]
    for r, (*_, mass) in zip(rows, BIPEDALISM_TOP7):
        assert abs(r.score_sum - mass) <= 1e-6
    assert (rows[7].src, rows[7].dst, rows[7].support_lcms) == (
        "reduced forest cover", "selection for terrestrial locomotion", 6)
    assert abs(rows[7].score_sum - 0.4637) <= 1e-6


def test_backbone_limit_larger_than_edges():
    atlas = small_atlas(("a", "causes", "b", 1.0))
    assert len(backbone(atlas, 100)) == 1
    with pytest.raises(ValueError):
        backbone(atlas, 0)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_backbone_matches_sort_oracle(seed):
    atlas = random_atlas(seed)
    want = sorted(atlas.edges, key=lambda e: (-e.score_sum, atlas.label(e.src_id), atlas.label(e.dst_id),
                                              e.rel_type.value))
    assert [r.edge_id for r in backbone(atlas, None)] == [e.edge_id for e in want]


def test_mechanisms_golden(golden_atlas):
    rows = mechanisms(golden_atlas, "bipedalism", 7)
    assert [(r.rel_type.value, r.dst, r.support_lcms) for r in rows] == [(a, b, c) for a, b, c, _ in BIPEDALISM_TOP7]
    assert abs(rows[0].score_sum - 1.4624) <= 1e-6


def test_mechanisms_sink_and_unknown():
    atlas = small_atlas(("a", "causes", "b", 1.0))
    assert mechanisms(atlas, "b") == []
    with pytest.raises(NotFound):
        mechanisms(atlas, "nowhere")


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_mechanisms_is_filtered_backbone(seed):
    atlas = random_atlas(seed)
    for node in atlas.nodes[:5]:
        want = [(r.edge_id, r.score_sum) for r in backbone(atlas, None) if r.src == node.label_canon]
        assert [(r.edge_id, r.score_sum) for r in mechanisms(atlas, node.label_canon)] == want


def test_provenance(golden_atlas):
    top = backbone(golden_atlas, 1)[0]
    rows = provenance(golden_atlas, top.edge_id)
    assert len({(r.doc_id, r.lcm_instance_id) for r in rows}) == 15
    assert math.isclose(sum(r.weight for r in rows), top.score_sum, abs_tol=1e-9)
    assert [(r.doc_id, r.lcm_instance_id) for r in rows] == sorted((r.doc_id, r.lcm_instance_id) for r in rows)
    assert all(hasattr(r, f) for r in rows for f in ("doc_id", "lcm_instance_id", "score_raw", "coupling"))
    with pytest.raises(NotFound):
        provenance(golden_atlas, 1)


def test_provenance_three_events():
    atlas = build_atlas([Lcm(f"d{i}", "m", edges=(RawEdge("a", "causes", "b"),)) for i in range(3)])
    assert len(provenance(atlas, atlas.edges[0].edge_id)) == 3


# -- composition ------------------------------------------------------------------------

def test_two_hop_examples():
    (p,) = two_hop_paths(small_atlas(("a", "causes", "b", 1.0), ("b", "causes", "c", 0.5)))
    assert (p.a, p.b, p.c, p.path_score) == ("a", "b", "c", 1.5)
    paths = two_hop_paths(small_atlas(("a", "causes", "b", 1.0), ("b", "causes", "a", 1.0)))
    assert [(p.a, p.b, p.c) for p in paths] == [("a", "b", "a"), ("b", "a", "b")]


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_two_hop_matches_nested_loop(seed):
    atlas = random_atlas(seed, n_concepts=6)
    lab = atlas.label
    want = sorted(((lab(e1.src_id), e1.rel_type, lab(e1.dst_id), e2.rel_type, lab(e2.dst_id),
                    e1.score_sum + e2.score_sum)
                   for e1 in atlas.edges for e2 in atlas.edges if e1.dst_id == e2.src_id),
                  key=lambda r: (-r[5], r[0], r[2], r[4], r[1].value, r[3].value))
    assert [tuple(p) for p in two_hop_paths(atlas)] == want
    assert len(want) == sum(n.deg_in * n.deg_out for n in atlas.nodes)


def test_mutual_examples():
    assert len(mutual_influence(small_atlas(("a", "causes", "b", 1.0), ("b", "reduces", "a", 1.0)))) == 1
    assert mutual_influence(small_atlas(("a", "causes", "b", 1.0), ("b", "causes", "c", 1.0))) == []


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_mutual_matches_pair_scan(seed):
    atlas = random_atlas(seed, n_concepts=5)
    lab = atlas.label
    want = sorted((lab(e1.src_id), e1.rel_type, lab(e1.dst_id), e2.rel_type)
                  for e1 in atlas.edges for e2 in atlas.edges
                  if e1.src_id == e2.dst_id and e1.dst_id == e2.src_id and lab(e1.src_id) < lab(e1.dst_id))
    assert sorted(tuple(r) for r in mutual_influence(atlas)) == want


# -- interventions ------------------------------------------------------------------------

def test_do_cut_set_deletion():
    atlas = small_atlas(("a", "causes", "b", 1.0), ("a", "causes", "c", 1.0), ("b", "causes", "c", 1.0))
    view = do_cut(atlas, "a")
    assert [(atlas.label(e.src_id), atlas.label(e.dst_id)) for e, _ in view.edges()] == [("b", "c")]
    assert do_cut(view, "a") == view
    assert do_cut(atlas, "c").removed_sources == frozenset({atlas.node_for_label("c")})
    assert len(list(do_cut(atlas, "c").edges())) == 3
    with pytest.raises(NotFound):
        do_cut(atlas, "zzz")


def test_do_cut_golden_vanishes_top7(golden_atlas):
    base = backbone(golden_atlas, 10)
    diff = counterfactual_diff(base, backbone(do_cut(golden_atlas, "bipedalism"), 10))
    assert [(r.rel_type.value, r.dst) for r in diff.vanished] == [(a, b) for a, b, _, _ in BIPEDALISM_TOP7]
    assert [(i, j) for _, i, j in diff.rank_changes] == [(8, 1), (9, 2), (10, 3)]


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(0, 100))
def test_do_cut_soundness(seed, pick):
    atlas = random_atlas(seed)
    node = atlas.nodes[pick % len(atlas.nodes)]
    view = do_cut(atlas, node.label_canon)
    assert all(e.src_id != node.node_id for e, _ in view.edges())
    diff = counterfactual_diff(backbone(atlas, None), backbone(view, None))
    assert {r.edge_id for r in diff.vanished} == {e.edge_id for e in atlas.out_index.get(node.node_id, ())}


def test_soft_do_scales_effective_mass():
    atlas = small_atlas(("a", "causes", "b", 1.0), ("c", "causes", "b", 0.5))
    view = soft_do(atlas, "a", 0.2)
    assert [(r.src, r.score_sum) for r in backbone(view)] == [("c", 0.5), ("a", 0.2)]
    assert sorted(e.score_sum for e in atlas.edges) == [0.5, 1.0]  # stored masses untouched
    assert soft_do(view, "a", 0.5).multiplier(atlas.node_for_label("a")) == pytest.approx(0.1)
    zero = soft_do(atlas, "a", 0.0)
    assert len(list(zero.edges())) == 2
    with pytest.raises(ValueError):
        soft_do(atlas, "a", -0.1)
    with pytest.raises(NotFound):
        soft_do(atlas, "zzz", 0.5)


@given(st.floats(0, 10), st.floats(0, 10))
def test_soft_do_composes_multiplicatively(a, b):
    atlas = small_atlas(("x", "causes", "y", 1.0))
    view = soft_do(soft_do(atlas, "x", a), "x", b)
    assert view.multiplier(atlas.node_for_label("x")) == a * b


def _all_queries(source, atlas):
    out = {}
    for kind in QUERY_KINDS:
        params = {}
        if kind == "mechanisms":
            params["src"] = atlas.nodes[0].label_canon
        if kind == "provenance":
            params["edge_id"] = atlas.edges[0].edge_id
        out[kind] = run_query(source, kind, **params)
    return out


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(0, 100))
def test_soft_do_identity(seed, pick):
    atlas = random_atlas(seed)
    node = atlas.nodes[pick % len(atlas.nodes)]
    assert _all_queries(soft_do(atlas, node.label_canon, 1.0), atlas) == _all_queries(atlas, atlas)


def test_soft_do_mid_hub_reorders_without_vanishing(golden_atlas):
    base = backbone(golden_atlas, None)
    diff = counterfactual_diff(base, backbone(soft_do(golden_atlas, "reduced forest cover", 0.1), None))
    assert diff.vanished == [] and diff.rank_changes


def test_counterfactual_diff_identity(golden_atlas):
    rows = backbone(golden_atlas, 10)
    assert counterfactual_diff(rows, list(rows)).empty


def test_views_leave_base_untouched(golden_atlas):
    snapshot = copy.deepcopy((golden_atlas.nodes, golden_atlas.edges, golden_atlas.support, golden_atlas.scc))
    view = soft_do(do_cut(golden_atlas, "bipedalism"), "reduced forest cover", 0.2)
    _all_queries(view, golden_atlas)
    assert (golden_atlas.nodes, golden_atlas.edges, golden_atlas.support, golden_atlas.scc) == snapshot


def test_run_query_errors(golden_atlas):
    with pytest.raises(ValueError):
        run_query(golden_atlas, "nope")
    with pytest.raises(ValueError):
        run_query(golden_atlas, "mechanisms")
    with pytest.raises(ValueError):
        run_query(golden_atlas, "provenance")


# -- SQL text -------------------------------------------------------------------------------

def test_emit_sql_published_fragments():
    assert "ORDER BY e.score_sum DESC" in emit_sql("backbone", limit=20)
    assert "n1.label_canon <> 'bipedalism'" in emit_sql("do_cut", label="bipedalism")
    assert "THEN CAST(0.2 AS DOUBLE) * e.score_sum" in emit_sql("soft_do", label="bipedalism", lam=0.2)
    assert "FROM atlas_edges e" in emit_sql("backbone")
    assert "read_parquet('/x/atlas_nodes.parquet')" in emit_sql("hubs", parquet_dir="/x/")


def test_emit_sql_escaping():
    sql = emit_sql("mechanisms", src="o'neil; DROP TABLE atlas_edges; --")
    assert "'o''neil; DROP TABLE atlas_edges; --'" in sql
    assert sql_string("a'b") == "'a''b'"
    with pytest.raises(ValueError):
        sql_string("a\x00b")
    assert sql_int(2**64 - 1) == "18446744073709551615"
    for bad in (1.5, True, "7; --"):
        with pytest.raises(ValueError):
            sql_int(bad)
    with pytest.raises(ValueError):
        sql_float(float("nan"))


@pytest.mark.parametrize("kind,params", [("nope", {}), ("mechanisms", {}), ("provenance", {}), ("do_cut", {}),
                                         ("soft_do", {"label": "x"}), ("soft_do", {"label": "x", "lam": -1})])
def test_emit_sql_errors(kind, params):
    with pytest.raises(ValueError):
        emit_sql(kind, **params)


def test_every_sql_kind_is_terminated():
    params = dict(src="a", edge_id=1, label="a", lam=0.5, limit=3)
    for kind in SQL_KINDS:
        assert emit_sql(kind, **params).endswith(";\n")


@settings(max_examples=15, deadline=None)
@given(seed=seeds)
def test_native_equals_duckdb_on_random_atlases(seed, tmp_path_factory):
    duckdb = pytest.importorskip("duckdb")
    atlas = random_atlas(seed, n_concepts=6)
    out = tmp_path_factory.mktemp("sql")
    write_tables(atlas, out)
    con = duckdb.connect()
    for kind, params in query_params(atlas).items():
        assert rows_agree(native_rows(atlas, kind, **params), sql_rows(con, out, kind, **params)), kind


def test_rel_type_values_are_names():
    assert [r.value for r in RelType] == [r.name for r in RelType]
