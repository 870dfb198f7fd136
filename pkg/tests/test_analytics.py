import math
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from causal_atlas.analytics import (
    atlas_summary,
    compute_scc,
    concentration,
    hub_ranking,
    out_mass,
    quantiles_of,
    relation_mass_breakdown,
    scc_partition,
    score_quantiles,
    strongly_connected_components,
    tail_ratio,
)
from causal_atlas.builder import build_atlas
from causal_atlas.canon import Polarity, RelType, node_id
from causal_atlas.errors import DegenerateAtlas, NotFound
from causal_atlas.ingest import Lcm, RawEdge
from causal_atlas.synth import random_lcms
from oracles import reachability_partition


def graph_atlas(edges, n_vertices=0, rel="causes"):
    """One LCM per edge carrying its mass as score; vertices v0..v{n-1} always present."""
    lcms = [Lcm("d", f"m{i:04d}", edges=(RawEdge(s, rel, t),), score=w) for i, (s, t, w) in enumerate(edges)]
    lcms.append(Lcm("d", "vertices", nodes=tuple(f"v{i}" for i in range(n_vertices))))
    return build_atlas(lcms)


# -- quantiles ------------------------------------------------------------------------

def test_quantile_examples():
    assert quantiles_of([1, 2, 3, 4], [0.5]) == [2.5]
    assert quantiles_of([7.5], [0.0, 0.3, 1.0]) == [7.5, 7.5, 7.5]
    assert quantiles_of([3, 1, 2], [0.0, 1.0]) == [1, 3]


def test_quantile_errors():
    with pytest.raises(DegenerateAtlas):
        quantiles_of([], [0.5])
    with pytest.raises(ValueError):
        quantiles_of([1.0], [1.5])


@given(st.lists(st.floats(0, 1e6), min_size=1, max_size=200), st.lists(st.floats(0, 1), min_size=1, max_size=8))
def test_quantiles_match_numpy(values, probs):
    ours = quantiles_of(values, probs)
    ref = np.quantile(np.array(values, dtype=float), probs, method="linear")
    for a, b in zip(ours, ref):
        assert math.isclose(a, b, rel_tol=1e-12, abs_tol=1e-12)


@given(st.lists(st.floats(0, 1e3), min_size=1, max_size=50), st.floats(0, 1), st.floats(0, 1))
def test_quantiles_monotone(values, p, q):
    lo, hi = sorted((p, q))
    a, b = quantiles_of(values, [lo, hi])
    assert a <= b


def test_score_quantiles_requires_sorted_probs(golden_atlas):
    with pytest.raises(ValueError):
        score_quantiles(golden_atlas, [0.9, 0.5])


@pytest.mark.parametrize("p50,p99,expected", [(1.0, 1.0, 1.0), (0.5, 2.0, 4.0)])
def test_tail_ratio_examples(p50, p99, expected):
    assert tail_ratio(p50, p99) == expected


def test_tail_ratio_published():
    assert abs(tail_ratio(0.0337, 1.377) - 40.8) <= 0.2


def test_tail_ratio_zero_median():
    with pytest.raises(DegenerateAtlas):
        tail_ratio(0.0, 1.0)


# -- hubs -------------------------------------------------------------------------------

def test_out_mass_examples():
    atlas = graph_atlas([("x", "y", 1.46), ("x", "z", 1.33)])
    assert math.isclose(out_mass(atlas, node_id("x")), 2.79)
    assert out_mass(atlas, node_id("y")) == 0.0
    with pytest.raises(NotFound):
        out_mass(atlas, 12345)


def test_hub_ranking_single_edge():
    atlas = graph_atlas([("x", "y", 0.3)])
    assert hub_ranking(atlas, 5) == [("x", 0.3, 1)]
    assert hub_ranking(graph_atlas([])) == []
    with pytest.raises(ValueError):
        hub_ranking(atlas, 0)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32))
def test_hub_ranking_matches_scan(seed):
    atlas = build_atlas(random_lcms(random.Random(seed), n_concepts=8))
    mass, deg = {}, {}
    for e in atlas.edges:
        mass[e.src_id] = mass.get(e.src_id, 0.0) + e.score_sum
        deg[e.src_id] = deg.get(e.src_id, 0) + 1
    want = sorted(((atlas.label(n), m, deg[n]) for n, m in mass.items()), key=lambda r: (-r[1], r[0]))
    got = hub_ranking(atlas)
    assert [(r.label, r.out_degree) for r in got] == [(r[0], r[2]) for r in want]
    for r, w in zip(got, want):
        assert math.isclose(r.out_mass, w[1], abs_tol=1e-9)
        assert math.isclose(out_mass(atlas, atlas.node_for_label(r.label)), w[1], abs_tol=1e-9)
    total = sum(e.score_sum for e in atlas.edges)
    assert math.isclose(sum(out_mass(atlas, n.node_id) for n in atlas.nodes), total, abs_tol=1e-9)
    assert math.isclose(concentration(atlas, len(got)), 1.0)
    assert concentration(atlas, 1) <= concentration(atlas, 5) <= 1.0 + 1e-12


def test_concentration_published_share():
    # hub masses {74.8, 3, 3, 3, 2, 14.2}: top-1 share 0.748
    masses = [74.8, 3, 3, 3, 2, 14.2]
    atlas = graph_atlas([(f"h{i}", "sink", m) for i, m in enumerate(masses)])
    assert math.isclose(concentration(atlas, 1), 0.748, abs_tol=1e-12)
    assert concentration(graph_atlas([("a", "b", 2.0), ("a", "c", 1.0)]), 1) == 1.0


def test_concentration_zero_mass():
    with pytest.raises(DegenerateAtlas):
        concentration(graph_atlas([("a", "b", 0.0)]), 1)


# -- relation mix -----------------------------------------------------------------------

def test_relation_mass_single_edge():
    atlas = graph_atlas([("a", "b", 1.0)], rel="increases")
    assert relation_mass_breakdown(atlas) == [(RelType.INCREASES, Polarity.INC, 1, 1.0)]


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32))
def test_relation_mass_conserves(seed):
    atlas = build_atlas(random_lcms(random.Random(seed)))
    rows = relation_mass_breakdown(atlas)
    assert sum(r.n_edges for r in rows) == len(atlas.edges)
    assert math.isclose(sum(r.mass for r in rows), sum(e.score_sum for e in atlas.edges), abs_tol=1e-9)
    assert [r.mass for r in rows] == sorted((r.mass for r in rows), reverse=True)


def test_relation_mass_golden(golden_atlas):
    # published relation-type table: count and total mass per type
    published = [("INFLUENCES", "unk", 19, 6.19), ("INCREASES", "inc", 27, 5.13), ("CAUSES", "unk", 9, 0.30),
                 ("REDUCES", "dec", 7, 0.14), ("LEADS_TO", "unk", 1, 0.03), ("AFFECTS", "unk", 2, 0.01)]
    rows = relation_mass_breakdown(golden_atlas)
    assert [(r.rel_type.value, r.polarity.value, r.n_edges) for r in rows] == [p[:3] for p in published]
    for r, p in zip(rows, published):
        assert round(r.mass, 2) == p[3]


# -- SCC --------------------------------------------------------------------------------

def test_scc_two_cycle():
    atlas = graph_atlas([("a", "b", 1.0), ("b", "a", 1.0)])
    (row,) = compute_scc(atlas)
    assert (row.scc_id, row.n_nodes, row.n_edges, row.support_docs) == (1, 2, 2, 1)
    assert row.top_nodes == ("a", "b")


def test_scc_dag_is_empty():
    assert compute_scc(graph_atlas([("a", "b", 1.0), ("b", "c", 1.0), ("a", "c", 1.0)])) == []


def test_scc_ordering_and_top_nodes():
    edges = [("a", "b", 1), ("b", "a", 1),
             ("p", "q", 1), ("q", "r", 1), ("r", "p", 1), ("r", "s", 1), ("s", "t", 1), ("t", "u", 1),
             ("u", "v", 1), ("v", "p", 1), ("p", "z", 1)]
    rows = compute_scc(graph_atlas(edges))
    assert [(r.scc_id, r.n_nodes, r.n_edges) for r in rows] == [(1, 7, 8), (2, 2, 2)]
    # p and r have degree 3/4 inside the big component; rest tie at 2 and sort by label
    assert rows[0].top_nodes == ("p", "r", "q", "s", "t")


def test_tarjan_deep_chain_no_recursion_limit():
    n = 20000
    succ = {i: [i + 1] for i in range(n - 1)}
    succ[n - 1] = [0]
    comps = strongly_connected_components(range(n), lambda v: succ.get(v, ()))
    assert len(comps) == 1 and len(comps[0]) == n


digraphs = st.integers(1, 12).flatmap(lambda n: st.tuples(
    st.just(n), st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=40)))


@settings(max_examples=150, deadline=None)
@given(digraphs)
def test_scc_matches_reachability(graph):
    n, edges = graph
    atlas = graph_atlas([(f"v{s}", f"v{t}", 1.0) for s, t in edges], n_vertices=n)
    want = reachability_partition(n, set(edges))
    got = {frozenset(int(atlas.label(v)[1:]) for v in members) for members in scc_partition(atlas)}
    assert got == want
    rows = compute_scc(atlas)
    assert len(rows) == len(want)
    seen = set()
    for row, members in zip(rows, scc_partition(atlas)):
        assert row.n_nodes == len(members) >= 2
        assert row.n_edges == sum(e.src_id in members and e.dst_id in members for e in atlas.edges)
        assert set(row.top_nodes) <= {atlas.label(v) for v in members}
        assert not (seen & members)
        seen |= members


# -- summary ----------------------------------------------------------------------------

def test_summary_single_edge():
    s = atlas_summary(graph_atlas([("a", "b", 2.0)]))
    assert (s.n_nodes, s.n_edges, s.n_support, s.top_hub, s.top1_share, s.tail_ratio) == (2, 1, 1, "a", 1.0, 1.0)


def test_summary_empty_raises():
    with pytest.raises(DegenerateAtlas):
        atlas_summary(graph_atlas([]))


def test_summary_zero_median_has_no_tail_ratio():
    s = atlas_summary(graph_atlas([("a", "b", 0.0), ("c", "d", 0.0), ("e", "f", 1.0)]))
    assert s.p50 == 0.0 and s.tail_ratio is None


def test_summary_golden_published(golden_atlas):
    s = atlas_summary(golden_atlas)
    assert (s.n_nodes, s.n_edges, s.n_support, s.top_hub) == (501, 65, 717, "bipedalism")
    # published values are rounded to the shown digits
    assert round(s.top1_share, 3) == 0.748 and round(s.top5_share, 3) == 0.857
    assert round(s.p50, 4) == 0.0337 and round(s.p90, 3) == 0.847 and round(s.p99, 3) == 1.377
    assert round(s.tail_ratio, 1) == 40.8


def test_summary_recompute(golden_atlas):
    s = atlas_summary(golden_atlas)
    scores = sorted(e.score_sum for e in golden_atlas.edges)
    ref = np.quantile(scores, [0.5, 0.9, 0.99], method="linear")
    assert np.allclose([s.p50, s.p90, s.p99], ref, rtol=0, atol=1e-12)
    hub = golden_atlas.node_for_label("bipedalism")
    total = sum(scores)
    assert math.isclose(s.top1_share, sum(e.score_sum for e in golden_atlas.out_index[hub]) / total)
    assert s.n_docs == len({x.doc_id for x in golden_atlas.support})
