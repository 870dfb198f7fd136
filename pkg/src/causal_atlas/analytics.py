"""Derived statistics: hub mass, concentration, quantiles, relation mix, SCCs."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Callable, Hashable, Iterable, NamedTuple, Sequence

from .canon import Polarity, RelType
from .errors import DegenerateAtlas, NotFound
from .tables import Atlas, SccRow
from .views import EdgeSource, as_view

SUMMARY_PROBS = (0.5, 0.9, 0.99)
MAX_SCC_TOP_NODES = 5


class HubRow(NamedTuple):
    label: str
    out_mass: float
    out_degree: int


class RelMassRow(NamedTuple):
    rel_type: RelType
    polarity: Polarity
    n_edges: int
    mass: float


def out_mass(source: EdgeSource, node: int) -> float:
    """Total effective score mass on the outgoing edges of ``node``."""
    view = as_view(source)
    if node not in view.base.node_by_id:
        raise NotFound(f"no node {node}")
    return sum(score for _, score in view.out_edges(node))


def _hub_table(source: EdgeSource) -> list[HubRow]:
    view = as_view(source)
    mass: dict[int, float] = {}
    degree: dict[int, int] = defaultdict(int)
    for e, score in view.edges():
        mass[e.src_id] = mass.get(e.src_id, 0.0) + score
        degree[e.src_id] += 1
    rows = [HubRow(view.base.label(n), m, degree[n]) for n, m in mass.items()]
    rows.sort(key=lambda r: (-r.out_mass, r.label))
    return rows


def hub_ranking(source: EdgeSource, k: int | None = None) -> list[HubRow]:
    """Sources ranked by outgoing mass (descending), ties by label."""
    if k is not None and k < 1:
        raise ValueError("k must be >= 1")
    rows = _hub_table(source)
    return rows if k is None else rows[:k]


def concentration(source: EdgeSource, k: int) -> float:
    """Share of total outgoing mass held by the top ``k`` hubs."""
    rows = _hub_table(source)
    total = sum(r.out_mass for r in rows)
    if not total > 0:
        raise DegenerateAtlas("total outgoing mass is zero")
    return sum(r.out_mass for r in rows[:k]) / total


def quantiles_of(values: Sequence[float], probs: Iterable[float]) -> list[float]:
    """Linear interpolation between order statistics at rank ``p * (n - 1)``."""
    xs = sorted(values)
    if not xs:
        raise DegenerateAtlas("no values to take quantiles of")
    n = len(xs)
    out = []
    for p in probs:
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"quantile probability {p} outside [0, 1]")
        rank = p * (n - 1)
        lo = math.floor(rank)
        hi = min(lo + 1, n - 1)
        frac = rank - lo
        out.append(xs[lo] if frac == 0 else xs[lo] + frac * (xs[hi] - xs[lo]))
    return out


def score_quantiles(source: EdgeSource, probs: Sequence[float]) -> list[float]:
    if list(probs) != sorted(probs):
        raise ValueError("probs must be sorted ascending")
    return quantiles_of([score for _, score in as_view(source).edges()], probs)


def tail_ratio(p50: float, p99: float) -> float:
    if not p50 > 0:
        raise DegenerateAtlas("median edge mass is zero; tail ratio undefined")
    return p99 / p50


def relation_mass_breakdown(source: EdgeSource) -> list[RelMassRow]:
    """Edge count and effective mass per (rel_type, polarity), heaviest first."""
    count: dict[tuple[RelType, Polarity], int] = defaultdict(int)
    mass: dict[tuple[RelType, Polarity], float] = defaultdict(float)
    for e, score in as_view(source).edges():
        key = (e.rel_type, e.polarity)
        count[key] += 1
        mass[key] += score
    rows = [RelMassRow(r, p, count[(r, p)], mass[(r, p)]) for r, p in count]
    rows.sort(key=lambda row: (-row.mass, row.rel_type.value, row.polarity.value))
    return rows


def strongly_connected_components(
    vertices: Iterable[Hashable], successors: Callable[[Hashable], Iterable[Hashable]]
) -> list[list]:
    """Tarjan's algorithm, iterative so deep graphs don't hit the recursion limit.

    Components come out in reverse topological order of the condensation.
    """
    index: dict = {}
    low: dict = {}
    on_stack: set = set()
    stack: list = []
    components: list[list] = []
    counter = 0

    for root in vertices:
        if root in index:
            continue
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        work = [(root, iter(successors(root)))]
        while work:
            v, it = work[-1]
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(successors(w))))
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            else:
                work.pop()
                if work:
                    parent = work[-1][0]
                    low[parent] = min(low[parent], low[v])
                if low[v] == index[v]:
                    comp = []
                    while True:
                        w = stack.pop()
                        on_stack.discard(w)
                        comp.append(w)
                        if w == v:
                            break
                    components.append(comp)
    return components


def _scc_groups(atlas: Atlas) -> list[tuple[frozenset[int], list]]:
    succ: dict[int, list[int]] = {}
    for e in atlas.edges:
        succ.setdefault(e.src_id, [])
        if e.dst_id not in succ[e.src_id]:
            succ[e.src_id].append(e.dst_id)
    comps = strongly_connected_components(
        sorted(atlas.node_by_id), lambda v: succ.get(v, ())
    )
    groups = [frozenset(c) for c in comps if len(c) >= 2]
    where = {n: i for i, members in enumerate(groups) for n in members}
    internal: list[list] = [[] for _ in groups]
    for e in atlas.edges:
        i = where.get(e.src_id)
        if i is not None and where.get(e.dst_id) == i:
            internal[i].append(e)
    out = list(zip(groups, internal))

    def order(item):
        members, internal = item
        return (-len(members), -len(internal), min(atlas.label(n) for n in members))

    out.sort(key=order)
    return out


def scc_partition(atlas: Atlas) -> list[frozenset[int]]:
    """Member node ids of each non-trivial SCC, in :func:`compute_scc` row order."""
    return [members for members, _ in _scc_groups(atlas)]


def compute_scc(atlas: Atlas) -> list[SccRow]:
    """SCC summary rows for components with at least two nodes, largest first."""
    rows = []
    for scc_id, (members, internal) in enumerate(_scc_groups(atlas), 1):
        docs = {s.doc_id for e in internal for s in atlas.support_index.get(e.edge_id, ())}
        ranked = sorted(
            members,
            key=lambda n: (-(atlas.node_by_id[n].deg_in + atlas.node_by_id[n].deg_out), atlas.label(n)),
        )
        rows.append(SccRow(
            scc_id=scc_id,
            n_nodes=len(members),
            n_edges=len(internal),
            support_docs=len(docs),
            top_nodes=tuple(atlas.label(n) for n in ranked[:MAX_SCC_TOP_NODES]),
        ))
    return rows


@dataclass(frozen=True)
class AtlasSummary:
    """Size, hub concentration, edge-mass quantiles and relation mix of an atlas.

    ``tail_ratio`` is None when the median edge mass is zero.
    """

    n_nodes: int
    n_edges: int
    n_support: int
    n_docs: int
    n_atlases: int
    top_hub: str
    top1_share: float
    top5_share: float
    p50: float
    p90: float
    p99: float
    tail_ratio: float | None
    rel_mass: tuple[RelMassRow, ...]


def atlas_summary(atlas: Atlas) -> AtlasSummary:
    if not atlas.edges:
        raise DegenerateAtlas("atlas has no edges")
    hubs = hub_ranking(atlas)
    p50, p90, p99 = score_quantiles(atlas, SUMMARY_PROBS)
    return AtlasSummary(
        n_nodes=len(atlas.nodes),
        n_edges=len(atlas.edges),
        n_support=len(atlas.support),
        n_docs=len({s.doc_id for s in atlas.support}),
        n_atlases=len({s.atlas_id for s in atlas.support}),
        top_hub=hubs[0].label,
        top1_share=concentration(atlas, 1),
        top5_share=concentration(atlas, 5),
        p50=p50,
        p90=p90,
        p99=p99,
        tail_ratio=tail_ratio(p50, p99) if p50 > 0 else None,
        rel_mass=tuple(relation_mass_breakdown(atlas)),
    )
