"""Causal query algebra over an atlas or an intervened view, plus SQL emission.

Every ranking orders by effective score mass (descending), then source
label, destination label and relation name, so results are total orders and
match the emitted SQL row for row.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, NamedTuple, Sequence

from .analytics import HubRow, compute_scc, hub_ranking
from .canon import RelType
from .tables import Atlas, SccRow, SupportRow
from .views import EdgeSource, EdgeView, as_view

TABLES = ("atlas_nodes", "atlas_edges", "atlas_edge_support", "atlas_scc")


class BackboneRow(NamedTuple):
    edge_id: int
    rel_type: RelType
    src: str
    dst: str
    support_lcms: int
    score_sum: float


class MechanismRow(NamedTuple):
    edge_id: int
    rel_type: RelType
    dst: str
    support_lcms: int
    score_sum: float


class PathRow(NamedTuple):
    a: str
    r1: RelType
    b: str
    r2: RelType
    c: str
    path_score: float


class MutualRow(NamedTuple):
    a: str
    r1: RelType
    b: str
    r2: RelType


def _check_limit(limit: int | None) -> None:
    if limit is not None and limit < 1:
        raise ValueError("limit must be >= 1")


def _cap(rows: list, limit: int | None) -> list:
    return rows if limit is None else rows[:limit]


def backbone(source: EdgeSource, limit: int | None = 20) -> list[BackboneRow]:
    """Edges ranked by effective score mass."""
    _check_limit(limit)
    view = as_view(source)
    label = view.base.label
    rows = [
        BackboneRow(e.edge_id, e.rel_type, label(e.src_id), label(e.dst_id), e.support_lcms, score)
        for e, score in view.edges()
    ]
    rows.sort(key=lambda r: (-r.score_sum, r.src, r.dst, r.rel_type.value))
    return _cap(rows, limit)


def mechanisms(source: EdgeSource, src_label: str, limit: int | None = None) -> list[MechanismRow]:
    """Strongest outgoing edges of one concept."""
    _check_limit(limit)
    view = as_view(source)
    node = view.base.node_for_label(src_label)
    rows = [
        MechanismRow(e.edge_id, e.rel_type, view.base.label(e.dst_id), e.support_lcms, score)
        for e, score in view.out_edges(node)
    ]
    rows.sort(key=lambda r: (-r.score_sum, r.dst, r.rel_type.value))
    return _cap(rows, limit)


def provenance(atlas: Atlas, edge_id: int) -> list[SupportRow]:
    atlas.edge(edge_id)
    return sorted(atlas.support_index.get(edge_id, ()), key=lambda s: (s.doc_id, s.lcm_instance_id))


def two_hop_paths(source: EdgeSource, limit: int | None = None) -> list[PathRow]:
    """All chains a -> b -> c (a == c allowed), scored by the sum of both edge masses."""
    _check_limit(limit)
    view = as_view(source)
    label = view.base.label
    rows = []
    for e1, s1 in view.edges():
        a, b = label(e1.src_id), label(e1.dst_id)
        for e2, s2 in view.out_edges(e1.dst_id):
            rows.append(PathRow(a, e1.rel_type, b, e2.rel_type, label(e2.dst_id), s1 + s2))
    rows.sort(key=lambda r: (-r.path_score, r.a, r.b, r.c, r.r1.value, r.r2.value))
    return _cap(rows, limit)


def mutual_influence(source: EdgeSource) -> list[MutualRow]:
    """Two-cycles a <-> b, once per relation pair, with a < b."""
    view = as_view(source)
    label = view.base.label
    rows = []
    for e1, _ in view.edges():
        a, b = label(e1.src_id), label(e1.dst_id)
        if not a < b:
            continue
        for e2, _ in view.out_edges(e1.dst_id):
            if e2.dst_id == e1.src_id:
                rows.append(MutualRow(a, e1.rel_type, b, e2.rel_type))
    rows.sort(key=lambda r: (r.a, r.b, r.r1.value, r.r2.value))
    return rows


def scc_table(atlas: Atlas, limit: int | None = None) -> list[SccRow]:
    _check_limit(limit)
    rows = atlas.scc if atlas.scc is not None else compute_scc(atlas)
    return _cap(sorted(rows, key=lambda r: (-r.n_nodes, r.scc_id)), limit)


def do_cut(source: EdgeSource, label: str) -> EdgeView:
    """Hard intervention: drop every outgoing edge of ``label``."""
    return as_view(source).do_cut(label)


def soft_do(source: EdgeSource, label: str, lam: float) -> EdgeView:
    """Soft intervention: scale the effective mass of ``label``'s outgoing edges by ``lam``."""
    return as_view(source).soft_do(label, lam)


def row_key(row: Any) -> Any:
    """Identity of a result row across two runs of the same query."""
    if hasattr(row, "edge_id"):
        return row.edge_id
    if isinstance(row, HubRow):
        return row.label
    if isinstance(row, SccRow):
        return row.top_nodes
    return tuple(row[:5]) if isinstance(row, PathRow) else tuple(row)


@dataclass(frozen=True)
class CounterfactualDiff:
    vanished: list
    rank_changes: list[tuple[Any, int, int]]

    @property
    def empty(self) -> bool:
        return not self.vanished and not self.rank_changes


def counterfactual_diff(base_result: Sequence, intervened_result: Sequence,
                        key: Callable[[Any], Any] = row_key) -> CounterfactualDiff:
    """Rows that disappear, and rows whose 1-based rank moves, under an intervention."""
    new_rank = {key(r): i for i, r in enumerate(intervened_result, 1)}
    vanished, moved = [], []
    for i, row in enumerate(base_result, 1):
        j = new_rank.get(key(row))
        if j is None:
            vanished.append(row)
        elif j != i:
            moved.append((row, i, j))
    return CounterfactualDiff(vanished, moved)


QUERY_KINDS = ("backbone", "hubs", "mechanisms", "provenance", "scc", "two_hop", "mutual")


def run_query(source: EdgeSource, kind: str, *, src: str | None = None,
              limit: int | None = None, edge_id: int | None = None) -> list:
    """Dispatch a named query; the CLI and the cross-engine tests go through here."""
    view = as_view(source)
    if kind == "backbone":
        return backbone(view, limit)
    if kind == "hubs":
        return hub_ranking(view, limit)
    if kind == "mechanisms":
        if src is None:
            raise ValueError("mechanisms needs a source label")
        return mechanisms(view, src, limit)
    if kind == "provenance":
        if edge_id is None:
            raise ValueError("provenance needs an edge id")
        return _cap(provenance(view.base, edge_id), limit)
    if kind == "scc":
        return scc_table(view.base, limit)
    if kind == "two_hop":
        return two_hop_paths(view, limit)
    if kind == "mutual":
        return _cap(mutual_influence(view), limit)
    raise ValueError(f"unknown query kind {kind!r}; expected one of {', '.join(QUERY_KINDS)}")


# -- SQL emission ---------------------------------------------------------------

SQL_KINDS = ("backbone", "hubs", "mechanisms", "provenance", "scc", "two_hop", "mutual", "do_cut", "soft_do")


def sql_string(value: str) -> str:
    """Single-quoted SQL string literal with embedded quotes doubled."""
    if "\x00" in value:
        raise ValueError("NUL byte in SQL string literal")
    return "'" + value.replace("'", "''") + "'"


def sql_int(value: Any) -> str:
    if isinstance(value, bool) or int(value) != value:
        raise ValueError(f"expected an integer, got {value!r}")
    return str(int(value))


def sql_float(value: Any) -> str:
    x = float(value)
    if not math.isfinite(x):
        raise ValueError(f"expected a finite number, got {value!r}")
    return f"CAST({x!r} AS DOUBLE)"


def _tables(parquet_dir: str | None) -> dict[str, str]:
    if parquet_dir is None:
        return {t: t for t in TABLES}
    base = parquet_dir.rstrip("/")
    return {t: f"read_parquet({sql_string(f'{base}/{t}.parquet')})" for t in TABLES}


def _limit(limit: int | None) -> str:
    return "" if limit is None else f"\nLIMIT {sql_int(limit)}"


def emit_sql(kind: str, *, limit: int | None = None, src: str | None = None,
             edge_id: int | None = None, label: str | None = None, lam: float | None = None,
             parquet_dir: str | None = None) -> str:
    """Standard SQL text equivalent to the native query of the same kind.

    Tables are referenced by their exported names, or through
    ``read_parquet('<dir>/<table>.parquet')`` when ``parquet_dir`` is given.
    ``do_cut`` and ``soft_do`` emit the backbone query over the intervened
    edge relation.
    """
    t = _tables(parquet_dir)
    nodes, edges, support, scc = (t[name] for name in TABLES)

    if kind == "backbone":
        body = f"""SELECT
  e.rel_type,
  n1.label_canon AS src,
  n2.label_canon AS dst,
  e.support_lcms,
  e.score_sum
FROM {edges} e
JOIN {nodes} n1 ON e.src_id = n1.node_id
JOIN {nodes} n2 ON e.dst_id = n2.node_id
ORDER BY e.score_sum DESC, src, dst, e.rel_type{_limit(limit)}"""
    elif kind == "hubs":
        body = f"""SELECT
  n.label_canon AS src,
  SUM(e.score_sum) AS out_mass,
  COUNT(*) AS out_degree
FROM {edges} e
JOIN {nodes} n ON e.src_id = n.node_id
GROUP BY n.node_id, n.label_canon
ORDER BY out_mass DESC, src{_limit(limit)}"""
    elif kind == "mechanisms":
        if src is None:
            raise ValueError("mechanisms needs src")
        body = f"""SELECT
  e.rel_type,
  n2.label_canon AS dst,
  e.support_lcms,
  e.score_sum
FROM {edges} e
JOIN {nodes} n1 ON e.src_id = n1.node_id
JOIN {nodes} n2 ON e.dst_id = n2.node_id
WHERE n1.label_canon = {sql_string(src)}
ORDER BY e.score_sum DESC, dst, e.rel_type{_limit(limit)}"""
    elif kind == "provenance":
        if edge_id is None:
            raise ValueError("provenance needs edge_id")
        body = f"""SELECT
  s.doc_id,
  s.lcm_instance_id,
  s.score_raw,
  s.coupling
FROM {support} s
WHERE s.edge_id = {sql_int(edge_id)}
ORDER BY s.doc_id, s.lcm_instance_id{_limit(limit)}"""
    elif kind == "scc":
        body = f"""SELECT
  scc_id,
  n_nodes,
  n_edges,
  support_docs,
  top_nodes
FROM {scc}
ORDER BY n_nodes DESC, scc_id{_limit(limit)}"""
    elif kind == "two_hop":
        body = f"""SELECT
  n1.label_canon AS a,
  e1.rel_type AS r1,
  n2.label_canon AS b,
  e2.rel_type AS r2,
  n3.label_canon AS c,
  (e1.score_sum + e2.score_sum) AS path_score
FROM {edges} e1
JOIN {edges} e2 ON e1.dst_id = e2.src_id
JOIN {nodes} n1 ON e1.src_id = n1.node_id
JOIN {nodes} n2 ON e1.dst_id = n2.node_id
JOIN {nodes} n3 ON e2.dst_id = n3.node_id
ORDER BY path_score DESC, a, b, c, r1, r2{_limit(limit)}"""
    elif kind == "mutual":
        body = f"""SELECT
  n1.label_canon AS a,
  e1.rel_type AS r1,
  n2.label_canon AS b,
  e2.rel_type AS r2
FROM {edges} e1
JOIN {edges} e2
  ON e1.src_id = e2.dst_id
 AND e1.dst_id = e2.src_id
JOIN {nodes} n1 ON e1.src_id = n1.node_id
JOIN {nodes} n2 ON e1.dst_id = n2.node_id
WHERE n1.label_canon < n2.label_canon
ORDER BY a, b, r1, r2{_limit(limit)}"""
    elif kind == "do_cut":
        if label is None:
            raise ValueError("do_cut needs label")
        body = f"""WITH intervened_edges AS (
  SELECT e.*
  FROM {edges} e
  JOIN {nodes} n1 ON e.src_id = n1.node_id
  WHERE n1.label_canon <> {sql_string(label)}
)
SELECT
  e.rel_type,
  n1.label_canon AS src,
  n2.label_canon AS dst,
  e.support_lcms,
  e.score_sum
FROM intervened_edges e
JOIN {nodes} n1 ON e.src_id = n1.node_id
JOIN {nodes} n2 ON e.dst_id = n2.node_id
ORDER BY e.score_sum DESC, src, dst, e.rel_type{_limit(limit)}"""
    elif kind == "soft_do":
        if label is None or lam is None:
            raise ValueError("soft_do needs label and lam")
        if not float(lam) >= 0:
            raise ValueError("soft intervention multiplier must be >= 0")
        body = f"""WITH soft_do AS (
  SELECT
    e.*,
    CASE WHEN n1.label_canon = {sql_string(label)} THEN {sql_float(lam)} * e.score_sum
         ELSE e.score_sum END AS score_sum_do
  FROM {edges} e
  JOIN {nodes} n1 ON e.src_id = n1.node_id
)
SELECT
  e.rel_type,
  n1.label_canon AS src,
  n2.label_canon AS dst,
  e.support_lcms,
  e.score_sum_do AS score_sum
FROM soft_do e
JOIN {nodes} n1 ON e.src_id = n1.node_id
JOIN {nodes} n2 ON e.dst_id = n2.node_id
ORDER BY e.score_sum_do DESC, src, dst, e.rel_type{_limit(limit)}"""
    else:
        raise ValueError(f"unknown SQL kind {kind!r}; expected one of {', '.join(SQL_KINDS)}")
    return body + ";\n"
