"""Union of per-document atlases into a corpus atlas."""

from __future__ import annotations

from dataclasses import replace
from typing import Iterable, Sequence

from .analytics import compute_scc
from .builder import MAX_LABEL_EXAMPLES, edges_from_support, finalize_nodes
from .canon import RelType
from .errors import IntegrityError
from .tables import Atlas, SupportRow

DOC_SEPARATOR = "::"


def disambiguate_doc_ids(support: Iterable[SupportRow], atlas_id: str, enabled: bool = True) -> list[SupportRow]:
    """Prefix every doc_id with ``atlas_id::`` so documents stay distinct across atlases."""
    if not enabled:
        return list(support)
    if not atlas_id:
        raise ValueError("atlas_id must be non-empty")
    return [replace(s, doc_id=f"{atlas_id}{DOC_SEPARATOR}{s.doc_id}") for s in support]


def merge_atlases(
    atlases: Sequence[tuple[str, Atlas]],
    *,
    prefix_doc_ids: bool = True,
    atlas_id: str = "corpus",
    eps: float = 1e-9,
    with_scc: bool = True,
) -> Atlas:
    """Concatenate support tables and re-aggregate every edge and node.

    Support rows are folded in (edge_id, atlas_id, doc_id, lcm_instance_id)
    order so the merged floats do not depend on input order. The node table
    is the union of the input node tables, with label examples pooled (up
    to three) in atlas-id order, so permuting the inputs changes nothing.
    """
    if not atlases:
        raise ValueError("nothing to merge")
    ids = [aid for aid, _ in atlases]
    if len(set(ids)) != len(ids):
        raise ValueError(f"atlas ids are not distinct: {ids}")

    edge_defs: dict[int, tuple[int, RelType, int]] = {}
    node_map: dict[int, tuple[str, list[str]]] = {}
    tagged: list[tuple[int, SupportRow]] = []
    for aid, atlas in sorted(atlases, key=lambda item: item[0]):
        for e in atlas.edges:
            triple = (e.src_id, e.rel_type, e.dst_id)
            prev = edge_defs.setdefault(e.edge_id, triple)
            if prev != triple:
                raise IntegrityError(f"edge {e.edge_id} defined as {prev} and {triple}")
        for n in atlas.nodes:
            entry = node_map.get(n.node_id)
            if entry is None:
                node_map[n.node_id] = (n.label_canon, list(n.label_examples[:MAX_LABEL_EXAMPLES]))
                continue
            for ex in n.label_examples:
                if len(entry[1]) < MAX_LABEL_EXAMPLES and ex not in entry[1]:
                    entry[1].append(ex)
        rows = [s if s.atlas_id else replace(s, atlas_id=aid) for s in atlas.support]
        tagged.extend(enumerate(disambiguate_doc_ids(rows, aid, prefix_doc_ids)))

    def fold_key(item):
        i, s = item
        return (s.edge_id, s.atlas_id, s.doc_id, s.lcm_instance_id, i)

    tagged.sort(key=fold_key)
    edges = edges_from_support((s for _, s in tagged), edge_defs, eps)
    nodes = finalize_nodes(edges, node_map)
    tagged.sort(key=lambda item: (item[1].doc_id, item[1].lcm_instance_id, item[1].atlas_id, item[0]))
    support = [s for _, s in tagged]

    merged = Atlas.from_tables(nodes, edges, support, atlas_id=atlas_id,
                               config={"merged_from": sorted(ids), "prefix_doc_ids": prefix_doc_ids})
    if with_scc:
        merged.scc = compute_scc(merged)
    return merged
