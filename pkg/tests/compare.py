"""Field-by-field comparison of atlas aggregates with a float tolerance."""

from __future__ import annotations

import math
from dataclasses import astuple


def _close(a, b, tol):
    if isinstance(a, float) or isinstance(b, float):
        return math.isclose(a, b, rel_tol=tol, abs_tol=tol)
    return a == b


def aggregate_mismatches(a, b, tol: float = 1e-9) -> list[str]:
    """Edges and node degrees that differ between two atlases (empty when they agree)."""
    out = []
    ea, eb = a.edge_by_id, b.edge_by_id
    if ea.keys() != eb.keys():
        out.append(f"edge ids differ: {sorted(ea.keys() ^ eb.keys())[:5]}")
    for eid in sorted(ea.keys() & eb.keys()):
        for name, x, y in zip(type(ea[eid]).__slots__, astuple(ea[eid]), astuple(eb[eid])):
            if not _close(x, y, tol):
                out.append(f"edge {eid} {name}: {x!r} != {y!r}")
    na = {n.node_id: (n.label_canon, n.deg_in, n.deg_out) for n in a.nodes if n.deg_in or n.deg_out}
    nb = {n.node_id: (n.label_canon, n.deg_in, n.deg_out) for n in b.nodes if n.deg_in or n.deg_out}
    if na != nb:
        out.append("referenced nodes or degrees differ")
    return out
