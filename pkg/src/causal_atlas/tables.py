"""Row types of the four persisted relations and the in-memory :class:`Atlas`."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field, fields
from typing import Any

from .canon import Polarity, RelType
from .errors import IntegrityError, NotFound


@dataclass(frozen=True, slots=True)
class NodeRow:
    node_id: int
    label_canon: str
    label_examples: tuple[str, ...]
    deg_in: int
    deg_out: int


@dataclass(frozen=True, slots=True)
class EdgeRow:
    edge_id: int
    src_id: int
    dst_id: int
    rel_type: RelType
    polarity: Polarity
    support_lcms: int
    support_docs: int
    score_sum: float
    score_mean: float
    score_max: float
    pol_mass_inc: float
    pol_mass_dec: float
    pol_mass_unk: float
    controversy: float


@dataclass(frozen=True, slots=True)
class SupportRow:
    """One (document, local model) contribution to an edge.

    ``weight`` is the mass actually added to the edge and ``polarity`` the
    direction read from the raw relation phrase; both are kept so aggregates
    can be rebuilt from support rows alone. ``year``/``method``/``sign`` are
    only filled by claim-corpus ingest.
    """

    edge_id: int
    doc_id: str
    atlas_id: str
    lcm_instance_id: str
    score: float | None
    score_raw: float | None
    coupling: float | None
    weight: float
    polarity: Polarity
    year: int | None = None
    method: str | None = None
    sign: str | None = None


@dataclass(frozen=True, slots=True)
class SccRow:
    scc_id: int
    n_nodes: int
    n_edges: int
    support_docs: int
    top_nodes: tuple[str, ...]


def column_names(row_type: type) -> list[str]:
    return [f.name for f in fields(row_type)]


@dataclass
class Atlas:
    """Nodes, edges and support tables plus lookup indices.

    Treat instances as immutable: queries and views never modify them.
    Use :meth:`from_tables` to get validated, index-backed instances.
    """

    nodes: list[NodeRow]
    edges: list[EdgeRow]
    support: list[SupportRow]
    scc: list[SccRow] | None = None
    atlas_id: str = ""
    config: dict[str, Any] = field(default_factory=dict)

    node_by_id: dict[int, NodeRow] = field(init=False, repr=False, compare=False)
    edge_by_id: dict[int, EdgeRow] = field(init=False, repr=False, compare=False)
    label_index: dict[str, int] = field(init=False, repr=False, compare=False)
    out_index: dict[int, list[EdgeRow]] = field(init=False, repr=False, compare=False)
    in_index: dict[int, list[EdgeRow]] = field(init=False, repr=False, compare=False)
    support_index: dict[int, list[SupportRow]] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        self.node_by_id = {n.node_id: n for n in self.nodes}
        self.edge_by_id = {e.edge_id: e for e in self.edges}
        self.label_index = {n.label_canon: n.node_id for n in self.nodes}
        self.out_index = defaultdict(list)
        self.in_index = defaultdict(list)
        for e in self.edges:
            self.out_index[e.src_id].append(e)
            self.in_index[e.dst_id].append(e)
        self.support_index = defaultdict(list)
        for s in self.support:
            self.support_index[s.edge_id].append(s)

    @classmethod
    def from_tables(cls, nodes, edges, support, scc=None, atlas_id="", config=None) -> Atlas:
        atlas = cls(list(nodes), list(edges), list(support), None if scc is None else list(scc),
                    atlas_id, dict(config or {}))
        atlas.validate()
        return atlas

    def validate(self) -> None:
        """Check uniqueness of keys and referential integrity."""
        if len(self.node_by_id) != len(self.nodes):
            raise IntegrityError("duplicate node_id in nodes table")
        if len(self.edge_by_id) != len(self.edges):
            raise IntegrityError("duplicate edge_id in edges table")
        if len(self.label_index) != len(self.nodes):
            raise IntegrityError("duplicate label_canon in nodes table")
        for e in self.edges:
            if e.src_id not in self.node_by_id or e.dst_id not in self.node_by_id:
                raise IntegrityError(f"edge {e.edge_id} references a missing node")
        for s in self.support:
            if s.edge_id not in self.edge_by_id:
                raise IntegrityError(f"support row references missing edge {s.edge_id}")

    def label(self, node: int) -> str:
        return self.node_by_id[node].label_canon

    def node_for_label(self, label: str) -> int:
        try:
            return self.label_index[label]
        except KeyError:
            raise NotFound(f"no node with canonical label {label!r}") from None

    def edge(self, edge_id: int) -> EdgeRow:
        try:
            return self.edge_by_id[edge_id]
        except KeyError:
            raise NotFound(f"no edge {edge_id}") from None

    def tables_equal(self, other: Atlas) -> bool:
        return (self.nodes, self.edges, self.support, self.scc) == (
            other.nodes, other.edges, other.support, other.scc)
