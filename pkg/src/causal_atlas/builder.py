"""Compile local causal models or claim rows into nodes / edges / edge_support."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

from .canon import (
    DEFAULT_REL_LEXICON,
    KeyRegistry,
    Polarity,
    RelLexicon,
    RelType,
    canon_label,
    edge_key_string,
    hash64,
)
from .errors import CanonError
from .ingest import ClaimRow, Lcm
from .tables import Atlas, EdgeRow, NodeRow, SupportRow

logger = logging.getLogger(__name__)

MAX_LABEL_EXAMPLES = 3


@dataclass(frozen=True)
class BuildConfig:
    """Compilation parameters.

    ``tau`` skips LCMs with fewer raw edges. Relation filters are sets of
    :class:`RelType` applied after normalization. ``max_radius`` and
    ``min_model_size`` drop LCMs whose metadata falls outside the bound
    (LCMs without the field are kept); both are off by default.
    """

    tau: int = 1
    rel_whitelist: frozenset[RelType] | None = None
    rel_blacklist: frozenset[RelType] | None = None
    default_weight: float = 1.0
    epsilon: float = 1e-9
    atlas_id: str = "atlas"
    max_radius: int | None = None
    min_model_size: int | None = None
    with_scc: bool = True
    lexicon: RelLexicon = field(default=DEFAULT_REL_LEXICON, compare=False, repr=False)

    def __post_init__(self) -> None:
        if self.tau < 0:
            raise ValueError("tau must be >= 0")
        if self.default_weight < 0:
            raise ValueError("default_weight must be >= 0")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be > 0")
        if self.rel_whitelist and self.rel_blacklist and self.rel_whitelist & self.rel_blacklist:
            raise ValueError("relation whitelist and blacklist overlap")

    def keeps(self, rel: RelType) -> bool:
        if self.rel_whitelist is not None and rel not in self.rel_whitelist:
            return False
        return not (self.rel_blacklist and rel in self.rel_blacklist)

    def echo(self) -> dict:
        def _rels(s):
            return None if s is None else sorted(r.value for r in s)

        return {
            "tau": self.tau,
            "rel_whitelist": _rels(self.rel_whitelist),
            "rel_blacklist": _rels(self.rel_blacklist),
            "default_weight": self.default_weight,
            "epsilon": self.epsilon,
            "atlas_id": self.atlas_id,
            "max_radius": self.max_radius,
            "min_model_size": self.min_model_size,
        }


_BELOW_HALF = math.nextafter(0.5, 0.0)


class SupportEvent(NamedTuple):
    weight: float
    polarity: Polarity
    doc_id: str
    lcm_instance_id: str


def controversy(m_inc: float, m_dec: float, eps: float = 1e-9) -> float:
    """Directional disagreement ``min(inc, dec) / (inc + dec + eps)``, in [0, 0.5).

    For masses large enough that ``eps`` vanishes in the sum the quotient
    rounds to exactly 0.5; it is clamped to the largest float below 0.5.
    """
    return min(min(m_inc, m_dec) / (m_inc + m_dec + eps), _BELOW_HALF)


def dominant_polarity(inc: float, dec: float, unk: float) -> Polarity:
    masses = {Polarity.INC: inc, Polarity.DEC: dec, Polarity.UNK: unk}
    best = max(masses.values())
    winners = [p for p, m in masses.items() if m == best]
    return winners[0] if len(winners) == 1 else Polarity.UNK


@dataclass
class EdgeAggregate:
    src_id: int
    rel_type: RelType
    dst_id: int
    score_sum: float = 0.0
    score_max: float = 0.0
    mass_inc: float = 0.0
    mass_dec: float = 0.0
    mass_unk: float = 0.0
    lcms: set[tuple[str, str]] = field(default_factory=set)
    docs: set[str] = field(default_factory=set)

    def add(self, weight: float, polarity: Polarity, doc_id: str, lcm_instance_id: str) -> EdgeAggregate:
        if not weight >= 0:
            raise ValueError(f"support weight must be >= 0, got {weight}")
        self.score_sum += weight
        self.score_max = max(self.score_max, weight)
        if polarity is Polarity.INC:
            self.mass_inc += weight
        elif polarity is Polarity.DEC:
            self.mass_dec += weight
        else:
            self.mass_unk += weight
        self.lcms.add((doc_id, lcm_instance_id))
        self.docs.add(doc_id)
        return self

    def to_row(self, edge_id: int, eps: float = 1e-9) -> EdgeRow:
        n = len(self.lcms)
        return EdgeRow(
            edge_id=edge_id,
            src_id=self.src_id,
            dst_id=self.dst_id,
            rel_type=self.rel_type,
            polarity=dominant_polarity(self.mass_inc, self.mass_dec, self.mass_unk),
            support_lcms=n,
            support_docs=len(self.docs),
            score_sum=self.score_sum,
            score_mean=self.score_sum / n if n else 0.0,
            score_max=self.score_max,
            pol_mass_inc=self.mass_inc,
            pol_mass_dec=self.mass_dec,
            pol_mass_unk=self.mass_unk,
            controversy=controversy(self.mass_inc, self.mass_dec, eps),
        )


def accumulate_edge(agg: EdgeAggregate, event: SupportEvent) -> EdgeAggregate:
    return agg.add(event.weight, event.polarity, event.doc_id, event.lcm_instance_id)


def finalize_nodes(edges: Iterable[EdgeRow], node_map: dict[int, tuple[str, list[str]]]) -> list[NodeRow]:
    """Node rows sorted by id; degrees count distinct canonical edges."""
    deg_in: dict[int, int] = {}
    deg_out: dict[int, int] = {}
    for e in edges:
        deg_out[e.src_id] = deg_out.get(e.src_id, 0) + 1
        deg_in[e.dst_id] = deg_in.get(e.dst_id, 0) + 1
    return [
        NodeRow(nid, label, tuple(examples), deg_in.get(nid, 0), deg_out.get(nid, 0))
        for nid, (label, examples) in sorted(node_map.items())
    ]


def lcm_weight(lcm: Lcm, default: float) -> float:
    if lcm.score is not None:
        return lcm.score
    if lcm.score_raw is not None:
        return lcm.score_raw
    return default


class _Compiler:
    """Accumulates nodes, edge aggregates and support rows for one atlas."""

    def __init__(self, cfg: BuildConfig) -> None:
        self.cfg = cfg
        self.node_map: dict[int, tuple[str, list[str]]] = {}
        self.aggs: dict[int, EdgeAggregate] = {}
        self.support: list[SupportRow] = []
        self._node_keys = KeyRegistry()
        self._edge_keys = KeyRegistry()
        self._canon_memo: dict[str, tuple[str, int] | None] = {}
        self._edge_memo: dict[tuple[int, RelType, int], int] = {}

    def canon(self, raw: str) -> tuple[str, int] | None:
        """Canonical label and node id of a surface form, or None if it is empty."""
        hit = self._canon_memo.get(raw, False)
        if hit is False:
            try:
                label = canon_label(raw)
                hit = (label, self._node_keys.register(hash64(label), label))
            except CanonError:
                hit = None
            self._canon_memo[raw] = hit
        return hit

    def node(self, raw: str) -> int | None:
        """Register a surface form in the node map and return its id."""
        hit = self.canon(raw)
        if hit is None:
            return None
        label, nid = hit
        entry = self.node_map.get(nid)
        if entry is None:
            self.node_map[nid] = (label, [raw])
        elif len(entry[1]) < MAX_LABEL_EXAMPLES and raw not in entry[1]:
            entry[1].append(raw)
        return nid

    def edge(self, src: int, rel: RelType, dst: int) -> int:
        key = (src, rel, dst)
        eid = self._edge_memo.get(key)
        if eid is None:
            text = edge_key_string(src, rel, dst)
            eid = self._edge_keys.register(hash64(text), text)
            self._edge_memo[key] = eid
            self.aggs[eid] = EdgeAggregate(src, rel, dst)
        return eid

    def finish(self) -> Atlas:
        edges = [agg.to_row(eid, self.cfg.epsilon) for eid, agg in sorted(self.aggs.items())]
        nodes = finalize_nodes(edges, self.node_map)
        # stable: rows of one LCM keep insertion order
        support = sorted(self.support, key=lambda s: (s.doc_id, s.lcm_instance_id))
        atlas = Atlas.from_tables(nodes, edges, support, atlas_id=self.cfg.atlas_id, config=self.cfg.echo())
        if self.cfg.with_scc:
            from .analytics import compute_scc

            atlas.scc = compute_scc(atlas)
        return atlas


def _lcm_order(lcm: Lcm):
    return (lcm.doc_id, lcm.lcm_instance_id, repr(lcm))


def build_atlas(lcms: Iterable[Lcm], cfg: BuildConfig | None = None) -> Atlas:
    """Compile parsed, score-attached LCMs into an atlas.

    LCMs are processed in (doc_id, lcm_instance_id) order so the result does
    not depend on input order. Each raw edge adds one support row and the
    LCM's weight (score, else score_raw, else ``cfg.default_weight``) to its
    canonical edge; repeating an edge inside one LCM adds its weight again
    but counts the LCM once.
    """
    cfg = cfg or BuildConfig()
    comp = _Compiler(cfg)
    for lcm in sorted(lcms, key=_lcm_order):
        if cfg.max_radius is not None and lcm.radius is not None and lcm.radius > cfg.max_radius:
            continue
        if cfg.min_model_size is not None and lcm.model_size is not None and lcm.model_size < cfg.min_model_size:
            continue
        if len(lcm.edges) < cfg.tau:
            continue
        weight = lcm_weight(lcm, cfg.default_weight)
        for raw in lcm.edges:
            src, dst = comp.canon(raw.src), comp.canon(raw.dst)
            if src is None or dst is None:
                logger.warning("%s/%s: dropping edge %r -> %r (empty canonical label)",
                               lcm.doc_id, lcm.lcm_instance_id, raw.src, raw.dst)
                continue
            rel, pol = cfg.lexicon.classify(raw.rel)
            if not cfg.keeps(rel):
                continue
            src, dst = comp.node(raw.src), comp.node(raw.dst)
            eid = comp.edge(src, rel, dst)
            comp.aggs[eid].add(weight, pol, lcm.doc_id, lcm.lcm_instance_id)
            comp.support.append(SupportRow(
                edge_id=eid,
                doc_id=lcm.doc_id,
                atlas_id=cfg.atlas_id,
                lcm_instance_id=lcm.lcm_instance_id,
                score=lcm.score,
                score_raw=lcm.score_raw,
                coupling=lcm.coupling,
                weight=weight,
                polarity=pol,
            ))
        for raw in lcm.nodes:
            if comp.node(raw) is None:
                logger.warning("%s/%s: ignoring empty node label %r", lcm.doc_id, lcm.lcm_instance_id, raw)
    return comp.finish()


def build_from_claims(claims: Iterable[ClaimRow], cfg: BuildConfig | None = None) -> Atlas:
    """Compile claim rows: one unit-weight, unknown-polarity INFLUENCES event per row."""
    cfg = cfg or BuildConfig()
    comp = _Compiler(cfg)
    rel = RelType.INFLUENCES
    if not cfg.keeps(rel):
        return comp.finish()
    for i, claim in enumerate(claims, 1):
        src, dst = comp.canon(claim.cause), comp.canon(claim.effect)
        if src is None or dst is None:
            logger.warning("claim %d: dropping %r -> %r (empty canonical label)", i, claim.cause, claim.effect)
            continue
        src, dst = comp.node(claim.cause), comp.node(claim.effect)
        eid = comp.edge(src, rel, dst)
        lcm_id = f"claim:{i}"
        comp.aggs[eid].add(1.0, Polarity.UNK, claim.doc_id, lcm_id)
        comp.support.append(SupportRow(
            edge_id=eid,
            doc_id=claim.doc_id,
            atlas_id=cfg.atlas_id,
            lcm_instance_id=lcm_id,
            score=None,
            score_raw=None,
            coupling=None,
            weight=1.0,
            polarity=Polarity.UNK,
            year=claim.year,
            method=claim.method,
            sign=claim.sign,
        ))
    return comp.finish()


def edges_from_support(
    support: Iterable[SupportRow],
    edge_defs: dict[int, tuple[int, RelType, int]],
    eps: float = 1e-9,
) -> list[EdgeRow]:
    """Re-aggregate edge rows from support rows, folding in the given order."""
    aggs: dict[int, EdgeAggregate] = {}
    for s in support:
        agg = aggs.get(s.edge_id)
        if agg is None:
            src, rel, dst = edge_defs[s.edge_id]
            agg = aggs[s.edge_id] = EdgeAggregate(src, rel, dst)
        agg.add(s.weight, s.polarity, s.doc_id, s.lcm_instance_id)
    return [agg.to_row(eid, eps) for eid, agg in sorted(aggs.items())]
