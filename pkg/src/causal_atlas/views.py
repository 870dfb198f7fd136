"""Intervened, read-only views over an atlas edge relation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Mapping, Union

from .tables import Atlas, EdgeRow


@dataclass(frozen=True)
class EdgeView:
    """The base edge relation with some sources cut and some rescaled.

    Cut sources lose every outgoing edge. Rescaled sources keep their edges,
    but rankings use ``multiplier * score_sum``; stored masses are untouched.
    """

    base: Atlas
    removed_sources: frozenset[int] = frozenset()
    scale: Mapping[int, float] = field(default_factory=dict)

    def multiplier(self, node: int) -> float:
        return self.scale.get(node, 1.0)

    def edges(self) -> Iterator[tuple[EdgeRow, float]]:
        """Surviving edges paired with their effective score mass."""
        for e in self.base.edges:
            if e.src_id in self.removed_sources:
                continue
            m = self.scale.get(e.src_id)
            yield e, e.score_sum if m is None else m * e.score_sum

    def out_edges(self, node: int) -> list[tuple[EdgeRow, float]]:
        if node in self.removed_sources:
            return []
        m = self.multiplier(node)
        return [(e, e.score_sum if m == 1.0 else m * e.score_sum) for e in self.base.out_index.get(node, ())]

    def do_cut(self, label: str) -> EdgeView:
        node = self.base.node_for_label(label)
        return EdgeView(self.base, self.removed_sources | {node}, self.scale)

    def soft_do(self, label: str, lam: float) -> EdgeView:
        if not lam >= 0:
            raise ValueError(f"soft intervention multiplier must be >= 0, got {lam}")
        node = self.base.node_for_label(label)
        scale = dict(self.scale)
        scale[node] = scale.get(node, 1.0) * lam
        return EdgeView(self.base, self.removed_sources, scale)


EdgeSource = Union[Atlas, EdgeView]


def as_view(source: EdgeSource) -> EdgeView:
    return source if isinstance(source, EdgeView) else EdgeView(source)
