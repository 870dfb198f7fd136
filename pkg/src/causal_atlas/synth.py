"""Seeded synthetic corpora: random LCM collections and claims tables.

Generators return ground truth alongside the surface data so tests can
check compiled counts without going through the canonicalizer.
"""

from __future__ import annotations

import csv
import io
import random
from dataclasses import dataclass, field

from .ingest import Lcm, RawEdge

# surface forms per relation type, all resolved by the default lexicon
REL_FORMS = {
    "CAUSES": ("causes", "Causes", "cause"),
    "INFLUENCES": ("influences", "influence", "INFLUENCES"),
    "INCREASES": ("increases", "raises", "boosts"),
    "REDUCES": ("reduces", "lowers", "decreases"),
    "AFFECTS": ("affects", "affect"),
    "LEADS_TO": ("leads to", "results in", "led to"),
}

_CUED = ("positively {}", "negatively {}", "{} negatively", "does not {}", "not {}")

_WORDS = ("rainfall", "soil", "yield", "price", "demand", "wage", "stress", "sleep", "growth",
          "erosion", "trust", "risk", "output", "debt", "heat", "drought", "migration", "policy")


def surface_variant(label: str, rng: random.Random) -> str:
    """A spelling of ``label`` that canonicalizes back to it.

    ``label`` must already be canonical.
    """
    k = rng.randrange(6)
    if k == 0:
        return label
    if k == 1:
        return label.upper()
    if k == 2:
        return f"  {label}  "
    if k == 3:
        return label + rng.choice(".,;:!")
    if k == 4:
        return label.replace(" ", "   ").replace("-", "–")
    return label[:1].upper() + label[1:]


def concept_labels(n: int, rng: random.Random) -> list[str]:
    """``n`` distinct canonical labels."""
    out = []
    for i in range(n):
        a, b = rng.choice(_WORDS), rng.choice(_WORDS)
        out.append(f"{a}-{b} {i}")
    return out


def random_lcms(
    rng: random.Random,
    n_docs: int = 4,
    n_concepts: int = 15,
    max_lcms_per_doc: int = 6,
    max_edges: int = 6,
    doc_prefix: str = "doc",
    cue_rate: float = 0.2,
) -> list[Lcm]:
    """Random LCMs over a small concept pool, with mixed score sources.

    About ``cue_rate`` of the relation phrases carry a polarity cue or a
    negation, so one canonical edge can collect both inc and dec mass.
    """
    concepts = concept_labels(n_concepts, rng)
    rels = list(REL_FORMS)
    lcms = []
    for d in range(n_docs):
        doc = f"{doc_prefix}{d:02d}"
        for j in range(rng.randint(1, max_lcms_per_doc)):
            edges = []
            for _ in range(rng.randint(1, max_edges)):
                src, dst = rng.choice(concepts), rng.choice(concepts)
                rel = rng.choice(REL_FORMS[rng.choice(rels)])
                if rng.random() < cue_rate:
                    rel = rng.choice(_CUED).format(rel)
                edges.append(RawEdge(surface_variant(src, rng), rel, surface_variant(dst, rng)))
            kind = rng.randrange(3)
            score = round(rng.uniform(0.0, 1.0), 6) if kind == 0 else None
            score_raw = round(rng.uniform(0.0, 5.0), 6) if kind == 1 else None
            lcms.append(Lcm(doc_id=doc, lcm_instance_id=f"lcm-{j:03d}", focus=edges[0].src,
                            edges=tuple(edges), score=score, score_raw=score_raw))
    return lcms


@dataclass
class ClaimsCorpus:
    """A claims CSV plus the ground-truth identity of every row."""

    csv_bytes: bytes
    concepts: list[str]
    rows: list[tuple[int, int, str]] = field(default_factory=list)  # (cause idx, effect idx, doc_id)
    n_blank: int = 0


def claims_corpus(
    rng: random.Random,
    n_rows: int,
    n_concepts: int = 2000,
    n_docs: int = 5000,
    dup_rate: float = 0.3,
    blank_rate: float = 0.001,
) -> ClaimsCorpus:
    """A claims table with controlled duplication.

    With probability ``dup_rate`` a row repeats the (cause, effect) pair of
    an earlier row, usually under a different spelling and document. About
    ``blank_rate`` of the rows have an empty cause and must be dropped.
    """
    concepts = concept_labels(n_concepts, rng)
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\r\n")
    w.writerow(["cause", "effect", "doc_id", "sign", "method", "year"])
    corpus = ClaimsCorpus(b"", concepts)
    for _ in range(n_rows):
        doc = f"paper-{rng.randrange(n_docs):05d}"
        sign = rng.choice(("+", "-", "", "mixed"))
        method = rng.choice(("RCT", "DiD", "IV", "OLS", ""))
        year = str(rng.randint(1990, 2024)) if rng.random() < 0.9 else ""
        if rng.random() < blank_rate:
            w.writerow(["", concepts[rng.randrange(n_concepts)], doc, sign, method, year])
            corpus.n_blank += 1
            continue
        if corpus.rows and rng.random() < dup_rate:
            a, b, _ = corpus.rows[rng.randrange(len(corpus.rows))]
        else:
            a, b = rng.randrange(n_concepts), rng.randrange(n_concepts)
        w.writerow([surface_variant(concepts[a], rng), surface_variant(concepts[b], rng), doc, sign, method, year])
        corpus.rows.append((a, b, doc))
    corpus.csv_bytes = out.getvalue().encode("utf-8")
    return corpus
