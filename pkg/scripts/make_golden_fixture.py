"""Generate the golden LCM runs tree used by the acceptance suite.

The corpus is engineered so that its compiled atlas has 501 nodes, 65
canonical edges and 717 support rows, with the bipedalism backbone, hub
table, edge-mass quantiles and relation-mass mix of the human-origins case
study. Usage:

    python3 scripts/make_golden_fixture.py [OUT_DIR]

OUT_DIR defaults to tests/fixtures/golden_runs and is replaced wholesale.
"""

from __future__ import annotations

import csv
import json
import random
import shutil
import sys
from pathlib import Path

SEED = 20240611
N_DOCS = 6
N_NODES = 501
N_SUPPORT = 717

HUB = "bipedalism"
HUB_VARIANTS = ("bipedalism", "Bipedalism", "bipedalism.", "BIPEDALISM", "  bipedalism ")

# (src, rel, dst, score_sum, support_lcms); support_lcms None -> derived from mass
LISTED = [
    (HUB, "INFLUENCES", "metabolic efficiency during long-distance travel", 1.4624, 15),
    (HUB, "INCREASES", "energy efficiency during locomotion in early hominins", 1.3282, 13),
    (HUB, "INCREASES", "energy efficiency during long-distance locomotion", 1.2644, 13),
    (HUB, "INFLUENCES", "endurance capacity (heat dissipation, etc.)", 1.2557, 13),
    (HUB, "INCREASES", "energy efficiency (metabolic resources)", 1.2093, 12),
    (HUB, "INFLUENCES", "structural adaptation of femoral/tibial bones", 1.2010, 11),
    (HUB, "INFLUENCES", "stride length and pelvic mechanics", 1.1029, 11),
    (HUB, "CAUSES", "loss of arboreal grasping ability", 0.00001, 1),
    (HUB, "CAUSES", "shift in birth canal geometry", 0.00001, 1),
    (HUB, "REDUCES", "reliance on knuckle-walking", 0.00001, 1),
    ("reduced forest cover", "INFLUENCES", "selection for terrestrial locomotion", 0.4637, 6),
    ("changes in environmental conditions favoring open habitats", "INCREASES",
     "pressure toward upright posture", 0.4026, 5),
    ("abnormal femoral tubercle position", "INFLUENCES", "hip joint loading pattern", 0.1500, 3),
    ("abnormal femoral tubercle position", "INCREASES", "gluteal muscle leverage", 0.1353, 3),
    ("fossil structure of ardipithecus", "INFLUENCES", "timeline estimates for upright walking", 0.1358, 3),
    ("muscle reorganization for balance during upright walking", "INCREASES",
     "stability of single-leg stance", 0.1283, 3),
    ("larger brain size in primates", "INFLUENCES", "energy budget allocation", 0.0814, 2),
    ("lateral displacement of the femoral head", "INCREASES", "walking gait efficiency", 0.0763, 2),
]

# remaining 47 edges as (rel, [masses]); every mass is above, at or below the 0.0337 median
FILLER = [
    ("CAUSES", [0.0550] * 4 + [0.0266] * 3),
    ("REDUCES", [0.0300, 0.0250, 0.0250, 0.0200, 0.0200, 0.0200]),
    ("LEADS_TO", [0.0300]),
    ("AFFECTS", [0.0050, 0.0050]),
    ("INFLUENCES", [0.0450] * 3 + [0.0337] + [0.0240] * 6 + [0.0244]),
    ("INCREASES", [0.0400] * 10 + [0.0186] * 9 + [0.0182]),
]
MEDIAN = 0.0337

REL_SURFACE = {
    "INFLUENCES": ("influences", "Influences", "influence"),
    "INCREASES": ("increases", "raises", "boosts"),
    "CAUSES": ("causes", "Causes", "cause"),
    "REDUCES": ("reduces", "lowers", "decreases"),
    "LEADS_TO": ("leads to", "results in", "led to"),
    "AFFECTS": ("affects", "Affects", "affect"),
}

# the first three filler sources form a feedback loop so the SCC table is non-empty
CYCLE = ("seasonal rainfall variability", "grassland expansion", "savanna fire frequency")

_QUALIFIERS = ["early", "regional", "chronic", "seasonal", "juvenile", "dietary", "thermal", "skeletal",
               "maternal", "social"]
_SUBJECTS = ["foraging range", "tool use", "group size", "predation risk", "water availability",
             "bone density", "sweat gland density", "infant carrying", "home range size", "tooth wear"]
_BACKGROUND = ["sediment layer", "dating sample", "excavation site", "museum specimen", "isotope reading",
               "survey transect", "trackway print", "pollen core", "field season", "cranial fragment",
               "faunal assemblage", "stone flake", "ash horizon"]


def _filler_labels(n: int) -> list[str]:
    combos = [f"{q} {s}" for q in _QUALIFIERS for s in _SUBJECTS]
    random.Random(SEED).shuffle(combos)
    return combos[:n]


def edge_plan() -> list[dict]:
    edges = [dict(src=s, rel=r, dst=d, mass=m, lcms=k) for s, r, d, m, k in LISTED]
    masses = [(rel, m) for rel, ms in FILLER for m in ms]
    labels = _filler_labels(2 * len(masses))
    for i, (rel, mass) in enumerate(masses):
        if i < len(CYCLE):
            src, dst = CYCLE[i], CYCLE[(i + 1) % len(CYCLE)]
        else:
            src, dst = labels[2 * i], labels[2 * i + 1]
        edges.append(dict(src=src, rel=rel, dst=dst, mass=mass, lcms=2 if mass > MEDIAN else 1))
    return edges


def assign_rows(edges: list[dict]) -> None:
    """Spread the extra support rows (repeats inside one LCM) over the heavy edges."""
    extra = N_SUPPORT - sum(e["lcms"] for e in edges)
    heavy = [e for e in edges if e["mass"] > MEDIAN]
    total = sum(e["mass"] for e in heavy)
    for e in edges:
        e["rows"] = e["lcms"]
    given = 0
    for e in heavy:
        share = int(extra * e["mass"] / total)
        e["rows"] += share
        given += share
    heavy[0]["rows"] += extra - given


def _variants(label: str) -> tuple[str, ...]:
    if label == HUB:
        return HUB_VARIANTS
    return (label, label[0].upper() + label[1:], label + ".")


def build_lcms(edges: list[dict]) -> list[dict]:
    rng = random.Random(SEED)
    lcms = []
    for e in edges:
        k, rows = e["lcms"], e["rows"]
        mult = [rows // k + (1 if j < rows % k else 0) for j in range(k)]
        weight = e["mass"] / rows  # every occurrence carries the same weight
        for j, m in enumerate(mult):
            triples = []
            for t in range(m):
                src = _variants(e["src"])[(j + t) % len(_variants(e["src"]))]
                dst = _variants(e["dst"])[(j + 2 * t) % len(_variants(e["dst"]))]
                rel = REL_SURFACE[e["rel"]][(j + t) % 3]
                triples.append((src, rel, dst))
            lcms.append(dict(doc=rng.randrange(N_DOCS), weight=weight, triples=triples, focus=e["src"]))
    return lcms


def write_tree(out: Path, lcms: list[dict], n_edge_nodes: int) -> None:
    if out.exists():
        shutil.rmtree(out)
    docs = [out / f"human_origins_{d + 1:02d}" for d in range(N_DOCS)]
    for d in docs:
        d.mkdir(parents=True)

    padding = [f"{b} {i:03d}" for i, b in enumerate(_BACKGROUND * 40)][: N_NODES - n_edge_nodes]
    per_doc: dict[int, int] = {}
    scores: dict[int, list[tuple[str, float]]] = {d: [] for d in range(N_DOCS)}
    for i, lcm in enumerate(lcms):
        n = per_doc.get(lcm["doc"], 0) + 1
        per_doc[lcm["doc"]] = n
        lcm_id = f"lcm-{n:03d}"
        body: dict = {"lcm_instance_id": lcm_id, "focus": lcm["focus"], "radius": 2,
                      "model_size": len(lcm["triples"]) + 1}
        # three ways to carry the weight: inline score, scores.csv, score_raw only
        how = i % 3
        if how == 0:
            body["score"] = lcm["weight"]
        elif how == 1:
            scores[lcm["doc"]].append((lcm_id, lcm["weight"]))
        else:
            body["score_raw"] = lcm["weight"]
        if i % 4 == 0:
            body["edges"] = [{"src": s, "rel": r, "dst": d} for s, r, d in lcm["triples"]]
        elif i % 4 == 1:
            body["edges"] = [{"source": s, "relation": r, "target": d} for s, r, d in lcm["triples"]]
        else:
            body["edges"] = [list(t) for t in lcm["triples"]]
        take, padding = padding[:3], padding[3:]
        if take:
            body["nodes"] = take
        name = f"{lcm_id}.lcm.json" if n % 2 else f"lcm_{n:03d}.json"
        (docs[lcm["doc"]] / name).write_text(json.dumps(body, indent=1, ensure_ascii=False) + "\n",
                                              encoding="utf-8")
    assert not padding, "not enough LCMs to carry the isolated concepts"
    for d, rows in scores.items():
        if not rows:
            continue
        with open(docs[d] / "scores.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["lcm_instance_id", "score", "coupling"])
            for lcm_id, weight in rows:
                w.writerow([lcm_id, repr(weight), "0.5"])


def main(argv: list[str]) -> int:
    root = Path(__file__).resolve().parents[1]
    out = Path(argv[1]) if len(argv) > 1 else root / "tests" / "fixtures" / "golden_runs"
    edges = edge_plan()
    assign_rows(edges)
    n_edge_nodes = len({e["src"] for e in edges} | {e["dst"] for e in edges})
    lcms = build_lcms(edges)
    write_tree(out, lcms, n_edge_nodes)
    print(f"wrote {len(lcms)} LCMs for {len(edges)} edges, {sum(e['rows'] for e in edges)} support rows, "
          f"{N_NODES} nodes to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
