"""Compile the golden runs tree and print the atlas summary, backbone, hubs and do-cut diff.

    python3 scripts/reproduce_summary.py [RUNS_ROOT]
"""

from __future__ import annotations

import sys
from pathlib import Path

from causal_atlas import atlas_summary, backbone, build_atlas, counterfactual_diff, do_cut, hub_ranking
from causal_atlas.ingest import load_runs, scan_runs_root

DEFAULT_ROOT = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "golden_runs"


def main() -> None:
    root = Path(sys.argv[1]) if len(sys.argv) > 1 else DEFAULT_ROOT
    atlas = build_atlas(load_runs(scan_runs_root(root)))
    s = atlas_summary(atlas)
    print(f"nodes {s.n_nodes}  edges {s.n_edges}  support rows {s.n_support}")
    print(f"top hub {s.top_hub}  top-1 share {s.top1_share:.3f}  top-5 share {s.top5_share:.3f}")
    tail = "n/a" if s.tail_ratio is None else f"{s.tail_ratio:.1f}"
    print(f"p50 {s.p50:.4f}  p90 {s.p90:.3f}  p99 {s.p99:.3f}  tail ratio {tail}")
    for r in s.rel_mass:
        print(f"  {r.rel_type.value:<12} {r.polarity.value:<3} {r.n_edges:>4} {r.mass:8.2f}")

    print("\nbackbone")
    base = backbone(atlas, 10)
    for i, r in enumerate(base, 1):
        print(f"{i:>3}. {r.rel_type.value:<10} {r.src} -> {r.dst}  support {r.support_lcms}  mass {r.score_sum:.4f}")
    print("\nhubs")
    for h in hub_ranking(atlas, 5):
        print(f"  {h.label:<40} {h.out_mass:8.4f} {h.out_degree:>3}")

    print(f"\ndo-cut {s.top_hub}")
    diff = counterfactual_diff(base, backbone(do_cut(atlas, s.top_hub), 10))
    print(f"  vanished {len(diff.vanished)}")
    for row, i, j in diff.rank_changes:
        print(f"  {i:>2} -> {j:<2} {row.src} -> {row.dst}")


if __name__ == "__main__":
    main()
