"""Write a synthetic claims CSV with controlled duplication.

    python3 scripts/make_claims_corpus.py OUT.csv [--rows N] [--seed S] [--dup-rate R]

The file has the columns cause,effect,doc_id,sign,method,year and can be
compiled with ``causal-atlas ingest-claims OUT.csv -o DIR``.
"""

from __future__ import annotations

import argparse
import random
from pathlib import Path

from causal_atlas.synth import claims_corpus


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("out", type=Path)
    ap.add_argument("--rows", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=8)
    ap.add_argument("--dup-rate", type=float, default=0.3)
    ap.add_argument("--concepts", type=int, default=2000)
    args = ap.parse_args()

    corpus = claims_corpus(random.Random(args.seed), args.rows, n_concepts=args.concepts, dup_rate=args.dup_rate)
    args.out.write_bytes(corpus.csv_bytes)
    pairs = {(a, b) for a, b, _ in corpus.rows}
    print(f"wrote {args.out}: {args.rows} rows ({corpus.n_blank} blank causes), "
          f"{len(pairs)} distinct cause/effect pairs")


if __name__ == "__main__":
    main()
