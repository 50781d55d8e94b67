"""Draw a seeded random sample of SMILES from a MOSES ``train.csv(.gz)`` file.

The MOSES split files ship inside the ``molsets`` wheel under
``moses/dataset/data/``. Usage::

    python scripts/extract_moses_sample.py train.csv.gz tests/data/moses_sample.smi.gz \
        --size 120000 --seed 0
"""
from __future__ import annotations

import argparse
import gzip
import random


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("source")
    ap.add_argument("dest")
    ap.add_argument("--size", type=int, default=120_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    opener = gzip.open if args.source.endswith(".gz") else open
    with opener(args.source, "rt") as fh:
        rows = [line.strip().split(",")[0] for line in fh]
    rows = [r for r in rows[1:] if r]
    picked = random.Random(args.seed).sample(rows, args.size)
    out_open = gzip.open if args.dest.endswith(".gz") else open
    with out_open(args.dest, "wt") as fh:
        for smi in picked:
            fh.write(smi + "\n")


if __name__ == "__main__":
    main()
