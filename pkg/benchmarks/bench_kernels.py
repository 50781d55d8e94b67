"""Compare the compiled kernels with the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--molecules N] [--fingerprints N]
"""
from __future__ import annotations

import argparse
import gzip
import time
from pathlib import Path

import numpy as np

from safemol._kernels import _pykernels
from safemol.metrics import fingerprint
from safemol.metrics.fingerprint import stack
from safemol.molgraph import parse_smiles
from safemol.molgraph.canon import _dense, atom_invariants

try:
    from safemol._kernels import _ckernels
except ImportError:  # extension not built
    _ckernels = None

DATA = Path(__file__).resolve().parent.parent / "tests" / "data" / "moses_sample.smi.gz"


def _best(fn, repeat: int = 3) -> float:
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--molecules", type=int, default=2000)
    ap.add_argument("--fingerprints", type=int, default=1000)
    args = ap.parse_args()

    with gzip.open(DATA, "rt") as fh:
        smiles = [line.split()[0] for _, line in zip(range(max(args.molecules, args.fingerprints)), fh)]
    graphs = [parse_smiles(s) for s in smiles]
    inputs = []
    for g in graphs[: args.molecules]:
        indptr, nbrs, orders = g.csr()
        inv = _dense(atom_invariants(g))
        inputs.append((inv, indptr, nbrs, orders, np.arange(len(g.atoms), dtype=np.int64)))
    fps = stack([fingerprint(g) for g in graphs[: args.fingerprints]])

    backends = [("python", _pykernels)]
    if _ckernels is not None:
        backends.insert(0, ("cython", _ckernels))
    else:
        print("compiled extension not available; timing the fallback only")

    results = {}
    for name, mod in backends:
        t_rank = _best(lambda: [mod.refine_ranks(*x) for x in inputs])
        t_tan = _best(lambda: mod.pairwise_tanimoto_sum(fps))
        results[name] = (t_rank, t_tan)

    if _ckernels is not None:
        for x in inputs[:200]:
            assert np.array_equal(_ckernels.refine_ranks(*x), _pykernels.refine_ranks(*x))
        a, b = _ckernels.pairwise_tanimoto_sum(fps), _pykernels.pairwise_tanimoto_sum(fps)
        assert abs(a - b) < 1e-9 * max(1.0, abs(a))

    n_pairs = args.fingerprints * (args.fingerprints - 1) // 2
    print(f"{'kernel':<28}{'backend':<10}{'seconds':>10}")
    for name, (t_rank, t_tan) in results.items():
        print(f"{'refine_ranks x' + str(len(inputs)):<28}{name:<10}{t_rank:>10.4f}")
        print(f"{'tanimoto pairs ' + str(n_pairs):<28}{name:<10}{t_tan:>10.4f}")
    if len(results) == 2:
        (cr, ct), (pr, pt) = results["cython"], results["python"]
        print(f"speedup: refine_ranks {pr / cr:.1f}x, pairwise tanimoto {pt / ct:.1f}x")


if __name__ == "__main__":
    main()
