import os
import subprocess
import sys

import numpy as np
import pytest

from safemol import _kernels
from safemol._kernels import _pykernels
from safemol.metrics import fingerprint
from safemol.metrics.fingerprint import stack
from safemol.molgraph import parse_smiles
from safemol.molgraph.canon import _dense, atom_invariants

from conftest import moses_smiles

ckernels = pytest.importorskip("safemol._kernels._ckernels")


def _inputs(g, tb=None):
    indptr, nbrs, orders = g.csr()
    n = len(g.atoms)
    tb = np.arange(n, dtype=np.int64) if tb is None else tb
    return _dense(atom_invariants(g)), indptr, nbrs, orders, tb


def test_backend_selected():
    assert _kernels.BACKEND in ("cython", "python")


def test_rank_kernels_agree(moses_1k):
    rng = np.random.default_rng(0)
    for s in moses_1k[:300]:
        g = parse_smiles(s)
        for tb in (None, rng.permutation(len(g.atoms)).astype(np.int64)):
            x = _inputs(g, tb)
            a, b = ckernels.refine_ranks(*x), _pykernels.refine_ranks(*x)
            assert np.array_equal(a, b)
            assert sorted(a.tolist()) == list(range(len(g.atoms)))


def test_rank_kernels_edge_cases():
    for s in ("C", "CC", "c1ccccc1", "C.C.C"):
        x = _inputs(parse_smiles(s))
        assert np.array_equal(ckernels.refine_ranks(*x), _pykernels.refine_ranks(*x))


def test_tanimoto_kernels_agree():
    fps = stack([fingerprint(parse_smiles(s)) for s in moses_smiles(150)])
    a, b = ckernels.pairwise_tanimoto_sum(fps), _pykernels.pairwise_tanimoto_sum(fps)
    assert abs(a - b) < 1e-9
    empty = np.zeros((3, 32), dtype=np.uint64)
    assert ckernels.pairwise_tanimoto_sum(empty) == _pykernels.pairwise_tanimoto_sum(empty) == 3.0
    one = np.zeros((1, 32), dtype=np.uint64)
    assert ckernels.pairwise_tanimoto_sum(one) == 0.0


def test_pure_python_switch():
    env = dict(os.environ, SAFEMOL_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "import safemol._kernels as k; print(k.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"
