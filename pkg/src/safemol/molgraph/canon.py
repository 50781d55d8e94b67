"""Canonical atom ranking and canonical SMILES."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from safemol._kernels import refine_ranks
from safemol.molgraph.graph import ATOMIC_NUMBER, MolGraph
from safemol.molgraph.smiles import serialize


def atom_invariants(g: MolGraph) -> list[tuple[int, ...]]:
    """Per-atom starting invariant used to seed refinement."""
    out = []
    for i, a in enumerate(g.atoms):
        out.append(
            (
                ATOMIC_NUMBER[a.element],
                a.formal_charge,
                g.degree(i),
                int(a.aromatic),
                g.hydrogens[i],
                int(g.ring_atoms[i]),
                a.atom_class,
            )
        )
    return out


def _dense(values: Sequence) -> np.ndarray:
    uniq = {v: r for r, v in enumerate(sorted(set(values)))}
    return np.fromiter((uniq[v] for v in values), dtype=np.int64, count=len(values))


def canonical_ranks(g: MolGraph, tiebreak: Sequence[int] | None = None) -> list[int]:
    """Rank atoms 0..n-1 so that isomorphic graphs rank corresponding atoms alike.

    Refinement runs to a stable partition; remaining ties are split by
    individualizing the member of the first tied class with the smallest
    ``tiebreak`` value (atom index when omitted). Ties that survive full
    refinement are symmetry-equivalent in practice, so the choice does not
    change the resulting string.
    """
    n = len(g.atoms)
    if n == 0:
        return []
    indptr, nbrs, orders = g.csr()
    tb = np.arange(n, dtype=np.int64) if tiebreak is None else np.asarray(tiebreak, dtype=np.int64)
    ranks = refine_ranks(_dense(atom_invariants(g)), indptr, nbrs, orders, tb)
    return ranks.tolist()


def canonical_smiles(g: MolGraph) -> str:
    """Toolkit-internal canonical SMILES; the dedup key for uniqueness and novelty."""
    return serialize(g, canonical_ranks(g), tidy=True)[0]
