"""Circular neighborhood fingerprints and Tanimoto similarity."""
from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass

import numpy as np

from safemol._kernels import pairwise_tanimoto_sum
from safemol.molgraph.graph import ATOMIC_NUMBER, MolGraph

@dataclass(frozen=True, eq=False)
class Fingerprint:
    words: np.ndarray  # packed uint64 bit words
    nbits: int = 2048
    radius: int = 2

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Fingerprint)
            and self.nbits == other.nbits
            and bool(np.array_equal(self.words, other.words))
        )

    def __hash__(self) -> int:
        return hash((self.nbits, self.words.tobytes()))

    @property
    def count(self) -> int:
        return int(np.bitwise_count(self.words).sum())

    def on_bits(self) -> list[int]:
        bits = np.unpackbits(self.words.view(np.uint8), bitorder="little")
        return np.flatnonzero(bits).tolist()


def _hash(values: tuple[int, ...]) -> int:
    return zlib.crc32(struct.pack(f"<{len(values)}q", *values))


def atom_environment_ids(g: MolGraph, radius: int = 2) -> list[int]:
    """Identifiers of every atom environment up to ``radius`` bonds (Morgan-style)."""
    atoms = g.atoms
    ids = []
    for i, a in enumerate(atoms):
        heavy = sum(1 for j, _ in g.adjacency[i] if atoms[j].element != "H")
        ids.append(
            _hash(
                (
                    ATOMIC_NUMBER[a.element],
                    heavy,
                    g.hydrogens[i],
                    a.formal_charge,
                    int(g.ring_atoms[i]),
                    int(a.aromatic),
                )
            )
        )
    out = [x for i, x in enumerate(ids) if atoms[i].element != "H"]
    bonds = g.bonds
    for r in range(1, radius + 1):
        nxt = []
        for i in range(len(atoms)):
            env = sorted((int(bonds[bi].order), ids[j]) for j, bi in g.adjacency[i])
            flat: tuple[int, ...] = (r, ids[i]) + tuple(x for pair in env for x in pair)
            nxt.append(_hash(flat))
        ids = nxt
        out.extend(x for i, x in enumerate(ids) if atoms[i].element != "H")
    return out


def fingerprint(g: MolGraph, nbits: int = 2048, radius: int = 2) -> Fingerprint:
    if nbits % 64:
        raise ValueError("nbits must be a multiple of 64")
    bits = np.zeros(nbits, dtype=np.uint8)
    for ident in atom_environment_ids(g, radius):
        bits[ident % nbits] = 1
    words = np.packbits(bits, bitorder="little").view(np.uint64)
    return Fingerprint(words.copy(), nbits, radius)


def tanimoto(a: Fingerprint, b: Fingerprint) -> float:
    """``|a & b| / |a | b|``, and 1.0 when both are empty."""
    if a.nbits != b.nbits:
        raise ValueError("fingerprints differ in length")
    inter = int(np.bitwise_count(a.words & b.words).sum())
    union = int(np.bitwise_count(a.words | b.words).sum())
    return 1.0 if union == 0 else inter / union


def stack(fps: list[Fingerprint]) -> np.ndarray:
    if not fps:
        return np.zeros((0, 0), dtype=np.uint64)
    return np.ascontiguousarray(np.stack([f.words for f in fps]))


def mean_pairwise_tanimoto(fps: list[Fingerprint]) -> float:
    """Mean similarity over distinct pairs ``i < j`` (0 pairs gives 1.0)."""
    n = len(fps)
    if n < 2:
        return 1.0
    return pairwise_tanimoto_sum(stack(fps)) / (n * (n - 1) / 2)
