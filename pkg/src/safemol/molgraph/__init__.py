"""Molecular graph model, SMILES I/O and canonicalization."""
from safemol.molgraph.canon import atom_invariants, canonical_ranks, canonical_smiles
from safemol.molgraph.graph import (
    ATOMIC_NUMBER,
    DEFAULT_VALENCES,
    Atom,
    Bond,
    BondOrder,
    MolGraph,
    SmilesError,
    SmilesSyntaxError,
    UnclosedRingError,
    UnknownElementError,
    ValenceError,
    ValenceTable,
)
from safemol.molgraph.rings import largest_ring_size, ring_membership, smallest_ring_per_bond
from safemol.molgraph.smifile import iter_smi, read_smi, write_smi
from safemol.molgraph.smiles import parse_smiles, randomize_smiles, serialize, write_smiles

__all__ = [
    "ATOMIC_NUMBER",
    "DEFAULT_VALENCES",
    "Atom",
    "Bond",
    "BondOrder",
    "MolGraph",
    "SmilesError",
    "SmilesSyntaxError",
    "UnclosedRingError",
    "UnknownElementError",
    "ValenceError",
    "ValenceTable",
    "atom_invariants",
    "canonical_ranks",
    "canonical_smiles",
    "iter_smi",
    "largest_ring_size",
    "parse_smiles",
    "randomize_smiles",
    "read_smi",
    "ring_membership",
    "serialize",
    "smallest_ring_per_bond",
    "write_smi",
    "write_smiles",
]
