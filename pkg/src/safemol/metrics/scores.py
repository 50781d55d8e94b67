"""Per-set generation metrics. Everything except validity is taken over valid graphs."""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Sequence

from safemol.metrics.fingerprint import fingerprint, mean_pairwise_tanimoto
from safemol.molgraph import MolGraph, SmilesError, canonical_smiles, parse_smiles
from safemol.molgraph.rings import smallest_ring_per_bond
from safemol.patterns import QueryGraph, has_substructure, query_from_mol

ALLOWED_ELEMENTS = frozenset({"C", "N", "S", "O", "F", "Cl", "Br", "H"})
MAX_RING_SIZE = 8

ATOMIC_MASS = {
    "H": 1.008,
    "B": 10.81,
    "C": 12.011,
    "N": 14.007,
    "O": 15.999,
    "F": 18.998,
    "Si": 28.085,
    "P": 30.974,
    "S": 32.06,
    "Cl": 35.453,
    "Se": 78.971,
    "Br": 79.904,
    "I": 126.904,
    "*": 0.0,
}


@dataclass(frozen=True)
class ValidityResult:
    fraction: float
    graphs: list[MolGraph]
    valid_mask: list[bool]

    @property
    def n_samples(self) -> int:
        return len(self.valid_mask)

    @property
    def n_valid(self) -> int:
        return len(self.graphs)


def validity(samples: Sequence[str]) -> ValidityResult:
    """Fraction of samples that parse cleanly; the denominator is every sample."""
    graphs: list[MolGraph] = []
    mask: list[bool] = []
    for s in samples:
        try:
            graphs.append(parse_smiles(s))
            mask.append(True)
        except SmilesError:
            mask.append(False)
    frac = len(graphs) / len(mask) if mask else 0.0
    return ValidityResult(frac, graphs, mask)


def canonical_set(graphs: Iterable[MolGraph]) -> set[str]:
    return {canonical_smiles(g) for g in graphs}


def uniqueness(graphs: Sequence[MolGraph]) -> float:
    if not graphs:
        return 0.0
    return len(canonical_set(graphs)) / len(graphs)


def novelty(graphs: Sequence[MolGraph], training: set[str]) -> float:
    """Share of distinct generated canonical strings absent from ``training``."""
    distinct = canonical_set(graphs)
    if not distinct:
        return 0.0
    return len(distinct - training) / len(distinct)


@dataclass(frozen=True)
class DiversityResult:
    value: float
    n_used: int
    subsampled: bool


def internal_diversity(
    graphs: Sequence[MolGraph],
    sample_cap: int | None = None,
    seed: int = 0,
    nbits: int = 2048,
    radius: int = 2,
) -> DiversityResult:
    """``1 -`` mean Tanimoto over distinct pairs; a seeded subsample is used above ``sample_cap``."""
    items = list(graphs)
    subsampled = sample_cap is not None and len(items) > sample_cap
    if subsampled:
        items = random.Random(seed).sample(items, sample_cap)
    if len(items) < 2:
        return DiversityResult(0.0, len(items), subsampled)
    fps = [fingerprint(g, nbits, radius) for g in items]
    return DiversityResult(1.0 - mean_pairwise_tanimoto(fps), len(items), subsampled)


def fragmented_pct(graphs: Sequence[MolGraph]) -> float:
    if not graphs:
        return 0.0
    return sum(1 for g in graphs if g.component_count > 1) / len(graphs)


Constraint = MolGraph | tuple[MolGraph, MolGraph]


def constraint_queries(constraint: Constraint) -> list[QueryGraph]:
    parts = constraint if isinstance(constraint, tuple) else (constraint,)
    return [query_from_mol(p) for p in parts]


def match_constraint(graphs: Sequence[MolGraph], constraint: Constraint) -> float:
    """Share of graphs containing the scaffold, or both fragments of a linker pair."""
    if not graphs:
        return 0.0
    queries = constraint_queries(constraint)
    hits = sum(1 for g in graphs if all(has_substructure(q, g) for q in queries))
    return hits / len(graphs)


def moses_filter(g: MolGraph, max_ring: int = MAX_RING_SIZE) -> tuple[bool, str]:
    """Curation rules: neutral atoms, allowed elements, no ring above ``max_ring``.

    Returns ``(passes, reason)`` with reason one of ``ok``, ``charge``,
    ``element``, ``large_ring``.
    """
    for a in g.atoms:
        if a.formal_charge:
            return False, "charge"
    for a in g.atoms:
        if a.element not in ALLOWED_ELEMENTS:
            return False, "element"
    if any(size > max_ring for size in smallest_ring_per_bond(g).values()):
        return False, "large_ring"
    return True, "ok"


def mol_weight(g: MolGraph) -> float:
    total = 0.0
    for i, a in enumerate(g.atoms):
        try:
            total += ATOMIC_MASS[a.element]
        except KeyError:
            raise ValueError(f"no mass for element {a.element}") from None
        total += g.hydrogens[i] * ATOMIC_MASS["H"]
    return total
