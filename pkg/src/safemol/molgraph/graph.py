"""Attributed molecular graph with valence validation.

A :class:`MolGraph` is built once (usually by the SMILES parser) and never
mutated afterwards. Construction resolves ring membership, demotes acyclic
aromatic bonds to single bonds, derives implicit hydrogens and checks every
atom against the valence table.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterable, Mapping, Sequence

import numpy as np

from safemol.molgraph.rings import bridge_flags, connected_components


class SmilesError(ValueError):
    """Base class for everything the parser can reject."""


class SmilesSyntaxError(SmilesError):
    pass


class UnclosedRingError(SmilesError):
    pass


class ValenceError(SmilesError):
    pass


class UnknownElementError(SmilesError):
    pass


class BondOrder(IntEnum):
    SINGLE = 1
    DOUBLE = 2
    TRIPLE = 3
    AROMATIC = 4

    @property
    def valence(self) -> int:
        # aromatic bonds contribute one unit; the pi share is handled per atom
        return 1 if self is BondOrder.AROMATIC else int(self)


ORGANIC = frozenset({"C", "N", "O", "S", "F", "Cl", "Br"})
AROMATIC_ELEMENTS = frozenset({"C", "N", "O", "S"})
ELEMENTS = ("C", "N", "O", "S", "F", "Cl", "Br", "H", "*")
ATOMIC_NUMBER = {"*": 0, "H": 1, "C": 6, "N": 7, "O": 8, "F": 9, "S": 16, "Cl": 17, "Br": 35}


@dataclass(frozen=True, slots=True)
class Atom:
    element: str
    aromatic: bool = False
    formal_charge: int = 0
    explicit_h: int | None = None
    index: int = 0
    atom_class: int = 0

    @property
    def is_wildcard(self) -> bool:
        return self.element == "*"

    @property
    def bracket(self) -> bool:
        return self.explicit_h is not None


@dataclass(frozen=True, slots=True)
class Bond:
    begin: int
    end: int
    order: BondOrder
    in_ring: bool = False
    index: int = 0

    @property
    def endpoints(self) -> tuple[int, int]:
        return (self.begin, self.end)

    def other(self, atom: int) -> int:
        return self.end if atom == self.begin else self.begin


@dataclass(frozen=True)
class ValenceTable:
    """Permitted valences per element; ``*`` is unconstrained."""

    valences: Mapping[str, tuple[int, ...]] = field(
        default_factory=lambda: {
            "C": (4,),
            "N": (3,),
            "O": (2,),
            "S": (2, 4, 6),
            "F": (1,),
            "Cl": (1,),
            "Br": (1,),
            "H": (1,),
        }
    )
    # implicit-H target for unbracketed aromatic atoms (one unit goes to the pi system)
    aromatic_targets: Mapping[str, int] = field(
        default_factory=lambda: {"C": 3, "N": 2, "O": 1, "S": 1}
    )

    def allowed(self, element: str, charge: int = 0) -> tuple[int, ...]:
        base = self.valences[element]
        if element in ("C", "H"):
            adj = tuple(v - abs(charge) for v in base)
        else:
            adj = tuple(v + charge for v in base)
        return tuple(v for v in adj if v >= 0)

    def implicit_h(self, element: str, aromatic: bool, bond_sum: int) -> int | None:
        """Hydrogens an unbracketed atom receives, or ``None`` if none fits."""
        if element == "*":
            return 0
        if aromatic:
            return max(0, self.aromatic_targets[element] - bond_sum)
        for v in self.valences[element]:
            if v >= bond_sum:
                return v - bond_sum
        return None


DEFAULT_VALENCES = ValenceTable()


class MolGraph:
    """Immutable molecular graph.

    Attributes:
        atoms: Atoms in input order; ``atoms[i].index == i``.
        bonds: Bonds with ring flags resolved.
        adjacency: Per atom, a tuple of ``(neighbor, bond_index)`` pairs.
        hydrogens: Total hydrogen count per atom (implicit or bracket).
        ring_atoms: Per-atom ring membership.
        component_ids: Connected-component label per atom.
    """

    __slots__ = (
        "atoms",
        "bonds",
        "adjacency",
        "hydrogens",
        "ring_atoms",
        "component_ids",
        "component_count",
        "_bond_lookup",
        "_csr",
    )

    def __init__(
        self,
        atoms: tuple[Atom, ...],
        bonds: tuple[Bond, ...],
        adjacency: tuple[tuple[tuple[int, int], ...], ...],
        hydrogens: tuple[int, ...],
        ring_atoms: tuple[bool, ...],
        component_ids: tuple[int, ...],
    ) -> None:
        self.atoms = atoms
        self.bonds = bonds
        self.adjacency = adjacency
        self.hydrogens = hydrogens
        self.ring_atoms = ring_atoms
        self.component_ids = component_ids
        self.component_count = len(set(component_ids))
        self._bond_lookup: dict[tuple[int, int], int] | None = None
        self._csr = None

    @classmethod
    def build(
        cls,
        atoms: Sequence[Atom],
        bonds: Iterable[tuple[int, int, BondOrder]],
        valence_table: ValenceTable = DEFAULT_VALENCES,
    ) -> "MolGraph":
        """Validate raw atoms and bonds and assemble a graph.

        Raises:
            ValenceError: An atom exceeds its permitted valence, or an
                aromatic atom sits outside any ring.
            SmilesSyntaxError: Duplicate or self bonds.
        """
        atoms = tuple(a if a.index == i else _reindex(a, i) for i, a in enumerate(atoms))
        n = len(atoms)
        raw = [(int(a), int(b), BondOrder(o)) for a, b, o in bonds]
        seen: set[tuple[int, int]] = set()
        adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        for bi, (a, b, _) in enumerate(raw):
            if a == b or not (0 <= a < n and 0 <= b < n):
                raise SmilesSyntaxError(f"bad bond endpoints {a}-{b}")
            key = (a, b) if a < b else (b, a)
            if key in seen:
                raise SmilesSyntaxError(f"duplicate bond between atoms {a} and {b}")
            seen.add(key)
            adj[a].append((b, bi))
            adj[b].append((a, bi))

        bridges = bridge_flags(n, [(a, b) for a, b, _ in raw], adj)
        bond_objs = []
        ring_atoms = [False] * n
        for bi, (a, b, order) in enumerate(raw):
            in_ring = not bridges[bi]
            if order is BondOrder.AROMATIC and not in_ring:
                order = BondOrder.SINGLE
            if in_ring:
                ring_atoms[a] = ring_atoms[b] = True
            bond_objs.append(Bond(a, b, order, in_ring, bi))

        hydrogens = []
        for i, atom in enumerate(atoms):
            if atom.aromatic and not ring_atoms[i]:
                raise ValenceError(f"aromatic atom {i} ({atom.element}) is not in a ring")
            hydrogens.append(_check_atom(atom, [bond_objs[bi] for _, bi in adj[i]], valence_table))

        comp = connected_components(n, adj)
        return cls(
            atoms,
            tuple(bond_objs),
            tuple(tuple(x) for x in adj),
            tuple(hydrogens),
            tuple(ring_atoms),
            tuple(comp),
        )

    def __len__(self) -> int:
        return len(self.atoms)

    def __repr__(self) -> str:
        return f"MolGraph(atoms={len(self.atoms)}, bonds={len(self.bonds)}, components={self.component_count})"

    @property
    def num_atoms(self) -> int:
        return len(self.atoms)

    def degree(self, i: int) -> int:
        return len(self.adjacency[i])

    def heavy_degree(self, i: int) -> int:
        atoms = self.atoms
        return sum(1 for j, _ in self.adjacency[i] if atoms[j].element != "H")

    def neighbors(self, i: int) -> list[int]:
        return [j for j, _ in self.adjacency[i]]

    def bond_between(self, a: int, b: int) -> Bond | None:
        if self._bond_lookup is None:
            self._bond_lookup = {}
            for bond in self.bonds:
                self._bond_lookup[(bond.begin, bond.end)] = bond.index
                self._bond_lookup[(bond.end, bond.begin)] = bond.index
        bi = self._bond_lookup.get((a, b))
        return None if bi is None else self.bonds[bi]

    def bond_sum(self, i: int) -> int:
        bonds = self.bonds
        return sum(bonds[bi].order.valence for _, bi in self.adjacency[i])

    def csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Adjacency as ``(indptr, neighbors, bond_orders)`` int64 arrays."""
        if self._csr is None:
            indptr = np.zeros(len(self.atoms) + 1, dtype=np.int64)
            nbrs: list[int] = []
            orders: list[int] = []
            for i, row in enumerate(self.adjacency):
                for j, bi in row:
                    nbrs.append(j)
                    orders.append(int(self.bonds[bi].order))
                indptr[i + 1] = len(nbrs)
            self._csr = (
                indptr,
                np.asarray(nbrs, dtype=np.int64),
                np.asarray(orders, dtype=np.int64),
            )
        return self._csr

    def wildcard_atoms(self) -> list[int]:
        return [a.index for a in self.atoms if a.element == "*"]

    def heavy_atom_count(self) -> int:
        return sum(1 for a in self.atoms if a.element not in ("H", "*"))


def _reindex(atom: Atom, i: int) -> Atom:
    return Atom(atom.element, atom.aromatic, atom.formal_charge, atom.explicit_h, i, atom.atom_class)


def _check_atom(atom: Atom, bonds: list[Bond], table: ValenceTable) -> int:
    el = atom.element
    if el == "*":
        return atom.explicit_h or 0
    bs = sum(b.order.valence for b in bonds)
    allowed = table.allowed(el, atom.formal_charge)
    if not allowed:
        raise ValenceError(f"no valence for {el} with charge {atom.formal_charge}")
    if atom.explicit_h is None:
        h = table.implicit_h(el, atom.aromatic, bs)
        if h is None:
            raise ValenceError(f"atom {atom.index} ({el}) has bond order sum {bs} > {max(allowed)}")
    else:
        h = atom.explicit_h
    total = bs + h
    if atom.aromatic:
        # without kekulization an aromatic carbon still owes one unit to the ring
        # unless it carries an exocyclic double bond
        pi = 1 if el == "C" and not any(b.order is BondOrder.DOUBLE for b in bonds) else 0
        if total + pi > max(allowed):
            raise ValenceError(f"aromatic atom {atom.index} ({el}) over-valent")
    elif total > max(allowed):
        raise ValenceError(f"atom {atom.index} ({el}) has valence {total} > {max(allowed)}")
    return h
