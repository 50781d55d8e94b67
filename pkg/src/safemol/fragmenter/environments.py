"""Named atom environments used to refine two-atom rule patterns.

The BRICS environments L1-L16 are written here as predicates because their
usual SMARTS form relies on recursive expressions, which the pattern subset
does not carry. Each predicate takes an :class:`AtomView` and an atom index.
"""
from __future__ import annotations

from typing import Callable

from safemol.molgraph.graph import BondOrder, MolGraph

SINGLE = BondOrder.SINGLE
DOUBLE = BondOrder.DOUBLE
TRIPLE = BondOrder.TRIPLE
AROMATIC = BondOrder.AROMATIC


class AtomView:
    """Cached per-atom facts for one molecule."""

    __slots__ = ("g", "el", "ar", "ring", "deg", "q", "nbrs")

    def __init__(self, g: MolGraph) -> None:
        self.g = g
        atoms = g.atoms
        self.el = [a.element for a in atoms]
        self.ar = [a.aromatic for a in atoms]
        self.ring = g.ring_atoms
        self.q = [a.formal_charge for a in atoms]
        bonds = g.bonds
        # (neighbor, order, bond_in_ring) per atom
        self.nbrs = [
            [(j, bonds[bi].order, bonds[bi].in_ring) for j, bi in g.adjacency[i]] for i in range(len(atoms))
        ]
        self.deg = [sum(1 for j, _, _ in row if self.el[j] != "H") for row in self.nbrs]

    def aliph(self, i: int, *elements: str) -> bool:
        return not self.ar[i] and self.el[i] in elements

    def arom(self, i: int, *elements: str) -> bool:
        return self.ar[i] and self.el[i] in elements

    def double_o(self, i: int) -> list[int]:
        return [j for j, o, _ in self.nbrs[i] if o is DOUBLE and self.el[j] == "O"]


Predicate = Callable[[AtomView, int], bool]

# element sets written the way the environment definitions use them
_ANY_CNO_DUMMY = ("*", "C", "N", "O")  # [#0,#6,#7,#8]
_CNOS = ("C", "N", "O", "S")


def _implicit_nbrs(v: AtomView, i: int) -> list[tuple[int, BondOrder, bool]]:
    # unwritten SMARTS bond: single or aromatic
    return [(j, o, r) for j, o, r in v.nbrs[i] if o is SINGLE or o is AROMATIC]


def _l1(v: AtomView, i: int) -> bool:
    # [C;D3]([#0,#6,#7,#8])(=O)
    if not v.aliph(i, "C") or v.deg[i] != 3:
        return False
    oxy = v.double_o(i)
    if not oxy:
        return False
    return any(v.el[j] in _ANY_CNO_DUMMY for j, _, _ in _implicit_nbrs(v, i))


def _l3(v: AtomView, i: int) -> bool:
    # [O;D2]-;!@[#0,#6,#1]
    if not v.aliph(i, "O") or v.deg[i] != 2:
        return False
    return any(o is SINGLE and not r and v.el[j] in ("*", "C", "H") for j, o, r in v.nbrs[i])


def _l4(v: AtomView, i: int) -> bool:
    # [C;!D1;!$(C=*)]-;!@[#6]
    if not v.aliph(i, "C") or v.deg[i] == 1:
        return False
    if any(o is DOUBLE for _, o, _ in v.nbrs[i]):
        return False
    return any(o is SINGLE and not r and v.el[j] == "C" for j, o, r in v.nbrs[i])


def _amide_like_ring_n(v: AtomView, i: int) -> bool:
    # [N;R]@[C;R]=O
    if not v.ring[i]:
        return False
    for j, _, r in v.nbrs[i]:
        if r and v.aliph(j, "C") and v.ring[j] and v.double_o(j):
            return True
    return False


def _l5(v: AtomView, i: int) -> bool:
    # [N;!D1;!$(N=*);!$(N-[!#6;!#16;!#0;!#1]);!$([N;R]@[C;R]=O)]
    if not v.aliph(i, "N") or v.deg[i] == 1:
        return False
    for j, o, _ in v.nbrs[i]:
        if o is DOUBLE:
            return False
        if o is SINGLE and v.el[j] not in ("C", "S", "*", "H"):
            return False
    return not _amide_like_ring_n(v, i)


def _l6(v: AtomView, i: int) -> bool:
    # [C;D3;!R](=O)-;!@[#0,#6,#7,#8]
    if not v.aliph(i, "C") or v.deg[i] != 3 or v.ring[i] or not v.double_o(i):
        return False
    return any(o is SINGLE and not r and v.el[j] in _ANY_CNO_DUMMY for j, o, r in v.nbrs[i])


def _l8(v: AtomView, i: int) -> bool:
    # [C;!R;!D1;!$(C!-*)]
    if not v.aliph(i, "C") or v.ring[i] or v.deg[i] == 1:
        return False
    return all(o is SINGLE for _, o, _ in v.nbrs[i])


def _l9(v: AtomView, i: int) -> bool:
    # [n;+0;$(n(:[c,n,o,s]):[c,n,o,s])]
    if not v.arom(i, "N") or v.q[i] != 0:
        return False
    hits = sum(1 for j, o, _ in v.nbrs[i] if o is AROMATIC and v.arom(j, *_CNOS))
    return hits >= 2


def _l10(v: AtomView, i: int) -> bool:
    # [N;R;$(N(@C(=O))@[C,N,O,S])]
    if not v.aliph(i, "N") or not v.ring[i]:
        return False
    ring_nbrs = [j for j, _, r in v.nbrs[i] if r]
    carbonyls = [j for j in ring_nbrs if v.aliph(j, "C") and v.double_o(j)]
    for c in carbonyls:
        if any(k != c and v.aliph(k, *_CNOS) for k in ring_nbrs):
            return True
    return False


def _l11(v: AtomView, i: int) -> bool:
    # [S;D2](-;!@[#0,#6])
    if not v.aliph(i, "S") or v.deg[i] != 2:
        return False
    return any(o is SINGLE and not r and v.el[j] in ("*", "C") for j, o, r in v.nbrs[i])


def _l12(v: AtomView, i: int) -> bool:
    # [S;D4]([#6,#0])(=O)(=O)
    if not v.aliph(i, "S") or v.deg[i] != 4:
        return False
    if len(v.double_o(i)) < 2:
        return False
    return any(v.el[j] in ("C", "*") for j, _, _ in _implicit_nbrs(v, i))


def _two_distinct(v: AtomView, i: int, first, second, bond_ok) -> bool:
    cands = [j for j, o, r in v.nbrs[i] if bond_ok(o, r)]
    for a in cands:
        if not first(a):
            continue
        for b in cands:
            if b != a and second(b):
                return True
    return False


def _ring_single(o: BondOrder, r: bool) -> bool:
    return o is SINGLE and r


def _aromatic_bond(o: BondOrder, r: bool) -> bool:
    return o is AROMATIC


def _l13(v: AtomView, i: int) -> bool:
    # [C;$(C(-;@[C,N,O,S])-;@[N,O,S])]
    if not v.aliph(i, "C"):
        return False
    return _two_distinct(
        v, i, lambda j: v.aliph(j, *_CNOS), lambda j: v.aliph(j, "N", "O", "S"), _ring_single
    )


def _l14(v: AtomView, i: int) -> bool:
    # [c;$(c(:[c,n,o,s]):[n,o,s])]
    if not v.arom(i, "C"):
        return False
    return _two_distinct(
        v, i, lambda j: v.arom(j, *_CNOS), lambda j: v.arom(j, "N", "O", "S"), _aromatic_bond
    )


def _l15(v: AtomView, i: int) -> bool:
    # [C;$(C(-;@C)-;@C)]
    if not v.aliph(i, "C"):
        return False
    return _two_distinct(v, i, lambda j: v.aliph(j, "C"), lambda j: v.aliph(j, "C"), _ring_single)


def _l16(v: AtomView, i: int) -> bool:
    # [c;$(c(:c):c)]
    if not v.arom(i, "C"):
        return False
    return _two_distinct(v, i, lambda j: v.arom(j, "C"), lambda j: v.arom(j, "C"), _aromatic_bond)


def _urea_c(v: AtomView, i: int) -> bool:
    return sum(1 for j, o, _ in v.nbrs[i] if o is SINGLE and v.el[j] == "N") >= 2


def _not_urea_c(v: AtomView, i: int) -> bool:
    return not _urea_c(v, i)


def _quaternary_n(v: AtomView, i: int) -> bool:
    return v.aliph(i, "N") and v.q[i] == 1 and v.deg[i] == 4


def _neutral(v: AtomView, i: int) -> bool:
    return v.q[i] == 0


def _mmpa_c(v: AtomView, i: int) -> bool:
    # carbon not double- or triple-bonded to a heteroatom
    return not any(o in (DOUBLE, TRIPLE) and v.el[j] != "C" for j, o, _ in v.nbrs[i])


def _no_triple(v: AtomView, i: int) -> bool:
    return not any(o is TRIPLE for _, o, _ in v.nbrs[i])


ENVIRONMENTS: dict[str, Predicate] = {
    "L1": _l1,
    "L3": _l3,
    "L4": _l4,
    "L5": _l5,
    "L6": _l6,
    "L8": _l8,
    "L9": _l9,
    "L10": _l10,
    "L11": _l11,
    "L12": _l12,
    "L13": _l13,
    "L14": _l14,
    "L15": _l15,
    "L16": _l16,
    "UREA_C": _urea_c,
    "NOT_UREA_C": _not_urea_c,
    "QN": _quaternary_n,
    "NEUTRAL": _neutral,
    "MMPA_C": _mmpa_c,
    "NT": _no_triple,
}
