"""SMILES reader and writer for the restricted MOSES chemistry.

Stereo marks, isotopes and elements outside C, N, O, S, F, Cl, Br, H are
rejected. Aromaticity is taken as written.
"""
from __future__ import annotations

import random
from typing import Mapping, Sequence

from safemol.molgraph.graph import (
    AROMATIC_ELEMENTS,
    DEFAULT_VALENCES,
    ORGANIC,
    Atom,
    BondOrder,
    MolGraph,
    SmilesSyntaxError,
    UnclosedRingError,
    UnknownElementError,
)

_BOND_SYMBOLS = {"-": BondOrder.SINGLE, "=": BondOrder.DOUBLE, "#": BondOrder.TRIPLE, ":": BondOrder.AROMATIC}
_ORGANIC_UPPER = {"C": "C", "N": "N", "O": "O", "S": "S", "F": "F"}
_AROMATIC_LOWER = {"c": "C", "n": "N", "o": "O", "s": "S"}
_UNKNOWN_BARE = set("BPIbp")


def parse_smiles(text: str) -> MolGraph:
    """Parse a SMILES (or SAFE) string into a validated :class:`MolGraph`.

    Raises:
        SmilesSyntaxError: Malformed input, including stereo or isotope marks.
        UnclosedRingError: A ring-closure digit is opened but never closed.
        ValenceError: An atom exceeds its permitted valence.
        UnknownElementError: An element outside the supported set.
    """
    if not text:
        raise SmilesSyntaxError("empty SMILES")
    atoms: list[Atom] = []
    bonds: list[tuple[int, int, BondOrder]] = []
    bonded: set[tuple[int, int]] = set()
    ring_open: dict[int, tuple[int, str | None]] = {}
    branch_stack: list[int] = []
    branch_fresh = False
    prev = -1
    pending: str | None = None
    i, n = 0, len(text)

    def add_bond(a: int, b: int, sym: str | None) -> None:
        key = (a, b) if a < b else (b, a)
        if key in bonded:
            raise SmilesSyntaxError(f"duplicate bond between atoms {a} and {b}")
        bonded.add(key)
        if sym is None:
            order = BondOrder.AROMATIC if atoms[a].aromatic and atoms[b].aromatic else BondOrder.SINGLE
        else:
            order = _BOND_SYMBOLS[sym]
            if order is BondOrder.AROMATIC and not (atoms[a].aromatic and atoms[b].aromatic):
                raise SmilesSyntaxError("aromatic bond between non-aromatic atoms")
        bonds.append((a, b, order))

    while i < n:
        ch = text[i]
        atom: Atom | None = None
        if ch in _ORGANIC_UPPER:
            if ch == "C" and i + 1 < n and text[i + 1] == "l":
                atom = Atom("Cl", index=len(atoms))
                i += 2
            else:
                atom = Atom(_ORGANIC_UPPER[ch], index=len(atoms))
                i += 1
        elif ch in _AROMATIC_LOWER:
            atom = Atom(_AROMATIC_LOWER[ch], aromatic=True, index=len(atoms))
            i += 1
        elif ch == "B":
            if i + 1 < n and text[i + 1] == "r":
                atom = Atom("Br", index=len(atoms))
                i += 2
            else:
                raise UnknownElementError("B")
        elif ch == "*":
            atom = Atom("*", index=len(atoms))
            i += 1
        elif ch == "[":
            atom, i = _parse_bracket(text, i, len(atoms))
        elif ch in _BOND_SYMBOLS:
            if pending is not None or prev < 0:
                raise SmilesSyntaxError(f"misplaced bond symbol at {i}")
            pending = ch
            i += 1
            continue
        elif ch == "(":
            if prev < 0 or pending is not None:
                raise SmilesSyntaxError(f"misplaced '(' at {i}")
            branch_stack.append(prev)
            branch_fresh = True
            i += 1
            continue
        elif ch == ")":
            if not branch_stack or pending is not None or branch_fresh:
                raise SmilesSyntaxError(f"misplaced ')' at {i}")
            prev = branch_stack.pop()
            i += 1
            continue
        elif ch.isdigit() or ch == "%":
            if ch == "%":
                if i + 2 >= n or not (text[i + 1].isdigit() and text[i + 2].isdigit()):
                    raise SmilesSyntaxError(f"bad %nn ring label at {i}")
                label = int(text[i + 1 : i + 3])
                i += 3
            else:
                label = int(ch)
                i += 1
            if prev < 0 or branch_fresh:
                raise SmilesSyntaxError("ring label without an atom")
            if label in ring_open:
                partner, sym = ring_open.pop(label)
                if partner == prev:
                    raise SmilesSyntaxError("ring closure onto the same atom")
                if sym is not None and pending is not None and sym != pending:
                    raise SmilesSyntaxError("conflicting ring-closure bond symbols")
                add_bond(partner, prev, sym if sym is not None else pending)
            else:
                ring_open[label] = (prev, pending)
            pending = None
            continue
        elif ch == ".":
            if prev < 0 or pending is not None or branch_stack:
                raise SmilesSyntaxError(f"misplaced '.' at {i}")
            prev = -1
            i += 1
            continue
        elif ch in "/\\@":
            raise SmilesSyntaxError("stereochemistry is not supported")
        elif ch in _UNKNOWN_BARE:
            raise UnknownElementError(ch)
        else:
            raise SmilesSyntaxError(f"unexpected character {ch!r} at {i}")

        atoms.append(atom)
        idx = len(atoms) - 1
        if prev >= 0:
            add_bond(prev, idx, pending)
        elif pending is not None:
            raise SmilesSyntaxError("bond symbol without a preceding atom")
        pending = None
        branch_fresh = False
        prev = idx

    if pending is not None:
        raise SmilesSyntaxError("dangling bond symbol")
    if branch_stack:
        raise SmilesSyntaxError("unmatched '('")
    if ring_open:
        raise UnclosedRingError(f"unclosed ring label(s) {sorted(ring_open)}")
    if not atoms:
        raise SmilesSyntaxError("no atoms")
    return MolGraph.build(atoms, bonds)


def _parse_bracket(text: str, i: int, index: int) -> tuple[Atom, int]:
    end = text.find("]", i)
    if end < 0:
        raise SmilesSyntaxError("unterminated bracket atom")
    body = text[i + 1 : end]
    j, m = 0, len(body)
    if j < m and body[j].isdigit():
        raise SmilesSyntaxError("isotopes are not supported")
    if j >= m:
        raise SmilesSyntaxError("empty bracket atom")
    aromatic = False
    c = body[j]
    if c == "*":
        element = "*"
        j += 1
    elif c.isupper():
        if j + 1 < m and body[j + 1].islower():
            sym = body[j : j + 2]
            j += 2
            if sym not in ("Cl", "Br"):
                raise UnknownElementError(sym)
        else:
            sym = c
            j += 1
            if sym not in ("C", "N", "O", "S", "F", "H"):
                raise UnknownElementError(sym)
        element = sym
    elif c.islower():
        if j + 1 < m and body[j + 1].islower():
            raise UnknownElementError(body[j : j + 2])
        if c not in _AROMATIC_LOWER:
            raise UnknownElementError(c)
        element = _AROMATIC_LOWER[c]
        aromatic = True
        j += 1
    else:
        raise SmilesSyntaxError(f"bad bracket atom [{body}]")
    if j < m and body[j] == "@":
        raise SmilesSyntaxError("stereochemistry is not supported")
    hcount = 0
    if j < m and body[j] == "H":
        j += 1
        k = j
        while j < m and body[j].isdigit():
            j += 1
        hcount = int(body[k:j]) if j > k else 1
    charge = 0
    if j < m and body[j] in "+-":
        sign = 1 if body[j] == "+" else -1
        j += 1
        k = j
        while j < m and body[j].isdigit():
            j += 1
        if j > k:
            charge = sign * int(body[k:j])
        else:
            charge = sign
            while j < m and body[j] == ("+" if sign > 0 else "-"):
                charge += sign
                j += 1
    atom_class = 0
    if j < m and body[j] == ":":
        j += 1
        k = j
        while j < m and body[j].isdigit():
            j += 1
        if j == k:
            raise SmilesSyntaxError("empty atom class")
        atom_class = int(body[k:j])
    if j != m:
        raise SmilesSyntaxError(f"bad bracket atom [{body}]")
    return Atom(element, aromatic, charge, hcount, index, atom_class), end + 1


# --------------------------------------------------------------------------- writer


def ring_label(d: int) -> str:
    if d < 10:
        return str(d)
    if d < 100:
        return f"%{d}"
    raise ValueError(f"ring label {d} exceeds %99")


def atom_symbol(g: MolGraph, i: int) -> str:
    atom = g.atoms[i]
    el = atom.element
    h = g.hydrogens[i]
    bare_ok = atom.formal_charge == 0 and atom.atom_class == 0
    if bare_ok:
        if el == "*":
            if h == 0:
                return "*"
        elif el in ORGANIC:
            if DEFAULT_VALENCES.implicit_h(el, atom.aromatic, g.bond_sum(i)) == h:
                return el.lower() if atom.aromatic else el
    sym = el.lower() if atom.aromatic else el
    parts = ["[", sym]
    if h:
        parts.append("H" if h == 1 else f"H{h}")
    q = atom.formal_charge
    if q:
        s = "+" if q > 0 else "-"
        parts.append(s if abs(q) == 1 else f"{s}{abs(q)}")
    if atom.atom_class:
        parts.append(f":{atom.atom_class}")
    parts.append("]")
    return "".join(parts)


def bond_symbol(g: MolGraph, a: int, b: int, order: BondOrder) -> str:
    if order is BondOrder.SINGLE:
        return "-" if g.atoms[a].aromatic and g.atoms[b].aromatic else ""
    if order is BondOrder.DOUBLE:
        return "="
    if order is BondOrder.TRIPLE:
        return "#"
    return ""


def serialize(
    g: MolGraph,
    priority: Sequence[int],
    labels: Mapping[int, str] | None = None,
    tidy: bool = False,
) -> tuple[str, set[int]]:
    """Depth-first SMILES emission guided by ``priority`` (lower goes first).

    Atoms listed in ``labels`` must be degree-1 wildcards; they are not
    written, and the bond to each becomes the given ring label on its
    neighbor. With ``tidy`` each component starts at a terminal atom when it
    has one, and at every branch point the largest subtree continues the
    main chain, so parentheses hold the short side groups. Returns the text
    and the set of ring-closure digits used.
    """
    labels = labels or {}
    n = len(g.atoms)
    adjacency = g.adjacency
    bonds = g.bonds
    visited = [False] * n
    children: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    opens: list[list[int]] = [[] for _ in range(n)]
    closes: list[list[int]] = [[] for _ in range(n)]
    seen_bonds: set[int] = set()
    sorted_nbrs = [
        sorted((priority[v], v, bi) for v, bi in adjacency[u] if v not in labels) for u in range(n)
    ]

    def plan(root: int) -> None:
        visited[root] = True
        stack = [(root, iter(sorted_nbrs[root]))]
        while stack:
            u, it = stack[-1]
            for _, v, bi in it:
                if bi in seen_bonds:
                    continue
                seen_bonds.add(bi)
                if visited[v]:
                    opens[v].append(bi)
                    closes[u].append(bi)
                else:
                    visited[v] = True
                    children[u].append((v, bi))
                    stack.append((v, iter(sorted_nbrs[v])))
                    break
            else:
                stack.pop()

    def root_key(u: int) -> tuple[int, int, int]:
        terminal = len(sorted_nbrs[u]) <= 1 if tidy else True
        return (not terminal, priority[u], u)

    roots = []
    for u in sorted((u for u in range(n) if u not in labels), key=root_key):
        if not visited[u]:
            roots.append(u)
            plan(u)

    if tidy:
        size = [1] * n
        for r in roots:
            order = [r]
            for u in order:
                order.extend(v for v, _ in children[u])
            for u in reversed(order):
                size[u] += sum(size[v] for v, _ in children[u])
        for u in range(n):
            children[u].sort(key=lambda c: (size[c[0]], priority[c[0]]))

    digit_of: dict[int, int] = {}
    in_use: set[int] = set()
    used: set[int] = set()
    out: list[str] = []

    def emit(root: int) -> None:
        # explicit stack of (atom, phase) to survive long chains
        stack: list[tuple[int, int] | str] = [(root, 0)]
        while stack:
            item = stack.pop()
            if isinstance(item, str):
                out.append(item)
                continue
            u, _ = item
            out.append(atom_symbol(g, u))
            freed = []
            for bi in closes[u]:
                d = digit_of.pop(bi)
                out.append(ring_label(d))
                freed.append(d)
            for bi in sorted(opens[u], key=lambda b: priority[bonds[b].other(u)]):
                d = 1
                while d in in_use:
                    d += 1
                in_use.add(d)
                used.add(d)
                digit_of[bi] = d
                bond = bonds[bi]
                out.append(bond_symbol(g, u, bond.other(u), bond.order) + ring_label(d))
            for d in freed:
                in_use.discard(d)
            for _, v, bi in sorted((priority[v], v, bi) for v, bi in adjacency[u] if v in labels):
                out.append(bond_symbol(g, u, v, bonds[bi].order) + labels[v])
            kids = children[u]
            # push in reverse so the first child is emitted first
            for k in range(len(kids) - 1, -1, -1):
                v, bi = kids[k]
                sym = bond_symbol(g, u, v, bonds[bi].order)
                if k < len(kids) - 1:
                    stack.append(")")
                    stack.append((v, 1))
                    stack.append("(" + sym)
                else:
                    stack.append((v, 1))
                    stack.append(sym)

    pieces = []
    for r in roots:
        out.clear()
        emit(r)
        pieces.append("".join(out))
    return ".".join(pieces), used


def write_smiles(g: MolGraph, start_order: Sequence[int] | None = None) -> str:
    """Serialize ``g``; ``start_order`` is an atom permutation, first visited first."""
    if start_order is None:
        priority: Sequence[int] = range(len(g.atoms))
    else:
        if sorted(start_order) != list(range(len(g.atoms))):
            raise ValueError("start_order must be a permutation of atom indices")
        pr = [0] * len(g.atoms)
        for pos, atom in enumerate(start_order):
            pr[atom] = pos
        priority = pr
    return serialize(g, priority)[0]


def randomize_smiles(g: MolGraph, seed: int) -> str:
    """Serialize from a seeded random root and neighbor order."""
    perm = list(range(len(g.atoms)))
    random.Random(seed).shuffle(perm)
    return write_smiles(g, perm)
