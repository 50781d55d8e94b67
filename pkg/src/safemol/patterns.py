"""A small SMARTS subset and a backtracking subgraph matcher.

Supported atom primitives: element symbols (``C``, ``c``, ``Cl``...), ``#n``,
``*``, ``a``, ``A``, ``R``/``R0``, ``D<n>`` (heavy-atom degree), ``H<n>``
(total hydrogens), charges, ``!`` negation and ``;``/``&`` conjunction.
Bond primitives: ``- = # : ~ @`` and ``!@``. An unwritten bond means single
or aromatic. OR-lists and recursive ``$(...)`` are rejected.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

from safemol.molgraph.graph import ATOMIC_NUMBER, BondOrder, MolGraph

__all__ = [
    "PatternSyntaxError",
    "UnsupportedPrimitive",
    "AtomPattern",
    "BondPattern",
    "QueryGraph",
    "parse_pattern",
    "match_all",
    "iter_matches",
    "has_substructure",
    "query_from_mol",
    "isomorphic",
    "atom_matches",
    "atom_matches_view",
    "bond_matches",
]

_NUM_TO_ELEMENT = {v: k for k, v in ATOMIC_NUMBER.items() if k != "*"}


class PatternSyntaxError(ValueError):
    pass


class UnsupportedPrimitive(ValueError):
    pass


@dataclass(frozen=True)
class AtomPattern:
    element: str | None = None
    aromatic: bool | None = None
    ring: bool | None = None
    degree: int | None = None
    charge: int | None = None
    hydrogens: int | None = None
    wildcard: bool = False
    # (primitive, value) pairs that must not hold, e.g. ("element", "H")
    negations: frozenset = frozenset()
    # attachment atoms may share a target with other attachment atoms
    attachment: bool = False

    def __post_init__(self) -> None:
        if self.wildcard and any(
            v is not None
            for v in (self.element, self.aromatic, self.ring, self.degree, self.charge, self.hydrogens)
        ):
            raise PatternSyntaxError("wildcard atom cannot carry other constraints")


@dataclass(frozen=True)
class BondPattern:
    order: BondOrder | None = None
    ring: bool | None = None
    # unwritten bond: single or aromatic
    implicit: bool = False


@dataclass(frozen=True)
class QueryGraph:
    atoms: tuple[AtomPattern, ...]
    bonds: tuple[tuple[int, int, BondPattern], ...]
    adjacency: tuple[tuple[tuple[int, int], ...], ...] = field(repr=False, default=())

    @classmethod
    def build(cls, atoms: Sequence[AtomPattern], bonds: Sequence[tuple[int, int, BondPattern]]) -> "QueryGraph":
        if not atoms:
            raise PatternSyntaxError("empty query")
        adj: list[list[tuple[int, int]]] = [[] for _ in atoms]
        for bi, (a, b, _) in enumerate(bonds):
            adj[a].append((b, bi))
            adj[b].append((a, bi))
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for v, _ in adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        if len(seen) != len(atoms):
            raise PatternSyntaxError("query must be connected")
        return cls(tuple(atoms), tuple(bonds), tuple(tuple(x) for x in adj))

    def __len__(self) -> int:
        return len(self.atoms)


# --------------------------------------------------------------------------- parsing

_BARE_ALIPHATIC = {"C", "N", "O", "S", "F"}
_BARE_AROMATIC = {"c": "C", "n": "N", "o": "O", "s": "S"}
_BOND_CHARS = set("-=#:~@!;&,")
_ORDER_CHARS = {"-": BondOrder.SINGLE, "=": BondOrder.DOUBLE, "#": BondOrder.TRIPLE, ":": BondOrder.AROMATIC}


def _read_int(s: str, j: int) -> tuple[int | None, int]:
    k = j
    while k < len(s) and s[k].isdigit():
        k += 1
    return (int(s[j:k]) if k > j else None), k


def _parse_atom_expr(body: str) -> AtomPattern:
    if "," in body:
        raise UnsupportedPrimitive("OR-lists are not supported")
    if "$(" in body:
        raise UnsupportedPrimitive("recursive SMARTS is not supported")
    props: dict = {}
    negs: set = set()
    wildcard = False

    def put(name: str, value, negated: bool) -> None:
        if negated:
            negs.add((name, value))
        elif name in props and props[name] != value:
            raise PatternSyntaxError(f"contradictory {name} constraints in [{body}]")
        else:
            props[name] = value

    for term in body.replace("&", ";").split(";"):
        if not term:
            raise PatternSyntaxError(f"empty primitive in [{body}]")
        j = 0
        while j < len(term):
            negated = False
            while j < len(term) and term[j] == "!":
                negated = not negated
                j += 1
            if j >= len(term):
                raise PatternSyntaxError(f"dangling '!' in [{body}]")
            c = term[j]
            if c == "*":
                if negated:
                    raise UnsupportedPrimitive("negated wildcard")
                wildcard = True
                j += 1
            elif c == "#":
                num, j = _read_int(term, j + 1)
                if num is None or num not in _NUM_TO_ELEMENT:
                    raise UnsupportedPrimitive(f"atomic number in [{body}]")
                put("element", _NUM_TO_ELEMENT[num], negated)
            elif c == "a":
                put("aromatic", not negated, False)
                j += 1
            elif c == "A":
                put("aromatic", negated, False)
                j += 1
            elif c == "R":
                num, j = _read_int(term, j + 1)
                if num not in (None, 0):
                    raise UnsupportedPrimitive("ring-count values other than R/R0")
                in_ring = num is None
                put("ring", in_ring != negated, False)
            elif c == "D":
                num, j = _read_int(term, j + 1)
                put("degree", 1 if num is None else num, negated)
            elif c == "H":
                num, j = _read_int(term, j + 1)
                put("hydrogens", 1 if num is None else num, negated)
            elif c in "+-":
                sign = 1 if c == "+" else -1
                num, j = _read_int(term, j + 1)
                if num is None:
                    num = 1
                    while j < len(term) and term[j] == c:
                        num += 1
                        j += 1
                put("charge", sign * num, negated)
            elif c in ("C", "B") and term[j : j + 2] in ("Cl", "Br"):
                put("element", term[j : j + 2], negated)
                if not negated:
                    put("aromatic", False, False)
                j += 2
            elif c in "CNOSF":
                put("element", c, negated)
                if not negated:
                    put("aromatic", False, False)
                j += 1
            elif c in _BARE_AROMATIC:
                put("element", _BARE_AROMATIC[c], negated)
                if not negated:
                    put("aromatic", True, False)
                j += 1
            else:
                raise UnsupportedPrimitive(f"primitive {term[j:]!r} in [{body}]")
    if wildcard and (props or negs):
        # "[*;R]" style: the wildcard adds nothing, keep the other constraints
        wildcard = False
    return AtomPattern(
        element=props.get("element"),
        aromatic=props.get("aromatic"),
        ring=props.get("ring"),
        degree=props.get("degree"),
        charge=props.get("charge"),
        hydrogens=props.get("hydrogens"),
        wildcard=wildcard,
        negations=frozenset(negs),
    )


def _parse_bond_expr(expr: str) -> BondPattern:
    if "," in expr:
        raise UnsupportedPrimitive("OR-lists are not supported")
    order: BondOrder | None = None
    ring: bool | None = None
    any_order = False
    for term in expr.replace("&", ";").split(";"):
        if not term:
            raise PatternSyntaxError(f"empty bond primitive in {expr!r}")
        j = 0
        while j < len(term):
            c = term[j]
            if c == "!":
                if term[j + 1 : j + 2] != "@":
                    raise UnsupportedPrimitive("only '!@' may be negated on bonds")
                if ring is True:
                    raise PatternSyntaxError("contradictory ring constraints")
                ring = False
                j += 2
            elif c == "@":
                if ring is False:
                    raise PatternSyntaxError("contradictory ring constraints")
                ring = True
                j += 1
            elif c == "~":
                any_order = True
                j += 1
            elif c in _ORDER_CHARS:
                if order is not None and order is not _ORDER_CHARS[c]:
                    raise PatternSyntaxError("at most one bond order per bond")
                order = _ORDER_CHARS[c]
                j += 1
            else:
                raise PatternSyntaxError(f"bad bond primitive {c!r}")
    implicit = order is None and not any_order
    return BondPattern(order=order, ring=ring, implicit=implicit)


_IMPLICIT_BOND = BondPattern(implicit=True)


def parse_pattern(text: str) -> QueryGraph:
    """Parse a pattern string of the supported subset into a :class:`QueryGraph`.

    Raises:
        PatternSyntaxError: Malformed text, disconnected query or ``.``.
        UnsupportedPrimitive: Valid SMARTS outside the subset.
    """
    if not text:
        raise PatternSyntaxError("empty pattern")
    atoms: list[AtomPattern] = []
    bonds: list[tuple[int, int, BondPattern]] = []
    ring_open: dict[int, tuple[int, BondPattern | None]] = {}
    branch: list[int] = []
    prev = -1
    pending: BondPattern | None = None
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        atom: AtomPattern | None = None
        if c == "[":
            end = text.find("]", i)
            if end < 0:
                raise PatternSyntaxError("unterminated bracket")
            atom = _parse_atom_expr(text[i + 1 : end])
            i = end + 1
        elif c == "*":
            atom = AtomPattern(wildcard=True)
            i += 1
        elif text.startswith(("Cl", "Br"), i):
            atom = AtomPattern(element=text[i : i + 2], aromatic=False)
            i += 2
        elif c in _BARE_ALIPHATIC:
            atom = AtomPattern(element=c, aromatic=False)
            i += 1
        elif c in _BARE_AROMATIC:
            atom = AtomPattern(element=_BARE_AROMATIC[c], aromatic=True)
            i += 1
        elif c == "a":
            atom = AtomPattern(aromatic=True)
            i += 1
        elif c == "A":
            atom = AtomPattern(aromatic=False)
            i += 1
        elif c in _BOND_CHARS:
            if pending is not None or prev < 0:
                raise PatternSyntaxError(f"misplaced bond at {i}")
            j = i
            while j < n and text[j] in _BOND_CHARS:
                j += 1
            pending = _parse_bond_expr(text[i:j])
            i = j
            continue
        elif c == "(":
            if prev < 0 or pending is not None:
                raise PatternSyntaxError(f"misplaced '(' at {i}")
            branch.append(prev)
            i += 1
            continue
        elif c == ")":
            if not branch or pending is not None:
                raise PatternSyntaxError(f"misplaced ')' at {i}")
            prev = branch.pop()
            i += 1
            continue
        elif c.isdigit() or c == "%":
            if c == "%":
                label, j = _read_int(text, i + 1)
                if label is None or j - i != 3:
                    raise PatternSyntaxError("bad %nn label")
                i = j
            else:
                label = int(c)
                i += 1
            if prev < 0:
                raise PatternSyntaxError("ring label without an atom")
            if label in ring_open:
                other, bp = ring_open.pop(label)
                bonds.append((other, prev, pending or bp or _IMPLICIT_BOND))
            else:
                ring_open[label] = (prev, pending)
            pending = None
            continue
        elif c == ".":
            raise PatternSyntaxError("multi-component patterns are not supported")
        elif c == "$":
            raise UnsupportedPrimitive("recursive SMARTS is not supported")
        else:
            raise UnsupportedPrimitive(f"unsupported character {c!r}")
        atoms.append(atom)
        idx = len(atoms) - 1
        if prev >= 0:
            bonds.append((prev, idx, pending or _IMPLICIT_BOND))
        elif pending is not None:
            raise PatternSyntaxError("bond without a preceding atom")
        pending = None
        prev = idx
    if pending is not None:
        raise PatternSyntaxError("dangling bond")
    if branch:
        raise PatternSyntaxError("unmatched '('")
    if ring_open:
        raise PatternSyntaxError("unclosed ring label")
    return QueryGraph.build(atoms, bonds)


# --------------------------------------------------------------------------- matching


class _Target:
    """Per-graph atom properties, computed once per match call."""

    __slots__ = ("g", "element", "aromatic", "ring", "degree", "charge", "hydrogens")

    def __init__(self, g: MolGraph) -> None:
        self.g = g
        atoms = g.atoms
        self.element = [a.element for a in atoms]
        self.aromatic = [a.aromatic for a in atoms]
        self.ring = g.ring_atoms
        self.degree = [sum(1 for j, _ in g.adjacency[i] if atoms[j].element != "H") for i in range(len(atoms))]
        self.charge = [a.formal_charge for a in atoms]
        self.hydrogens = g.hydrogens


def _atom_ok(p: AtomPattern, t: _Target, i: int) -> bool:
    if p.wildcard:
        return not (p.attachment and t.element[i] == "H")
    if p.element is not None and t.element[i] != p.element:
        return False
    if p.aromatic is not None and t.aromatic[i] != p.aromatic:
        return False
    if p.ring is not None and t.ring[i] != p.ring:
        return False
    if p.degree is not None and t.degree[i] != p.degree:
        return False
    if p.charge is not None and t.charge[i] != p.charge:
        return False
    if p.hydrogens is not None and t.hydrogens[i] != p.hydrogens:
        return False
    for name, value in p.negations:
        if getattr(t, name)[i] == value:
            return False
    return True


def atom_matches(p: AtomPattern, g: MolGraph, i: int) -> bool:
    return _atom_ok(p, _Target(g), i)


def atom_matches_view(p: AtomPattern, view, i: int) -> bool:
    """Like :func:`atom_matches` but reads precomputed per-atom lists.

    ``view`` needs ``el``, ``ar``, ``ring``, ``deg``, ``q`` and ``g``
    attributes (see the fragmenter's ``AtomView``).
    """
    if p.wildcard:
        return not (p.attachment and view.el[i] == "H")
    if p.element is not None and view.el[i] != p.element:
        return False
    if p.aromatic is not None and view.ar[i] != p.aromatic:
        return False
    if p.ring is not None and view.ring[i] != p.ring:
        return False
    if p.degree is not None and view.deg[i] != p.degree:
        return False
    if p.charge is not None and view.q[i] != p.charge:
        return False
    if p.hydrogens is not None and view.g.hydrogens[i] != p.hydrogens:
        return False
    for name, value in p.negations:
        if _VIEW_FIELDS[name](view, i) == value:
            return False
    return True


_VIEW_FIELDS = {
    "element": lambda v, i: v.el[i],
    "aromatic": lambda v, i: v.ar[i],
    "ring": lambda v, i: v.ring[i],
    "degree": lambda v, i: v.deg[i],
    "charge": lambda v, i: v.q[i],
    "hydrogens": lambda v, i: v.g.hydrogens[i],
}


def bond_matches(p: BondPattern, order: BondOrder, in_ring: bool) -> bool:
    if p.ring is not None and p.ring != in_ring:
        return False
    if p.order is not None:
        return order is p.order
    if p.implicit:
        return order is BondOrder.SINGLE or order is BondOrder.AROMATIC
    return True


def _plan(q: QueryGraph, cand_counts: list[int]) -> list[tuple[int, list[tuple[int, int]]]]:
    """Visit order: rarest atom first, then grow along query bonds.

    Each step lists the already-placed query neighbors (and bond indices)
    whose bonds must be checked.
    """
    n = len(q.atoms)
    placed = [False] * n
    start = min(range(n), key=lambda a: (cand_counts[a], a))
    order = [start]
    placed[start] = True
    while len(order) < n:
        frontier = [
            a for a in range(n) if not placed[a] and any(placed[b] for b, _ in q.adjacency[a])
        ]
        nxt = min(frontier, key=lambda a: (cand_counts[a], a))
        order.append(nxt)
        placed[nxt] = True
    pos = {a: k for k, a in enumerate(order)}
    return [
        (a, [(b, bi) for b, bi in q.adjacency[a] if pos[b] < pos[a]])
        for a in order
    ]


def iter_matches(q: QueryGraph, g: MolGraph) -> Iterator[tuple[int, ...]]:
    """Yield mappings (query atom -> target atom) in a deterministic order."""
    t = _Target(g)
    n_t = len(g.atoms)
    cands = [[i for i in range(n_t) if _atom_ok(p, t, i)] for p in q.atoms]
    if any(not c for c in cands):
        return
    plan = _plan(q, [len(c) for c in cands])
    cand_sets = [set(c) for c in cands]
    qbonds = q.bonds
    gbonds = g.bonds
    adjacency = g.adjacency
    attach = [p.attachment for p in q.atoms]
    n_q = len(q.atoms)
    mapping = [-1] * n_q
    used: dict[int, int] = {}  # target -> number of query atoms on it

    def can_use(qa: int, ti: int) -> bool:
        c = used.get(ti, 0)
        if c == 0:
            return True
        # only attachment atoms may pile onto one target, and only with each other
        if not attach[qa]:
            return False
        return all(attach[k] for k in range(n_q) if mapping[k] == ti)

    def candidates(step: int) -> list[int]:
        qa, back = plan[step]
        if not back:
            return cands[qa]
        anchor_q, _ = back[0]
        anchor_t = mapping[anchor_q]
        return sorted(v for v, _ in adjacency[anchor_t] if v in cand_sets[qa])

    def bonds_ok(step: int, ti: int) -> bool:
        qa, back = plan[step]
        for qb, bi in back:
            tb = mapping[qb]
            if tb == ti:
                return False
            bond = g.bond_between(ti, tb)
            if bond is None:
                return False
            if not bond_matches(qbonds[bi][2], gbonds[bond.index].order, bond.in_ring):
                return False
        return True

    # iterative backtracking over plan steps
    iters: list[Iterator[int]] = [iter(candidates(0))]
    step = 0
    while step >= 0:
        qa = plan[step][0]
        if mapping[qa] >= 0:
            prev_t = mapping[qa]
            mapping[qa] = -1
            used[prev_t] -= 1
        advanced = False
        for ti in iters[step]:
            if can_use(qa, ti) and bonds_ok(step, ti):
                mapping[qa] = ti
                used[ti] = used.get(ti, 0) + 1
                advanced = True
                break
        if not advanced:
            iters.pop()
            step -= 1
            continue
        if step == n_q - 1:
            yield tuple(mapping)
            continue
        step += 1
        iters.append(iter(candidates(step)))


def match_all(q: QueryGraph, g: MolGraph) -> list[tuple[int, ...]]:
    """All distinct mappings, as tuples indexed by query atom."""
    return list(iter_matches(q, g))


def has_substructure(q: QueryGraph, g: MolGraph) -> bool:
    return next(iter_matches(q, g), None) is not None


# --------------------------------------------------------------------------- molecule queries


def query_from_mol(g: MolGraph, exact: bool = False) -> QueryGraph:
    """Turn a molecule (typically a scaffold with ``*`` atoms) into a query.

    Non-wildcard atoms keep element, aromaticity and charge; bonds keep their
    order, except bonds to a wildcard, which match any order. Wildcards become
    attachment atoms that match any heavy atom. With ``exact`` every atom also
    pins its hydrogen count and heavy degree, and wildcards match literally.
    """
    if g.component_count != 1:
        raise PatternSyntaxError("query molecule must be connected")
    atoms = []
    for i, a in enumerate(g.atoms):
        if a.element == "*" and not exact:
            atoms.append(AtomPattern(wildcard=True, attachment=True))
            continue
        atoms.append(
            AtomPattern(
                element=a.element,
                aromatic=a.aromatic,
                charge=a.formal_charge,
                hydrogens=g.hydrogens[i] if exact else None,
                degree=g.heavy_degree(i) if exact else None,
            )
        )
    bonds = []
    for b in g.bonds:
        to_wild = g.atoms[b.begin].element == "*" or g.atoms[b.end].element == "*"
        bp = BondPattern() if (to_wild and not exact) else BondPattern(order=b.order)
        bonds.append((b.begin, b.end, bp))
    return QueryGraph.build(atoms, bonds)


def isomorphic(a: MolGraph, b: MolGraph) -> bool:
    """Graph isomorphism via an exact query; independent of canonical ranking."""
    if len(a.atoms) != len(b.atoms) or len(a.bonds) != len(b.bonds):
        return False
    if sorted(a.hydrogens) != sorted(b.hydrogens):
        return False
    if a.component_count != b.component_count:
        return False
    if a.component_count == 1:
        return has_substructure(query_from_mol(a, exact=True), b)
    return _components_isomorphic(a, b)


def _split(g: MolGraph) -> list[MolGraph]:
    groups: dict[int, list[int]] = {}
    for i, c in enumerate(g.component_ids):
        groups.setdefault(c, []).append(i)
    out = []
    for members in groups.values():
        local = {old: k for k, old in enumerate(members)}
        atoms = [g.atoms[i] for i in members]
        bonds = [
            (local[bd.begin], local[bd.end], bd.order)
            for bd in g.bonds
            if bd.begin in local
        ]
        out.append(MolGraph.build(atoms, bonds))
    return out


def _components_isomorphic(a: MolGraph, b: MolGraph) -> bool:
    rest = _split(b)
    for ca in _split(a):
        for k, cb in enumerate(rest):
            if isomorphic(ca, cb):
                del rest[k]
                break
        else:
            return False
    return not rest
