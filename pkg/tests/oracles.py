"""Independent brute-force references used by unit and acceptance tests."""
from __future__ import annotations

import itertools
import random

from safemol.molgraph import MolGraph, SmilesError, parse_smiles
from safemol.patterns import QueryGraph, atom_matches, bond_matches, isomorphic

# ---------------------------------------------------------------- matching


def brute_force_matches(q: QueryGraph, g: MolGraph) -> set[tuple[int, ...]]:
    """Every injective map query -> target satisfying all atom and bond patterns."""
    cands = [[i for i in range(len(g.atoms)) if atom_matches(p, g, i)] for p in q.atoms]
    out = set()
    for combo in itertools.product(*cands):
        if len(set(combo)) != len(combo):
            continue
        ok = True
        for a, b, bp in q.bonds:
            bond = g.bond_between(combo[a], combo[b])
            if bond is None or not bond_matches(bp, bond.order, bond.in_ring):
                ok = False
                break
        if ok:
            out.add(combo)
    return out


_ATOMS = ["C", "C", "C", "N", "O", "S", "F", "Cl"]
_RINGS = ["c1ccccc1", "C1CC1", "C1CCNC1", "c1ccoc1", "C1CCCCC1", "c1ccncc1", "C1=CCC1", "c1cc[nH]c1"]


def small_graph_family(n: int, seed: int = 0, max_atoms: int = 8) -> list[MolGraph]:
    """Random valid molecules of at most ``max_atoms`` heavy atoms (trees, rings, substituted rings)."""
    rng = random.Random(seed)
    out: list[MolGraph] = []
    while len(out) < n:
        kind = rng.random()
        if kind < 0.3:
            text = rng.choice(_RINGS)
            for _ in range(rng.randint(0, 2)):
                text = text + rng.choice(["C", "O", "N", "(C)", "(=O)", "F"])
        else:
            size = rng.randint(1, max_atoms)
            text = rng.choice(_ATOMS)
            depth = 0
            for _ in range(size - 1):
                r = rng.random()
                if r < 0.2 and depth < 2:
                    text += "("
                    depth += 1
                bond = rng.choice(["", "", "", "=", "#"])
                text += bond + rng.choice(_ATOMS)
                if depth and rng.random() < 0.4:
                    text += ")"
                    depth -= 1
            text += ")" * depth
            if rng.random() < 0.2 and size >= 4:
                # close a ring between the first and last atom
                first = 1 if text[0:2] != "Cl" else 2
                text = text[:first] + "1" + text[first:] + "1"
        try:
            g = parse_smiles(text)
        except SmilesError:
            continue
        if len(g.atoms) <= max_atoms and g.component_count == 1:
            out.append(g)
    return out


QUERY_FAMILY = [
    "C",
    "[*]",
    "CC",
    "C=O",
    "C!@C",
    "C@C",
    "[R]",
    "[!R]",
    "[D2]",
    "[D1]",
    "a",
    "A",
    "[#6]",
    "[!#6]",
    "[C;D3]",
    "*~*",
    "*-*-*",
    "C(C)C",
    "c1ccccc1",
    "C1CC1",
    "N",
    "[!#1]-;!@[!#1]",
    "[+0]",
    "O=C-N",
    "C#N",
    "c:c",
]

# ---------------------------------------------------------------- metrics


def components(g: MolGraph) -> int:
    seen = [False] * len(g.atoms)
    count = 0
    for s in range(len(g.atoms)):
        if seen[s]:
            continue
        count += 1
        stack = [s]
        seen[s] = True
        while stack:
            u = stack.pop()
            for b in g.bonds:
                for x, y in ((b.begin, b.end), (b.end, b.begin)):
                    if x == u and not seen[y]:
                        seen[y] = True
                        stack.append(y)
    return count


def distinct_by_isomorphism(graphs: list[MolGraph]) -> list[MolGraph]:
    reps: list[MolGraph] = []
    for g in graphs:
        if not any(isomorphic(g, r) for r in reps):
            reps.append(g)
    return reps


def oracle_validity(samples: list[str]) -> tuple[float, list[MolGraph]]:
    graphs = []
    for s in samples:
        try:
            graphs.append(parse_smiles(s))
        except SmilesError:
            pass
    return (len(graphs) / len(samples) if samples else 0.0), graphs


def oracle_uniqueness(graphs: list[MolGraph]) -> float:
    return len(distinct_by_isomorphism(graphs)) / len(graphs) if graphs else 0.0


def oracle_novelty(graphs: list[MolGraph], training: list[MolGraph]) -> float:
    reps = distinct_by_isomorphism(graphs)
    if not reps:
        return 0.0
    novel = [r for r in reps if not any(isomorphic(r, t) for t in training)]
    return len(novel) / len(reps)


def oracle_int_div(bitsets: list[set[int]]) -> float:
    n = len(bitsets)
    if n < 2:
        return 0.0
    total = 0.0
    pairs = 0
    for i in range(n):
        for j in range(i + 1, n):
            a, b = bitsets[i], bitsets[j]
            union = len(a | b)
            total += 1.0 if union == 0 else len(a & b) / union
            pairs += 1
    return 1.0 - total / pairs


def oracle_fragmented(graphs: list[MolGraph]) -> float:
    return sum(1 for g in graphs if components(g) > 1) / len(graphs) if graphs else 0.0


def naive_has_match(q: QueryGraph, g: MolGraph) -> bool:
    """Plain backtracking in query-index order, with no search planning.

    Attachment atoms (from ``query_from_mol``) may share a target with
    other attachment atoms, as in the matcher's scaffold semantics.
    """
    n = len(q.atoms)
    cands = [[i for i in range(len(g.atoms)) if atom_matches(p, g, i)] for p in q.atoms]
    assign: list[int] = []

    def ok(k: int, t: int) -> bool:
        for j, prev in enumerate(assign):
            if prev == t and not (q.atoms[k].attachment and q.atoms[j].attachment):
                return False
        for a, b, bp in q.bonds:
            if max(a, b) != k:
                continue
            bond = g.bond_between(assign[min(a, b)], t)
            if bond is None or not bond_matches(bp, bond.order, bond.in_ring):
                return False
        return True

    def rec(k: int) -> bool:
        if k == n:
            return True
        for t in cands[k]:
            if ok(k, t):
                assign.append(t)
                if rec(k + 1):
                    return True
                assign.pop()
        return False

    return rec(0)


def oracle_match(graphs: list[MolGraph], queries: list[QueryGraph]) -> float:
    if not graphs:
        return 0.0
    hits = sum(1 for g in graphs if all(naive_has_match(q, g) for q in queries))
    return hits / len(graphs)
