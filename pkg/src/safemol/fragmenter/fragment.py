"""Cutting bonds into attachment-labeled fragments, and putting them back."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from safemol.fragmenter.rules import DisconnectionRule, FragmentationScheme, eligible_bonds
from safemol.molgraph.graph import Atom, BondOrder, MolGraph, SmilesError
from safemol.molgraph.smiles import parse_smiles

MAX_ATTACHMENTS = 99


class FragmentationFailure(ValueError):
    """The molecule cannot be fragmented; callers discard it."""


@dataclass(frozen=True)
class FragmentSet:
    """Fragments of one molecule.

    Attributes:
        fragments: One graph per fragment, wildcards in place of cut stubs.
        origins: Per fragment, the source atom index of each local atom
            (``-1`` for attachment wildcards).
        attachments: Per fragment, ``(local_wildcard_index, pair_id)`` tuples.
        pairs: ``pair_id -> ((frag, local), (frag, local))`` for each cut.
        cut_bonds: Source bond indices, ``pair_id - 1`` indexes into it.
    """

    fragments: tuple[MolGraph, ...]
    origins: tuple[tuple[int, ...], ...]
    attachments: tuple[tuple[tuple[int, int], ...], ...]
    pairs: dict[int, tuple[tuple[int, int], tuple[int, int]]] = field(repr=False)
    cut_bonds: tuple[int, ...] = ()

    def __len__(self) -> int:
        return len(self.fragments)


def fragment(g: MolGraph, cuts: Sequence[int]) -> FragmentSet:
    """Remove each cut bond and cap both stubs with paired ``*`` atoms.

    Fragments are ordered by their smallest source atom index.

    Raises:
        FragmentationFailure: Disconnected input, a cut that is not an acyclic
            single bond, too many attachments, or a fragment that fails
            validation.
    """
    if g.component_count != 1:
        raise FragmentationFailure("input molecule is disconnected")
    cuts = sorted(set(cuts))
    if len(cuts) > MAX_ATTACHMENTS:
        raise FragmentationFailure(f"{len(cuts)} cuts exceed the {MAX_ATTACHMENTS} attachment labels")
    cut_set = set(cuts)
    for bi in cuts:
        b = g.bonds[bi]
        if b.in_ring or b.order is not BondOrder.SINGLE:
            raise FragmentationFailure(f"bond {bi} is not an acyclic single bond")

    n = len(g.atoms)
    # wildcards hang off their atom; pair id k pairs the two stubs of cuts[k-1]
    stubs: list[list[int]] = [[] for _ in range(n)]
    for k, bi in enumerate(cuts, 1):
        b = g.bonds[bi]
        stubs[b.begin].append(k)
        stubs[b.end].append(k)

    # components after removing cut bonds
    comp = [-1] * n
    order: list[int] = []
    for start in range(n):
        if comp[start] != -1:
            continue
        label = len(order)
        order.append(start)
        comp[start] = label
        stack = [start]
        while stack:
            u = stack.pop()
            for v, bi in g.adjacency[u]:
                if bi not in cut_set and comp[v] == -1:
                    comp[v] = label
                    stack.append(v)

    frags, origins, attachments = [], [], []
    pair_sites: dict[int, list[tuple[int, int]]] = {}
    for f in range(len(order)):
        members = [i for i in range(n) if comp[i] == f]
        local: dict[int, int] = {}
        atoms: list[Atom] = []
        origin: list[int] = []
        attach: list[tuple[int, int]] = []
        bonds: list[tuple[int, int, BondOrder]] = []
        for i in members:
            local[i] = len(atoms)
            atoms.append(g.atoms[i])
            origin.append(i)
            for k in stubs[i]:
                w = len(atoms)
                atoms.append(Atom("*"))
                origin.append(-1)
                attach.append((w, k))
                bonds.append((local[i], w, BondOrder.SINGLE))
                pair_sites.setdefault(k, []).append((f, w))
        for b in g.bonds:
            if b.index not in cut_set and b.begin in local:
                bonds.append((local[b.begin], local[b.end], b.order))
        try:
            frags.append(MolGraph.build(atoms, bonds))
        except SmilesError as exc:
            raise FragmentationFailure(f"fragment {f} is invalid: {exc}") from exc
        origins.append(tuple(origin))
        attachments.append(tuple(attach))
    pairs = {k: (v[0], v[1]) for k, v in pair_sites.items()}
    return FragmentSet(tuple(frags), tuple(origins), tuple(attachments), pairs, tuple(cuts))


def fragment_molecule(
    g: MolGraph,
    scheme: FragmentationScheme | str,
    rules: Sequence[DisconnectionRule] | None = None,
) -> FragmentSet:
    return fragment(g, eligible_bonds(g, scheme, rules))


def join_attachments(
    fragments: Sequence[MolGraph],
    pairs: Iterable[tuple[tuple[int, int], tuple[int, int]]],
) -> MolGraph:
    """Glue fragments by replacing each wildcard pair with one bond.

    Each pair names ``(fragment, wildcard_index)`` twice; the two wildcards
    are dropped and their neighbors bonded with the stub bond order (single
    unless the stubs disagree, in which case the higher order wins).
    """
    offset = []
    total = 0
    for frag in fragments:
        offset.append(total)
        total += len(frag.atoms)
    drop: set[int] = set()
    extra: list[tuple[int, int, BondOrder]] = []
    for (fa, wa), (fb, wb) in pairs:
        ga, gb = fragments[fa], fragments[fb]
        if ga.degree(wa) != 1 or gb.degree(wb) != 1:
            raise FragmentationFailure("attachment wildcard must have exactly one neighbor")
        (na, ba), = ga.adjacency[wa]
        (nb, bb), = gb.adjacency[wb]
        order = max(ga.bonds[ba].order, gb.bonds[bb].order)
        drop.update((offset[fa] + wa, offset[fb] + wb))
        extra.append((offset[fa] + na, offset[fb] + nb, BondOrder(order)))
    keep = [i for i in range(total) if i not in drop]
    remap = {old: new for new, old in enumerate(keep)}
    atoms: list[Atom] = []
    bonds: list[tuple[int, int, BondOrder]] = []
    for f, frag in enumerate(fragments):
        base = offset[f]
        for a in frag.atoms:
            if base + a.index in remap:
                atoms.append(a)
        for b in frag.bonds:
            u, v = base + b.begin, base + b.end
            if u in remap and v in remap:
                bonds.append((remap[u], remap[v], b.order))
    for u, v, o in extra:
        bonds.append((remap[u], remap[v], o))
    return MolGraph.build(atoms, bonds)


def reassemble(fs: FragmentSet) -> MolGraph:
    """Inverse of :func:`fragment` (up to atom order)."""
    return join_attachments(fs.fragments, [fs.pairs[k] for k in sorted(fs.pairs)])


@dataclass(frozen=True)
class FragmentStats:
    scheme: FragmentationScheme
    histogram: dict[int, int]
    n_molecules: int
    n_failed: int

    @property
    def mean(self) -> float:
        n = sum(self.histogram.values())
        return sum(k * c for k, c in self.histogram.items()) / n if n else 0.0


def fragment_count_stats(
    corpus: Iterable[MolGraph | str],
    scheme: FragmentationScheme | str,
    rules: Sequence[DisconnectionRule] | None = None,
) -> FragmentStats:
    """Histogram of fragments per molecule; failures (including parse errors) are counted apart."""
    scheme = FragmentationScheme.parse(scheme)
    hist: Counter[int] = Counter()
    failed = 0
    total = 0
    for item in corpus:
        total += 1
        try:
            g = parse_smiles(item) if isinstance(item, str) else item
            if g.component_count != 1:
                raise FragmentationFailure("disconnected")
            hist[len(eligible_bonds(g, scheme, rules)) + 1] += 1
        except (SmilesError, FragmentationFailure):
            failed += 1
    if total == 0:
        raise ValueError("corpus is empty")
    return FragmentStats(scheme, dict(sorted(hist.items())), total, failed)
