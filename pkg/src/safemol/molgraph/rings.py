"""Cycle-edge detection and ring sizes."""
from __future__ import annotations

from collections import deque
from typing import TYPE_CHECKING, Sequence

if TYPE_CHECKING:
    from safemol.molgraph.graph import MolGraph


def bridge_flags(
    n: int,
    edges: Sequence[tuple[int, int]],
    adj: Sequence[Sequence[tuple[int, int]]],
) -> list[bool]:
    """Flag every edge that is a bridge (lies on no cycle).

    Iterative low-link DFS, so deep chains don't hit the recursion limit.
    """
    disc = [-1] * n
    low = [0] * n
    is_bridge = [False] * len(edges)
    t = 0
    for root in range(n):
        if disc[root] != -1:
            continue
        disc[root] = low[root] = t
        t += 1
        stack = [(root, -1, iter(adj[root]))]
        while stack:
            u, via, it = stack[-1]
            advanced = False
            for v, bi in it:
                if bi == via:
                    continue
                if disc[v] == -1:
                    disc[v] = low[v] = t
                    t += 1
                    stack.append((v, bi, iter(adj[v])))
                    advanced = True
                    break
                if disc[v] < low[u]:
                    low[u] = disc[v]
            if advanced:
                continue
            stack.pop()
            if stack:
                p = stack[-1][0]
                if low[u] < low[p]:
                    low[p] = low[u]
                if low[u] > disc[p]:
                    is_bridge[via] = True
    return is_bridge


def connected_components(n: int, adj: Sequence[Sequence[tuple[int, int]]]) -> list[int]:
    comp = [-1] * n
    label = 0
    for start in range(n):
        if comp[start] != -1:
            continue
        comp[start] = label
        stack = [start]
        while stack:
            u = stack.pop()
            for v, _ in adj[u]:
                if comp[v] == -1:
                    comp[v] = label
                    stack.append(v)
        label += 1
    return comp


def ring_membership(g: "MolGraph") -> tuple[tuple[bool, ...], tuple[bool, ...]]:
    """Return ``(bond_in_ring, atom_in_ring)`` flags."""
    return tuple(b.in_ring for b in g.bonds), g.ring_atoms


def smallest_ring_per_bond(g: "MolGraph") -> dict[int, int]:
    """Size of the smallest cycle through each ring bond.

    The cycle through bond (u, v) is the shortest u-v path that avoids the
    bond itself, plus one.
    """
    out: dict[int, int] = {}
    for bond in g.bonds:
        if not bond.in_ring:
            continue
        src, dst = bond.begin, bond.end
        dist = {src: 0}
        q = deque([src])
        found = None
        while q and found is None:
            u = q.popleft()
            for v, bi in g.adjacency[u]:
                if bi == bond.index or v in dist or not g.bonds[bi].in_ring:
                    continue
                dist[v] = dist[u] + 1
                if v == dst:
                    found = dist[v] + 1
                    break
                q.append(v)
        out[bond.index] = found if found is not None else 0
    return out


def largest_ring_size(g: "MolGraph") -> int:
    sizes = smallest_ring_per_bond(g)
    return max(sizes.values(), default=0)
