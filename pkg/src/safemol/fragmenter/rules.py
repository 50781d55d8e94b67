"""Fragmentation schemes, rule tables and bond eligibility."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from safemol.fragmenter.environments import ENVIRONMENTS, AtomView, Predicate
from safemol.molgraph.graph import BondOrder, MolGraph
from safemol.patterns import PatternSyntaxError, QueryGraph, atom_matches_view, bond_matches, parse_pattern


class FragmentationScheme(str, Enum):
    HR = "HR"
    BRICS = "BRICS"
    RECAP = "RECAP"
    MMPA = "MMPA"
    ROTATABLE = "ROTATABLE"

    @classmethod
    def parse(cls, value: "str | FragmentationScheme") -> "FragmentationScheme":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise ValueError(f"unknown scheme {value!r}; expected one of {[s.value for s in cls]}") from None


class RuleTableError(ValueError):
    pass


@dataclass(frozen=True)
class DisconnectionRule:
    scheme: FragmentationScheme
    rule_id: str
    pattern: str
    bond_query: QueryGraph
    env_a: tuple[str, ...] = ()
    env_b: tuple[str, ...] = ()

    @property
    def description(self) -> str:
        return self.rule_id.split("/", 1)[0]


def _env_names(spec: str, where: str) -> tuple[str, ...]:
    if spec in ("", "*"):
        return ()
    names = tuple(spec.split("+"))
    for name in names:
        if name not in ENVIRONMENTS:
            raise RuleTableError(f"{where}: unknown environment {name!r}")
    return names


def parse_rule_table(lines: Iterable[str], source: str = "<rules>") -> list[DisconnectionRule]:
    """Parse ``scheme<TAB>rule_id<TAB>pattern`` lines; ``#`` starts a comment."""
    rules = []
    for lineno, raw in enumerate(lines, 1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        where = f"{source}:{lineno}"
        fields = line.split("\t")
        if len(fields) != 3:
            raise RuleTableError(f"{where}: expected 3 tab-separated fields, got {len(fields)}")
        scheme_text, rule_id, pattern = (f.strip() for f in fields)
        try:
            scheme = FragmentationScheme.parse(scheme_text)
        except ValueError as exc:
            raise RuleTableError(f"{where}: {exc}") from None
        try:
            query = parse_pattern(pattern)
        except (PatternSyntaxError, ValueError) as exc:
            raise RuleTableError(f"{where}: bad pattern {pattern!r}: {exc}") from None
        if len(query.atoms) != 2 or len(query.bonds) != 1:
            raise RuleTableError(f"{where}: a rule pattern must have exactly two atoms and one bond")
        env_a: tuple[str, ...] = ()
        env_b: tuple[str, ...] = ()
        if "/" in rule_id:
            _, env = rule_id.split("/", 1)
            if env.count("-") != 1:
                raise RuleTableError(f"{where}: environment spec must be ENV_A-ENV_B")
            a, b = env.split("-")
            env_a, env_b = _env_names(a, where), _env_names(b, where)
        rules.append(DisconnectionRule(scheme, rule_id, pattern, query, env_a, env_b))
    return rules


def load_rule_table(path: str | Path | None = None) -> list[DisconnectionRule]:
    """Load a rule table file, or the shipped defaults when ``path`` is None."""
    if path is None:
        return list(_default_rules())
    with open(path, encoding="utf-8") as fh:
        return parse_rule_table(fh, str(path))


@lru_cache(maxsize=1)
def _default_rules() -> tuple[DisconnectionRule, ...]:
    text = resources.files("safemol.fragmenter").joinpath("default_rules.tsv").read_text(encoding="utf-8")
    return tuple(parse_rule_table(text.splitlines(), "default_rules.tsv"))


def rules_for(scheme: FragmentationScheme | str, rules: Sequence[DisconnectionRule] | None = None) -> list[DisconnectionRule]:
    scheme = FragmentationScheme.parse(scheme)
    table = _default_rules() if rules is None else rules
    return [r for r in table if r.scheme is scheme]


class _Memo:
    """Per-molecule cache of atom-pattern and environment results."""

    __slots__ = ("view", "atoms", "envs")

    def __init__(self, view: AtomView) -> None:
        self.view = view
        self.atoms: dict[tuple[int, int], bool] = {}
        self.envs: dict[tuple[str, int], bool] = {}

    def atom(self, p, i: int) -> bool:
        key = (id(p), i)
        hit = self.atoms.get(key)
        if hit is None:
            hit = self.atoms[key] = atom_matches_view(p, self.view, i)
        return hit

    def env(self, names: tuple[str, ...], i: int) -> bool:
        for name in names:
            key = (name, i)
            hit = self.envs.get(key)
            if hit is None:
                hit = self.envs[key] = ENVIRONMENTS[name](self.view, i)
            if not hit:
                return False
        return True


def _rule_hits(rule: DisconnectionRule, memo: _Memo, u: int, v: int, order: BondOrder, in_ring: bool) -> bool:
    q = rule.bond_query
    qa, qb = q.atoms
    if not bond_matches(q.bonds[0][2], order, in_ring):
        return False
    for x, y in ((u, v), (v, u)):
        if (
            memo.atom(qa, x)
            and memo.atom(qb, y)
            and memo.env(rule.env_a, x)
            and memo.env(rule.env_b, y)
        ):
            return True
    return False


def eligible_bonds(
    g: MolGraph,
    scheme: FragmentationScheme | str,
    rules: Sequence[DisconnectionRule] | None = None,
) -> list[int]:
    """Indices of bonds any rule of ``scheme`` would cut, in ascending order.

    Only acyclic single bonds between non-wildcard atoms are ever eligible,
    whatever a rule's pattern says.
    """
    active = rules_for(scheme, rules)
    if not active:
        return []
    view = AtomView(g)
    memo = _Memo(view)
    out = []
    for bond in g.bonds:
        if bond.in_ring or bond.order is not BondOrder.SINGLE:
            continue
        u, v = bond.begin, bond.end
        if view.el[u] == "*" or view.el[v] == "*":
            continue
        if any(_rule_hits(r, memo, u, v, bond.order, bond.in_ring) for r in active):
            out.append(bond.index)
    return out


def bond_rule_ids(g: MolGraph, scheme: FragmentationScheme | str, bond_index: int) -> list[str]:
    """Which rules of ``scheme`` fire on one bond (for diagnostics)."""
    memo = _Memo(AtomView(g))
    bond = g.bonds[bond_index]
    return [
        r.rule_id
        for r in rules_for(scheme)
        if _rule_hits(r, memo, bond.begin, bond.end, bond.order, bond.in_ring)
    ]
