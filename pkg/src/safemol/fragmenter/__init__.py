"""Bond-disconnection schemes (HR, BRICS, RECAP, MMPA, ROTATABLE) and fragmentation."""
from safemol.fragmenter.fragment import (
    FragmentationFailure,
    FragmentSet,
    FragmentStats,
    fragment,
    fragment_count_stats,
    fragment_molecule,
    join_attachments,
    reassemble,
)
from safemol.fragmenter.rules import (
    DisconnectionRule,
    FragmentationScheme,
    RuleTableError,
    bond_rule_ids,
    eligible_bonds,
    load_rule_table,
    parse_rule_table,
    rules_for,
)

__all__ = [
    "DisconnectionRule",
    "FragmentSet",
    "FragmentStats",
    "FragmentationFailure",
    "FragmentationScheme",
    "RuleTableError",
    "bond_rule_ids",
    "eligible_bonds",
    "fragment",
    "fragment_count_stats",
    "fragment_molecule",
    "join_attachments",
    "load_rule_table",
    "parse_rule_table",
    "reassemble",
    "rules_for",
]
