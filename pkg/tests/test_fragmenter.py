import pytest

from safemol.fragmenter import (
    FragmentationFailure,
    FragmentationScheme,
    RuleTableError,
    bond_rule_ids,
    eligible_bonds,
    fragment,
    fragment_count_stats,
    fragment_molecule,
    parse_rule_table,
    reassemble,
    rules_for,
)
from safemol.molgraph import canonical_smiles, parse_smiles

from conftest import moses_smiles

SCHEMES = list(FragmentationScheme)


def test_five_schemes():
    assert {s.name for s in SCHEMES} == {"HR", "BRICS", "RECAP", "MMPA", "ROTATABLE"}
    assert FragmentationScheme.parse("brics") is FragmentationScheme.BRICS
    with pytest.raises(ValueError):
        FragmentationScheme.parse("nope")


@pytest.mark.parametrize("scheme", SCHEMES)
def test_benzene_has_no_cuts(scheme):
    assert eligible_bonds(parse_smiles("c1ccccc1"), scheme) == []


def test_rotatable_diethyl_ether():
    g = parse_smiles("CCOCC")
    cuts = eligible_bonds(g, "rotatable")
    assert len(cuts) == 2
    for bi in cuts:
        ends = {g.atoms[g.bonds[bi].begin].element, g.atoms[g.bonds[bi].end].element}
        assert ends == {"C", "O"}


def test_rotatable_skips_triple_bond_ends():
    assert eligible_bonds(parse_smiles("CC#CCC"), "rotatable") == []


def test_hr_cuts_every_acyclic_heavy_bond():
    g = parse_smiles("CC(C)Oc1ccccc1")
    assert len(eligible_bonds(g, "hr")) == 4


def test_mmpa_needs_carbon_end():
    assert eligible_bonds(parse_smiles("NO"), "mmpa") == []
    assert len(eligible_bonds(parse_smiles("CN"), "mmpa")) == 1


def test_brics_amide_and_recap_amide():
    g = parse_smiles("CC(=O)NC1CCCCC1")
    brics = eligible_bonds(g, "brics")
    recap = eligible_bonds(g, "recap")
    assert set(recap) <= set(brics)
    amide = next(
        b.index
        for b in g.bonds
        if {g.atoms[b.begin].element, g.atoms[b.end].element} == {"C", "N"} and not b.in_ring
        and any(g.bonds[x].order == 2 for _, x in g.adjacency[b.begin if g.atoms[b.begin].element == "C" else b.end])
    )
    assert amide in recap
    assert any(r.startswith("amide") for r in bond_rule_ids(g, "recap", amide))


def test_ethanol_single_cut():
    g = parse_smiles("CCO")
    co = next(b.index for b in g.bonds if "O" in (g.atoms[b.begin].element, g.atoms[b.end].element))
    fs = fragment(g, [co])
    assert len(fs) == 2
    texts = sorted(canonical_smiles(f) for f in fs.fragments)
    assert texts == sorted([canonical_smiles(parse_smiles("CC*")), canonical_smiles(parse_smiles("*O"))])
    assert len(fs.pairs) == 1


def test_empty_cut_set_is_identity():
    g = parse_smiles("CCO")
    fs = fragment(g, [])
    assert len(fs) == 1
    assert canonical_smiles(fs.fragments[0]) == canonical_smiles(g)


def test_fragment_rejects_ring_bond():
    g = parse_smiles("C1CC1")
    with pytest.raises(FragmentationFailure):
        fragment(g, [0])


def test_fragment_rejects_disconnected():
    with pytest.raises(FragmentationFailure):
        fragment(parse_smiles("CC.O"), [])


@pytest.mark.parametrize("scheme", SCHEMES)
def test_reassembly_identity(scheme, moses_1k):
    for s in moses_1k[:300]:
        g = parse_smiles(s)
        fs = fragment_molecule(g, scheme)
        assert len(fs) == len(fs.cut_bonds) + 1
        back = reassemble(fs)
        assert canonical_smiles(back) == canonical_smiles(g), s
        ring_bonds = sum(b.in_ring for b in g.bonds)
        assert sum(sum(b.in_ring for b in f.bonds) for f in fs.fragments) == ring_bonds


def test_recap_within_brics(moses_1k):
    for s in moses_1k:
        g = parse_smiles(s)
        assert set(eligible_bonds(g, "recap")) <= set(eligible_bonds(g, "brics")), s


def test_stats_benzene():
    st = fragment_count_stats(["c1ccccc1"] * 100, "brics")
    assert st.histogram == {1: 100}
    assert st.mean == 1.0


def test_stats_counts_failures_apart():
    st = fragment_count_stats(["CCO", "C(", "CC.O"], "hr")
    assert st.n_failed == 2
    assert st.mean == 3.0


def test_stats_empty_corpus():
    with pytest.raises(ValueError):
        fragment_count_stats([], "brics")


def test_scheme_ordering_on_sample(moses_1k):
    means = {s: fragment_count_stats(moses_1k, s).mean for s in SCHEMES}
    H, M, R, B, C = (means[FragmentationScheme[x]] for x in ("HR", "MMPA", "ROTATABLE", "BRICS", "RECAP"))
    assert H >= M - 1 and M >= R - 1 and R >= B - 1 and abs(B - C) <= 1.5


def test_rule_table_parsing():
    rules = parse_rule_table(["# c", "", "BRICS\tx\tC-;!@O"])
    assert len(rules) == 1 and rules[0].scheme is FragmentationScheme.BRICS
    assert rules[0].description
    for bad in (["BRICS\tx"], ["NOPE\tx\tCC"], ["BRICS\tx\tC"], ["BRICS\tx/L99-L1\tCC"]):
        with pytest.raises(RuleTableError):
            parse_rule_table(bad)


def test_custom_rules_override():
    rules = parse_rule_table(["BRICS\tether\t[C]-;!@[O]"])
    g = parse_smiles("CCOC(=O)N")
    assert len(eligible_bonds(g, "brics", rules)) == 2


def test_default_tables_cover_every_scheme():
    for s in SCHEMES:
        assert rules_for(s)
