import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from safemol.molgraph import BondOrder, parse_smiles
from safemol.patterns import (
    PatternSyntaxError,
    UnsupportedPrimitive,
    atom_matches,
    bond_matches,
    has_substructure,
    isomorphic,
    match_all,
    parse_pattern,
    query_from_mol,
)

from conftest import BARICITINIB_FRAGMENTS, BARICITINIB_SCAFFOLD
from oracles import QUERY_FAMILY, brute_force_matches, small_graph_family


def test_single_aliphatic_carbon():
    q = parse_pattern("C")
    assert len(q.atoms) == 1
    p = q.atoms[0]
    assert p.element == "C" and p.aromatic is False


def test_wildcard_atom():
    assert parse_pattern("[*]").atoms[0].wildcard


def test_non_ring_bond():
    q = parse_pattern("C!@C")
    assert len(q.atoms) == 2 and len(q.bonds) == 1
    bp = q.bonds[0][2]
    assert bp.ring is False
    assert bond_matches(bp, BondOrder.SINGLE, False)
    assert not bond_matches(bp, BondOrder.SINGLE, True)


@pytest.mark.parametrize("text", ["[$(CC)]", "C,N", "[C,N]", "C.C"])
def test_unsupported(text):
    with pytest.raises((UnsupportedPrimitive, PatternSyntaxError)):
        parse_pattern(text)


@pytest.mark.parametrize("text", ["", "C(", "[C", "C1CC"])
def test_syntax_errors(text):
    with pytest.raises(PatternSyntaxError):
        parse_pattern(text)


def test_c_in_ethane():
    assert len(match_all(parse_pattern("C"), parse_smiles("CC"))) == 2


def test_wildcard_counts_atoms():
    g = parse_smiles("CCO")
    assert len(match_all(parse_pattern("[*]"), g)) == 3


def test_benzene_automorphisms():
    assert len(match_all(parse_pattern("c1ccccc1"), parse_smiles("c1ccccc1"))) == 12


def test_propane_not_in_ethane():
    assert not has_substructure(parse_pattern("CCC"), parse_smiles("CC"))


def test_degree_and_negation():
    g = parse_smiles("CC(C)O")
    assert len(match_all(parse_pattern("[C;D3]"), g)) == 1
    assert len(match_all(parse_pattern("[!#6]"), g)) == 1
    assert atom_matches(parse_pattern("[R]").atoms[0], parse_smiles("C1CC1"), 0)


def test_scaffold_with_methyl_caps():
    scaffold = parse_smiles(BARICITINIB_SCAFFOLD)
    capped = parse_smiles(BARICITINIB_SCAFFOLD.replace("[*]", "C"))
    assert has_substructure(query_from_mol(scaffold), capped)


def test_scaffold_in_baricitinib():
    # the drug assembled from its two linker fragments, joined through a pyrazole linker
    frag_a, frag_b = BARICITINIB_FRAGMENTS
    drug = parse_smiles("N#CCC1(n2cc(-c3ncnc4[nH]ccc34)cn2)CN(S(=O)(=O)CC)C1")
    assert has_substructure(query_from_mol(parse_smiles(BARICITINIB_SCAFFOLD)), drug)
    assert has_substructure(query_from_mol(parse_smiles(frag_a)), drug)
    assert has_substructure(query_from_mol(parse_smiles(frag_b)), drug)


def test_scaffold_needs_ring_system():
    q = query_from_mol(parse_smiles(BARICITINIB_SCAFFOLD))
    assert not has_substructure(q, parse_smiles("CN1CC(C)(c2ccccc2)C1"))


def test_attachment_does_not_match_hydrogen_cap():
    q = query_from_mol(parse_smiles("[*]c1ccccc1"))
    assert has_substructure(q, parse_smiles("Cc1ccccc1"))
    assert not has_substructure(q, parse_smiles("c1ccccc1"))


def test_monotone_under_extra_components():
    q = parse_pattern("C=O")
    g = parse_smiles("CC=O")
    assert has_substructure(q, g)
    assert has_substructure(q, parse_smiles("CC=O.c1ccccc1.N"))


def test_isomorphic_components():
    assert isomorphic(parse_smiles("CC.O"), parse_smiles("O.CC"))
    assert not isomorphic(parse_smiles("CC.O"), parse_smiles("CCO"))


def test_match_order_deterministic():
    q = parse_pattern("*~*")
    g = parse_smiles("CC(=O)Nc1ccccc1")
    assert match_all(q, g) == match_all(q, g)


GRAPHS = small_graph_family(120, seed=11)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, len(GRAPHS) - 1), st.sampled_from(QUERY_FAMILY))
def test_matches_equal_brute_force(gi, qtext):
    q = parse_pattern(qtext)
    g = GRAPHS[gi]
    found = match_all(q, g)
    assert len(found) == len(set(found))
    assert set(found) == brute_force_matches(q, g)
