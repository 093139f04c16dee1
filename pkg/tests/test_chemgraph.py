import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from motifvae.chemgraph import (
    Atom,
    Bond,
    MolGraph,
    SmilesError,
    ValenceTable,
    canonical_ranks,
    contains_subgraph,
    free_valence,
    implicit_hydrogens,
    molecular_weight,
    parse_smiles,
    perceive_rings,
    refined_ranks,
    validate_molecule,
    write_smiles,
)

from .helpers import (
    TABLE,
    brute_force_contains,
    brute_force_ring_bonds,
    permute_molecule,
    random_molecule,
    toy_corpus,
)

molecules = st.integers(0, 2**32 - 1).map(
    lambda seed: random_molecule(random.Random(seed), random.Random(seed).randint(1, 10))
)


class TestParse:
    def test_ethanol(self):
        mol = parse_smiles("CCO")
        assert [a.symbol for a in mol.atoms] == ["C", "C", "O"]
        assert mol.bonds == (Bond(0, 1, 1), Bond(1, 2, 1))

    def test_single_atom(self):
        mol = parse_smiles("C")
        assert mol.num_atoms == 1
        assert mol.num_bonds == 0

    def test_benzene_kekulized(self):
        mol = parse_smiles("c1ccccc1")
        assert all(a.symbol == "C" for a in mol.atoms)
        assert sorted(b.order for b in mol.bonds) == [1, 1, 1, 2, 2, 2]
        # every atom carries exactly one double bond: a perfect matching
        for i in range(6):
            doubles = [o for _, o in mol.neighbors(i) if o == 2]
            assert len(doubles) == 1
        # and the 6-cycle alternates around the ring
        info = perceive_rings(mol)
        assert len(info.ring_bonds) == 6

    def test_explicit_bonds_and_branches(self):
        mol = parse_smiles("CC(=O)O")
        assert mol.bond_between(1, 2).order == 2
        assert mol.bond_between(1, 3).order == 1

    def test_charges_and_isotope(self):
        mol = parse_smiles("[13C]C[N+](=O)[O-]")
        assert mol.atoms[0].isotope == 13
        assert mol.atoms[2].charge == 1
        assert mol.atoms[4].charge == -1

    def test_hcount_consistent_accepted(self):
        mol = parse_smiles("C[NH3+]")
        assert mol.atoms[1].charge == 1

    def test_hcount_inconsistent_rejected(self):
        with pytest.raises(SmilesError, match="inconsistent"):
            parse_smiles("C[CH]C")  # carbene-style CH would need 2 implicit H

    @pytest.mark.parametrize(
        "bad, fragment",
        [
            ("C(", "unclosed"),
            ("C1CC", "ring closure"),
            ("C..C", "unexpected"),
            ("[Xx]", "unknown element"),
            ("C#C#C", "valence overflow"),
            ("c1cccc1", "unkekulizable"),
            ("c", "aromatic atom has no aromatic bonds"),
            ("C==C", "consecutive bond symbols"),
        ],
    )
    def test_errors_with_position(self, bad, fragment):
        with pytest.raises(SmilesError, match=fragment) as err:
            parse_smiles(bad)
        assert "column" in str(err.value)

    def test_ring_closure_bond_symbol_either_side(self):
        a = parse_smiles("C=1CCCCC1")
        b = parse_smiles("C1CCCCC=1")
        assert write_smiles(a) == write_smiles(b)

    def test_ring_closure_symbol_disagreement(self):
        with pytest.raises(SmilesError, match="disagree"):
            parse_smiles("C=1CCCCC#1")

    def test_percent_ring_closure(self):
        assert write_smiles(parse_smiles("C%12CCCCC%12")) == write_smiles(
            parse_smiles("C1CCCCC1")
        )


class TestWrite:
    def test_isomorphic_inputs_equal_output(self):
        assert write_smiles(parse_smiles("OCC")) == write_smiles(parse_smiles("CCO"))

    def test_single_carbon(self):
        assert write_smiles(parse_smiles("C")) == "C"

    def test_round_trip_fixpoint_on_corpus(self):
        rng = random.Random(7)
        for smiles in toy_corpus(rng, 100):
            mol = parse_smiles(smiles)
            once = write_smiles(mol)
            twice = write_smiles(parse_smiles(once))
            assert once == twice

    @settings(max_examples=60, deadline=None)
    @given(molecules, st.randoms(use_true_random=False))
    def test_canonical_invariance_under_permutation(self, mol, rng):
        perm = list(range(mol.num_atoms))
        rng.shuffle(perm)
        assert write_smiles(permute_molecule(mol, perm)) == write_smiles(mol)


class TestCanonicalRanks:
    def test_benzene_fully_symmetric_before_tie_break(self):
        mol = parse_smiles("c1ccccc1")
        assert len(set(refined_ranks(mol))) == 1

    def test_ethanol_oxygen_rank_distinct(self):
        mol = parse_smiles("CCO")
        ranks = refined_ranks(mol)
        assert ranks[2] not in (ranks[0], ranks[1])
        assert ranks[0] != ranks[1]

    @settings(max_examples=60, deadline=None)
    @given(molecules)
    def test_ranks_are_permutation(self, mol):
        ranks = canonical_ranks(mol)
        assert sorted(ranks) == list(range(mol.num_atoms))


class TestRings:
    def test_acyclic_chain(self):
        info = perceive_rings(parse_smiles("CCCCC"))
        assert info.ring_bonds == frozenset()
        assert all(not s for s in info.ring_sizes)

    def test_cyclohexane(self):
        mol = parse_smiles("C1CCCCC1")
        info = perceive_rings(mol)
        assert info.ring_bonds == frozenset(range(6))
        assert all(s == frozenset({6}) for s in info.ring_sizes)

    def test_fused_bicyclic(self):
        mol = parse_smiles("c1ccc2ccccc2c1")
        info = perceive_rings(mol)
        assert len(info.ring_bonds) == mol.num_bonds  # every bond on a cycle
        fusion = [i for i in range(mol.num_atoms) if mol.degree(i) == 3]
        assert len(fusion) == 2
        for i in fusion:
            assert info.ring_sizes[i] == frozenset({6})
        # independent oracle: exhaustive cycle enumeration on the 10-atom graph
        assert info.ring_bonds == brute_force_ring_bonds(mol)

    def test_ring_with_tail(self):
        mol = parse_smiles("CC1CC1")
        info = perceive_rings(mol)
        assert len(info.ring_bonds) == 3
        assert info.ring_sizes[0] == frozenset()

    @settings(max_examples=80, deadline=None)
    @given(molecules)
    def test_ring_bonds_match_brute_force(self, mol):
        assert perceive_rings(mol).ring_bonds == brute_force_ring_bonds(mol)


class TestValence:
    def test_saturated_carbon(self):
        mol = parse_smiles("C(C)(C)(C)C")
        assert free_valence(mol, 0, TABLE) == 0

    def test_amine_nitrogen(self):
        mol = parse_smiles("CN")
        assert free_valence(mol, 1, TABLE) == 2

    def test_bare_oxygen(self):
        mol = parse_smiles("O")
        assert free_valence(mol, 0, TABLE) == 2

    def test_charged_nitrogen(self):
        mol = parse_smiles("C[N+](C)(C)C")
        assert free_valence(mol, 1, TABLE) == 0

    def test_sulfur_multivalence(self):
        mol = parse_smiles("CSC")
        assert free_valence(mol, 1, TABLE) == 4  # capacity up to S(VI)
        assert implicit_hydrogens(mol, 1, TABLE) == 0  # smallest fitting valence

    def test_methane_weight(self):
        assert molecular_weight(parse_smiles("C"), TABLE) == pytest.approx(16.043)

    def test_corrupt_state_detected(self):
        mol = MolGraph(
            (Atom("O"), Atom("C"), Atom("C"), Atom("C")),
            (Bond(0, 1, 1), Bond(0, 2, 1), Bond(0, 3, 1)),
        )
        with pytest.raises(ValueError, match="above its maximum"):
            free_valence(mol, 0, TABLE)


class TestSubgraph:
    def test_benzene_in_toluene(self):
        assert contains_subgraph(parse_smiles("Cc1ccccc1"), parse_smiles("c1ccccc1"))

    def test_benzene_not_in_cyclohexane(self):
        assert not contains_subgraph(
            parse_smiles("C1CCCCC1"), parse_smiles("c1ccccc1")
        )

    def test_self_containment(self):
        for smiles in ("CCO", "c1ccccc1", "CC(=O)N"):
            mol = parse_smiles(smiles)
            assert contains_subgraph(mol, mol)

    def test_bond_order_must_match(self):
        assert not contains_subgraph(parse_smiles("CCC"), parse_smiles("C=C"))

    def test_extra_haystack_bonds_allowed(self):
        # A path embeds into a ring even though the ring has an extra bond.
        assert contains_subgraph(parse_smiles("C1CC1"), parse_smiles("CCC"))

    @settings(max_examples=60, deadline=None)
    @given(
        st.integers(0, 2**32 - 1),
        st.integers(2, 8),
        st.integers(2, 5),
    )
    def test_matches_exhaustive_enumeration(self, seed, n_hay, n_needle):
        rng = random.Random(seed)
        hay = random_molecule(rng, n_hay)
        needle = random_molecule(rng, n_needle)
        assert contains_subgraph(hay, needle) == brute_force_contains(hay, needle)


class TestValenceTable:
    def test_defaults_match_configuration(self):
        assert TABLE.allowed_valences("C") == (4,)
        assert TABLE.allowed_valences("N", 1) == (4,)
        assert TABLE.allowed_valences("O", -1) == (1,)
        assert TABLE.allowed_valences("S") == (2, 4, 6)
        assert TABLE.allowed_valences("P") == (3, 5)

    def test_file_round_trip(self, tmp_path):
        path = tmp_path / "valences.txt"
        path.write_text(TABLE.to_text())
        loaded = ValenceTable.from_file(path)
        for sym in TABLE.symbols():
            assert loaded.allowed_valences(sym) == TABLE.allowed_valences(sym)
            assert loaded.mass(sym) == TABLE.mass(sym)
        assert loaded.allowed_valences("N", 1) == TABLE.allowed_valences("N", 1)


class TestValidation:
    @settings(max_examples=40, deadline=None)
    @given(molecules)
    def test_generated_molecules_validate(self, mol):
        validate_molecule(mol, TABLE)

    def test_disconnected_rejected(self):
        mol = MolGraph((Atom("C"), Atom("C")), ())
        with pytest.raises(ValueError, match="disconnected"):
            validate_molecule(mol, TABLE)
