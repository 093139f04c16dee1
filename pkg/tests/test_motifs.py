import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from motifvae.chemgraph import parse_smiles, write_smiles
from motifvae.motifs import (
    MotifVocabulary,
    annotate,
    fragment,
    mine_vocabulary,
    reassemble,
    symmetry_classes,
)

from .helpers import brute_force_orbits, random_molecule, toy_corpus

BENZENE = write_smiles(parse_smiles("c1ccccc1"))
CYCLOHEXANE = write_smiles(parse_smiles("C1CCCCC1"))


def _keys(fragments):
    return sorted(write_smiles(f.graph) for f in fragments)


class TestFragment:
    def test_toluene(self):
        frags = fragment(parse_smiles("Cc1ccccc1"))
        assert _keys(frags) == sorted([BENZENE, "C"])

    def test_cyclohexane_unbroken(self):
        frags = fragment(parse_smiles("C1CCCCC1"))
        assert len(frags) == 1
        assert frags[0].source_atoms == tuple(range(6))

    def test_ethylbenzene_keeps_chain_bond(self):
        # The chain C-C bond is acyclic but not ring-adjacent: not broken.
        frags = fragment(parse_smiles("CCc1ccccc1"))
        assert _keys(frags) == sorted([BENZENE, "CC"])

    def test_acyclic_molecule_fragments_to_itself(self):
        mol = parse_smiles("CC(C)CO")
        frags = fragment(mol)
        assert len(frags) == 1
        assert frags[0].graph == mol

    def test_para_disubstituted(self):
        frags = fragment(parse_smiles("CCc1ccc(O)cc1"))
        assert _keys(frags) == sorted([BENZENE, "CC", "O"])

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_partition_and_reassembly(self, seed):
        rng = random.Random(seed)
        mol = parse_smiles(toy_corpus(rng, 1)[0])
        frags = fragment(mol)
        atoms = sorted(a for f in frags for a in f.source_atoms)
        assert atoms == list(range(mol.num_atoms))
        assert reassemble(mol, frags) == mol


class TestMineVocabulary:
    CORPUS = ["Cc1ccccc1", "CCc1ccccc1", "C1CCCCC1"]

    def _mols(self):
        return [parse_smiles(s) for s in self.CORPUS]

    def test_top_one_is_benzene(self):
        vocab = mine_vocabulary(self._mols(), 1)
        assert len(vocab) == 1
        assert vocab[0].key == BENZENE
        assert vocab[0].count == 2

    def test_empty_vocabulary_is_valid(self):
        vocab = mine_vocabulary(self._mols(), 0)
        assert len(vocab) == 0

    def test_count_ties_break_by_ascending_key(self):
        vocab = mine_vocabulary(self._mols(), 3)
        rest = [m.key for m in vocab.motifs[1:]]
        assert vocab[0].key == BENZENE
        assert rest == sorted(["C", "CC", CYCLOHEXANE])[:2]

    def test_prefix_monotonicity(self):
        small = mine_vocabulary(self._mols(), 2)
        large = mine_vocabulary(self._mols(), 4)
        assert large.motifs[: len(small)] == small.motifs

    def test_single_atom_fragments_are_eligible(self):
        vocab = mine_vocabulary([parse_smiles("Cc1ccccc1")], 2)
        assert "C" in [m.key for m in vocab]

    def test_vocab_indices_are_positions(self):
        vocab = mine_vocabulary(self._mols(), 4)
        assert [m.vocab_index for m in vocab] == list(range(len(vocab)))


class TestVocabularyFile:
    def test_bit_exact_reload(self, tmp_path):
        corpus = [parse_smiles(s) for s in toy_corpus(random.Random(3), 40)]
        vocab = mine_vocabulary(corpus, 8)
        path = tmp_path / "vocab.json"
        vocab.save(path)
        loaded = MotifVocabulary.load(path)
        assert loaded == vocab
        assert loaded.content_hash() == vocab.content_hash()
        loaded.save(tmp_path / "again.json")
        assert (tmp_path / "again.json").read_bytes() == path.read_bytes()

    def test_version_checked(self, tmp_path):
        path = tmp_path / "vocab.json"
        path.write_text('{"version": 99, "n": 0, "motifs": []}')
        with pytest.raises(ValueError, match="version"):
            MotifVocabulary.load(path)


class TestAnnotate:
    def test_toluene_with_benzene_vocab(self):
        mol = parse_smiles("Cc1ccccc1")
        vocab = mine_vocabulary([parse_smiles("c1ccccc1")], 1)
        ann = annotate(mol, vocab)
        assert len(ann.occurrences) == 1
        assert len(ann.covered_atoms) == 6
        assert ann.atom_motif(0) is None  # the methyl carbon
        for atom in range(1, 7):
            vocab_index, position = ann.atom_motif(atom)
            assert vocab_index == 0
            assert 0 <= position < 6

    def test_empty_vocab_annotates_nothing(self):
        ann = annotate(parse_smiles("Cc1ccccc1"), mine_vocabulary([], 0))
        assert ann.occurrences == ()
        assert ann.covered_atoms == frozenset()

    def test_whole_molecule_occurrence(self):
        mol = parse_smiles("C1CCCCC1")
        vocab = mine_vocabulary([mol], 1)
        ann = annotate(mol, vocab)
        assert len(ann.occurrences) == 1
        assert ann.covered_atoms == frozenset(range(6))

    def test_positions_follow_canonical_isomorphism(self):
        mol = parse_smiles("CCc1ccc(O)cc1")
        vocab = mine_vocabulary([mol], 3)
        ann = annotate(mol, vocab)
        for occ in ann.occurrences:
            motif = vocab[occ.vocab_index]
            sub, _ = mol.subgraph(occ.atoms)
            # atoms are listed in motif-position order, so the induced graph
            # must equal the motif graph position by position
            assert [a.symbol for a in sub.atoms] == [
                a.symbol for a in motif.graph.atoms
            ]
            assert sub.bonds == motif.graph.bonds

    def test_annotation_deterministic(self):
        mol = parse_smiles("CCc1ccc(O)cc1")
        vocab = mine_vocabulary([mol], 3)
        a = annotate(mol, vocab)
        b = annotate(mol, vocab)
        assert a.occurrences == b.occurrences


class TestSymmetryClasses:
    def test_benzene_single_class(self):
        classes = symmetry_classes(parse_smiles("c1ccccc1"))
        assert classes == [tuple(range(6))]

    def test_kekulized_pyridine_orbits(self):
        # Alternating bond orders break the mirror symmetry: exhaustive
        # enumeration shows only the identity automorphism survives.
        mol = parse_smiles("c1ccncc1")
        expected = sorted(tuple(sorted(o)) for o in brute_force_orbits(mol))
        assert sorted(symmetry_classes(mol)) == expected
        assert all(len(c) == 1 for c in expected)

    def test_single_atom(self):
        assert symmetry_classes(parse_smiles("C")) == [(0,)]

    def test_cyclohexane_fully_symmetric(self):
        assert symmetry_classes(parse_smiles("C1CCCCC1")) == [tuple(range(6))]

    def test_neopentane_methyls_equivalent(self):
        mol = parse_smiles("CC(C)(C)C")
        classes = sorted(symmetry_classes(mol), key=len)
        assert [len(c) for c in classes] == [1, 4]

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_matches_exhaustive_orbits(self, seed):
        mol = random_molecule(random.Random(seed), random.Random(seed).randint(2, 7))
        expected = sorted(tuple(sorted(o)) for o in brute_force_orbits(mol))
        assert sorted(symmetry_classes(mol)) == expected

    def test_every_atom_automorphic_to_class_representative(self):
        from motifvae.chemgraph import has_automorphism_mapping

        for smiles in ("c1ccccc1", "CC(C)(C)C", "CCc1ccc(O)cc1"):
            mol = parse_smiles(smiles)
            for cls in symmetry_classes(mol):
                rep = cls[0]
                for atom in cls:
                    assert has_automorphism_mapping(mol, atom, rep)
