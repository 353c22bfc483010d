"""Parser, canonicalizer, and fingerprint behavior on hand-checked molecules."""

import random
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bioextract.chem import (
    ChemError,
    SmilesSyntaxError,
    ValenceError,
    canonical_smiles,
    circular_fingerprint,
    molecules_equal,
    parse_smiles,
    permute_atoms,
    strip_stereo,
    tanimoto,
    to_canonical_smiles,
)


def heavy_atoms(smiles: str) -> int:
    return len(parse_smiles(smiles).atoms)


class TestParsing:
    def test_aspirin_composition(self):
        g = parse_smiles("CC(=O)Oc1ccccc1C(=O)O")
        assert len(g.atoms) == 13
        assert len(g.bonds) == 13
        assert sum(a.element == "O" for a in g.atoms) == 4

    def test_implicit_hydrogens_fill_to_valence(self):
        g = parse_smiles("CO")
        by_element = {a.element: a for a in g.atoms}
        assert by_element["C"].explicit_hydrogens == 3
        assert by_element["O"].explicit_hydrogens == 1

    def test_bracket_atom_overrides_hydrogens(self):
        g = parse_smiles("[NH4+]")
        atom = g.atoms[0]
        assert atom.explicit_hydrogens == 4
        assert atom.formal_charge == 1

    def test_isotope_survives_round_trip(self):
        out = to_canonical_smiles(parse_smiles("[13CH4]"))
        assert "13C" in out

    def test_ring_closure_across_digits(self):
        assert molecules_equal("C1CCCCC1", "C2CCCCC2")

    def test_two_digit_ring_closure(self):
        assert molecules_equal("C%10CCCCC%10", "C1CCCCC1")

    @pytest.mark.parametrize(
        "bad",
        [
            "C1CC",          # unclosed ring
            "C(C",           # unclosed branch
            "C)C",           # stray close
            "[Xx]",          # unknown element
            "",              # empty input
            "C=",            # dangling bond
            "CC.O",          # disconnected components are rejected
        ],
    )
    def test_syntax_rejections(self, bad):
        with pytest.raises(ChemError):
            parse_smiles(bad)

    def test_pentavalent_carbon_rejected(self):
        with pytest.raises(ValenceError):
            parse_smiles("C(C)(C)(C)(C)C")

    def test_divalent_chlorine_rejected(self):
        with pytest.raises(ValenceError):
            parse_smiles("CClC")

    def test_bracket_hydrogen_overflow_rejected(self):
        with pytest.raises(ValenceError):
            parse_smiles("[ClH2]")

    def test_charge_shifts_permitted_valence(self):
        # N+ carries four bonds, O- only one
        parse_smiles("C[N+](C)(C)C")
        with pytest.raises(ValenceError):
            parse_smiles("C[O-]C")


class TestCanonicalization:
    @pytest.mark.parametrize(
        "a,b",
        [
            ("C1=CC=CC=C1", "c1ccccc1"),
            ("CN1C=NC2=C1C(=O)N(C)C(=O)N2C", "Cn1cnc2c1c(=O)n(C)c(=O)n2C"),
            ("OCC", "CCO"),
            ("C(O)C", "CCO"),
            ("c1ccc2ccccc2c1", "c1ccc2c(c1)cccc2"),
            ("N(C)(C)C", "CN(C)C"),
        ],
    )
    def test_alias_spellings_converge(self, a, b):
        assert molecules_equal(a, b)

    @pytest.mark.parametrize(
        "a,b",
        [
            ("CCO", "CCN"),
            ("c1ccccc1", "C1CCCCC1"),
            ("CC(=O)O", "CC=O"),
        ],
    )
    def test_distinct_molecules_stay_distinct(self, a, b):
        assert not molecules_equal(a, b)

    def test_tetrahedral_mirror_forms_differ(self):
        left = canonical_smiles("C[C@H](N)C(=O)O")
        right = canonical_smiles("C[C@@H](N)C(=O)O")
        assert left != right

    def test_double_bond_geometry_forms_differ(self):
        cis = canonical_smiles("F/C=C\\F")
        trans = canonical_smiles("F/C=C/F")
        assert cis != trans

    def test_strip_stereo_collapses_mirror_forms(self):
        left = strip_stereo(parse_smiles("C[C@H](N)C(=O)O"))
        right = strip_stereo(parse_smiles("C[C@@H](N)C(=O)O"))
        assert to_canonical_smiles(left) == to_canonical_smiles(right)

    def test_fixpoint_on_sampled_corpus(self, corpus):
        rng = random.Random(7)
        for smiles in rng.sample(corpus, 50):
            canon = to_canonical_smiles(parse_smiles(smiles))
            assert to_canonical_smiles(parse_smiles(canon)) == canon

    def test_permutation_invariance_spot_check(self, corpus):
        rng = random.Random(11)
        for smiles in rng.sample(corpus, 20):
            g = parse_smiles(smiles)
            reference = to_canonical_smiles(g)
            n = len(g.atoms)
            for _ in range(5):
                perm = list(range(n))
                rng.shuffle(perm)
                assert to_canonical_smiles(permute_atoms(g, perm)) == reference


_CORPUS_SAMPLE = [
    line
    for line in (Path(__file__).parent / "data" / "corpus.smi")
    .read_text(encoding="utf-8")
    .splitlines()
    if line
][:200]


class TestProperties:
    @settings(max_examples=120, deadline=None)
    @given(st.sampled_from(_CORPUS_SAMPLE), st.integers(min_value=0, max_value=2**32 - 1))
    def test_canonical_form_is_permutation_invariant(self, smiles, seed):
        g = parse_smiles(smiles)
        perm = list(range(len(g.atoms)))
        random.Random(seed).shuffle(perm)
        assert to_canonical_smiles(permute_atoms(g, perm)) == to_canonical_smiles(g)

    @settings(max_examples=120, deadline=None)
    @given(st.sampled_from(_CORPUS_SAMPLE))
    def test_parse_canonicalize_reparse_is_a_fixpoint(self, smiles):
        canon = to_canonical_smiles(parse_smiles(smiles))
        assert to_canonical_smiles(parse_smiles(canon)) == canon


class TestFingerprint:
    def test_identical_molecules_score_one(self):
        a = circular_fingerprint(parse_smiles("CC(=O)Oc1ccccc1C(=O)O"))
        b = circular_fingerprint(parse_smiles("OC(=O)c1ccccc1OC(C)=O"))
        assert tanimoto(a, b) == 1.0

    def test_unrelated_molecules_score_low(self):
        a = circular_fingerprint(parse_smiles("c1ccccc1"))
        b = circular_fingerprint(parse_smiles("NCCO"))
        assert tanimoto(a, b) < 0.3

    def test_similarity_is_symmetric(self):
        a = circular_fingerprint(parse_smiles("Cc1ccccc1"))
        b = circular_fingerprint(parse_smiles("CCc1ccccc1"))
        assert tanimoto(a, b) == tanimoto(b, a)

    def test_fingerprint_ignores_atom_order(self, corpus):
        rng = random.Random(13)
        for smiles in rng.sample(corpus, 10):
            g = parse_smiles(smiles)
            perm = list(range(len(g.atoms)))
            rng.shuffle(perm)
            assert circular_fingerprint(g) == circular_fingerprint(permute_atoms(g, perm))
