"""R-group resolution and zipping against hand-drawn expected products.

Every expected SMILES in this file was written out by hand from the
scaffold drawing before being compared to engine output; the engine is
never consulted to produce its own expectations.
"""

import random

import pytest

from bioextract.chem import canonical_smiles, parse_smiles
from bioextract.markush import (
    FAILURE_CAUSES,
    MarkushError,
    RGroupRow,
    RGroupTable,
    Substituent,
    default_abbreviations,
    enumerate_rows,
    resolve_substituent,
    scaffold_from_smiles,
    zip_assignment,
)

ABBREVS = default_abbreviations()


def enumerate_simple(scaffold_smiles: str, rows):
    """rows: list of (coreference, {label: Substituent})."""
    scaffold = scaffold_from_smiles(scaffold_smiles)
    table = RGroupTable(
        rows=tuple(
            RGroupRow(coref, tuple(sorted(cells.items()))) for coref, cells in rows
        )
    )
    return enumerate_rows(scaffold, table, ABBREVS)


def sub(kind: str, payload: str = "") -> Substituent:
    return Substituent(kind, payload)


class TestTrivialZips:
    def test_methyl_on_benzene_is_toluene(self):
        records, failures = enumerate_simple(
            "c1ccc(cc1)[R1]", [("1", {"R1": sub("fragment_smiles", "*C")})]
        )
        assert not failures
        assert records[0].smiles == canonical_smiles("Cc1ccccc1")

    def test_hydrogen_substitution_is_benzene(self):
        records, failures = enumerate_simple(
            "c1ccc(cc1)[R1]", [("1", {"R1": sub("hydrogen")})]
        )
        assert not failures
        assert records[0].smiles == canonical_smiles("c1ccccc1")

    def test_two_label_chain(self):
        records, failures = enumerate_simple(
            "[R1]CC[R2]",
            [("1", {"R1": sub("fragment_smiles", "*O"), "R2": sub("fragment_smiles", "*N")})],
        )
        assert not failures
        assert records[0].smiles == canonical_smiles("OCCN")


# (coreference, R1, R2, hand-written product) over [R1]c1ccc(cc1)C(=O)N[R2].
# Para-substituted benzamides: easy to draw, easy to get exactly right.
BENZAMIDE_ROWS = [
    ("r01", sub("abbreviation", "Me"), sub("hydrogen"), "Cc1ccc(C(N)=O)cc1"),
    ("r02", sub("hydrogen"), sub("hydrogen"), "NC(=O)c1ccccc1"),
    ("r03", sub("fragment_smiles", "*C"), sub("abbreviation", "Me"), "CNC(=O)c1ccc(C)cc1"),
    ("r04", sub("abbreviation", "Et"), sub("hydrogen"), "CCc1ccc(C(N)=O)cc1"),
    ("r05", sub("abbreviation", "OMe"), sub("abbreviation", "Me"), "CNC(=O)c1ccc(OC)cc1"),
    ("r06", sub("abbreviation", "Cl"), sub("hydrogen"), "NC(=O)c1ccc(Cl)cc1"),
    ("r07", sub("abbreviation", "F"), sub("abbreviation", "Et"), "CCNC(=O)c1ccc(F)cc1"),
    ("r08", sub("abbreviation", "OH"), sub("hydrogen"), "NC(=O)c1ccc(O)cc1"),
    ("r09", sub("abbreviation", "NH2"), sub("abbreviation", "Me"), "CNC(=O)c1ccc(N)cc1"),
    ("r10", sub("abbreviation", "CF3"), sub("hydrogen"), "NC(=O)c1ccc(C(F)(F)F)cc1"),
    ("r11", sub("abbreviation", "Ph"), sub("hydrogen"), "NC(=O)c1ccc(-c2ccccc2)cc1"),
    ("r12", sub("abbreviation", "Br"), sub("abbreviation", "Me"), "CNC(=O)c1ccc(Br)cc1"),
    ("r13", sub("abbreviation", "Me"), sub("fragment_smiles", "*CC"), "CCNC(=O)c1ccc(C)cc1"),
    ("r14", sub("abbreviation", "Et"), sub("abbreviation", "Et"), "CCNC(=O)c1ccc(CC)cc1"),
    ("r15", sub("abbreviation", "iPr"), sub("hydrogen"), "NC(=O)c1ccc(C(C)C)cc1"),
    ("r16", sub("abbreviation", "tBu"), sub("abbreviation", "Me"), "CNC(=O)c1ccc(C(C)(C)C)cc1"),
    ("r17", sub("abbreviation", "OEt"), sub("hydrogen"), "NC(=O)c1ccc(OCC)cc1"),
    ("r18", sub("abbreviation", "CN"), sub("hydrogen"), "NC(=O)c1ccc(C#N)cc1"),
    ("r19", sub("fragment_smiles", "*[N+](=O)[O-]"), sub("hydrogen"), "NC(=O)c1ccc([N+](=O)[O-])cc1"),
    ("r20", sub("abbreviation", "Bn"), sub("abbreviation", "Me"), "CNC(=O)c1ccc(Cc2ccccc2)cc1"),
]

BENZAMIDE_SCAFFOLD = "[R1]c1ccc(cc1)C(=O)N[R2]"


def run_benzamide_table():
    rows = [(coref, {"R1": r1, "R2": r2}) for coref, r1, r2, _ in BENZAMIDE_ROWS]
    return enumerate_simple(BENZAMIDE_SCAFFOLD, rows)


class TestBenzamideTable:
    def test_twenty_rows_twenty_records(self):
        records, failures = run_benzamide_table()
        assert failures == []
        assert len(records) == 20

    def test_every_product_matches_hand_drawing(self):
        records, _ = run_benzamide_table()
        for record, (coref, _, _, expected) in zip(records, BENZAMIDE_ROWS):
            assert record.coreference == coref
            assert record.smiles == canonical_smiles(expected), coref

    def test_products_conserve_heavy_atoms(self):
        scaffold_atoms = len(parse_smiles(BENZAMIDE_SCAFFOLD).atoms)
        records, _ = run_benzamide_table()
        for record, (coref, r1, r2, _) in zip(records, BENZAMIDE_ROWS):
            fragment_atoms = 0
            for s in (r1, r2):
                if s.kind == "hydrogen":
                    fragment_atoms += 1  # bare placeholder, no heavy payload
                elif s.kind == "fragment_smiles":
                    fragment_atoms += len(parse_smiles(s.payload).atoms)
                else:
                    fragment_atoms += len(parse_smiles(ABBREVS.lookup(s.payload)).atoms)
            expected = scaffold_atoms + fragment_atoms - 2 * 2
            assert len(parse_smiles(record.smiles).atoms) == expected, coref


class TestZipProperties:
    def test_order_independence(self):
        scaffold = scaffold_from_smiles(BENZAMIDE_SCAFFOLD)
        frags = {
            "R1": resolve_substituent(sub("abbreviation", "OMe"), ABBREVS),
            "R2": resolve_substituent(sub("abbreviation", "Et"), ABBREVS),
        }
        forward = zip_assignment(scaffold, frags)
        backward = zip_assignment(scaffold, dict(reversed(list(frags.items()))))
        from bioextract.chem import to_canonical_smiles

        assert to_canonical_smiles(forward) == to_canonical_smiles(backward)

    def test_determinism(self):
        first, _ = run_benzamide_table()
        second, _ = run_benzamide_table()
        assert [r.smiles for r in first] == [r.smiles for r in second]

    def test_product_has_no_attachment_points(self):
        records, _ = run_benzamide_table()
        for record in records:
            assert not parse_smiles(record.smiles).attachment_points


SCAFFOLD_POOL = [
    "c1ccc(cc1)[R1]",
    "[R1]c1ccc(cc1)C(=O)N[R2]",
    "[R1]CC[R2]",
    "[R1]c1ccc([R2])cc1",
    "O=C([R1])N[R2]",
    "[R1]OC(=O)[R2]",
    "[R1]C1CCC([R2])CC1",
    "[R1]C([R2])CC[R3]",
    "[R1]N([R2])C(=O)C[R3]",
    "[R1]c1ccccc1[R2]",
]

FRAGMENT_POOL = [
    "*C", "*CC", "*CCC", "*C(C)C", "*O", "*OC", "*N", "*NC", "*F", "*Cl",
    "*Br", "*C#N", "*C(F)(F)F", "*c1ccccc1", "*Cc1ccccc1", "*C(=O)O",
    "*OCC", "*CCN", "*S", "*C(C)(C)C",
]


def conservation_trial(rng: random.Random) -> None:
    scaffold = scaffold_from_smiles(rng.choice(SCAFFOLD_POOL))
    assignment = {}
    expected_atoms = len(scaffold.graph.atoms)
    for label in scaffold.labels:
        if rng.random() < 0.2:
            s = sub("hydrogen")
            expected_atoms += 1 - 2
        else:
            payload = rng.choice(FRAGMENT_POOL)
            s = sub("fragment_smiles", payload)
            expected_atoms += len(parse_smiles(payload).atoms) - 2
        assignment[label] = resolve_substituent(s, ABBREVS)
    product = zip_assignment(scaffold, assignment)
    assert len(product.atoms) == expected_atoms
    assert not product.attachment_points


class TestRandomZipConservation:
    def test_atom_conservation_sampled(self):
        rng = random.Random(20250822)
        for _ in range(150):
            conservation_trial(rng)


class TestFailureRouting:
    def test_unknown_abbreviation(self):
        records, failures = enumerate_simple(
            "c1ccc(cc1)[R1]", [("x", {"R1": sub("abbreviation", "Qz")})]
        )
        assert records == []
        assert failures[0].cause == "unknown_abbreviation"
        assert failures[0].coreference == "x"

    def test_invalid_fragment(self):
        _, failures = enumerate_simple(
            "c1ccc(cc1)[R1]", [("x", {"R1": sub("fragment_smiles", "*C1CC")})]
        )
        assert failures[0].cause == "invalid_fragment"

    def test_fragment_without_attachment_point(self):
        _, failures = enumerate_simple(
            "c1ccc(cc1)[R1]", [("x", {"R1": sub("fragment_smiles", "CC")})]
        )
        assert failures[0].cause == "invalid_fragment"

    def test_fragment_with_two_attachment_points(self):
        _, failures = enumerate_simple(
            "c1ccc(cc1)[R1]", [("x", {"R1": sub("fragment_smiles", "*C*")})]
        )
        assert failures[0].cause == "invalid_fragment"

    def test_missing_label_without_default_fails(self):
        _, failures = enumerate_simple(
            "[R1]CC[R2]", [("x", {"R1": sub("fragment_smiles", "*C")})]
        )
        assert failures[0].cause == "missing_label"

    def test_missing_label_with_hydrogen_default_succeeds(self):
        scaffold = scaffold_from_smiles("[R1]CC[R2]")
        table = RGroupTable(
            rows=(RGroupRow("x", (("R1", sub("fragment_smiles", "*O")),)),),
            hydrogen_default_labels=frozenset({"R2"}),
        )
        records, failures = enumerate_rows(scaffold, table, ABBREVS)
        assert not failures
        assert records[0].smiles == canonical_smiles("OCC")

    def test_iupac_name_without_client_fails_soft(self):
        _, failures = enumerate_simple(
            "c1ccc(cc1)[R1]", [("x", {"R1": sub("iupac_name", "methyl")})]
        )
        assert failures[0].cause == "name_resolution_failed"

    def test_visual_index_without_detection_fails(self):
        _, failures = enumerate_simple(
            "c1ccc(cc1)[R1]", [("x", {"R1": sub("visual_index", "9")})]
        )
        assert failures[0].cause == "missing_visual_detection"

    def test_totality_on_mixed_table(self):
        rows = [
            ("ok", {"R1": sub("abbreviation", "Me")}),
            ("bad1", {"R1": sub("abbreviation", "Qz")}),
            ("bad2", {"R1": sub("fragment_smiles", "CC")}),
            ("ok2", {"R1": sub("hydrogen")}),
        ]
        records, failures = enumerate_simple("c1ccc(cc1)[R1]", rows)
        assert len(records) + len(failures) == 4
        assert [r.coreference for r in records] == ["ok", "ok2"]
        assert all(f.cause in FAILURE_CAUSES for f in failures)


class TestResolution:
    def test_iupac_name_with_client(self):
        records, failures = enumerate_simple_with_client(
            "c1ccc(cc1)[R1]",
            [("x", {"R1": sub("iupac_name", "methyl")})],
            lambda name: "*C",
        )
        assert not failures
        assert records[0].smiles == canonical_smiles("Cc1ccccc1")

    def test_visual_index_with_detection(self):
        scaffold = scaffold_from_smiles("c1ccc(cc1)[R1]")
        table = RGroupTable(
            rows=(RGroupRow("x", (("R1", sub("visual_index", "7")),)),)
        )
        records, failures = enumerate_rows(
            scaffold, table, ABBREVS, detections={"7": "*OC"}
        )
        assert not failures
        assert records[0].smiles == canonical_smiles("COc1ccccc1")

    def test_hydrogen_spelled_as_abbreviation(self):
        records, failures = enumerate_simple(
            "c1ccc(cc1)[R1]", [("x", {"R1": sub("abbreviation", "H")})]
        )
        assert not failures
        assert records[0].smiles == canonical_smiles("c1ccccc1")

    def test_formula_kind_uses_abbreviation_table(self):
        records, failures = enumerate_simple(
            "c1ccc(cc1)[R1]", [("x", {"R1": sub("formula", "OMe")})]
        )
        assert not failures
        assert records[0].smiles == canonical_smiles("COc1ccccc1")

    def test_case_insensitive_fallback_on_unique_match(self):
        records, failures = enumerate_simple(
            "c1ccc(cc1)[R1]", [("x", {"R1": sub("abbreviation", "OME")})]
        )
        assert not failures
        assert records[0].smiles == canonical_smiles("COc1ccccc1")


def enumerate_simple_with_client(scaffold_smiles, rows, name_client):
    scaffold = scaffold_from_smiles(scaffold_smiles)
    table = RGroupTable(
        rows=tuple(
            RGroupRow(coref, tuple(sorted(cells.items()))) for coref, cells in rows
        )
    )
    return enumerate_rows(scaffold, table, ABBREVS, name_client=name_client)


class TestScaffoldValidation:
    def test_scaffold_without_attachment_points_rejected(self):
        with pytest.raises(MarkushError):
            scaffold_from_smiles("c1ccccc1")

    def test_unparsable_scaffold_rejected(self):
        with pytest.raises(MarkushError):
            scaffold_from_smiles("c1cc[R1]")

    def test_zip_rejects_missing_label(self):
        scaffold = scaffold_from_smiles("[R1]CC[R2]")
        with pytest.raises(MarkushError):
            zip_assignment(
                scaffold, {"R1": resolve_substituent(sub("hydrogen"), ABBREVS)}
            )
