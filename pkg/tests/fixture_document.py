"""Scripted two-page document and backend used by pipeline, curation, and
acceptance tests.

The expected outcome is fixed by hand before any code runs it:

  structures (7): Compound 1 aspirin, Compound 2 caffeine, Compound 3
  ibuprofen (explicit, detections 0-2), rows 4a-4d toluene / anisole /
  chlorobenzene / benzene zipped from the one-label scaffold (detection 3).

  measurements (13 after merge): eight text items, four table items, two
  figure items; the table's "Compound 1 / IC50 = 25 nM / EGFR" duplicates
  the text item on key "1" and survives as the table modality with both
  provenance entries.

  triplets (12): every measurement except figure-modality "compound 5"
  (no structure carries key "5") joins exactly one structure.
"""

from __future__ import annotations

from bioextract.pipeline import CallableBackend, ParsedDocument, document_to_json
from bioextract.pipeline.document import PageImage, Region, TextSegment

DOC_ID = "fixture-0001"

EXPECTED_STRUCTURES = 7
EXPECTED_MEASUREMENTS = 13
EXPECTED_TRIPLETS = 12
EXPECTED_UNMATCHED_MEASUREMENTS = 1

# (coreference, input SMILES spelling, origin) in record order
EXPECTED_STRUCTURE_INPUTS = [
    ("Compound 1", "CC(=O)Oc1ccccc1C(=O)O", "explicit"),
    ("Compound 2", "Cn1cnc2c1c(=O)n(C)c(=O)n2C", "explicit"),
    ("Compound 3", "CC(C)Cc1ccc(cc1)C(C)C(=O)O", "explicit"),
    ("4a", "Cc1ccccc1", "markush_row"),
    ("4b", "COc1ccccc1", "markush_row"),
    ("4c", "Clc1ccccc1", "markush_row"),
    ("4d", "c1ccccc1", "markush_row"),
]

# (protein, join key, assay, relation, value_nM as int) in triplet order
EXPECTED_TRIPLET_SHAPE = [
    ("EGFR", "1", "IC50", "=", 25),
    ("EGFR", "2", "IC50", "=", 1200),
    ("CDK2", "3", "Ki", "=", 40),
    ("EGFR", "4a", "IC50", "=", 5),
    ("EGFR", "4b", "IC50", "=", 18),
    ("EGFR", "4c", "IC50", ">", 10000),
    ("EGFR", "4d", "IC50", "=", 250),
    ("JAK2", "4b", "Kd", "≤", 1000),
    ("CDK2", "2", "Kd", "=", 500),
    ("CDK2", "4a", "Ki", "=", 100),
    ("EGFR", "3", "IC50", "=", 35),
    ("JAK2", "3", "IC50", "~", 2000),
]


def build_document() -> ParsedDocument:
    return ParsedDocument(
        doc_id=DOC_ID,
        text_segments=(
            TextSegment("p1", "Aspirin derivatives were assayed against EGFR and CDK2 kinases.", 1, "paragraph"),
            TextSegment("p2", "Against EGFR, compound 1 showed IC50 = 25 nM and compound 2 showed IC50 = 1.2 µM.", 1, "paragraph"),
            TextSegment("p3", "Compound 3 inhibited CDK2 with Ki = 40 nM.", 1, "paragraph"),
            TextSegment("cap1", "Figure 1. Chemical structures of compounds 1-3.", 1, "caption"),
            TextSegment("p4", "Markush derivatives 4a-4d: against EGFR, 4a IC50 = 5 nM; 4b IC50 = 18 nM; 4c IC50 > 10 µM; 4d IC50 = 250 nM.", 2, "paragraph"),
            TextSegment("p5", "On JAK2, 4b bound with Kd ≤ 1 µM.", 2, "paragraph"),
            TextSegment("tbl1", "Table 1. Compound 1 IC50 = 25 nM (EGFR); Compound 2 Kd = 0.5 µM (CDK2); 4a Ki = 100 nM (CDK2); Compound 3 IC50 = 35 nM (EGFR).", 2, "table_text"),
            TextSegment("cap2", "Figure 2. Dose-response curves for compounds 3 and 5.", 2, "caption"),
        ),
        page_images=(PageImage(1, ""), PageImage(2, "")),
        regions=(
            Region("fig1", 1, (0.05, 0.15, 0.75, 0.75), "figure"),
            Region("fig2", 2, (0.55, 0.5, 0.95, 0.9), "figure", caption_id="cap2"),
            Region("tblr1", 2, (0.05, 0.5, 0.5, 0.9), "table"),
        ),
    )


_DETECTIONS = {
    1: [
        {"box": [0.1, 0.2, 0.3, 0.4], "is_markush": False},
        {"box": [0.5, 0.2, 0.7, 0.4], "is_markush": False},
        {"box": [0.1, 0.5, 0.3, 0.7], "is_markush": False},
    ],
    2: [
        {"box": [0.1, 0.1, 0.5, 0.45], "is_markush": True},
    ],
}

_OCSR = {
    0: "CC(=O)Oc1ccccc1C(=O)O",
    1: "Cn1cnc2c1c(=O)n(C)c(=O)n2C",
    2: "CC(C)Cc1ccc(cc1)C(C)C(=O)O",
    3: "c1ccc(cc1)[R1]",
}

_COREFERENCES = {0: "Compound 1", 1: "Compound 2", 2: "Compound 3"}

_MARKUSH_TABLE = {
    "rows": [
        {"coreference": "4a", "cells": {"R1": {"kind": "abbreviation", "payload": "Me"}}},
        {"coreference": "4b", "cells": {"R1": {"kind": "abbreviation", "payload": "OMe"}}},
        {"coreference": "4c", "cells": {"R1": {"kind": "abbreviation", "payload": "Cl"}}},
        {"coreference": "4d", "cells": {"R1": {"kind": "hydrogen", "payload": ""}}},
    ],
    "hydrogen_default_labels": [],
}

_MEASUREMENT_ITEMS = {
    "text": [
        {"protein": "EGFR", "ligand_coreference": "compound 1", "text": "IC50 = 25 nM", "provenance": [[1, "p2"]]},
        {"protein": "EGFR", "ligand_coreference": "compound 2", "text": "IC50 = 1.2 µM", "provenance": [[1, "p2"]]},
        {"protein": "CDK2", "ligand_coreference": "3", "text": "Ki = 40 nM", "provenance": [[1, "p3"]]},
        {"protein": "EGFR", "ligand_coreference": "4a", "text": "IC50 = 5 nM", "provenance": [[2, "p4"]]},
        {"protein": "EGFR", "ligand_coreference": "4b", "text": "IC50 = 18 nM", "provenance": [[2, "p4"]]},
        {"protein": "EGFR", "ligand_coreference": "4c", "text": "IC50 > 10 µM", "provenance": [[2, "p4"]]},
        {"protein": "EGFR", "ligand_coreference": "4d", "text": "IC50 = 250 nM", "provenance": [[2, "p4"]]},
        {"protein": "JAK2", "ligand_coreference": "4b", "text": "Kd ≤ 1 µM", "provenance": [[2, "p5"]]},
    ],
    "table": [
        {"protein": "EGFR", "ligand_coreference": "Compound 1", "text": "IC50 = 25 nM", "provenance": [[2, "tbl1"]]},
        {"protein": "CDK2", "ligand_coreference": "Compound 2", "text": "Kd = 0.5 µM", "provenance": [[2, "tbl1"]]},
        {"protein": "CDK2", "ligand_coreference": "4a", "text": "Ki = 100 nM", "provenance": [[2, "tbl1"]]},
        {"protein": "EGFR", "ligand_coreference": "Compound 3", "text": "IC50 = 35 nM", "provenance": [[2, "tbl1"]]},
    ],
    "figure": [
        {"protein": "JAK2", "ligand_coreference": "3", "text": "IC50 ≈ 2 µM", "provenance": [[2, "fig2"]]},
        {"protein": "EGFR", "ligand_coreference": "compound 5", "text": "IC50 = 50 nM", "provenance": [[2, "fig2"]]},
    ],
}


def backend_fn(backend: str, payload: dict) -> dict:
    if backend == "layout":
        return {"document": document_to_json(build_document()), "model_version": 1}
    if backend == "detect":
        page = payload["page"]
        return {"detections": _DETECTIONS.get(page, []), "model_version": 1}
    if backend == "ocsr":
        return {"smiles": _OCSR.get(payload["detection"]), "model_version": 1}
    if backend == "reason":
        kind = payload["kind"]
        if kind == "coreference":
            return {
                "assignments": [
                    {"detection": item["detection"], "coreference": _COREFERENCES[item["detection"]]}
                    for item in payload["items"]
                    if item["detection"] in _COREFERENCES
                ],
                "model_version": 1,
            }
        if kind == "markush_table":
            return {"table": _MARKUSH_TABLE, "model_version": 1}
        if kind == "measurements":
            return {"items": _MEASUREMENT_ITEMS[payload["modality"]], "model_version": 1}
    raise ValueError(f"unscripted backend request: {backend} {payload.get('kind')}")


def scripted_backend() -> CallableBackend:
    return CallableBackend(backend_fn)
