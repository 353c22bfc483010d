"""Record the committed pipeline fixture.

Writes tests/data/fixture-0001/doc.json, fills the adjacent cassette by
running the extraction flow against the scripted backend once, and emits
gold.jsonl from the hand-fixed expectation tables. The test suite replays
the cassette; it never talks to a live backend. Rerun after changing
tests/fixture_document.py.
"""

from __future__ import annotations

import json
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "tests"))

from fixture_document import (
    DOC_ID,
    EXPECTED_STRUCTURE_INPUTS,
    EXPECTED_TRIPLET_SHAPE,
    _DETECTIONS,
    _OCSR,
    build_document,
    scripted_backend,
)

from bioextract.join.join import normalize_coreference
from bioextract.pipeline import (
    Cassette,
    PipelineConfig,
    RecordingBackend,
    document_to_json,
    run_document,
)

FIXTURE_DIR = ROOT / "tests" / "data" / DOC_ID


def write_gold(path: Path) -> None:
    smiles_by_key = {
        normalize_coreference(coref): smiles
        for coref, smiles, _ in EXPECTED_STRUCTURE_INPUTS
    }
    triplets = [
        {
            "protein": protein,
            "smiles": smiles_by_key[key],
            "assay_type": assay,
            "relation": relation,
            "value_nM": value,
            "ligand_coreference": key,
        }
        for protein, key, assay, relation, value in EXPECTED_TRIPLET_SHAPE
    ]
    measurements = [
        {k: t[k] for k in ("protein", "ligand_coreference", "assay_type", "relation", "value_nM")}
        for t in triplets
    ]
    # figure item with no matching structure: a measurement, never a triplet
    measurements.append(
        {
            "protein": "EGFR",
            "ligand_coreference": "5",
            "assay_type": "IC50",
            "relation": "=",
            "value_nM": 50,
        }
    )
    structures = [
        {"coreference": coref, "smiles": smiles, "is_markush": origin == "markush_row"}
        for coref, smiles, origin in EXPECTED_STRUCTURE_INPUTS
    ]
    detections = [
        {"page": page, "box": d["box"], "smiles": _OCSR[i]}
        for i, (page, d) in enumerate(
            (page, d) for page in sorted(_DETECTIONS) for d in _DETECTIONS[page]
        )
    ]
    record = {
        "doc_id": DOC_ID,
        "triplets": triplets,
        "measurements": measurements,
        "structures": structures,
        "detections": detections,
    }
    path.write_text(json.dumps(record, sort_keys=True) + "\n", encoding="utf-8")


def main() -> None:
    FIXTURE_DIR.mkdir(parents=True, exist_ok=True)
    # stem doubles as the output directory name the scorer joins on
    doc_path = FIXTURE_DIR / f"{DOC_ID}.json"
    doc_path.write_text(
        json.dumps(document_to_json(build_document()), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )

    cassette_dir = FIXTURE_DIR / "cassette"
    if cassette_dir.exists():
        shutil.rmtree(cassette_dir)
    client = RecordingBackend(scripted_backend(), Cassette(cassette_dir))

    with tempfile.TemporaryDirectory() as tmp:
        record = run_document(doc_path, client, PipelineConfig(), Path(tmp) / DOC_ID)

    bad = {name: s for name, s in record.stage_status.items() if s != "done"}
    if bad:
        raise SystemExit(f"fixture run did not complete cleanly: {bad}")

    write_gold(FIXTURE_DIR / "gold.jsonl")

    entries = sorted(p.name for p in cassette_dir.glob("*.json"))
    print(f"doc.json: {doc_path}")
    print(f"cassette entries: {len(entries)}")
    print(
        f"structures={len(record.structures)}"
        f" measurements={len(record.measurements)}"
        f" triplets={len(record.triplets)}"
    )


if __name__ == "__main__":
    main()
