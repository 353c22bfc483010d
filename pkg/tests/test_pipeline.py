"""Orchestrator behavior over the recorded fixture document.

Every test here replays the committed cassette; no network, no live
backends, so failures point at the pipeline itself.
"""

import json
import shutil
from decimal import Decimal
from pathlib import Path

import pytest

from conftest import FIXTURE_DIR
from fixture_document import (
    DOC_ID,
    EXPECTED_MEASUREMENTS,
    EXPECTED_STRUCTURE_INPUTS,
    EXPECTED_STRUCTURES,
    EXPECTED_TRIPLET_SHAPE,
    EXPECTED_TRIPLETS,
    EXPECTED_UNMATCHED_MEASUREMENTS,
    build_document,
)
from bioextract.chem import canonical_smiles
from bioextract.pipeline.backends import Cassette, CassetteMiss, ReplayBackend
from bioextract.pipeline.document import PageImage, ParsedDocument
from bioextract.pipeline.orchestrator import (
    PipelineConfig,
    build_augmented_pages,
    load_record,
    run_document,
    run_documents,
)
from bioextract.pipeline.record import (
    DONE,
    FAILED,
    SKIPPED,
    STAGES,
    ExtractionRecord,
    record_from_json,
    record_to_json,
)
from bioextract.pipeline.document import Detection

SOURCE = FIXTURE_DIR / f"{DOC_ID}.json"


class TestFixtureReplay:
    def test_all_stages_complete(self, fixture_record):
        assert all(fixture_record.stage_status[s] == DONE for s in STAGES)

    def test_expected_counts(self, fixture_record):
        assert len(fixture_record.structures) == EXPECTED_STRUCTURES
        assert len(fixture_record.measurements) == EXPECTED_MEASUREMENTS
        assert len(fixture_record.triplets) == EXPECTED_TRIPLETS
        joined = {t.provenance[1] for t in fixture_record.triplets}
        unmatched = len(fixture_record.measurements) - len(joined)
        assert unmatched == EXPECTED_UNMATCHED_MEASUREMENTS

    def test_structures_match_expectation_table(self, fixture_record):
        got = {
            (s.coreference, s.smiles, s.origin) for s in fixture_record.structures
        }
        want = {
            (coref, canonical_smiles(smiles), origin)
            for coref, smiles, origin in EXPECTED_STRUCTURE_INPUTS
        }
        assert got == want

    def test_triplets_match_expectation_table(self, fixture_record):
        got = [
            (
                t.measurement.protein,
                t.join_key,
                t.measurement.assay_type,
                t.measurement.relation,
                t.measurement.value_nM,
            )
            for t in fixture_record.triplets
        ]
        want = [
            (protein, key, assay, relation, Decimal(value))
            for protein, key, assay, relation, value in EXPECTED_TRIPLET_SHAPE
        ]
        # Decimal('500.0') == Decimal('500'), so tuple equality is numeric
        key_fn = lambda row: (row[0], row[1], row[2], row[3], float(row[4]))
        assert sorted(got, key=key_fn) == sorted(want, key=key_fn)

    def test_provenance_validates(self, fixture_record):
        fixture_record.validate_provenance()


class TestDeterminism:
    def run_once(self, tmp_path, name, workers):
        out = tmp_path / name
        client = ReplayBackend(Cassette(FIXTURE_DIR / "cassette"))
        run_document(SOURCE, client, PipelineConfig(workers=workers), out)
        return (
            (out / "record.json").read_bytes(),
            (out / "triplets.jsonl").read_bytes(),
        )

    def test_repeat_runs_byte_identical(self, tmp_path):
        first = self.run_once(tmp_path, "a", workers=1)
        second = self.run_once(tmp_path, "b", workers=1)
        assert first == second

    def test_worker_count_does_not_change_output(self, tmp_path):
        serial = self.run_once(tmp_path, "serial", workers=1)
        threaded = self.run_once(tmp_path, "threaded", workers=4)
        assert serial == threaded

    def test_timing_sidecar_stays_out_of_the_record(self, tmp_path):
        out = tmp_path / "timed"
        client = ReplayBackend(Cassette(FIXTURE_DIR / "cassette"))
        run_document(SOURCE, client, PipelineConfig(), out)
        assert (out / "timing.json").exists()
        assert b"timing" not in (out / "record.json").read_bytes()

    def test_run_documents_preserves_input_order(self, tmp_path):
        client = ReplayBackend(Cassette(FIXTURE_DIR / "cassette"))
        records = run_documents(
            [SOURCE, SOURCE], client, PipelineConfig(workers=4), tmp_path / "batch"
        )
        assert [r.doc_id for r in records] == [DOC_ID, DOC_ID]


class TestDegradation:
    def partial_cassette(self, tmp_path, drop):
        target = tmp_path / "cassette"
        target.mkdir()
        for path in (FIXTURE_DIR / "cassette").glob("*.json"):
            if path.stem != drop:
                shutil.copy(path, target / path.name)
        return ReplayBackend(Cassette(target))

    def test_missing_ocsr_degrades_per_detection(self, tmp_path):
        # a dead OCSR backend flags every detection but kills no stage:
        # measurements still come out, structures just have nothing to offer
        client = self.partial_cassette(tmp_path, drop="ocsr")
        record = run_document(SOURCE, client, PipelineConfig(), tmp_path / "out")
        assert all(record.stage_status[s] == DONE for s in STAGES)
        flagged = {flag for _, flag in record.detection_flags}
        assert flagged == {"ocsr_error"}
        assert len(record.detection_flags) == len(record.detections)
        assert record.structures == ()
        assert len(record.measurements) == EXPECTED_MEASUREMENTS
        assert record.triplets == ()
        assert len(record.warnings["ocsr"]) == len(record.detections)

    def test_missing_reasoner_fails_dependent_stages(self, tmp_path):
        client = self.partial_cassette(tmp_path, drop="reason")
        record = run_document(SOURCE, client, PipelineConfig(), tmp_path / "out")
        assert record.stage_status["coreference"] == FAILED
        assert record.stage_status["measure"] == FAILED
        assert all(v == FAILED for v in record.modality_status.values())
        # join still runs over the empty inputs rather than crashing
        assert record.stage_status["join"] == DONE
        assert record.measurements == ()
        assert record.triplets == ()

    def test_missing_detect_skips_whole_structure_branch(self, tmp_path):
        client = self.partial_cassette(tmp_path, drop="detect")
        record = run_document(SOURCE, client, PipelineConfig(), tmp_path / "out")
        assert record.stage_status["detect"] == FAILED
        assert record.stage_status["ocsr"] == SKIPPED
        assert record.stage_status["coreference"] == SKIPPED
        assert record.stage_status["markush"] == SKIPPED
        # measurements still land even with no structures to join against
        assert record.stage_status["measure"] == DONE
        assert record.stage_status["join"] == DONE
        assert record.triplets == ()

    def test_empty_cassette_raises_nothing(self, tmp_path):
        client = ReplayBackend(Cassette(tmp_path / "empty"))
        record = run_document(SOURCE, client, PipelineConfig(), tmp_path / "out")
        assert record.stage_status["detect"] == FAILED

    def test_cassette_miss_carries_backend_name(self):
        client = ReplayBackend(Cassette(Path("/nonexistent")))
        with pytest.raises(CassetteMiss) as exc:
            client.call("detect", {"doc_id": "x"})
        assert exc.value.backend == "detect"


class TestAugmentedPages:
    def parsed(self):
        return ParsedDocument(
            doc_id="aug",
            page_images=(PageImage(page=1, image_ref="p1.png"), PageImage(page=2)),
        )

    def test_reading_order_labels(self):
        detections = (
            Detection(id=10, page=1, box=(0.5, 0.5, 0.6, 0.6)),
            Detection(id=11, page=1, box=(0.1, 0.1, 0.2, 0.2)),
            Detection(id=12, page=2, box=(0.0, 0.0, 0.1, 0.1)),
            Detection(id=13, page=1, box=(0.3, 0.1, 0.4, 0.2)),
        )
        pages = build_augmented_pages(self.parsed(), detections)
        assert [p.page for p in pages] == [1, 2]
        # page 1: top row left-to-right first, then the lower box
        assert [(d, label) for d, _, label in pages[0].overlays] == [
            (11, 1),
            (13, 2),
            (10, 3),
        ]
        assert [(d, label) for d, _, label in pages[1].overlays] == [(12, 4)]
        assert pages[0].image_ref == "p1.png"

    def test_ties_break_on_detection_id(self):
        detections = (
            Detection(id=7, page=1, box=(0.1, 0.1, 0.2, 0.2)),
            Detection(id=3, page=1, box=(0.1, 0.1, 0.2, 0.2)),
        )
        pages = build_augmented_pages(self.parsed(), detections)
        assert [(d, label) for d, _, label in pages[0].overlays] == [(3, 1), (7, 2)]

    def test_no_detections_no_pages(self):
        assert build_augmented_pages(self.parsed(), ()) == ()


class TestRecordCodec:
    def test_round_trip_identity(self, fixture_record):
        data = record_to_json(fixture_record)
        back = record_from_json(data)
        assert record_to_json(back) == data

    def test_json_survives_disk(self, fixture_record, tmp_path):
        from bioextract.pipeline.record import write_record

        path = write_record(fixture_record, tmp_path)
        loaded = load_record(tmp_path)
        assert record_to_json(loaded) == record_to_json(fixture_record)
        # canonical serialization: stable key order, trailing newline
        text = path.read_text(encoding="utf-8")
        assert text == json.dumps(json.loads(text), indent=2, sort_keys=True) + "\n"

    def test_source_document_round_trips(self, fixture_record):
        assert fixture_record.parsed == build_document()

    def test_triplets_jsonl_shape(self, tmp_path):
        client = ReplayBackend(Cassette(FIXTURE_DIR / "cassette"))
        run_document(SOURCE, client, PipelineConfig(), tmp_path / "out")
        lines = (tmp_path / "out" / "triplets.jsonl").read_text().splitlines()
        assert len(lines) == EXPECTED_TRIPLETS
        row = json.loads(lines[0])
        assert set(row) == {
            "protein",
            "smiles",
            "assay_type",
            "relation",
            "value",
            "unit",
            "value_nM",
            "p_value",
            "join_key",
            "provenance",
            "flags",
        }


class TestConfig:
    def test_worker_floor(self):
        with pytest.raises(ValueError):
            PipelineConfig(workers=0)

    def test_batch_floor(self):
        with pytest.raises(ValueError):
            PipelineConfig(reasoner_batch=0)
