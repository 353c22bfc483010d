"""Drive one document through detection, OCSR, coreference, Markush
enumeration, measurement extraction, and the final join.

The structure and measurement branches only share the immutable parsed
document, so they run concurrently; all record mutation happens under one
lock and every artifact is ordered by stable keys, which keeps the
serialized record independent of thread scheduling. A failed stage marks
its dependents skipped and never blocks persisting what earlier stages
produced.
"""

from __future__ import annotations

import json
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Union

from ..chem import ChemError, parse_smiles, to_canonical_smiles
from ..join.join import StructureRecord, join
from ..markush.abbreviations import AbbreviationTable, default_abbreviations
from ..markush.engine import (
    MarkushError,
    RowFailure,
    enumerate_rows,
    scaffold_from_smiles,
)
from ..measure import (
    Measurement,
    MeasurementError,
    NonConcentrationUnit,
    NormalizedMeasurement,
    merge_modalities,
    normalize,
    parse_measurement_text,
)
from .backends import BackendClient, BackendError, NameClient
from .document import (
    AugmentedPage,
    Detection,
    DocumentError,
    ParsedDocument,
    document_from_json,
)
from .record import (
    DONE,
    FAILED,
    RUNNING,
    SKIPPED,
    STAGE_DEPS,
    ExtractionRecord,
    MarkushJob,
    record_from_json,
    table_from_json,
    write_record,
    write_triplets,
)

MODALITY_SOURCES = ("text", "table", "figure")


@dataclass(frozen=True)
class PipelineConfig:
    workers: int = 1
    reasoner_batch: int = 4  # molecules per coreference call
    dpi: int = 200
    abbreviations_path: Optional[str] = None

    def __post_init__(self):
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        if self.reasoner_batch < 1:
            raise ValueError("reasoner_batch must be at least 1")


def build_augmented_pages(
    parsed: ParsedDocument, detections: tuple[Detection, ...]
) -> tuple[AugmentedPage, ...]:
    """Printed index labels follow (page, y0, x0) reading order, from 1.

    The labels are a pure function of detection geometry so a re-run over
    the same detections reproduces the same augmented pages.
    """
    ordered = sorted(detections, key=lambda d: (d.page, d.box[1], d.box[0], d.id))
    label_of = {d.id: n for n, d in enumerate(ordered, start=1)}
    refs = {p.page: p.image_ref for p in parsed.page_images}
    pages = []
    for page in sorted({d.page for d in detections}):
        on_page = sorted(
            (d for d in detections if d.page == page), key=lambda d: label_of[d.id]
        )
        pages.append(
            AugmentedPage(
                page=page,
                image_ref=refs.get(page, ""),
                overlays=tuple((d.id, d.box, label_of[d.id]) for d in on_page),
            )
        )
    return tuple(pages)


class _Run:
    """Single-document execution state; one instance per run_document call."""

    def __init__(
        self,
        record: ExtractionRecord,
        client: BackendClient,
        config: PipelineConfig,
        out_dir: Optional[Path],
        abbrevs: AbbreviationTable,
    ):
        self.record = record
        self.client = client
        self.config = config
        self.out_dir = out_dir
        self.abbrevs = abbrevs
        self.lock = threading.Lock()
        self.timing: dict[str, float] = {}

    def persist(self) -> None:
        if self.out_dir is not None:
            write_record(self.record, self.out_dir)

    def run_stage(self, stage: str, fn: Callable[[], None]) -> bool:
        with self.lock:
            blocked = any(
                self.record.stage_status[dep] != DONE for dep in STAGE_DEPS[stage]
            )
            if blocked:
                self.record.set_status(stage, SKIPPED)
                self.persist()
                return False
            self.record.set_status(stage, RUNNING)
        started = time.monotonic()
        try:
            fn()
        except (BackendError, DocumentError, MeasurementError, ValueError, KeyError) as exc:
            with self.lock:
                self.record.add_warning(stage, f"stage failed: {exc}")
                self.record.set_status(stage, FAILED)
                self.timing[stage] = time.monotonic() - started
                self.persist()
            return False
        with self.lock:
            self.record.set_status(stage, DONE)
            self.timing[stage] = time.monotonic() - started
            self.persist()
        return True

    def call(self, backend: str, payload: dict) -> dict:
        response = self.client.call(backend, payload)
        if not isinstance(response, dict):
            raise BackendError(f"{backend} returned a non-object payload")
        version = response.get("model_version")
        if isinstance(version, int):
            with self.lock:
                self.record.backend_versions[backend] = version
        return response


def _segment_json(parsed: ParsedDocument, kinds: tuple[str, ...], page: Optional[int] = None):
    return [
        {"id": s.id, "text": s.text, "page": s.page, "kind": s.kind}
        for s in parsed.segments_of_kind(*kinds)
        if page is None or s.page == page
    ]


def _stage_parse(run: _Run, source) -> None:
    record = run.record
    if isinstance(source, ParsedDocument):
        record.parsed = source
        record.doc_id = source.doc_id
        return
    path = Path(source)
    if path.suffix.lower() == ".json":
        data = json.loads(path.read_text(encoding="utf-8"))
        record.parsed = document_from_json(data)
    else:
        response = run.call(
            "layout",
            {"kind": "layout", "doc_id": path.stem, "source": path.name},
        )
        record.parsed = document_from_json(response["document"])
    record.doc_id = record.parsed.doc_id


def _stage_detect(run: _Run) -> None:
    record = run.record
    parsed = record.parsed
    refs = {p.page: p.image_ref for p in parsed.page_images}
    detections: list[Detection] = []
    for page in parsed.pages():
        response = run.call(
            "detect",
            {
                "kind": "detect",
                "doc_id": record.doc_id,
                "page": page,
                "image_ref": refs.get(page, ""),
            },
        )
        for item in response.get("detections", ()):
            detections.append(
                Detection(
                    id=len(detections),
                    page=page,
                    box=tuple(item["box"]),
                    is_markush=bool(item.get("is_markush", False)),
                )
            )
    record.detections = tuple(detections)
    record.augmented_pages = build_augmented_pages(parsed, record.detections)


def _stage_ocsr(run: _Run) -> None:
    record = run.record
    updated: list[Detection] = []
    flags: list[tuple[int, str]] = []
    for d in record.detections:
        try:
            response = run.call(
                "ocsr",
                {
                    "kind": "ocsr",
                    "doc_id": record.doc_id,
                    "detection": d.id,
                    "page": d.page,
                    "box": list(d.box),
                },
            )
        except BackendError as exc:
            flags.append((d.id, "ocsr_error"))
            run.record.add_warning("ocsr", f"detection {d.id}: {exc}")
            updated.append(d)
            continue
        smiles = response.get("smiles")
        if not smiles:
            flags.append((d.id, "ocsr_empty"))
            updated.append(d)
            continue
        updated.append(
            Detection(
                id=d.id,
                page=d.page,
                box=d.box,
                raw_smiles=str(smiles),
                is_markush=d.is_markush,
            )
        )
    record.detections = tuple(updated)
    record.detection_flags = record.detection_flags + tuple(flags)


def _stage_coreference(run: _Run) -> None:
    record = run.record
    assignments: dict[int, str] = {}
    for page_view in record.augmented_pages:
        overlays = list(page_view.overlays)
        for start in range(0, len(overlays), run.config.reasoner_batch):
            batch = overlays[start : start + run.config.reasoner_batch]
            response = run.call(
                "reason",
                {
                    "kind": "coreference",
                    "doc_id": record.doc_id,
                    "page": page_view.page,
                    "items": [
                        {"label": n, "detection": det, "box": list(box)}
                        for det, box, n in batch
                    ],
                    "segments": _segment_json(
                        record.parsed, ("paragraph", "caption"), page_view.page
                    ),
                },
            )
            for entry in response.get("assignments", ()):
                det = int(entry["detection"])
                coref = str(entry.get("coreference", "")).strip()
                if coref:
                    assignments[det] = coref
    record.coreference_map = tuple(sorted(assignments.items()))


def _stage_markush(run: _Run) -> None:
    record = run.record
    name_client = NameClient(run.client)
    visual = {
        str(d.id): d.raw_smiles
        for d in record.detections
        if d.raw_smiles and not d.is_markush
    }
    jobs: list[MarkushJob] = []
    failures: list[tuple[int, RowFailure]] = []
    rows_records: list[StructureRecord] = []
    for d in record.detections:
        if not d.is_markush:
            continue
        if not d.raw_smiles:
            run.record.add_warning("markush", f"detection {d.id}: scaffold has no structure")
            continue
        try:
            response = run.call(
                "reason",
                {
                    "kind": "markush_table",
                    "doc_id": record.doc_id,
                    "scaffold_detection": d.id,
                    "scaffold_smiles": d.raw_smiles,
                    "segments": _segment_json(record.parsed, ("table_text", "caption")),
                },
            )
            table = table_from_json(response["table"])
        except (BackendError, KeyError, TypeError, ValueError) as exc:
            run.record.add_warning("markush", f"detection {d.id}: table unavailable: {exc}")
            continue
        jobs.append(MarkushJob(scaffold_detection=d.id, table=table))
        try:
            scaffold = scaffold_from_smiles(d.raw_smiles)
        except MarkushError as exc:
            failures.extend(
                (
                    d.id,
                    RowFailure(
                        coreference=row.coreference, cause=exc.cause, detail=str(exc)
                    ),
                )
                for row in table.rows
            )
            continue
        records, row_failures = enumerate_rows(
            scaffold,
            table,
            abbrevs=run.abbrevs,
            name_client=name_client,
            detections=visual,
            base_provenance=(str(d.id),),
        )
        rows_records.extend(records)
        failures.extend((d.id, f) for f in row_failures)
    record.markush_jobs = tuple(jobs)
    record.markush_failures = tuple(failures)
    _assemble_structures(run, rows_records)


def _assemble_structures(run: _Run, markush_records: list[StructureRecord]) -> None:
    record = run.record
    coref_of = dict(record.coreference_map)
    flags: list[tuple[int, str]] = []
    explicit: list[StructureRecord] = []
    for d in record.detections:
        if d.is_markush or not d.raw_smiles:
            continue
        coref = coref_of.get(d.id)
        if not coref:
            flags.append((d.id, "no_coreference"))
            continue
        try:
            smiles = to_canonical_smiles(parse_smiles(d.raw_smiles))
        except ChemError:
            flags.append((d.id, "ocsr_invalid"))
            continue
        explicit.append(
            StructureRecord(
                coreference=coref,
                smiles=smiles,
                origin="explicit",
                provenance=(str(d.id),),
            )
        )
    seen: set[tuple[str, str]] = set()
    structures: list[StructureRecord] = []
    for s in explicit + markush_records:
        key = (s.coreference, s.smiles)
        if key in seen:
            continue
        seen.add(key)
        structures.append(s)
    record.structures = tuple(structures)
    record.detection_flags = record.detection_flags + tuple(flags)


def _stage_measure(run: _Run) -> None:
    record = run.record
    parsed = record.parsed
    by_modality: dict[str, list[Measurement]] = {m: [] for m in MODALITY_SOURCES}
    for modality in MODALITY_SOURCES:
        payload = {
            "kind": "measurements",
            "doc_id": record.doc_id,
            "modality": modality,
        }
        if modality == "text":
            payload["segments"] = _segment_json(parsed, ("paragraph", "caption"))
        elif modality == "table":
            payload["segments"] = _segment_json(parsed, ("table_text",))
            payload["regions"] = [
                {"id": r.id, "page": r.page, "image_ref": r.image_ref}
                for r in parsed.regions
                if r.kind == "table"
            ]
        else:
            payload["regions"] = [
                {"id": r.id, "page": r.page, "image_ref": r.image_ref}
                for r in parsed.regions
                if r.kind == "figure"
            ]
        try:
            response = run.call("reason", payload)
            items = response["items"]
            for item in items:
                _collect_measurement(run, modality, item, by_modality[modality])
            record.modality_status[modality] = DONE
        except (BackendError, KeyError, TypeError) as exc:
            record.modality_status[modality] = FAILED
            run.record.add_warning("measure", f"{modality} modality failed: {exc}")
    if all(record.modality_status[m] == FAILED for m in MODALITY_SOURCES):
        raise BackendError("all measurement modalities failed")
    merged = merge_modalities(
        by_modality["text"], by_modality["table"], by_modality["figure"]
    )
    normalized: list[NormalizedMeasurement] = []
    for m in merged:
        try:
            normalized.append(normalize(m))
        except NonConcentrationUnit:
            run.record.add_warning(
                "measure",
                f"dropped non-concentration value {m.value} {m.unit} for "
                f"{m.ligand_coreference!r}",
            )
    record.measurements = tuple(normalized)


def _collect_measurement(
    run: _Run, modality: str, item: dict, out: list[Measurement]
) -> None:
    protein = str(item.get("protein", "")).strip()
    coref = str(item.get("ligand_coreference", "")).strip()
    text = str(item.get("text", ""))
    provenance = tuple((int(p), str(r)) for p, r in item.get("provenance", ()))
    if not protein or not coref:
        run.record.add_warning(
            "measure", f"{modality}: item missing protein or ligand: {text!r}"
        )
        return
    try:
        activities = parse_measurement_text(text)
    except MeasurementError as exc:
        run.record.add_warning("measure", f"{modality}: dropped {text!r}: {exc}")
        return
    for a in activities:
        out.append(
            Measurement(
                protein=protein,
                ligand_coreference=coref,
                assay_type=a.assay_type,
                value=a.value,
                unit=a.unit,
                modality=modality,
                provenance=provenance,
                relation=a.relation,
                uncertainty=a.uncertainty,
                range_low=a.range_low,
                range_high=a.range_high,
            )
        )


def _stage_join(run: _Run) -> None:
    record = run.record
    result = join(record.measurements, record.structures)
    record.triplets = result.triplets
    for w in result.warnings:
        record.add_warning("join", w)
    record.validate_provenance()


def run_document(
    source: Union[str, Path, ParsedDocument],
    client: BackendClient,
    config: PipelineConfig = PipelineConfig(),
    out_dir: Optional[Union[str, Path]] = None,
) -> ExtractionRecord:
    """Run the full flow over one document and return its record.

    ``source`` is a PDF path (layout backend required), a pre-parsed
    document JSON path, or a ParsedDocument. With ``out_dir`` set, the
    record is persisted after every stage, triplets and a timing sidecar
    at the end.
    """
    doc_id = source.doc_id if isinstance(source, ParsedDocument) else Path(source).stem
    abbrevs = (
        default_abbreviations()
        if config.abbreviations_path is None
        else _load_abbrevs(config.abbreviations_path)
    )
    run = _Run(
        record=ExtractionRecord(doc_id=doc_id),
        client=client,
        config=config,
        out_dir=None if out_dir is None else Path(out_dir),
        abbrevs=abbrevs,
    )

    def structure_branch() -> None:
        run.run_stage("detect", lambda: _stage_detect(run))
        run.run_stage("ocsr", lambda: _stage_ocsr(run))
        run.run_stage("coreference", lambda: _stage_coreference(run))
        run.run_stage("markush", lambda: _stage_markush(run))

    def measure_branch() -> None:
        run.run_stage("measure", lambda: _stage_measure(run))

    if run.run_stage("parse", lambda: _stage_parse(run, source)):
        if config.workers > 1:
            with ThreadPoolExecutor(max_workers=2) as pool:
                futures = [
                    pool.submit(structure_branch),
                    pool.submit(measure_branch),
                ]
                for f in futures:
                    f.result()
        else:
            structure_branch()
            measure_branch()
        run.run_stage("join", lambda: _stage_join(run))
    else:
        for stage in ("detect", "ocsr", "coreference", "markush", "measure", "join"):
            run.record.set_status(stage, SKIPPED)
        run.persist()

    if run.out_dir is not None:
        write_triplets(run.record, run.out_dir)
        sidecar = run.out_dir / "timing.json"
        sidecar.write_text(
            json.dumps(
                {k: round(v, 6) for k, v in sorted(run.timing.items())}, indent=2
            )
            + "\n",
            encoding="utf-8",
        )
    return run.record


def _load_abbrevs(path: str) -> AbbreviationTable:
    from ..markush.abbreviations import load_abbreviations

    return load_abbreviations(path)


def run_documents(
    sources: list[Union[str, Path]],
    client: BackendClient,
    config: PipelineConfig = PipelineConfig(),
    out_root: Optional[Union[str, Path]] = None,
) -> list[ExtractionRecord]:
    """Process documents concurrently up to config.workers; output order
    follows input order regardless of completion order."""

    def one(source: Union[str, Path]) -> ExtractionRecord:
        out_dir = None
        if out_root is not None:
            out_dir = Path(out_root) / Path(source).stem
        return run_document(source, client, config, out_dir)

    if config.workers <= 1 or len(sources) <= 1:
        return [one(s) for s in sources]
    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        return list(pool.map(one, sources))


def load_record(out_dir: Union[str, Path]) -> ExtractionRecord:
    data = json.loads((Path(out_dir) / "record.json").read_text(encoding="utf-8"))
    return record_from_json(data)
