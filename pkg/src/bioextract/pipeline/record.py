"""ExtractionRecord: everything one document run produced, serialized as a
single deterministic record.json plus a triplets.jsonl beside it.

Timing never enters record.json (it goes to a sidecar) so replaying a
cassette reproduces the record byte for byte.
"""

from __future__ import annotations

import contextlib
import json
import os
import tempfile
from dataclasses import dataclass, field
from decimal import Decimal
from pathlib import Path
from typing import Optional

from ..join.join import BioactivityTriplet, StructureRecord, triplet_to_record
from ..markush.engine import RGroupRow, RGroupTable, RowFailure, Substituent
from ..measure import Measurement, NormalizedMeasurement, normalize
from .document import (
    AugmentedPage,
    Detection,
    ParsedDocument,
    detection_from_json,
    detection_to_json,
    document_from_json,
    document_to_json,
)

RECORD_SCHEMA_VERSION = 1

STAGES = ("parse", "detect", "ocsr", "coreference", "markush", "measure", "join")

# a stage is skipped when any dependency did not finish
STAGE_DEPS: dict[str, tuple[str, ...]] = {
    "parse": (),
    "detect": ("parse",),
    "ocsr": ("detect",),
    "coreference": ("detect",),
    "markush": ("ocsr",),
    "measure": ("parse",),
    "join": ("parse",),
}

PENDING = "pending"
RUNNING = "running"
DONE = "done"
FAILED = "failed"
SKIPPED = "skipped"

_STATUS_RANK = {PENDING: 0, RUNNING: 1, DONE: 2, FAILED: 2, SKIPPED: 2}


@dataclass(frozen=True)
class MarkushJob:
    scaffold_detection: int
    table: RGroupTable


@dataclass
class ExtractionRecord:
    doc_id: str
    parsed: Optional[ParsedDocument] = None
    detections: tuple[Detection, ...] = ()
    augmented_pages: tuple[AugmentedPage, ...] = ()
    coreference_map: tuple[tuple[int, str], ...] = ()
    markush_jobs: tuple[MarkushJob, ...] = ()
    markush_failures: tuple[tuple[int, RowFailure], ...] = ()
    structures: tuple[StructureRecord, ...] = ()
    measurements: tuple[NormalizedMeasurement, ...] = ()
    triplets: tuple[BioactivityTriplet, ...] = ()
    stage_status: dict[str, str] = field(
        default_factory=lambda: {s: PENDING for s in STAGES}
    )
    detection_flags: tuple[tuple[int, str], ...] = ()
    modality_status: dict[str, str] = field(default_factory=dict)
    # keyed by stage so concurrent branches cannot interleave entries
    warnings: dict[str, tuple[str, ...]] = field(default_factory=dict)
    backend_versions: dict[str, int] = field(default_factory=dict)

    def set_status(self, stage: str, status: str) -> None:
        current = self.stage_status[stage]
        if _STATUS_RANK[status] < _STATUS_RANK[current]:
            raise ValueError(f"stage {stage} cannot move {current} -> {status}")
        self.stage_status[stage] = status

    def add_warning(self, stage: str, text: str) -> None:
        self.warnings[stage] = self.warnings.get(stage, ()) + (text,)

    def validate_provenance(self) -> None:
        """Every triplet must point at an existing structure and measurement."""
        for t in self.triplets:
            sid, mid = t.provenance
            s_idx = int(sid[1:])
            m_idx = int(mid[1:])
            if not (sid.startswith("s") and 0 <= s_idx < len(self.structures)):
                raise ValueError(f"triplet references unknown structure {sid}")
            if not (mid.startswith("m") and 0 <= m_idx < len(self.measurements)):
                raise ValueError(f"triplet references unknown measurement {mid}")


def measurement_to_json(m: Measurement) -> dict:
    data = {
        "protein": m.protein,
        "ligand_coreference": m.ligand_coreference,
        "assay_type": m.assay_type,
        "relation": m.relation,
        "value": str(m.value),
        "unit": m.unit,
        "modality": m.modality,
        "provenance": [[page, region] for page, region in m.provenance],
        "uncertainty": str(m.uncertainty) if m.uncertainty is not None else None,
        "range_low": m.range_low,
        "range_high": m.range_high,
    }
    return data


def measurement_from_json(data: dict) -> NormalizedMeasurement:
    base = Measurement(
        protein=data["protein"],
        ligand_coreference=data["ligand_coreference"],
        assay_type=data["assay_type"],
        value=Decimal(data["value"]),
        unit=data["unit"],
        modality=data["modality"],
        provenance=tuple((int(p), str(r)) for p, r in data["provenance"]),
        relation=data.get("relation", "="),
        uncertainty=Decimal(data["uncertainty"]) if data.get("uncertainty") else None,
        range_low=data.get("range_low", False),
        range_high=data.get("range_high", False),
    )
    return normalize(base)


def substituent_to_json(s: Substituent) -> dict:
    return {"kind": s.kind, "payload": s.payload}


def table_to_json(table: RGroupTable) -> dict:
    return {
        "rows": [
            {
                "coreference": row.coreference,
                "cells": {
                    label: substituent_to_json(sub) for label, sub in row.assignment
                },
            }
            for row in table.rows
        ],
        "hydrogen_default_labels": sorted(table.hydrogen_default_labels),
    }


def table_from_json(data: dict) -> RGroupTable:
    rows = tuple(
        RGroupRow(
            coreference=row["coreference"],
            assignment=tuple(
                (label, Substituent(kind=c["kind"], payload=c.get("payload", "")))
                for label, c in sorted(row["cells"].items())
            ),
        )
        for row in data["rows"]
    )
    return RGroupTable(
        rows=rows,
        hydrogen_default_labels=frozenset(data.get("hydrogen_default_labels", ())),
    )


def structure_to_json(s: StructureRecord) -> dict:
    return {
        "coreference": s.coreference,
        "smiles": s.smiles,
        "origin": s.origin,
        "provenance": list(s.provenance),
    }


def structure_from_json(data: dict) -> StructureRecord:
    return StructureRecord(
        coreference=data["coreference"],
        smiles=data["smiles"],
        origin=data["origin"],
        provenance=tuple(data["provenance"]),
    )


def triplet_from_json(data: dict, measurements: tuple[NormalizedMeasurement, ...]) -> BioactivityTriplet:
    m_idx = int(data["provenance"][1][1:])
    return BioactivityTriplet(
        protein=data["protein"],
        smiles=data["smiles"],
        measurement=measurements[m_idx],
        join_key=data["join_key"],
        provenance=tuple(data["provenance"]),
        flags=tuple(data.get("flags", ())),
    )


def record_to_json(record: ExtractionRecord) -> dict:
    return {
        "schema_version": RECORD_SCHEMA_VERSION,
        "doc_id": record.doc_id,
        "parsed": document_to_json(record.parsed) if record.parsed else None,
        "detections": [detection_to_json(d) for d in record.detections],
        "augmented_pages": [
            {
                "page": p.page,
                "image_ref": p.image_ref,
                "overlays": [
                    {"detection": d, "box": list(box), "label": n}
                    for d, box, n in p.overlays
                ],
            }
            for p in record.augmented_pages
        ],
        "coreference_map": [
            {"detection": d, "coreference": c} for d, c in record.coreference_map
        ],
        "markush_jobs": [
            {"scaffold_detection": j.scaffold_detection, "table": table_to_json(j.table)}
            for j in record.markush_jobs
        ],
        "markush_failures": [
            {
                "scaffold_detection": det,
                "coreference": f.coreference,
                "cause": f.cause,
                "detail": f.detail,
            }
            for det, f in record.markush_failures
        ],
        "structures": [structure_to_json(s) for s in record.structures],
        "measurements": [measurement_to_json(m) for m in record.measurements],
        "triplets": [triplet_to_record(t) for t in record.triplets],
        "stage_status": dict(record.stage_status),
        "detection_flags": [
            {"detection": d, "flag": flag} for d, flag in record.detection_flags
        ],
        "modality_status": dict(record.modality_status),
        "warnings": {stage: list(texts) for stage, texts in record.warnings.items()},
        "backend_versions": dict(record.backend_versions),
    }


def record_from_json(data: dict) -> ExtractionRecord:
    if data.get("schema_version") != RECORD_SCHEMA_VERSION:
        raise ValueError(f"unsupported record schema {data.get('schema_version')!r}")
    measurements = tuple(measurement_from_json(m) for m in data["measurements"])
    record = ExtractionRecord(
        doc_id=data["doc_id"],
        parsed=document_from_json(data["parsed"]) if data.get("parsed") else None,
        detections=tuple(detection_from_json(d) for d in data["detections"]),
        augmented_pages=tuple(
            AugmentedPage(
                page=p["page"],
                image_ref=p.get("image_ref", ""),
                overlays=tuple(
                    (o["detection"], tuple(o["box"]), o["label"])
                    for o in p["overlays"]
                ),
            )
            for p in data["augmented_pages"]
        ),
        coreference_map=tuple(
            (c["detection"], c["coreference"]) for c in data["coreference_map"]
        ),
        markush_jobs=tuple(
            MarkushJob(
                scaffold_detection=j["scaffold_detection"],
                table=table_from_json(j["table"]),
            )
            for j in data["markush_jobs"]
        ),
        markush_failures=tuple(
            (
                f["scaffold_detection"],
                RowFailure(
                    coreference=f["coreference"], cause=f["cause"], detail=f["detail"]
                ),
            )
            for f in data.get("markush_failures", ())
        ),
        structures=tuple(structure_from_json(s) for s in data["structures"]),
        measurements=measurements,
        triplets=tuple(
            triplet_from_json(t, measurements) for t in data["triplets"]
        ),
        stage_status=dict(data["stage_status"]),
        detection_flags=tuple(
            (f["detection"], f["flag"]) for f in data.get("detection_flags", ())
        ),
        modality_status=dict(data.get("modality_status", {})),
        warnings={
            stage: tuple(texts) for stage, texts in data.get("warnings", {}).items()
        },
        backend_versions=dict(data.get("backend_versions", {})),
    )
    return record


def dump_record(record: ExtractionRecord) -> str:
    return json.dumps(record_to_json(record), indent=2, sort_keys=True) + "\n"


def dump_triplets(record: ExtractionRecord) -> str:
    lines = [
        json.dumps(triplet_to_record(t), sort_keys=True, separators=(",", ":"))
        for t in record.triplets
    ]
    return "".join(line + "\n" for line in lines)


def _atomic_write(path: Path, text: str) -> None:
    # unique temp name: concurrent writers to one directory must not
    # clobber each other's staging file mid-replace
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        with contextlib.suppress(OSError):
            os.unlink(tmp_name)
        raise


def write_record(record: ExtractionRecord, out_dir: str | Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "record.json"
    _atomic_write(path, dump_record(record))
    return path


def write_triplets(record: ExtractionRecord, out_dir: str | Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "triplets.jsonl"
    _atomic_write(path, dump_triplets(record))
    return path
