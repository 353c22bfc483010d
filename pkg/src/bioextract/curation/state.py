"""Event-sourced review state.

A run starts from the extraction record the pipeline produced. Every
reviewer action is appended to an event log and the run state is a pure
fold of that log over the initial record: replaying the log reproduces
the state, and therefore the export bundle, bit for bit.

Edits never recompute anything by themselves. They update the working
artifacts (boxes, SMILES, coreference strings, R-group cells,
measurements) and mark the edited stage and everything after it dirty;
an explicit recompute call re-derives structures and triplets locally,
with no backend involved. Rows whose substituents need name resolution
consequently fail soft with name_resolution_failed on recompute; the fix
is to edit the cell to a SMILES or abbreviation payload.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field
from datetime import datetime
from typing import Optional, Sequence

from ..chem import ChemError, parse_smiles, to_canonical_smiles
from ..join.join import BioactivityTriplet, StructureRecord, join, triplet_to_record
from ..markush.abbreviations import AbbreviationTable, default_abbreviations
from ..markush.engine import (
    MarkushError,
    RGroupRow,
    RGroupTable,
    RowFailure,
    Substituent,
    enumerate_rows,
    resolve_substituent,
    scaffold_from_smiles,
)
from ..measure import MeasurementError, NormalizedMeasurement, to_record
from ..pipeline.document import Detection, DocumentError, detection_to_json
from ..pipeline.record import (
    ExtractionRecord,
    measurement_from_json,
    measurement_to_json,
    structure_to_json,
    substituent_to_json,
)

API_SCHEMA_VERSION = 1

# review order, coarsest dependency order; editing a stage dirties it and
# everything after it
REVIEW_STAGES = (
    "detection",
    "ocsr",
    "coreference",
    "markush",
    "measurement",
    "annotation",
)
_STAGE_POS = {s: i for i, s in enumerate(REVIEW_STAGES)}

PENDING = "pending"
ACCEPTED = "accepted"
EDITED = "edited"
REJECTED = "rejected"
TERMINAL = (ACCEPTED, EDITED, REJECTED)

DECISIONS = ("accept", "edit", "reject", "insert")
_DECISION_STATUS = {"accept": ACCEPTED, "edit": EDITED, "reject": REJECTED}

# pseudo-task suffix for the insert extension (measurement and structure
# stages); inserts create artifacts, so they have no pre-existing task
INSERT_SUFFIX = "insert"
INSERT_STAGES = ("measurement", "structure")


class CurationError(Exception):
    pass


class UnknownResource(CurationError):
    """Missing run, task, or page."""


class ConflictError(CurationError):
    """Terminal task, pending upstream work, or blocked export."""


class InvalidDecision(CurationError):
    """Decision payload rejected by the owning module's validator."""


@dataclass(frozen=True)
class ReviewEvent:
    seq: int
    task: str
    decision: str  # accept | edit | reject | insert | recompute
    payload: Optional[dict]
    editor: str
    time: str  # ISO-8601 UTC


def event_to_json(e: ReviewEvent) -> dict:
    return {
        "schema_version": API_SCHEMA_VERSION,
        "seq": e.seq,
        "task": e.task,
        "decision": e.decision,
        "payload": e.payload,
        "editor": e.editor,
        "time": e.time,
    }


def event_from_json(data: dict) -> ReviewEvent:
    return ReviewEvent(
        seq=int(data["seq"]),
        task=str(data["task"]),
        decision=str(data["decision"]),
        payload=data.get("payload"),
        editor=str(data.get("editor", "")),
        time=str(data["time"]),
    )


@dataclass(frozen=True)
class ReviewTask:
    id: str
    run_id: str
    stage: str
    payload: dict
    status: str
    editor: Optional[str] = None
    decided_at: Optional[str] = None


def task_to_json(t: ReviewTask) -> dict:
    return {
        "schema_version": API_SCHEMA_VERSION,
        "id": t.id,
        "run_id": t.run_id,
        "stage": t.stage,
        "payload": t.payload,
        "status": t.status,
        "editor": t.editor,
        "decided_at": t.decided_at,
    }


@dataclass
class RunState:
    """Working copy of one run's artifacts plus review bookkeeping.

    Derived fields (structures, triplets, markush_failures) hold the
    baseline values until a recompute event re-derives them.
    """

    run_id: str
    baseline: ExtractionRecord
    detections: dict[int, Detection] = field(default_factory=dict)
    rejected_detections: set[int] = field(default_factory=set)
    coref: dict[int, str] = field(default_factory=dict)
    rejected_corefs: set[int] = field(default_factory=set)
    job_order: list[int] = field(default_factory=list)
    tables: dict[int, RGroupTable] = field(default_factory=dict)
    rejected_rows: set[tuple[int, int]] = field(default_factory=set)
    measurements: list[NormalizedMeasurement] = field(default_factory=list)
    baseline_measurement_count: int = 0
    rejected_measurements: set[int] = field(default_factory=set)
    extra_structures: list[StructureRecord] = field(default_factory=list)
    structures: tuple[StructureRecord, ...] = ()
    markush_failures: tuple[tuple[int, RowFailure], ...] = ()
    triplets: tuple[BioactivityTriplet, ...] = ()
    join_warnings: tuple[str, ...] = ()
    task_status: dict[str, str] = field(default_factory=dict)
    task_editor: dict[str, str] = field(default_factory=dict)
    task_time: dict[str, str] = field(default_factory=dict)
    dirty: set[str] = field(default_factory=set)
    epoch: int = 0  # recompute count; keys annotation task ids
    export_version: int = 1
    applied_events: int = 0


def initial_state(run_id: str, record: ExtractionRecord) -> RunState:
    state = RunState(run_id=run_id, baseline=record)
    state.detections = {d.id: d for d in record.detections}
    state.coref = dict(record.coreference_map)
    state.job_order = [j.scaffold_detection for j in record.markush_jobs]
    state.tables = {j.scaffold_detection: j.table for j in record.markush_jobs}
    state.measurements = list(record.measurements)
    state.baseline_measurement_count = len(record.measurements)
    state.structures = record.structures
    state.markush_failures = record.markush_failures
    state.triplets = record.triplets
    state.join_warnings = record.warnings.get("join", ())
    return state


def parse_task_id(run_id: str, task_id: str) -> tuple[str, str]:
    """Split a task id into (stage, tail); raises on foreign run ids."""
    prefix = run_id + ":"
    if not task_id.startswith(prefix):
        raise UnknownResource(f"task {task_id} does not belong to run {run_id}")
    rest = task_id[len(prefix) :]
    stage, _, tail = rest.partition(":")
    if not tail:
        raise UnknownResource(f"malformed task id {task_id}")
    return stage, tail


def _active_detections(state: RunState) -> dict[int, Detection]:
    return {
        i: d
        for i, d in sorted(state.detections.items())
        if i not in state.rejected_detections
    }


def _detection_flags(state: RunState) -> dict[int, list[str]]:
    flags: dict[int, list[str]] = {}
    for det, flag in state.baseline.detection_flags:
        flags.setdefault(det, []).append(flag)
    return flags


def _markush_result_for(
    state: RunState, det_id: int, coreference: str
) -> tuple[Optional[str], Optional[dict]]:
    """(enumerated SMILES, failure) for one table row, whichever applies."""
    anchor = str(det_id)
    for s in state.structures:
        if (
            s.origin == "markush_row"
            and s.provenance
            and s.provenance[0] == anchor
            and s.coreference == coreference
        ):
            return s.smiles, None
    for det, failure in state.markush_failures:
        if det == det_id and failure.coreference == coreference:
            return None, {"cause": failure.cause, "detail": failure.detail}
    return None, None


def generate_tasks(state: RunState) -> list[ReviewTask]:
    """Current task list, stage order then reading order.

    Task ids are stable across edits: detection-anchored stages key on
    detection ids, markush rows on (scaffold, row index), measurements on
    list position (the list only grows). Annotation tasks key on the
    recompute epoch so every recompute resets triplet review.
    """
    run = state.run_id
    tasks: list[ReviewTask] = []
    flags = _detection_flags(state)

    def add(task_id: str, stage: str, payload: dict) -> None:
        tasks.append(
            ReviewTask(
                id=task_id,
                run_id=run,
                stage=stage,
                payload=payload,
                status=state.task_status.get(task_id, PENDING),
                editor=state.task_editor.get(task_id),
                decided_at=state.task_time.get(task_id),
            )
        )

    for det_id, d in sorted(state.detections.items()):
        add(
            f"{run}:detection:{det_id}",
            "detection",
            {"detection": detection_to_json(d), "flags": flags.get(det_id, [])},
        )

    active = _active_detections(state)
    for det_id, d in active.items():
        add(
            f"{run}:ocsr:{det_id}",
            "ocsr",
            {
                "detection": det_id,
                "page": d.page,
                "box": list(d.box),
                "raw_smiles": d.raw_smiles,
                "is_markush": d.is_markush,
            },
        )

    for det_id, d in active.items():
        if d.is_markush:
            continue
        coref = None
        if det_id not in state.rejected_corefs:
            coref = state.coref.get(det_id)
        add(
            f"{run}:coreference:{det_id}",
            "coreference",
            {"detection": det_id, "coreference": coref},
        )

    for det_id in state.job_order:
        if det_id in state.rejected_detections:
            continue
        table = state.tables[det_id]
        for row_idx, row in enumerate(table.rows):
            smiles, failure = _markush_result_for(state, det_id, row.coreference)
            add(
                f"{run}:markush:{det_id}.{row_idx}",
                "markush",
                {
                    "scaffold_detection": det_id,
                    "row": row_idx,
                    "coreference": row.coreference,
                    "cells": {
                        label: substituent_to_json(sub)
                        for label, sub in row.assignment
                    },
                    "hydrogen_default_labels": sorted(table.hydrogen_default_labels),
                    "enumerated": smiles,
                    "failure": failure,
                },
            )

    for idx, m in enumerate(state.measurements):
        add(
            f"{run}:measurement:{idx}",
            "measurement",
            {
                "index": idx,
                "inserted": idx >= state.baseline_measurement_count,
                "record": to_record(m),
                "measurement": measurement_to_json(m),
            },
        )

    for idx, t in enumerate(state.triplets):
        add(
            f"{run}:annotation:{state.epoch}.{idx}",
            "annotation",
            {"index": idx, "triplet": triplet_to_record(t)},
        )

    return tasks


def task_counts(tasks: Sequence[ReviewTask]) -> dict:
    counts = {"total": len(tasks), PENDING: 0, ACCEPTED: 0, EDITED: 0, REJECTED: 0}
    for t in tasks:
        counts[t.status] += 1
    return counts


def state_summary(state: RunState) -> dict:
    tasks = generate_tasks(state)
    stages = {}
    for stage in REVIEW_STAGES:
        of_stage = [t for t in tasks if t.stage == stage]
        counts = task_counts(of_stage)
        counts["terminal"] = counts[PENDING] == 0
        stages[stage] = counts
    return {
        "schema_version": API_SCHEMA_VERSION,
        "run_id": state.run_id,
        "doc_id": state.baseline.doc_id,
        "epoch": state.epoch,
        "export_version": state.export_version,
        "dirty": sorted(state.dirty, key=_STAGE_POS.get),
        "stages": stages,
        "counts": {
            "detections": len(state.detections),
            "structures": len(state.structures),
            "measurements": len(state.measurements),
            "triplets": len(state.triplets),
        },
    }


def _mark_dirty(state: RunState, stage: str) -> None:
    # structure inserts materialize at the markush step of the derivation
    pos = _STAGE_POS["markush"] if stage == "structure" else _STAGE_POS[stage]
    state.dirty.update(REVIEW_STAGES[pos:])


def validate_decision(
    state: RunState,
    task_id: str,
    decision: str,
    payload: Optional[dict],
    abbrevs: Optional[AbbreviationTable] = None,
) -> None:
    """Raises unless the decision may be appended to the log.

    Edited payloads go through the owning module's constructors, so the
    error messages are the module's own.
    """
    if decision not in DECISIONS:
        raise InvalidDecision(f"unknown decision {decision!r}")
    stage, tail = parse_task_id(state.run_id, task_id)

    if decision == "insert":
        if stage not in INSERT_STAGES or tail != INSERT_SUFFIX:
            raise InvalidDecision(
                "insert targets <run>:measurement:insert or <run>:structure:insert"
            )
        if not isinstance(payload, dict):
            raise InvalidDecision("insert needs a payload")
        if stage == "measurement":
            _validate_measurement_payload(payload)
        else:
            _validate_structure_payload(payload)
        return

    tasks = {t.id: t for t in generate_tasks(state)}
    task = tasks.get(task_id)
    if task is None:
        raise UnknownResource(f"no such task {task_id}")
    if task.status != PENDING:
        raise ConflictError(f"task {task_id} is already {task.status}")

    if decision in ("accept", "reject"):
        return
    if not isinstance(payload, dict):
        raise InvalidDecision("edit needs a payload")
    if stage == "detection":
        _validate_box_payload(state, int(tail), payload)
    elif stage == "ocsr":
        _validate_smiles_payload(payload)
    elif stage == "coreference":
        if not str(payload.get("coreference", "")).strip():
            raise InvalidDecision("coreference must be a non-empty mention")
    elif stage == "markush":
        det_id = int(tail.split(".", 1)[0])
        _validate_markush_payload(state, det_id, payload, abbrevs)
    elif stage == "measurement":
        _validate_measurement_payload(payload)
    else:
        raise InvalidDecision("annotation tasks accept or reject only")


def _validate_box_payload(state: RunState, det_id: int, payload: dict) -> None:
    box = payload.get("box")
    if not isinstance(box, (list, tuple)):
        raise InvalidDecision("edited detection needs a box")
    old = state.detections[det_id]
    try:
        Detection(
            id=old.id,
            page=old.page,
            box=tuple(float(v) for v in box),
            raw_smiles=old.raw_smiles,
            is_markush=old.is_markush,
        )
    except (DocumentError, TypeError, ValueError) as exc:
        raise InvalidDecision(str(exc)) from exc


def _validate_smiles_payload(payload: dict) -> None:
    smiles = payload.get("smiles")
    if not smiles or not isinstance(smiles, str):
        raise InvalidDecision("edited structure needs a smiles string")
    try:
        parse_smiles(smiles)
    except ChemError as exc:
        raise InvalidDecision(str(exc)) from exc


def _validate_markush_payload(
    state: RunState,
    det_id: int,
    payload: dict,
    abbrevs: Optional[AbbreviationTable],
) -> None:
    cells = payload.get("cells")
    if not isinstance(cells, dict) or not cells:
        raise InvalidDecision("edited row needs a cells mapping")
    try:
        assignment = tuple(
            (label, Substituent(kind=c["kind"], payload=c.get("payload", "")))
            for label, c in sorted(cells.items())
        )
        RGroupRow(
            coreference=str(payload.get("coreference") or "row"),
            assignment=assignment,
        )
    except (KeyError, TypeError, ValueError, MarkushError) as exc:
        raise InvalidDecision(str(exc)) from exc
    # resolve what can be resolved locally so bad fragments bounce now,
    # not at recompute; iupac_name needs a backend and is let through
    if abbrevs is None:
        abbrevs = default_abbreviations()
    visual = {
        str(i): d.raw_smiles
        for i, d in _active_detections(state).items()
        if d.raw_smiles and not d.is_markush
    }
    for label, sub in assignment:
        if sub.kind == "iupac_name":
            continue
        try:
            resolve_substituent(sub, abbrevs, name_client=None, detections=visual)
        except MarkushError as exc:
            raise InvalidDecision(f"cell {label}: {exc}") from exc
    raw = state.detections[det_id].raw_smiles
    if raw:
        try:
            scaffold = scaffold_from_smiles(raw)
        except MarkushError:
            return  # scaffold itself broken; the row edit is not the problem
        unknown = set(cells) - set(scaffold.labels)
        if unknown:
            raise InvalidDecision(
                f"labels {sorted(unknown)} are not on the scaffold"
            )


def _validate_measurement_payload(payload: dict) -> None:
    try:
        measurement_from_json(payload)
    except (KeyError, TypeError, ValueError, ArithmeticError, MeasurementError) as exc:
        raise InvalidDecision(f"measurement rejected: {exc}") from exc


def _validate_structure_payload(payload: dict) -> None:
    if not str(payload.get("coreference", "")).strip():
        raise InvalidDecision("inserted structure needs a coreference mention")
    _validate_smiles_payload(payload)


def apply_event(
    state: RunState, event: ReviewEvent, abbrevs: Optional[AbbreviationTable] = None
) -> None:
    """One fold step; assumes the event was validated before appending."""
    if event.seq != state.applied_events + 1:
        raise CurationError(
            f"event log gap: expected seq {state.applied_events + 1}, got {event.seq}"
        )
    state.applied_events = event.seq

    if event.decision == "recompute":
        _recompute(state, abbrevs)
        return

    stage, tail = parse_task_id(state.run_id, event.task)
    if event.decision == "insert":
        _apply_insert(state, stage, event)
        return

    state.task_status[event.task] = _DECISION_STATUS[event.decision]
    state.task_editor[event.task] = event.editor
    state.task_time[event.task] = event.time
    if event.decision == "accept":
        return

    if event.decision == "edit":
        _apply_edit(state, stage, tail, event.payload or {})
    else:
        _apply_reject(state, stage, tail)
    if stage != "annotation":
        _mark_dirty(state, stage)


def _apply_insert(state: RunState, stage: str, event: ReviewEvent) -> None:
    payload = event.payload or {}
    if stage == "measurement":
        idx = len(state.measurements)
        state.measurements.append(measurement_from_json(payload))
        task_id = f"{state.run_id}:measurement:{idx}"
    else:
        k = len(state.extra_structures)
        smiles = to_canonical_smiles(parse_smiles(payload["smiles"]))
        state.extra_structures.append(
            StructureRecord(
                coreference=str(payload["coreference"]).strip(),
                smiles=smiles,
                origin="explicit",
                provenance=(f"insert:{k}",),
            )
        )
        task_id = event.task  # pseudo-task; no per-item review entry
    if stage == "measurement":
        state.task_status[task_id] = ACCEPTED
        state.task_editor[task_id] = event.editor
        state.task_time[task_id] = event.time
    _mark_dirty(state, stage)


def _apply_edit(state: RunState, stage: str, tail: str, payload: dict) -> None:
    if stage == "detection":
        det_id = int(tail)
        old = state.detections[det_id]
        state.detections[det_id] = Detection(
            id=old.id,
            page=old.page,
            box=tuple(float(v) for v in payload["box"]),
            raw_smiles=old.raw_smiles,
            is_markush=old.is_markush,
        )
    elif stage == "ocsr":
        det_id = int(tail)
        old = state.detections[det_id]
        state.detections[det_id] = Detection(
            id=old.id,
            page=old.page,
            box=old.box,
            raw_smiles=str(payload["smiles"]),
            is_markush=old.is_markush,
        )
    elif stage == "coreference":
        state.coref[int(tail)] = str(payload["coreference"]).strip()
    elif stage == "markush":
        det_part, row_part = tail.split(".", 1)
        det_id, row_idx = int(det_part), int(row_part)
        table = state.tables[det_id]
        old_row = table.rows[row_idx]
        new_row = RGroupRow(
            coreference=str(payload.get("coreference") or old_row.coreference),
            assignment=tuple(
                (label, Substituent(kind=c["kind"], payload=c.get("payload", "")))
                for label, c in sorted(payload["cells"].items())
            ),
        )
        rows = list(table.rows)
        rows[row_idx] = new_row
        state.tables[det_id] = RGroupTable(
            rows=tuple(rows), hydrogen_default_labels=table.hydrogen_default_labels
        )
    elif stage == "measurement":
        state.measurements[int(tail)] = measurement_from_json(payload)


def _apply_reject(state: RunState, stage: str, tail: str) -> None:
    if stage == "detection":
        state.rejected_detections.add(int(tail))
    elif stage == "ocsr":
        # no usable reading and no replacement offered
        det_id = int(tail)
        old = state.detections[det_id]
        state.detections[det_id] = Detection(
            id=old.id,
            page=old.page,
            box=old.box,
            raw_smiles=None,
            is_markush=old.is_markush,
        )
    elif stage == "coreference":
        state.rejected_corefs.add(int(tail))
    elif stage == "markush":
        det_part, row_part = tail.split(".", 1)
        state.rejected_rows.add((int(det_part), int(row_part)))
    elif stage == "measurement":
        state.rejected_measurements.add(int(tail))
    # annotation rejections only filter the export


def _recompute(state: RunState, abbrevs: Optional[AbbreviationTable]) -> bool:
    """Re-derive structures and triplets from the reviewed artifacts.

    Mirrors the pipeline's assembly policy: explicit structures first,
    then enumerated rows, then inserts, deduplicated on (coreference,
    smiles) keeping the first. The join runs over the full measurement
    list so measurement indices stay aligned with task ids; triplets of
    rejected measurements are dropped afterwards.
    """
    if not state.dirty:
        return False
    if abbrevs is None:
        abbrevs = default_abbreviations()
    active = _active_detections(state)
    visual = {
        str(i): d.raw_smiles
        for i, d in active.items()
        if d.raw_smiles and not d.is_markush
    }

    markush_records: list[StructureRecord] = []
    failures: list[tuple[int, RowFailure]] = []
    for det_id in state.job_order:
        if det_id in state.rejected_detections:
            continue
        det = state.detections[det_id]
        table = state.tables[det_id]
        kept = tuple(
            row
            for idx, row in enumerate(table.rows)
            if (det_id, idx) not in state.rejected_rows
        )
        live = RGroupTable(
            rows=kept, hydrogen_default_labels=table.hydrogen_default_labels
        )
        if not det.raw_smiles:
            failures.extend(
                (
                    det_id,
                    RowFailure(
                        coreference=row.coreference,
                        cause="unsupported_markush",
                        detail="scaffold structure unavailable",
                    ),
                )
                for row in kept
            )
            continue
        try:
            scaffold = scaffold_from_smiles(det.raw_smiles)
        except MarkushError as exc:
            failures.extend(
                (
                    det_id,
                    RowFailure(
                        coreference=row.coreference, cause=exc.cause, detail=str(exc)
                    ),
                )
                for row in kept
            )
            continue
        records, row_failures = enumerate_rows(
            scaffold,
            live,
            abbrevs=abbrevs,
            name_client=None,
            detections=visual,
            base_provenance=(str(det_id),),
        )
        markush_records.extend(records)
        failures.extend((det_id, f) for f in row_failures)

    explicit: list[StructureRecord] = []
    for det_id, d in active.items():
        if d.is_markush or not d.raw_smiles or det_id in state.rejected_corefs:
            continue
        coref = state.coref.get(det_id)
        if not coref:
            continue
        try:
            smiles = to_canonical_smiles(parse_smiles(d.raw_smiles))
        except ChemError:
            continue
        explicit.append(
            StructureRecord(
                coreference=coref,
                smiles=smiles,
                origin="explicit",
                provenance=(str(det_id),),
            )
        )

    seen: set[tuple[str, str]] = set()
    structures: list[StructureRecord] = []
    for s in explicit + markush_records + list(state.extra_structures):
        key = (s.coreference, s.smiles)
        if key in seen:
            continue
        seen.add(key)
        structures.append(s)

    result = join(state.measurements, structures)
    state.structures = tuple(structures)
    state.markush_failures = tuple(failures)
    state.triplets = tuple(
        t
        for t in result.triplets
        if int(t.provenance[1][1:]) not in state.rejected_measurements
    )
    state.join_warnings = result.warnings
    state.dirty.clear()
    state.epoch += 1
    state.export_version += 1
    return True


def fold_state(
    run_id: str,
    record: ExtractionRecord,
    events: Sequence[ReviewEvent],
    abbrevs: Optional[AbbreviationTable] = None,
) -> RunState:
    state = initial_state(run_id, record)
    for event in sorted(events, key=lambda e: e.seq):
        apply_event(state, event, abbrevs)
    return state


def curated_triplets(state: RunState) -> tuple[BioactivityTriplet, ...]:
    """Triplets that survive review: rejected measurements, rejected
    detections, and rejected annotation tasks all remove theirs. With a
    recompute run this is mostly redundant; it also covers exports taken
    between an edit and the recompute."""
    out: list[BioactivityTriplet] = []
    for idx, t in enumerate(state.triplets):
        m_idx = int(t.provenance[1][1:])
        if m_idx in state.rejected_measurements:
            continue
        s_idx = int(t.provenance[0][1:])
        prov = state.structures[s_idx].provenance
        anchor = prov[0] if prov else ""
        if anchor.isdigit() and int(anchor) in state.rejected_detections:
            continue
        if (
            state.task_status.get(f"{state.run_id}:annotation:{state.epoch}.{idx}")
            == REJECTED
        ):
            continue
        out.append(t)
    return tuple(out)


def _stage_of_task(run_id: str, task_id: str) -> str:
    return task_id[len(run_id) + 1 :].partition(":")[0]


def timing_summary(run_id: str, events: Sequence[ReviewEvent]) -> dict:
    """Per-stage decision timing from event timestamps.

    Each decision is charged the gap since the previous event of any
    kind; the first event is charged zero. Recompute events advance the
    clock without being charged anywhere.
    """
    gaps: dict[str, list[float]] = {}
    prev: Optional[datetime] = None
    for e in sorted(events, key=lambda e: e.seq):
        t = datetime.fromisoformat(e.time)
        if e.decision in DECISIONS:
            stage = _stage_of_task(run_id, e.task)
            gap = 0.0 if prev is None else (t - prev).total_seconds()
            gaps.setdefault(stage, []).append(gap)
        prev = t
    return {
        stage: {
            "decisions": len(values),
            "total_seconds": round(sum(values), 6),
            "mean_seconds": round(sum(values) / len(values), 6),
            "median_seconds": round(statistics.median(values), 6),
        }
        for stage, values in sorted(gaps.items())
    }


def export_bundle(
    state: RunState,
    events: Sequence[ReviewEvent],
    waived: Sequence[str] = (),
) -> dict:
    """Curated triplets plus the full audit trail.

    Every stage must be fully reviewed unless waived; a waiver marks the
    bundle partial. The bundle is a pure function of (initial record,
    event log), which is what makes replays byte-comparable.
    """
    waived_set = set(waived)
    unknown = waived_set - set(REVIEW_STAGES)
    if unknown:
        raise InvalidDecision(f"cannot waive unknown stages {sorted(unknown)}")
    tasks = generate_tasks(state)
    blocked = sorted(
        {
            t.stage
            for t in tasks
            if t.status == PENDING and t.stage not in waived_set
        },
        key=_STAGE_POS.get,
    )
    if blocked:
        raise ConflictError(f"stages with pending tasks: {', '.join(blocked)}")
    return {
        "schema_version": API_SCHEMA_VERSION,
        "run_id": state.run_id,
        "doc_id": state.baseline.doc_id,
        "export_version": state.export_version,
        "partial": bool(waived_set),
        "waived": sorted(waived_set, key=_STAGE_POS.get),
        "dirty": sorted(state.dirty, key=_STAGE_POS.get),
        "triplets": [triplet_to_record(t) for t in curated_triplets(state)],
        "structures": [structure_to_json(s) for s in state.structures],
        "events": [event_to_json(e) for e in events],
        "timing": timing_summary(state.run_id, events),
    }
