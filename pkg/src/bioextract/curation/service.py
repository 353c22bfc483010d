"""Run store and review operations behind the HTTP layer.

One directory per run: the initial record, a meta file, and the
append-only event log. Nothing else is persisted; every read folds the
log (cached in process) and every write appends exactly one event under
the run's lock, so concurrent decisions serialize and a crash loses at
most the event being written.
"""

from __future__ import annotations

import hashlib
import json
import threading
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence, Union

from ..join.annotate import rank_for_annotation
from ..join.join import triplet_to_record
from ..markush.abbreviations import AbbreviationTable, default_abbreviations
from ..pipeline.backends import BackendClient, canonical_json
from ..pipeline.document import ParsedDocument, document_from_json, document_to_json
from ..pipeline.orchestrator import PipelineConfig, build_augmented_pages, run_document
from ..pipeline.record import (
    ExtractionRecord,
    dump_record,
    record_from_json,
    record_to_json,
)
from ..pipeline.render import render_page_png
from .state import (
    API_SCHEMA_VERSION,
    ConflictError,
    ReviewEvent,
    RunState,
    UnknownResource,
    _STAGE_POS,
    apply_event,
    event_from_json,
    event_to_json,
    export_bundle,
    fold_state,
    generate_tasks,
    parse_task_id,
    state_summary,
    task_counts,
    task_to_json,
    validate_decision,
)
from ..pipeline.document import AugmentedPage

EXPORT_FORMATS = ("json", "jsonl")


def document_digest(record: ExtractionRecord) -> str:
    """Content digest used for duplicate-run detection.

    Prefers the parsed document (the true input) so resubmitting the
    same document as a prebuilt record still dedupes; records without a
    parse fall back to hashing the whole record.
    """
    if record.parsed is not None:
        text = canonical_json(document_to_json(record.parsed))
    else:
        text = canonical_json(record_to_json(record))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


class CurationService:
    """All review operations for one store directory.

    Single-process by design: the in-memory state cache is the write
    path's source of truth and the on-disk log is its durable journal.
    """

    def __init__(
        self,
        root: Union[str, Path],
        client: Optional[BackendClient] = None,
        pipeline_config: Optional[PipelineConfig] = None,
        abbreviations: Optional[AbbreviationTable] = None,
    ):
        self.root = Path(root)
        (self.root / "runs").mkdir(parents=True, exist_ok=True)
        self.client = client
        self.pipeline_config = pipeline_config or PipelineConfig()
        self.abbrevs = abbreviations or default_abbreviations()
        self._store_lock = threading.Lock()
        self._run_locks: dict[str, threading.Lock] = {}
        self._states: dict[str, RunState] = {}

    # ---------------------------------------------------------------- paths

    def _run_dir(self, run_id: str) -> Path:
        return self.root / "runs" / run_id

    def _index_path(self) -> Path:
        return self.root / "index.json"

    def _load_index(self) -> dict:
        path = self._index_path()
        if not path.is_file():
            return {"schema_version": API_SCHEMA_VERSION, "digests": {}, "next": 1}
        return json.loads(path.read_text(encoding="utf-8"))

    def _write_index(self, index: dict) -> None:
        path = self._index_path()
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(
            json.dumps(index, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        tmp.replace(path)

    def _lock_for(self, run_id: str) -> threading.Lock:
        with self._store_lock:
            return self._run_locks.setdefault(run_id, threading.Lock())

    # ---------------------------------------------------------------- runs

    def create_run(
        self,
        record: Optional[dict] = None,
        document: Optional[dict] = None,
        source_path: Optional[str] = None,
    ) -> dict:
        """Register a run from a prebuilt record, an already-parsed
        document, or a source path; the latter two execute the pipeline
        with the service's backend client. The same document digest maps
        to the same run."""
        extraction = self._build_record(record, document, source_path)
        digest = document_digest(extraction)
        with self._store_lock:
            index = self._load_index()
            existing = index["digests"].get(digest)
            if existing is not None:
                return {
                    "schema_version": API_SCHEMA_VERSION,
                    "run_id": existing,
                    "duplicate": True,
                }
            run_id = f"run-{index['next']:04d}"
            index["next"] += 1
            index["digests"][digest] = run_id
            run_dir = self._run_dir(run_id)
            run_dir.mkdir(parents=True)
            (run_dir / "record.json").write_text(
                dump_record(extraction), encoding="utf-8"
            )
            (run_dir / "meta.json").write_text(
                json.dumps(
                    {
                        "schema_version": API_SCHEMA_VERSION,
                        "run_id": run_id,
                        "doc_id": extraction.doc_id,
                        "doc_digest": digest,
                        "created": _now(),
                    },
                    indent=2,
                    sort_keys=True,
                )
                + "\n",
                encoding="utf-8",
            )
            (run_dir / "events.jsonl").touch()
            self._write_index(index)
        return {
            "schema_version": API_SCHEMA_VERSION,
            "run_id": run_id,
            "duplicate": False,
        }

    def _build_record(
        self,
        record: Optional[dict],
        document: Optional[dict],
        source_path: Optional[str],
    ) -> ExtractionRecord:
        given = [v is not None for v in (record, document, source_path)]
        if sum(given) != 1:
            raise ConflictError(
                "provide exactly one of record, document, source_path"
            )
        if record is not None:
            return record_from_json(record)
        if self.client is None:
            raise ConflictError(
                "service has no backend client; submit a prebuilt record"
            )
        if document is not None:
            parsed = document_from_json(document)
            return run_document(parsed, self.client, self.pipeline_config)
        path = Path(source_path)
        if not path.is_file():
            raise UnknownResource(f"no such source {source_path}")
        return run_document(path, self.client, self.pipeline_config)

    def list_runs(self) -> list[dict]:
        runs_dir = self.root / "runs"
        out = []
        for meta_path in sorted(runs_dir.glob("*/meta.json")):
            out.append(json.loads(meta_path.read_text(encoding="utf-8")))
        return out

    def _state(self, run_id: str) -> RunState:
        cached = self._states.get(run_id)
        if cached is not None:
            return cached
        run_dir = self._run_dir(run_id)
        if not run_dir.is_dir():
            raise UnknownResource(f"no such run {run_id}")
        record = record_from_json(
            json.loads((run_dir / "record.json").read_text(encoding="utf-8"))
        )
        state = fold_state(run_id, record, self._events(run_id), self.abbrevs)
        self._states[run_id] = state
        return state

    def _events(self, run_id: str) -> list[ReviewEvent]:
        path = self._run_dir(run_id) / "events.jsonl"
        if not path.is_file():
            return []
        events = []
        for line in path.read_text(encoding="utf-8").splitlines():
            if line.strip():
                events.append(event_from_json(json.loads(line)))
        return events

    def _append_event(self, run_id: str, event: ReviewEvent) -> None:
        path = self._run_dir(run_id) / "events.jsonl"
        with path.open("a", encoding="utf-8") as fh:
            fh.write(
                json.dumps(event_to_json(event), sort_keys=True, separators=(",", ":"))
                + "\n"
            )
            fh.flush()

    # ------------------------------------------------------------- reviews

    def get_run(self, run_id: str) -> dict:
        with self._lock_for(run_id):
            return state_summary(self._state(run_id))

    def list_tasks(self, run_id: str, stage: Optional[str] = None) -> dict:
        if stage is not None and stage not in _STAGE_POS:
            raise UnknownResource(f"unknown stage {stage!r}")
        with self._lock_for(run_id):
            tasks = generate_tasks(self._state(run_id))
        if stage is not None:
            tasks = [t for t in tasks if t.stage == stage]
        return {
            "schema_version": API_SCHEMA_VERSION,
            "run_id": run_id,
            "stage": stage,
            "counts": task_counts(tasks),
            "tasks": [task_to_json(t) for t in tasks],
        }

    def submit_decision(
        self,
        task_id: str,
        decision: str,
        payload: Optional[dict] = None,
        editor: str = "",
    ) -> dict:
        run_id = task_id.split(":", 1)[0]
        with self._lock_for(run_id):
            state = self._state(run_id)
            parse_task_id(run_id, task_id)  # malformed ids fail before validation
            validate_decision(state, task_id, decision, payload, self.abbrevs)
            event = ReviewEvent(
                seq=state.applied_events + 1,
                task=task_id,
                decision=decision,
                payload=payload if decision in ("edit", "insert") else None,
                editor=editor,
                time=_now(),
            )
            self._append_event(run_id, event)
            apply_event(state, event, self.abbrevs)
            return state_summary(state)

    def recompute(self, run_id: str, editor: str = "") -> dict:
        with self._lock_for(run_id):
            state = self._state(run_id)
            if not state.dirty:
                return state_summary(state)  # nothing to do; no event
            first = min(_STAGE_POS[s] for s in state.dirty)
            pending_upstream = sorted(
                {
                    t.stage
                    for t in generate_tasks(state)
                    if t.status == "pending" and _STAGE_POS[t.stage] < first
                },
                key=_STAGE_POS.get,
            )
            if pending_upstream:
                raise ConflictError(
                    f"pending upstream tasks in: {', '.join(pending_upstream)}"
                )
            event = ReviewEvent(
                seq=state.applied_events + 1,
                task=f"{run_id}:system:recompute",
                decision="recompute",
                payload=None,
                editor=editor,
                time=_now(),
            )
            self._append_event(run_id, event)
            apply_event(state, event, self.abbrevs)
            return state_summary(state)

    def export(
        self, run_id: str, fmt: str = "json", waived: Sequence[str] = ()
    ) -> tuple[str, str]:
        """(body, media type); json is the audit bundle, jsonl just the
        curated triplets."""
        if fmt not in EXPORT_FORMATS:
            raise ConflictError(f"format must be one of {EXPORT_FORMATS}")
        with self._lock_for(run_id):
            state = self._state(run_id)
            bundle = export_bundle(state, self._events(run_id), waived)
        if fmt == "jsonl":
            lines = [
                json.dumps(t, sort_keys=True, separators=(",", ":"))
                for t in bundle["triplets"]
            ]
            return "".join(line + "\n" for line in lines), "application/x-ndjson"
        return (
            json.dumps(bundle, indent=2, sort_keys=True) + "\n",
            "application/json",
        )

    def annotation_candidates(
        self, run_id: str, query_smiles: str, top: int = 10
    ) -> dict:
        from .state import curated_triplets

        with self._lock_for(run_id):
            state = self._state(run_id)
            triplets = curated_triplets(state)
        ranked = rank_for_annotation(triplets, query_smiles)
        if top > 0:
            ranked = ranked[:top]
        return {
            "schema_version": API_SCHEMA_VERSION,
            "run_id": run_id,
            "query_smiles": query_smiles,
            "candidates": [
                {
                    "rank": c.rank,
                    "similarity": round(c.similarity, 6),
                    "perfect_match": c.perfect_match,
                    "exact_match": c.exact_match,
                    "triplet": triplet_to_record(c.triplet),
                }
                for c in ranked
            ],
        }

    def page_image(self, run_id: str, page: int) -> bytes:
        """Current overlays (box edits and rejections applied) on the page."""
        with self._lock_for(run_id):
            state = self._state(run_id)
            parsed = state.baseline.parsed
            if parsed is None or page not in parsed.pages():
                raise UnknownResource(f"run {run_id} has no page {page}")
            active = tuple(
                d
                for i, d in sorted(state.detections.items())
                if i not in state.rejected_detections
            )
        pages = {p.page: p for p in build_augmented_pages(parsed, active)}
        refs = {p.page: p.image_ref for p in parsed.page_images}
        view = pages.get(page) or AugmentedPage(
            page=page, image_ref=refs.get(page, ""), overlays=()
        )
        return render_page_png(parsed, view, dpi=self.pipeline_config.dpi)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="milliseconds")
