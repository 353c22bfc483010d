"""Persistence and review workflow for extraction runs."""

from .service import CurationService, document_digest
from .state import (
    ACCEPTED,
    API_SCHEMA_VERSION,
    DECISIONS,
    EDITED,
    PENDING,
    REJECTED,
    REVIEW_STAGES,
    TERMINAL,
    ConflictError,
    CurationError,
    InvalidDecision,
    ReviewEvent,
    ReviewTask,
    RunState,
    UnknownResource,
    apply_event,
    curated_triplets,
    event_from_json,
    event_to_json,
    export_bundle,
    fold_state,
    generate_tasks,
    initial_state,
    state_summary,
    task_counts,
    task_to_json,
    timing_summary,
    validate_decision,
)

__all__ = [
    "ACCEPTED",
    "API_SCHEMA_VERSION",
    "DECISIONS",
    "EDITED",
    "PENDING",
    "REJECTED",
    "REVIEW_STAGES",
    "TERMINAL",
    "ConflictError",
    "CurationError",
    "CurationService",
    "InvalidDecision",
    "ReviewEvent",
    "ReviewTask",
    "RunState",
    "UnknownResource",
    "apply_event",
    "curated_triplets",
    "document_digest",
    "event_from_json",
    "event_to_json",
    "export_bundle",
    "fold_state",
    "generate_tasks",
    "initial_state",
    "state_summary",
    "task_counts",
    "task_to_json",
    "timing_summary",
    "validate_decision",
]

# create_app imports FastAPI; kept out of the eager imports so the rest
# of the package works without the HTTP extras installed


def create_app(service: CurationService):
    from .api import create_app as _create

    return _create(service)
