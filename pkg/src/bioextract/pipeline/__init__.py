from .backends import (
    BackendClient,
    BackendError,
    BackendTimeout,
    CallableBackend,
    Cassette,
    CassetteMiss,
    HttpBackendClient,
    NameClient,
    RecordingBackend,
    ReplayBackend,
    canonical_json,
    request_digest,
    request_envelope,
)
from .document import (
    AugmentedPage,
    Box,
    Detection,
    DocumentError,
    PageImage,
    ParsedDocument,
    Region,
    TextSegment,
    document_from_json,
    document_to_json,
)
from .orchestrator import (
    PipelineConfig,
    build_augmented_pages,
    load_record,
    run_document,
    run_documents,
)
from .record import (
    DONE,
    FAILED,
    PENDING,
    RUNNING,
    SKIPPED,
    STAGES,
    ExtractionRecord,
    MarkushJob,
    dump_record,
    dump_triplets,
    record_from_json,
    record_to_json,
    table_from_json,
    table_to_json,
    write_record,
    write_triplets,
)
from .render import render_page, render_page_png

__all__ = [
    "BackendClient",
    "BackendError",
    "BackendTimeout",
    "CallableBackend",
    "Cassette",
    "CassetteMiss",
    "HttpBackendClient",
    "NameClient",
    "RecordingBackend",
    "ReplayBackend",
    "canonical_json",
    "request_digest",
    "request_envelope",
    "AugmentedPage",
    "Box",
    "Detection",
    "DocumentError",
    "PageImage",
    "ParsedDocument",
    "Region",
    "TextSegment",
    "document_from_json",
    "document_to_json",
    "PipelineConfig",
    "build_augmented_pages",
    "load_record",
    "run_document",
    "run_documents",
    "DONE",
    "FAILED",
    "PENDING",
    "RUNNING",
    "SKIPPED",
    "STAGES",
    "ExtractionRecord",
    "MarkushJob",
    "dump_record",
    "dump_triplets",
    "record_from_json",
    "record_to_json",
    "table_from_json",
    "table_to_json",
    "write_record",
    "write_triplets",
    "render_page",
    "render_page_png",
]
