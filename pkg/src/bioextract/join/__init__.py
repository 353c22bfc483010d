"""Measurement-structure integration: keys, join, ranking, enrichment."""

from .keys import normalize_coreference
from .join import BioactivityTriplet, JoinResult, StructureRecord, join, triplet_to_record
from .annotate import (
    AnnotationCandidate,
    SelectionResult,
    rank_for_annotation,
    select_annotation,
)
from .enrich import DbClient, ProteinEnricher, ProteinRecord, enrich_protein

__all__ = [
    "AnnotationCandidate",
    "BioactivityTriplet",
    "DbClient",
    "JoinResult",
    "ProteinEnricher",
    "ProteinRecord",
    "SelectionResult",
    "StructureRecord",
    "enrich_protein",
    "join",
    "normalize_coreference",
    "rank_for_annotation",
    "select_annotation",
    "triplet_to_record",
]
