from .attribution import (
    STAGE_BUCKETS,
    AttributionReport,
    attribute_errors,
    triplets_as_preds,
)
from .gold import (
    GoldAnnotation,
    GoldDetection,
    GoldMeasurement,
    GoldRecord,
    GoldStructure,
    GoldTriplet,
    gold_from_json,
    load_gold,
)
from .metrics import (
    DEFAULT_IOU_THRESHOLDS,
    GoldBox,
    MatchResult,
    OcsrScore,
    PRF,
    PredBox,
    PredTriplet,
    StructureScore,
    ToleranceConfig,
    detection_ap,
    iou,
    match_measurements,
    match_triplets,
    measurement_matches,
    ocsr_accuracy,
    prf,
    prf_from_counts,
    score_structures,
    topn_recall,
    triplet_matches,
)
from .report import TASKS, load_gold_dir, score_task, write_report

__all__ = [
    "STAGE_BUCKETS",
    "AttributionReport",
    "attribute_errors",
    "triplets_as_preds",
    "GoldAnnotation",
    "GoldDetection",
    "GoldMeasurement",
    "GoldRecord",
    "GoldStructure",
    "GoldTriplet",
    "gold_from_json",
    "load_gold",
    "DEFAULT_IOU_THRESHOLDS",
    "GoldBox",
    "MatchResult",
    "OcsrScore",
    "PRF",
    "PredBox",
    "PredTriplet",
    "StructureScore",
    "ToleranceConfig",
    "detection_ap",
    "iou",
    "match_measurements",
    "match_triplets",
    "measurement_matches",
    "ocsr_accuracy",
    "prf",
    "prf_from_counts",
    "score_structures",
    "topn_recall",
    "triplet_matches",
    "TASKS",
    "load_gold_dir",
    "score_task",
    "write_report",
]
