"""Attribute each false-negative gold triplet to the earliest pipeline
stage whose artifact already lost it.

The cascade walks detection (was the depiction found at all), OCSR (found
but misread), coreference or Markush enumeration (read but keyed wrong or
row missing, split by the gold markush flag), measurement (no matching
tuple), and finally integration (both sides present, join still missed).
Counts use exact rational arithmetic so the reported fractions sum to 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Optional, Sequence

from ..chem import ChemError, canonical_smiles
from ..join.keys import normalize_coreference
from ..pipeline.record import DONE, ExtractionRecord
from ..measure import CONCENTRATION_FACTORS
from .gold import GoldRecord, GoldStructure, GoldTriplet
from .metrics import MatchResult, PredTriplet, ToleranceConfig, iou, match_triplets

STAGE_BUCKETS = (
    "detection",
    "ocsr",
    "coreference",
    "markush",
    "measurement",
    "integration",
    "unknown",
)


@dataclass(frozen=True)
class AttributionReport:
    total_false_negatives: int
    counts: dict[str, int]
    fractions: dict[str, Fraction]


def triplets_as_preds(record: ExtractionRecord) -> list[PredTriplet]:
    preds = []
    for t in record.triplets:
        value = getattr(t.measurement, "value_nM", None)
        preds.append(
            PredTriplet(
                protein=t.protein,
                smiles=t.smiles,
                assay_type=t.measurement.assay_type,
                value_nM=value,
            )
        )
    return preds


def attribute_errors(
    record: ExtractionRecord,
    gold: GoldRecord,
    tol: ToleranceConfig = ToleranceConfig(),
    match: Optional[MatchResult] = None,
) -> AttributionReport:
    if match is None:
        match = match_triplets(triplets_as_preds(record), gold.triplets, tol)
    counts = {bucket: 0 for bucket in STAGE_BUCKETS}
    for j in match.unmatched_gold:
        bucket = _attribute_one(record, gold, gold.triplets[j], tol)
        counts[bucket] += 1
    total = len(match.unmatched_gold)
    fractions = {
        bucket: Fraction(n, total) for bucket, n in counts.items() if n
    }
    return AttributionReport(
        total_false_negatives=total,
        counts={b: n for b, n in counts.items() if n},
        fractions=fractions,
    )


def _attribute_one(
    record: ExtractionRecord,
    gold: GoldRecord,
    g: GoldTriplet,
    tol: ToleranceConfig,
) -> str:
    structure = _gold_structure_for(gold, g)
    if structure is None:
        return "unknown"
    structure_bucket = "markush" if structure.is_markush else "coreference"
    gold_smiles = _canonical(g.smiles) or g.smiles

    # detection: some predicted box must overlap the gold box at IoU >= 0.5
    if structure.box is not None:
        if record.stage_status.get("detect") != DONE:
            return "unknown"
        overlapping = [
            d
            for d in record.detections
            if d.page == structure.page and iou(d.box, structure.box) >= 0.5
        ]
        if not overlapping:
            return "detection"
        # OCSR: a box was found; for an explicit structure its reading must
        # equal the gold molecule, for a Markush scaffold any reading counts
        if not structure.is_markush:
            if not any(
                _canonical(d.raw_smiles) == gold_smiles for d in overlapping
            ):
                return "ocsr"

    right_smiles = [s for s in record.structures if s.smiles == gold_smiles]
    if not right_smiles:
        return structure_bucket
    gold_keys = _gold_keys(g, structure)
    if not any(
        normalize_coreference(s.coreference) in gold_keys for s in right_smiles
    ):
        return structure_bucket

    if not _measurement_present(record, g, tol):
        return "measurement"
    return "integration"


def _gold_structure_for(gold: GoldRecord, g: GoldTriplet) -> Optional[GoldStructure]:
    by_key = [
        s
        for s in gold.structures
        if g.ligand_coreference and s.coreference == g.ligand_coreference
    ]
    if by_key:
        return by_key[0]
    by_smiles = [s for s in gold.structures if s.smiles == g.smiles]
    return by_smiles[0] if by_smiles else None


def _gold_keys(g: GoldTriplet, structure: GoldStructure) -> set[str]:
    names = set(g.ligand_alternames) | {structure.coreference}
    return {normalize_coreference(n) for n in names if n}


def _canonical(smiles: Optional[str]) -> Optional[str]:
    if not smiles:
        return None
    try:
        return canonical_smiles(smiles)
    except ChemError:
        return None


def _measurement_present(
    record: ExtractionRecord, g: GoldTriplet, tol: ToleranceConfig
) -> bool:
    proteins = {n.casefold() for n in g.protein_alternames}
    keys = {normalize_coreference(n) for n in g.ligand_alternames if n}
    for m in record.measurements:
        if m.protein.casefold() not in proteins:
            continue
        if m.assay_type.casefold() != g.assay_type.casefold():
            continue
        if keys and normalize_coreference(m.ligand_coreference) not in keys:
            continue
        value = getattr(m, "value_nM", None)
        if value is None:
            factor = CONCENTRATION_FACTORS.get(m.unit)
            if factor is None:
                continue
            value = m.value * factor
        if abs(value - g.value_nM) <= tol.value_rel_tol * abs(g.value_nM):
            return True
    return False
