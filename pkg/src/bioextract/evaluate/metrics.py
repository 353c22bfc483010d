"""Scoring: P/R/F1 over triplets, structures, and measurements; ranked
annotation recall; detection average precision; OCSR accuracy.

All matchers are one-to-one and order-independent: candidate pairs are
sorted by a documented key before greedy assignment, so permuting either
input list changes nothing. Counts are kept alongside every rate so either
micro or macro aggregation can be recomputed downstream.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import Optional, Sequence, Union

from ..chem import ChemError, canonical_smiles, molecules_equal, parse_smiles
from ..join.keys import normalize_coreference
from .gold import GoldMeasurement, GoldStructure, GoldTriplet


@dataclass(frozen=True)
class ToleranceConfig:
    value_rel_tol: Decimal = Decimal("1e-3")
    use_alternames: bool = True
    optimal_assignment: bool = False  # audit mode: maximum bipartite instead of greedy


@dataclass(frozen=True)
class PredTriplet:
    protein: str
    smiles: str
    assay_type: str
    value_nM: Optional[Decimal]

    @classmethod
    def from_record(cls, data: dict) -> "PredTriplet":
        raw = data.get("value_nM")
        return cls(
            protein=str(data.get("protein", "")),
            smiles=str(data.get("smiles", "")),
            assay_type=str(data.get("assay_type", "")),
            value_nM=Decimal(str(raw)) if raw is not None else None,
        )


@dataclass(frozen=True)
class MatchResult:
    pairs: tuple[tuple[int, int], ...]
    unmatched_pred: tuple[int, ...]
    unmatched_gold: tuple[int, ...]


@dataclass(frozen=True)
class PRF:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float


def prf(m: MatchResult) -> PRF:
    """Empty pred and empty gold score a perfect 1.0 by convention; a zero
    denominator otherwise scores 0."""
    tp, fp, fn = len(m.pairs), len(m.unmatched_pred), len(m.unmatched_gold)
    return prf_from_counts(tp, fp, fn)


def prf_from_counts(tp: int, fp: int, fn: int) -> PRF:
    if tp == 0 and fp == 0 and fn == 0:
        return PRF(0, 0, 0, 1.0, 1.0, 1.0)
    p = Fraction(tp, tp + fp) if tp + fp else Fraction(0)
    r = Fraction(tp, tp + fn) if tp + fn else Fraction(0)
    f1 = 2 * p * r / (p + r) if p + r else Fraction(0)
    return PRF(tp, fp, fn, float(p), float(r), float(f1))


def _within(pred: Optional[Decimal], gold: Decimal, rel_tol: Decimal) -> bool:
    if pred is None:
        return False
    return abs(pred - gold) <= rel_tol * abs(gold)


def _protein_names(gold_names: Sequence[str], tol: ToleranceConfig) -> set[str]:
    names = gold_names if tol.use_alternames else gold_names[:1]
    return {n.casefold() for n in names}


def triplet_matches(
    pred: PredTriplet, gold: GoldTriplet, tol: ToleranceConfig
) -> bool:
    if pred.protein.casefold() not in _protein_names(gold.protein_alternames, tol):
        return False
    if pred.assay_type.casefold() != gold.assay_type.casefold():
        return False
    if not _within(pred.value_nM, gold.value_nM, tol.value_rel_tol):
        return False
    try:
        return molecules_equal(pred.smiles, gold.smiles, chirality_sensitive=True)
    except ChemError:
        return False


def _assign(
    n_pred: int,
    n_gold: int,
    compatible: dict[tuple[int, int], bool],
    sort_key,
    optimal: bool,
) -> MatchResult:
    pairs = [(i, j) for i in range(n_pred) for j in range(n_gold) if compatible.get((i, j))]
    if optimal:
        chosen = _max_bipartite(n_pred, n_gold, pairs)
    else:
        chosen = []
        used_p: set[int] = set()
        used_g: set[int] = set()
        for i, j in sorted(pairs, key=sort_key):
            if i in used_p or j in used_g:
                continue
            used_p.add(i)
            used_g.add(j)
            chosen.append((i, j))
    matched_p = {i for i, _ in chosen}
    matched_g = {j for _, j in chosen}
    return MatchResult(
        pairs=tuple(sorted(chosen)),
        unmatched_pred=tuple(i for i in range(n_pred) if i not in matched_p),
        unmatched_gold=tuple(j for j in range(n_gold) if j not in matched_g),
    )


def _max_bipartite(n_pred: int, n_gold: int, pairs: list[tuple[int, int]]) -> list:
    adjacency: dict[int, list[int]] = {}
    for i, j in pairs:
        adjacency.setdefault(i, []).append(j)
    match_of_gold: dict[int, int] = {}

    def try_assign(i: int, seen: set[int]) -> bool:
        for j in adjacency.get(i, ()):
            if j in seen:
                continue
            seen.add(j)
            if j not in match_of_gold or try_assign(match_of_gold[j], seen):
                match_of_gold[j] = i
                return True
        return False

    for i in range(n_pred):
        try_assign(i, set())
    return sorted((i, j) for j, i in match_of_gold.items())


def match_triplets(
    preds: Sequence[Union[PredTriplet, dict]],
    golds: Sequence[GoldTriplet],
    tol: ToleranceConfig = ToleranceConfig(),
) -> MatchResult:
    """One-to-one triplet matching.

    A pair matches when the predicted protein equals any gold altername
    case-insensitively, the canonical SMILES are equal with chirality, the
    assay types agree, and value_nM is within the relative tolerance.
    Greedy assignment prefers exact protein-string matches, then earlier
    (pred, gold) document order.
    """
    normalized = [
        p if isinstance(p, PredTriplet) else PredTriplet.from_record(p) for p in preds
    ]
    compatible = {
        (i, j): triplet_matches(p, g, tol)
        for i, p in enumerate(normalized)
        for j, g in enumerate(golds)
    }

    def sort_key(pair):
        i, j = pair
        exact = 0 if normalized[i].protein == golds[j].protein else 1
        return (exact, i, j)

    return _assign(len(normalized), len(golds), compatible, sort_key, tol.optimal_assignment)


def measurement_matches(pred: dict, gold: GoldMeasurement, tol: ToleranceConfig) -> bool:
    protein = str(pred.get("protein", "")).casefold()
    if protein not in _protein_names(gold.protein_alternames, tol):
        return False
    if str(pred.get("assay_type", "")).casefold() != gold.assay_type.casefold():
        return False
    keys = {normalize_coreference(n) for n in gold.ligand_alternames}
    if normalize_coreference(str(pred.get("ligand_coreference", ""))) not in keys:
        return False
    raw = pred.get("value_nM")
    value = Decimal(str(raw)) if raw is not None else None
    return _within(value, gold.value_nM, tol.value_rel_tol)


def match_measurements(
    preds: Sequence[dict],
    golds: Sequence[GoldMeasurement],
    tol: ToleranceConfig = ToleranceConfig(),
) -> MatchResult:
    compatible = {
        (i, j): measurement_matches(p, g, tol)
        for i, p in enumerate(preds)
        for j, g in enumerate(golds)
    }

    def sort_key(pair):
        i, j = pair
        exact = 0 if str(preds[i].get("protein", "")) == golds[j].protein else 1
        return (exact, i, j)

    return _assign(len(preds), len(golds), compatible, sort_key, tol.optimal_assignment)


@dataclass(frozen=True)
class StructureScore:
    with_coreference: PRF
    without_coreference: PRF
    markush_with: PRF
    markush_without: PRF


def _canonical_or_none(smiles: str) -> Optional[str]:
    try:
        return canonical_smiles(smiles)
    except ChemError:
        return None


def _multiset_tp(pred: list, gold: list) -> int:
    from collections import Counter

    pc, gc = Counter(pred), Counter(gold)
    return sum(min(n, gc[k]) for k, n in pc.items())


def score_structures(
    preds: Sequence[dict],
    golds: Sequence[GoldStructure],
) -> StructureScore:
    """Structure extraction scored two ways: (key, SMILES) pairs with
    coreference, and SMILES multisets without. The Markush slices restrict
    gold by its markush flag and pred by origin when a pred carries one.
    """

    def slices(pred_subset: list[dict], gold_subset: list[GoldStructure]):
        pred_pairs = []
        pred_smiles = []
        for p in pred_subset:
            smiles = _canonical_or_none(str(p.get("smiles", "")))
            key = normalize_coreference(str(p.get("coreference", "")))
            pred_pairs.append((key, smiles))
            pred_smiles.append(smiles)
        gold_pairs = [
            (normalize_coreference(g.coreference), _canonical_or_none(g.smiles))
            for g in gold_subset
        ]
        gold_smiles = [pair[1] for pair in gold_pairs]
        tp_with = _multiset_tp(
            [p for p in pred_pairs if p[1] is not None],
            [g for g in gold_pairs if g[1] is not None],
        )
        tp_without = _multiset_tp(
            [s for s in pred_smiles if s is not None],
            [s for s in gold_smiles if s is not None],
        )
        n_pred, n_gold = len(pred_subset), len(gold_subset)
        return (
            prf_from_counts(tp_with, n_pred - tp_with, n_gold - tp_with),
            prf_from_counts(tp_without, n_pred - tp_without, n_gold - tp_without),
        )

    preds = list(preds)
    golds = list(golds)
    with_all, without_all = slices(preds, golds)
    markush_preds = [p for p in preds if p.get("origin", "markush_row") == "markush_row"]
    markush_golds = [g for g in golds if g.is_markush]
    with_m, without_m = slices(markush_preds, markush_golds)
    return StructureScore(
        with_coreference=with_all,
        without_coreference=without_all,
        markush_with=with_m,
        markush_without=without_m,
    )


def topn_recall(
    rankings: Sequence[Sequence[Union[PredTriplet, dict]]],
    golds: Sequence[GoldTriplet],
    ns: Sequence[int] = (1, 3, 10),
    tol: ToleranceConfig = ToleranceConfig(),
) -> dict[int, float]:
    """rankings[q] is the ordered candidate list for query q; golds[q] is
    that query's correct triplet. recall@N counts queries whose gold
    appears among the first N candidates under the triplet criterion."""
    if len(rankings) != len(golds):
        raise ValueError("one gold triplet per query ranking required")
    if not rankings:
        return {n: 1.0 for n in ns}
    hits = {n: 0 for n in ns}
    for ranked, gold in zip(rankings, golds):
        normalized = [
            c if isinstance(c, PredTriplet) else PredTriplet.from_record(c)
            for c in ranked
        ]
        rank = next(
            (k for k, c in enumerate(normalized) if triplet_matches(c, gold, tol)),
            None,
        )
        for n in ns:
            if rank is not None and rank < n:
                hits[n] += 1
    return {n: hits[n] / len(rankings) for n in ns}


def iou(a: Sequence[float], b: Sequence[float]) -> float:
    ax0, ay0, ax1, ay1 = a
    bx0, by0, bx1, by1 = b
    ix0, iy0 = max(ax0, bx0), max(ay0, by0)
    ix1, iy1 = min(ax1, bx1), min(ay1, by1)
    if ix0 >= ix1 or iy0 >= iy1:
        return 0.0
    inter = (ix1 - ix0) * (iy1 - iy0)
    union = (ax1 - ax0) * (ay1 - ay0) + (bx1 - bx0) * (by1 - by0) - inter
    return inter / union


@dataclass(frozen=True)
class PredBox:
    image_id: str
    box: tuple[float, float, float, float]
    score: float


@dataclass(frozen=True)
class GoldBox:
    image_id: str
    box: tuple[float, float, float, float]


DEFAULT_IOU_THRESHOLDS = tuple(round(0.5 + 0.05 * k, 2) for k in range(10))


def detection_ap(
    preds: Sequence[PredBox],
    golds: Sequence[GoldBox],
    thresholds: Sequence[float] = DEFAULT_IOU_THRESHOLDS,
) -> tuple[dict[float, float], float]:
    """Average precision per IoU threshold plus the mean over thresholds.

    Predictions are processed in descending score (input order on ties);
    each matches the highest-IoU unmatched gold of its image at or above
    the threshold. The PR curve integrates with all-points interpolation.
    """
    ap_per_threshold = {t: _ap_single(preds, golds, t) for t in thresholds}
    mean_ap = (
        sum(ap_per_threshold.values()) / len(ap_per_threshold)
        if ap_per_threshold
        else 0.0
    )
    return ap_per_threshold, mean_ap


def _ap_single(preds: Sequence[PredBox], golds: Sequence[GoldBox], thr: float) -> float:
    if not golds:
        return 1.0 if not preds else 0.0
    order = sorted(range(len(preds)), key=lambda i: (-preds[i].score, i))
    gold_by_image: dict[str, list[int]] = {}
    for j, g in enumerate(golds):
        gold_by_image.setdefault(g.image_id, []).append(j)
    taken: set[int] = set()
    flags: list[bool] = []
    for i in order:
        p = preds[i]
        best_j, best_iou = None, 0.0
        for j in gold_by_image.get(p.image_id, ()):
            if j in taken:
                continue
            value = iou(p.box, golds[j].box)
            if value >= thr and value > best_iou:
                best_j, best_iou = j, value
        if best_j is None:
            flags.append(False)
        else:
            taken.add(best_j)
            flags.append(True)
    return _ap_from_flags(flags, len(golds))


def _ap_from_flags(flags: Sequence[bool], n_gold: int) -> float:
    tp = 0
    points: list[tuple[float, float]] = []  # (recall, precision)
    for k, is_tp in enumerate(flags, start=1):
        if is_tp:
            tp += 1
        points.append((tp / n_gold, tp / k))
    # all-points interpolation: precision envelope from the right
    ap = 0.0
    prev_recall = 0.0
    for idx, (recall, _) in enumerate(points):
        if recall == prev_recall:
            continue
        envelope = max(p for r, p in points[idx:])
        ap += (recall - prev_recall) * envelope
        prev_recall = recall
    return ap


@dataclass(frozen=True)
class OcsrScore:
    accuracy: float
    chiral_accuracy: Optional[float]
    total: int
    chiral_total: int


def ocsr_accuracy(pairs: Sequence[tuple[str, str]]) -> OcsrScore:
    """pairs are (predicted SMILES, gold SMILES) per detection. A pair is
    right when the molecules are equal with chirality; unparseable
    predictions are wrong. The chiral slice keeps gold molecules carrying
    at least one tetrahedral tag."""
    total = len(pairs)
    correct = 0
    chiral_total = 0
    chiral_correct = 0
    for pred, gold in pairs:
        try:
            is_chiral = bool(parse_smiles(gold).chiral_order)
        except ChemError as exc:
            raise ValueError(f"gold SMILES does not parse: {gold!r}") from exc
        try:
            right = molecules_equal(pred, gold, chirality_sensitive=True)
        except ChemError:
            right = False
        correct += right
        if is_chiral:
            chiral_total += 1
            chiral_correct += right
    return OcsrScore(
        accuracy=correct / total if total else 1.0,
        chiral_accuracy=chiral_correct / chiral_total if chiral_total else None,
        total=total,
        chiral_total=chiral_total,
    )
