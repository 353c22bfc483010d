"""Metric implementations against hand-counted and brute-force oracles."""

import random
from decimal import Decimal
from fractions import Fraction

import pytest

from bioextract.evaluate import (
    GoldBox,
    GoldMeasurement,
    GoldRecord,
    GoldStructure,
    GoldTriplet,
    PredBox,
    PredTriplet,
    ToleranceConfig,
    attribute_errors,
    detection_ap,
    match_triplets,
    ocsr_accuracy,
    prf,
    score_structures,
    score_task,
    topn_recall,
)
from bioextract.evaluate.metrics import DEFAULT_IOU_THRESHOLDS, iou
from bioextract.chem import canonical_smiles
from bioextract.measure import Measurement, normalize
from bioextract.pipeline.document import Detection
from bioextract.pipeline.record import DONE, ExtractionRecord
from bioextract.join import StructureRecord


def gold_triplet(protein="EGFR", smiles="c1ccccc1", assay="IC50", value="25", **kw):
    return GoldTriplet(
        protein=protein,
        smiles=smiles,
        assay_type=assay,
        value_nM=Decimal(value),
        **kw,
    )


def pred_triplet(protein="EGFR", smiles="c1ccccc1", assay="IC50", value="25"):
    return PredTriplet(
        protein=protein,
        smiles=smiles,
        assay_type=assay,
        value_nM=Decimal(value) if value is not None else None,
    )


class TestTripletMatching:
    def test_hand_counted_prf(self):
        golds = [
            gold_triplet(value="25"),
            gold_triplet(smiles="Cc1ccccc1", value="1200"),
            gold_triplet(protein="CDK2", smiles="CCO", assay="Ki", value="40"),
            gold_triplet(protein="JAK2", smiles="CCN", assay="Kd", value="500"),
        ]
        preds = [
            pred_triplet(value="25"),
            pred_triplet(smiles="Cc1ccccc1", value="1200"),
            pred_triplet(protein="CDK2", smiles="CCO", assay="Ki", value="9999"),
        ]
        score = prf(match_triplets(preds, golds))
        assert (score.tp, score.fp, score.fn) == (2, 1, 2)
        assert score.precision == float(Fraction(2, 3))
        assert score.recall == float(Fraction(1, 2))
        assert score.f1 == float(Fraction(4, 7))

    def test_empty_both_is_perfect(self):
        score = prf(match_triplets([], []))
        assert (score.precision, score.recall, score.f1) == (1.0, 1.0, 1.0)

    def test_value_tolerance_boundary(self):
        golds = [gold_triplet(value="1000")]
        inside = pred_triplet(value="1001")
        outside = pred_triplet(value="1002")
        assert prf(match_triplets([inside], golds)).tp == 1
        assert prf(match_triplets([outside], golds)).tp == 0

    def test_alternames_honored_and_disabled(self):
        golds = [gold_triplet(protein_alternames=("EGFR", "ErbB1"))]
        pred = pred_triplet(protein="erbb1")
        assert prf(match_triplets([pred], golds)).tp == 1
        strict = ToleranceConfig(use_alternames=False)
        assert prf(match_triplets([pred], golds, strict)).tp == 0

    def test_alias_smiles_spellings_match(self):
        golds = [gold_triplet(smiles="C1=CC=CC=C1")]
        assert prf(match_triplets([pred_triplet(smiles="c1ccccc1")], golds)).tp == 1

    def test_chirality_distinguishes(self):
        golds = [gold_triplet(smiles="C[C@H](N)C(=O)O")]
        wrong = pred_triplet(smiles="C[C@@H](N)C(=O)O")
        right = pred_triplet(smiles="C[C@H](N)C(=O)O")
        assert prf(match_triplets([wrong], golds)).tp == 0
        assert prf(match_triplets([right], golds)).tp == 1

    def test_optimal_assignment_beats_greedy_on_crafted_case(self):
        golds = [gold_triplet(value="100"), gold_triplet(value="100.15")]
        preds = [pred_triplet(value="100.08"), pred_triplet(value="99.95")]
        greedy = prf(match_triplets(preds, golds))
        optimal = prf(
            match_triplets(preds, golds, ToleranceConfig(optimal_assignment=True))
        )
        assert greedy.tp == 1
        assert optimal.tp == 2


class TestTopNRecall:
    def test_hand_built_ranking_fixture(self):
        golds = [
            gold_triplet(value="25"),
            gold_triplet(value="40"),
            gold_triplet(value="60"),
            gold_triplet(value="80"),
        ]
        filler = {"protein": "XXX", "smiles": "CCCC", "assay_type": "IC50", "value_nM": "1"}

        def hit(g):
            return {
                "protein": g.protein,
                "smiles": g.smiles,
                "assay_type": g.assay_type,
                "value_nM": str(g.value_nM),
            }

        rankings = [
            [hit(golds[0])] + [filler] * 9,            # rank 1
            [filler, hit(golds[1])] + [filler] * 8,    # rank 2
            [filler] * 4 + [hit(golds[2])] + [filler] * 5,  # rank 5
            [filler] * 10,                              # absent
        ]
        recalls = topn_recall(rankings, golds)
        assert recalls[1] == 0.25
        assert recalls[3] == 0.5
        assert recalls[10] == 0.75

    def test_ranking_count_mismatch_rejected(self):
        with pytest.raises(ValueError):
            topn_recall([[]], [])


def oracle_ap(preds, golds, thr):
    """Naive reimplementation from the definition, kept deliberately
    different in shape from the scored code: exhaustive scans, explicit
    suffix maxima for the envelope."""
    if not golds:
        return 1.0 if not preds else 0.0
    order = sorted(range(len(preds)), key=lambda i: (-preds[i].score, i))
    taken = [False] * len(golds)
    flags = []
    for i in order:
        candidates = []
        for j in range(len(golds)):
            if taken[j] or golds[j].image_id != preds[i].image_id:
                continue
            value = iou(preds[i].box, golds[j].box)
            if value >= thr:
                candidates.append((value, j))
        if not candidates:
            flags.append(False)
            continue
        candidates.sort(key=lambda c: -c[0])
        taken[candidates[0][1]] = True
        flags.append(True)

    curve = []
    tp = 0
    for k, f in enumerate(flags, start=1):
        tp += f
        curve.append((tp / len(golds), tp / k))
    ap = 0.0
    previous = 0.0
    for idx in range(len(curve)):
        recall = curve[idx][0]
        if recall == previous:
            continue
        ap += (recall - previous) * max(p for _, p in curve[idx:])
        previous = recall
    return ap


def random_box(rng):
    x0 = rng.uniform(0, 0.8)
    y0 = rng.uniform(0, 0.8)
    return (x0, y0, x0 + rng.uniform(0.05, 0.2), y0 + rng.uniform(0.05, 0.2))


class TestDetectionAP:
    def test_hand_computed_curve(self):
        golds = [GoldBox("a", (0.0, 0.0, 0.2, 0.2)), GoldBox("a", (0.5, 0.5, 0.7, 0.7))]
        preds = [
            PredBox("a", (0.0, 0.0, 0.2, 0.2), score=0.9),   # TP
            PredBox("a", (0.8, 0.8, 0.9, 0.9), score=0.8),   # FP
            PredBox("a", (0.5, 0.5, 0.7, 0.7), score=0.7),   # TP
        ]
        per_threshold, mean_ap = detection_ap(preds, golds, thresholds=(0.5,))
        # flags T,F,T over 2 golds: AP = 0.5*1 + 0.5*(2/3)
        assert abs(per_threshold[0.5] - 5 / 6) < 1e-12
        assert abs(mean_ap - 5 / 6) < 1e-12

    def test_empty_gold_and_empty_pred(self):
        per_threshold, mean_ap = detection_ap([], [], thresholds=(0.5,))
        assert mean_ap == 1.0

    def test_predictions_without_gold_score_zero(self):
        preds = [PredBox("a", (0.1, 0.1, 0.2, 0.2), score=1.0)]
        _, mean_ap = detection_ap(preds, [], thresholds=(0.5,))
        assert mean_ap == 0.0

    def test_matches_bruteforce_oracle_on_small_instances(self):
        rng = random.Random(424242)
        for _ in range(300):
            image_ids = ["a", "b"]
            preds = [
                PredBox(rng.choice(image_ids), random_box(rng), score=rng.random())
                for _ in range(rng.randint(0, 5))
            ]
            golds = [
                GoldBox(rng.choice(image_ids), random_box(rng))
                for _ in range(rng.randint(0, 5))
            ]
            per_threshold, mean_ap = detection_ap(preds, golds)
            expected = {t: oracle_ap(preds, golds, t) for t in DEFAULT_IOU_THRESHOLDS}
            for t in DEFAULT_IOU_THRESHOLDS:
                assert abs(per_threshold[t] - expected[t]) < 1e-12, (t, preds, golds)
            assert abs(mean_ap - sum(expected.values()) / len(expected)) < 1e-12


class TestOcsr:
    def test_alias_spelling_counts_as_correct(self):
        score = ocsr_accuracy([("C1=CC=CC=C1", "c1ccccc1")])
        assert score.accuracy == 1.0

    def test_unparseable_prediction_counts_as_wrong(self):
        score = ocsr_accuracy([("C1CC", "c1ccccc1")])
        assert score.accuracy == 0.0

    def test_chiral_slice(self):
        pairs = [
            ("C[C@H](N)C(=O)O", "C[C@H](N)C(=O)O"),    # chiral, right
            ("C[C@@H](N)C(=O)O", "C[C@H](N)C(=O)O"),   # chiral, wrong stereo
            ("CCO", "CCO"),                             # achiral
        ]
        score = ocsr_accuracy(pairs)
        assert score.total == 3
        assert score.chiral_total == 2
        assert score.accuracy == pytest.approx(2 / 3)
        assert score.chiral_accuracy == pytest.approx(1 / 2)

    def test_empty_input(self):
        score = ocsr_accuracy([])
        assert score.accuracy == 1.0
        assert score.chiral_accuracy is None


class TestStructureScore:
    def test_wrong_key_right_molecule_splits_the_modes(self):
        golds = [GoldStructure(coreference="1", smiles="c1ccccc1")]
        preds = [{"coreference": "2", "smiles": "c1ccccc1", "origin": "explicit"}]
        score = score_structures(preds, golds)
        assert score.with_coreference.tp == 0
        assert score.without_coreference.tp == 1

    def test_markush_slice_restricts_by_flag_and_origin(self):
        golds = [
            GoldStructure(coreference="1", smiles="c1ccccc1"),
            GoldStructure(coreference="4a", smiles="Cc1ccccc1", is_markush=True),
        ]
        preds = [
            {"coreference": "1", "smiles": "c1ccccc1", "origin": "explicit"},
            {"coreference": "4a", "smiles": "Cc1ccccc1", "origin": "markush_row"},
        ]
        score = score_structures(preds, golds)
        assert score.with_coreference.tp == 2
        assert score.markush_with.tp == 1
        assert score.markush_with.fp == 0

    def test_alias_smiles_spelling_still_counts(self):
        golds = [GoldStructure(coreference="1", smiles="C1=CC=CC=C1")]
        preds = [{"coreference": "Compound 1", "smiles": "c1ccccc1", "origin": "explicit"}]
        score = score_structures(preds, golds)
        assert score.with_coreference.tp == 1


def normalized(protein, coref, assay, value, unit="nM"):
    return normalize(
        Measurement(
            protein=protein,
            ligand_coreference=coref,
            assay_type=assay,
            value=Decimal(value),
            unit=unit,
            modality="text",
            provenance=((1, "p1"),),
        )
    )


def record_with(detections=(), structures=(), measurements=(), triplets=()):
    record = ExtractionRecord(
        doc_id="attr-doc",
        detections=tuple(detections),
        structures=tuple(structures),
        measurements=tuple(measurements),
        triplets=tuple(triplets),
    )
    record.set_status("detect", DONE)
    return record


class TestAttribution:
    def gold(self):
        return GoldRecord(
            doc_id="attr-doc",
            triplets=(
                gold_triplet(smiles="c1ccccc1", value="25", ligand_coreference="1"),
                gold_triplet(smiles="Cc1ccccc1", value="40", ligand_coreference="2"),
                gold_triplet(smiles="CCO", value="60", ligand_coreference="3"),
            ),
            structures=(
                GoldStructure(coreference="1", smiles="c1ccccc1", page=1, box=(0.1, 0.1, 0.3, 0.3)),
                GoldStructure(coreference="2", smiles="Cc1ccccc1", page=1, box=(0.5, 0.1, 0.7, 0.3)),
                GoldStructure(coreference="3", smiles="CCO", page=2, box=(0.1, 0.1, 0.3, 0.3)),
            ),
        )

    def test_buckets_and_fraction_sum(self):
        # structure 1 never detected; 2 detected but misread; 3 fully
        # extracted with its measurement, join just never ran
        record = record_with(
            detections=(
                Detection(id=0, page=1, box=(0.5, 0.1, 0.7, 0.3), raw_smiles="CCCC"),
                Detection(id=1, page=2, box=(0.1, 0.1, 0.3, 0.3), raw_smiles="CCO"),
            ),
            structures=(
                StructureRecord(
                    coreference="3",
                    smiles=canonical_smiles("CCO"),
                    origin="explicit",
                    provenance=("1",),
                ),
            ),
            measurements=(normalized("EGFR", "3", "IC50", "60"),),
        )
        report = attribute_errors(record, self.gold())
        assert report.total_false_negatives == 3
        assert report.counts == {"detection": 1, "ocsr": 1, "integration": 1}
        assert sum(report.fractions.values()) == Fraction(1)

    def test_measurement_bucket(self):
        record = record_with(
            detections=(
                Detection(id=0, page=1, box=(0.1, 0.1, 0.3, 0.3), raw_smiles="c1ccccc1"),
            ),
            structures=(
                StructureRecord(
                    coreference="1",
                    smiles=canonical_smiles("c1ccccc1"),
                    origin="explicit",
                    provenance=("0",),
                ),
            ),
        )
        gold = GoldRecord(
            doc_id="attr-doc",
            triplets=(gold_triplet(smiles="c1ccccc1", value="25", ligand_coreference="1"),),
            structures=(
                GoldStructure(coreference="1", smiles="c1ccccc1", page=1, box=(0.1, 0.1, 0.3, 0.3)),
            ),
        )
        report = attribute_errors(record, gold)
        assert report.counts == {"measurement": 1}

    def test_markush_bucket_uses_gold_flag(self):
        record = record_with(
            detections=(
                Detection(id=0, page=1, box=(0.1, 0.1, 0.3, 0.3), is_markush=True),
            ),
        )
        gold = GoldRecord(
            doc_id="attr-doc",
            triplets=(gold_triplet(smiles="Cc1ccccc1", value="40", ligand_coreference="4a"),),
            structures=(
                GoldStructure(
                    coreference="4a",
                    smiles="Cc1ccccc1",
                    is_markush=True,
                    page=1,
                    box=(0.1, 0.1, 0.3, 0.3),
                ),
            ),
        )
        report = attribute_errors(record, gold)
        assert report.counts == {"markush": 1}

    def test_no_false_negatives_no_fractions(self):
        gold = GoldRecord(doc_id="attr-doc")
        report = attribute_errors(record_with(), gold)
        assert report.total_false_negatives == 0
        assert report.fractions == {}


class TestScoreTask:
    def test_unknown_task_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            score_task("nonsense", tmp_path, tmp_path / "gold.jsonl")
