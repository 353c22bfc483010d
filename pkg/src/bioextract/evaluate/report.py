"""Task drivers: read per-document prediction directories plus a gold
JSONL, score one task, and emit a JSON report carrying raw counts so any
aggregation can be recomputed.

Micro aggregates by summing counts over documents; macro averages the
per-document rates. Both are always emitted because either convention is
defensible and they genuinely differ on skewed corpora.
"""

from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path
from typing import Optional, Sequence

from ..pipeline.record import record_from_json
from ..measure import to_record
from .attribution import AttributionReport, attribute_errors, triplets_as_preds
from .gold import GoldRecord, load_gold
from .metrics import (
    GoldBox,
    MatchResult,
    PRF,
    PredBox,
    ToleranceConfig,
    detection_ap,
    match_measurements,
    match_triplets,
    ocsr_accuracy,
    prf,
    prf_from_counts,
    score_structures,
    topn_recall,
)

TASKS = ("triplet", "structure", "measurement", "annotation", "detection", "ocsr", "errors")


def load_gold_dir(gold_path: str | Path) -> dict[str, GoldRecord]:
    path = Path(gold_path)
    files = sorted(path.glob("*.jsonl")) if path.is_dir() else [path]
    records: dict[str, GoldRecord] = {}
    for f in files:
        for record in load_gold(f):
            records[record.doc_id] = record
    return records


def _pred_doc_dirs(pred_root: str | Path) -> dict[str, Path]:
    root = Path(pred_root)
    if (root / "record.json").exists() or (root / "triplets.jsonl").exists():
        return {root.name: root}
    return {
        child.name: child
        for child in sorted(root.iterdir())
        if child.is_dir()
        and ((child / "record.json").exists() or (child / "triplets.jsonl").exists())
    }


def _read_jsonl(path: Path) -> list[dict]:
    if not path.exists():
        return []
    out = []
    for line in path.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line:
            out.append(json.loads(line))
    return out


def _load_record(doc_dir: Path):
    path = doc_dir / "record.json"
    if not path.exists():
        return None
    return record_from_json(json.loads(path.read_text(encoding="utf-8")))


def _macro(values: Sequence[float]) -> Optional[float]:
    return sum(values) / len(values) if values else None


def _prf_dict(score: PRF) -> dict:
    return asdict(score)


def score_task(
    task: str,
    pred_root: str | Path,
    gold_path: str | Path,
    tol: ToleranceConfig = ToleranceConfig(),
) -> dict:
    if task not in TASKS:
        raise ValueError(f"unknown task {task!r}; expected one of {TASKS}")
    golds = load_gold_dir(gold_path)
    doc_dirs = _pred_doc_dirs(pred_root)
    driver = {
        "triplet": _score_triplets,
        "structure": _score_structures,
        "measurement": _score_measurements,
        "annotation": _score_annotation,
        "detection": _score_detection,
        "ocsr": _score_ocsr,
        "errors": _score_errors,
    }[task]
    report = driver(doc_dirs, golds, tol)
    report["task"] = task
    report["tolerance"] = {
        "value_rel_tol": str(tol.value_rel_tol),
        "use_alternames": tol.use_alternames,
        "optimal_assignment": tol.optimal_assignment,
    }
    return report


def _matched_docs(doc_dirs: dict[str, Path], golds: dict[str, GoldRecord]):
    for doc_id in sorted(set(doc_dirs) | set(golds)):
        yield doc_id, doc_dirs.get(doc_id), golds.get(doc_id)


def _score_triplets(doc_dirs, golds, tol) -> dict:
    per_doc = {}
    tp = fp = fn = 0
    for doc_id, doc_dir, gold in _matched_docs(doc_dirs, golds):
        preds = _read_jsonl(doc_dir / "triplets.jsonl") if doc_dir else []
        gold_triplets = gold.triplets if gold else ()
        result = match_triplets(preds, gold_triplets, tol)
        score = prf(result)
        per_doc[doc_id] = _prf_dict(score)
        tp += score.tp
        fp += score.fp
        fn += score.fn
    return {
        "per_doc": per_doc,
        "micro": _prf_dict(prf_from_counts(tp, fp, fn)),
        "macro": {
            "precision": _macro([d["precision"] for d in per_doc.values()]),
            "recall": _macro([d["recall"] for d in per_doc.values()]),
            "f1": _macro([d["f1"] for d in per_doc.values()]),
        },
    }


def _score_structures(doc_dirs, golds, tol) -> dict:
    slices = ("with_coreference", "without_coreference", "markush_with", "markush_without")
    per_doc = {}
    totals = {name: [0, 0, 0] for name in slices}
    for doc_id, doc_dir, gold in _matched_docs(doc_dirs, golds):
        record = _load_record(doc_dir) if doc_dir else None
        preds = (
            [
                {"coreference": s.coreference, "smiles": s.smiles, "origin": s.origin}
                for s in record.structures
            ]
            if record
            else []
        )
        gold_structures = gold.structures if gold else ()
        score = score_structures(preds, gold_structures)
        per_doc[doc_id] = {name: _prf_dict(getattr(score, name)) for name in slices}
        for name in slices:
            part = getattr(score, name)
            totals[name][0] += part.tp
            totals[name][1] += part.fp
            totals[name][2] += part.fn
    return {
        "per_doc": per_doc,
        "micro": {
            name: _prf_dict(prf_from_counts(*totals[name])) for name in slices
        },
        "macro": {
            name: _macro([d[name]["f1"] for d in per_doc.values()]) for name in slices
        },
    }


def _score_measurements(doc_dirs, golds, tol) -> dict:
    per_doc = {}
    tp = fp = fn = 0
    for doc_id, doc_dir, gold in _matched_docs(doc_dirs, golds):
        record = _load_record(doc_dir) if doc_dir else None
        preds = [to_record(m) for m in record.measurements] if record else []
        gold_measurements = gold.measurements if gold else ()
        score = prf(match_measurements(preds, gold_measurements, tol))
        per_doc[doc_id] = _prf_dict(score)
        tp += score.tp
        fp += score.fp
        fn += score.fn
    return {
        "per_doc": per_doc,
        "micro": _prf_dict(prf_from_counts(tp, fp, fn)),
        "macro": {
            "precision": _macro([d["precision"] for d in per_doc.values()]),
            "recall": _macro([d["recall"] for d in per_doc.values()]),
            "f1": _macro([d["f1"] for d in per_doc.values()]),
        },
    }


def _score_annotation(doc_dirs, golds, tol) -> dict:
    """Per-document annotation.jsonl lines look like
    {"query_smiles": ..., "candidates": [triplet records ranked]}."""
    ns = (1, 3, 10)
    rankings = []
    gold_triplets = []
    per_doc = {}
    for doc_id, doc_dir, gold in _matched_docs(doc_dirs, golds):
        if gold is None or not gold.annotation:
            continue
        queries = _read_jsonl(doc_dir / "annotation.jsonl") if doc_dir else []
        by_query = {q.get("query_smiles"): q.get("candidates", []) for q in queries}
        doc_rankings = []
        doc_golds = []
        for a in gold.annotation:
            doc_rankings.append(by_query.get(a.query_smiles, []))
            doc_golds.append(gold.triplets[a.triplet])
        recalls = topn_recall(doc_rankings, doc_golds, ns, tol)
        per_doc[doc_id] = {str(n): recalls[n] for n in ns}
        rankings.extend(doc_rankings)
        gold_triplets.extend(doc_golds)
    overall = topn_recall(rankings, gold_triplets, ns, tol)
    return {
        "per_doc": per_doc,
        "micro": {str(n): overall[n] for n in ns},
        "macro": {
            str(n): _macro([d[str(n)] for d in per_doc.values()]) for n in ns
        },
        "queries": len(rankings),
    }


def _score_detection(doc_dirs, golds, tol) -> dict:
    preds: list[PredBox] = []
    gold_boxes: list[GoldBox] = []
    for doc_id, doc_dir, gold in _matched_docs(doc_dirs, golds):
        record = _load_record(doc_dir) if doc_dir else None
        if record is not None:
            for d in record.detections:
                preds.append(
                    PredBox(image_id=f"{doc_id}:{d.page}", box=d.box, score=1.0)
                )
        if gold is not None:
            for g in gold.detections:
                gold_boxes.append(GoldBox(image_id=f"{doc_id}:{g.page}", box=g.box))
    per_threshold, mean_ap = detection_ap(preds, gold_boxes)
    return {
        "ap": {f"{t:.2f}": value for t, value in sorted(per_threshold.items())},
        "mAP": mean_ap,
        "predictions": len(preds),
        "gold_boxes": len(gold_boxes),
    }


def _score_ocsr(doc_dirs, golds, tol) -> dict:
    pairs: list[tuple[str, str]] = []
    for doc_id, doc_dir, gold in _matched_docs(doc_dirs, golds):
        record = _load_record(doc_dir) if doc_dir else None
        if record is None or gold is None:
            continue
        raw_by_id = {d.id: (d.raw_smiles or "") for d in record.detections}
        for idx, g in enumerate(gold.detections):
            if g.smiles:
                pairs.append((raw_by_id.get(idx, ""), g.smiles))
    score = ocsr_accuracy(pairs)
    return {
        "accuracy": score.accuracy,
        "chiral_accuracy": score.chiral_accuracy,
        "total": score.total,
        "chiral_total": score.chiral_total,
    }


def _score_errors(doc_dirs, golds, tol) -> dict:
    per_doc = {}
    counts: dict[str, int] = {}
    total = 0
    for doc_id, doc_dir, gold in _matched_docs(doc_dirs, golds):
        record = _load_record(doc_dir) if doc_dir else None
        if record is None or gold is None:
            continue
        report = attribute_errors(record, gold, tol)
        per_doc[doc_id] = {
            "total_false_negatives": report.total_false_negatives,
            "counts": report.counts,
            "fractions": {k: str(v) for k, v in report.fractions.items()},
        }
        total += report.total_false_negatives
        for bucket, n in report.counts.items():
            counts[bucket] = counts.get(bucket, 0) + n
    from fractions import Fraction

    fractions = {b: Fraction(n, total) for b, n in counts.items()} if total else {}
    return {
        "per_doc": per_doc,
        "total_false_negatives": total,
        "counts": counts,
        "fractions": {b: str(f) for b, f in fractions.items()},
    }


def write_report(report: dict, out_path: str | Path) -> Path:
    path = Path(out_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path
