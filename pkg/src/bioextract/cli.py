"""Command line entry points.

extract   run documents through the pipeline (live, recording, or replay)
score     evaluate a prediction directory against gold JSONL
annotate  rank a record's triplets against a query structure
serve     start the curation HTTP service
"""

from __future__ import annotations

import argparse
import json
import sys
from decimal import Decimal
from pathlib import Path
from typing import Optional

try:
    import tomllib  # py311+
except ImportError:  # pragma: no cover
    import tomli as tomllib

from .evaluate.metrics import ToleranceConfig
from .evaluate.report import score_task, write_report
from .join.annotate import rank_for_annotation
from .pipeline.backends import (
    BackendClient,
    Cassette,
    HttpBackendClient,
    RecordingBackend,
    ReplayBackend,
)
from .pipeline.orchestrator import PipelineConfig, load_record, run_documents


def _load_backend_config(path: Optional[str]) -> dict:
    if path is None:
        return {}
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def _build_client(
    config: dict, cassette_dir: Optional[str], record: bool, replay: bool
) -> BackendClient:
    base = None
    if config.get("base_url"):
        base = HttpBackendClient(
            base_url=config["base_url"],
            timeout=float(config.get("timeout", 30.0)),
            retries=int(config.get("retries", 3)),
            backoff=float(config.get("backoff", 0.5)),
        )
    if cassette_dir is None:
        if base is None:
            raise SystemExit(
                "error: no backends configured; pass --backends or --cassette"
            )
        return base
    cassette = Cassette(cassette_dir)
    if replay or base is None:
        if record:
            raise SystemExit("error: --record needs --backends for the live side")
        return ReplayBackend(cassette)
    return RecordingBackend(base, cassette)


def _pipeline_config(config: dict, workers: Optional[int]) -> PipelineConfig:
    return PipelineConfig(
        workers=workers if workers is not None else int(config.get("workers", 1)),
        reasoner_batch=int(config.get("reasoner_batch", 4)),
        dpi=int(config.get("dpi", 200)),
        abbreviations_path=config.get("abbreviations"),
    )


def _gather_sources(input_path: str) -> list[Path]:
    path = Path(input_path)
    if path.is_dir():
        sources = sorted(
            p for p in path.iterdir() if p.suffix.lower() in (".pdf", ".json")
        )
        if not sources:
            raise SystemExit(f"error: no .pdf or .json documents under {path}")
        return sources
    if not path.is_file():
        raise SystemExit(f"error: no such input {path}")
    return [path]


def cmd_extract(args: argparse.Namespace) -> int:
    config = _load_backend_config(args.backends)
    client = _build_client(config, args.cassette, args.record, args.replay)
    pipe_config = _pipeline_config(config, args.workers)
    sources = _gather_sources(args.input)
    records = run_documents(sources, client, pipe_config, out_root=args.out)
    for record in records:
        statuses = ",".join(
            f"{stage}={status}" for stage, status in record.stage_status.items()
        )
        print(
            f"{record.doc_id}: structures={len(record.structures)} "
            f"measurements={len(record.measurements)} triplets={len(record.triplets)}"
        )
        print(f"  {statuses}")
        for stage, texts in sorted(record.warnings.items()):
            for text in texts:
                print(f"  warning[{stage}]: {text}")
    return 0


def cmd_score(args: argparse.Namespace) -> int:
    tol = ToleranceConfig(
        value_rel_tol=Decimal(args.value_rel_tol),
        use_alternames=not args.no_alternames,
        optimal_assignment=args.optimal_assignment,
    )
    report = score_task(args.task, args.pred, args.gold, tol)
    write_report(report, args.out)
    headline = {
        k: v
        for k, v in report.get("micro", report).items()
        if isinstance(v, (int, float))
    }
    if not headline:
        # structure reports nest a PRF block per comparison mode
        headline = {
            k: v["f1"]
            for k, v in report.get("micro", {}).items()
            if isinstance(v, dict) and "f1" in v
        }
    line = " ".join(
        f"{k}={v:.4f}" if isinstance(v, float) else f"{k}={v}"
        for k, v in sorted(headline.items())
    )
    print(f"{args.task}: {line}")
    print(f"report written to {args.out}")
    return 0


def cmd_annotate(args: argparse.Namespace) -> int:
    path = Path(args.record)
    record = load_record(path if path.is_dir() else path.parent)
    ranked = rank_for_annotation(record.triplets, args.query_smiles)
    for c in ranked[: args.top]:
        m = c.triplet.measurement
        marker = "*" if c.perfect_match else " "
        print(
            f"{c.rank:3d}{marker} sim={c.similarity:.3f} "
            f"{c.triplet.protein} / {c.triplet.join_key}: "
            f"{m.assay_type} {m.relation} {m.value} {m.unit}"
        )
    if not ranked:
        print("no triplets to rank")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .curation import CurationService, create_app

    config = _load_backend_config(args.backends)
    client = None
    if args.backends or args.cassette:
        client = _build_client(config, args.cassette, args.record, not args.record)
    service = CurationService(
        args.store, client=client, pipeline_config=_pipeline_config(config, None)
    )
    uvicorn.run(create_app(service), host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bioextract")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="run documents through the pipeline")
    p.add_argument("--input", required=True, help="PDF/JSON document or directory")
    p.add_argument("--backends", help="TOML backend config (base_url, timeout, ...)")
    p.add_argument("--cassette", help="cassette directory for record/replay")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--record", action="store_true", help="record live responses")
    mode.add_argument("--replay", action="store_true", help="replay cassette only")
    p.add_argument("--out", required=True, help="output root, one directory per doc")
    p.add_argument("--workers", type=int, help="override worker count")
    p.set_defaults(fn=cmd_extract)

    p = sub.add_parser("score", help="score predictions against gold")
    p.add_argument("--pred", required=True, help="prediction directory")
    p.add_argument("--gold", required=True, help="gold JSONL file or directory")
    p.add_argument(
        "--task",
        required=True,
        choices=(
            "triplet",
            "structure",
            "measurement",
            "annotation",
            "detection",
            "ocsr",
            "errors",
        ),
    )
    p.add_argument("--out", default="report.json", help="report path")
    p.add_argument("--value-rel-tol", default="1e-3")
    p.add_argument("--no-alternames", action="store_true")
    p.add_argument("--optimal-assignment", action="store_true")
    p.set_defaults(fn=cmd_score)

    p = sub.add_parser("annotate", help="rank triplets against a query structure")
    p.add_argument("--record", required=True, help="record.json or its directory")
    p.add_argument("--query-smiles", required=True)
    p.add_argument("--top", type=int, default=10)
    p.set_defaults(fn=cmd_annotate)

    p = sub.add_parser("serve", help="start the curation service")
    p.add_argument("--store", required=True, help="store directory")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8350)
    p.add_argument("--backends", help="TOML backend config for new runs")
    p.add_argument("--cassette", help="cassette directory")
    p.add_argument("--record", action="store_true", help="record live responses")
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
