"""Optional protein enrichment against external databases.

Lookups go through a caller-supplied client and a disk cache keyed by the
normalized name; cache hits never touch the client, and transport failures
degrade to None with a counted warning instead of propagating.
"""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional


@dataclass(frozen=True)
class ProteinRecord:
    name: str
    identifiers: tuple[tuple[str, str], ...]  # (database, accession) pairs
    structure_refs: tuple[str, ...]


# name -> payload dict or None for a miss; raises on transport problems
DbClient = Callable[[str], Optional[dict]]


def _normalize_name(name: str) -> str:
    return " ".join(name.split()).casefold()


class ProteinEnricher:
    def __init__(self, db_client: DbClient, cache_dir: Path):
        self.db_client = db_client
        self.cache_dir = Path(cache_dir)
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        self.transport_warnings = 0
        self._write_lock = threading.Lock()

    def _cache_path(self, key: str) -> Path:
        digest = hashlib.sha256(key.encode("utf-8")).hexdigest()
        return self.cache_dir / f"{digest}.json"

    def enrich_protein(self, name: str) -> Optional[ProteinRecord]:
        key = _normalize_name(name)
        if not key:
            return None
        path = self._cache_path(key)
        if path.exists():
            cached = json.loads(path.read_text("utf-8"))
            return _from_payload(key, cached["record"]) if cached["found"] else None

        try:
            payload = self.db_client(key)
        except Exception:
            self.transport_warnings += 1
            return None

        entry = {"name": key, "found": payload is not None, "record": payload}
        with self._write_lock:
            tmp = path.with_suffix(".tmp")
            tmp.write_text(json.dumps(entry, sort_keys=True), "utf-8")
            tmp.replace(path)
        return _from_payload(key, payload) if payload is not None else None


def _from_payload(name: str, payload: dict) -> ProteinRecord:
    identifiers = tuple(
        (str(db), str(acc)) for db, acc in sorted(payload.get("identifiers", {}).items())
    )
    refs = tuple(str(r) for r in payload.get("structure_refs", []))
    return ProteinRecord(name=name, identifiers=identifiers, structure_refs=refs)


def enrich_protein(
    name: str, db_client: DbClient, cache_dir: Path
) -> Optional[ProteinRecord]:
    """One-shot convenience around ProteinEnricher."""
    return ProteinEnricher(db_client, cache_dir).enrich_protein(name)
