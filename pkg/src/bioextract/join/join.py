"""Join measurements to structures on normalized coreference keys."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

from ..measure import Measurement, NormalizedMeasurement, to_record
from .keys import normalize_coreference


@dataclass(frozen=True)
class StructureRecord:
    coreference: str
    smiles: str
    origin: str  # "explicit" or "markush_row"
    provenance: tuple[str, ...]  # detection ids

    def __post_init__(self):
        if not self.coreference:
            raise ValueError("structure record needs a coreference mention")
        if self.origin not in ("explicit", "markush_row"):
            raise ValueError(f"unknown structure origin {self.origin!r}")


@dataclass(frozen=True)
class BioactivityTriplet:
    protein: str
    smiles: str
    measurement: Union[Measurement, NormalizedMeasurement]
    join_key: str
    provenance: tuple[str, str]  # (structure id, measurement id)
    flags: tuple[str, ...] = ()


@dataclass(frozen=True)
class JoinResult:
    triplets: tuple[BioactivityTriplet, ...]
    unmatched_measurements: tuple[Union[Measurement, NormalizedMeasurement], ...]
    unmatched_structures: tuple[StructureRecord, ...]
    warnings: tuple[str, ...] = ()


def join(
    measurements: Sequence[Union[Measurement, NormalizedMeasurement]],
    structures: Sequence[StructureRecord],
) -> JoinResult:
    """Exact-key join; every input lands in exactly one output bucket.

    A key shared by several structures joins each of them, with every such
    triplet flagged "ambiguous". Empty keys never match and are reported in
    warnings. Structure and measurement ids in triplet provenance are
    positional ("s0", "m3"), stable for a fixed input order.
    """
    warnings: list[str] = []
    structure_keys: dict[str, list[int]] = {}
    for idx, s in enumerate(structures):
        key = normalize_coreference(s.coreference)
        if not key:
            warnings.append(f"structure s{idx} has an empty join key: {s.coreference!r}")
            continue
        structure_keys.setdefault(key, []).append(idx)

    triplets: list[BioactivityTriplet] = []
    unmatched_m: list[Union[Measurement, NormalizedMeasurement]] = []
    matched_structures: set[int] = set()
    for m_idx, m in enumerate(measurements):
        key = normalize_coreference(m.ligand_coreference)
        if not key:
            warnings.append(
                f"measurement m{m_idx} has an empty join key: {m.ligand_coreference!r}"
            )
            unmatched_m.append(m)
            continue
        partners = structure_keys.get(key, [])
        if not partners:
            unmatched_m.append(m)
            continue
        flags = ("ambiguous",) if len(partners) > 1 else ()
        for s_idx in partners:
            matched_structures.add(s_idx)
            triplets.append(
                BioactivityTriplet(
                    protein=m.protein,
                    smiles=structures[s_idx].smiles,
                    measurement=m,
                    join_key=key,
                    provenance=(f"s{s_idx}", f"m{m_idx}"),
                    flags=flags,
                )
            )

    unmatched_s = tuple(
        s for idx, s in enumerate(structures) if idx not in matched_structures
    )
    return JoinResult(
        triplets=tuple(triplets),
        unmatched_measurements=tuple(unmatched_m),
        unmatched_structures=unmatched_s,
        warnings=tuple(warnings),
    )


def triplet_to_record(t: BioactivityTriplet) -> dict:
    """Flat dict for triplets.jsonl output."""
    m = to_record(t.measurement)
    return {
        "protein": t.protein,
        "smiles": t.smiles,
        "assay_type": m["assay_type"],
        "relation": m["relation"],
        "value": m["value"],
        "unit": m["unit"],
        "value_nM": m["value_nM"],
        "p_value": m["p_value"],
        "join_key": t.join_key,
        "provenance": list(t.provenance),
        "flags": list(t.flags),
    }
