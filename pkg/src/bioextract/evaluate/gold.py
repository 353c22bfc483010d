"""Gold-standard records and their JSONL format.

One line per document:

  {"doc_id": "...",
   "triplets": [{"protein": "EGFR", "protein_alternames": ["EGFR", "ErbB1"],
                 "smiles": "...", "ligand_coreference": "4a",
                 "ligand_alternames": ["4a", "compound 4a"],
                 "assay_type": "IC50", "value_nM": "25", "relation": "="}],
   "structures": [{"coreference": "4a", "smiles": "...", "is_markush": true,
                   "page": 2, "box": [x0, y0, x1, y1]}],
   "measurements": [ten-field measurement records (+ alternames)],
   "detections": [{"page": 1, "box": [x0, y0, x1, y1], "smiles": "..."}],
   "annotation": [{"query_smiles": "...", "triplet": 0}]}

altername lists always include the primary spelling; absent lists default
to the primary alone. Gold SMILES are stored canonical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from decimal import Decimal
from pathlib import Path
from typing import Optional

Box = tuple[float, float, float, float]


@dataclass(frozen=True)
class GoldTriplet:
    protein: str
    smiles: str
    assay_type: str
    value_nM: Decimal
    protein_alternames: tuple[str, ...] = ()
    ligand_coreference: str = ""
    ligand_alternames: tuple[str, ...] = ()
    relation: str = "="

    def __post_init__(self):
        if not self.protein_alternames:
            object.__setattr__(self, "protein_alternames", (self.protein,))
        elif self.protein not in self.protein_alternames:
            raise ValueError(
                f"alternames for {self.protein!r} must include the primary name"
            )
        if self.ligand_coreference and not self.ligand_alternames:
            object.__setattr__(self, "ligand_alternames", (self.ligand_coreference,))


@dataclass(frozen=True)
class GoldStructure:
    coreference: str
    smiles: str
    is_markush: bool = False
    page: Optional[int] = None
    box: Optional[Box] = None


@dataclass(frozen=True)
class GoldMeasurement:
    protein: str
    ligand_coreference: str
    assay_type: str
    value_nM: Decimal
    protein_alternames: tuple[str, ...] = ()
    ligand_alternames: tuple[str, ...] = ()
    relation: str = "="

    def __post_init__(self):
        if not self.protein_alternames:
            object.__setattr__(self, "protein_alternames", (self.protein,))
        if not self.ligand_alternames:
            object.__setattr__(self, "ligand_alternames", (self.ligand_coreference,))


@dataclass(frozen=True)
class GoldDetection:
    page: int
    box: Box
    # gold reading of the depiction, when the OCSR task is scored
    smiles: Optional[str] = None


@dataclass(frozen=True)
class GoldAnnotation:
    query_smiles: str
    triplet: int  # index into the document's gold triplets


@dataclass(frozen=True)
class GoldRecord:
    doc_id: str
    triplets: tuple[GoldTriplet, ...] = ()
    structures: tuple[GoldStructure, ...] = ()
    measurements: tuple[GoldMeasurement, ...] = ()
    detections: tuple[GoldDetection, ...] = ()
    annotation: tuple[GoldAnnotation, ...] = ()


def gold_from_json(data: dict) -> GoldRecord:
    return GoldRecord(
        doc_id=data["doc_id"],
        triplets=tuple(
            GoldTriplet(
                protein=t["protein"],
                smiles=t["smiles"],
                assay_type=t["assay_type"],
                value_nM=Decimal(str(t["value_nM"])),
                protein_alternames=tuple(t.get("protein_alternames", ())),
                ligand_coreference=t.get("ligand_coreference", ""),
                ligand_alternames=tuple(t.get("ligand_alternames", ())),
                relation=t.get("relation", "="),
            )
            for t in data.get("triplets", ())
        ),
        structures=tuple(
            GoldStructure(
                coreference=s["coreference"],
                smiles=s["smiles"],
                is_markush=s.get("is_markush", False),
                page=s.get("page"),
                box=tuple(s["box"]) if s.get("box") else None,
            )
            for s in data.get("structures", ())
        ),
        measurements=tuple(
            GoldMeasurement(
                protein=m["protein"],
                ligand_coreference=m["ligand_coreference"],
                assay_type=m["assay_type"],
                value_nM=Decimal(str(m["value_nM"])),
                protein_alternames=tuple(m.get("protein_alternames", ())),
                ligand_alternames=tuple(m.get("ligand_alternames", ())),
                relation=m.get("relation", "="),
            )
            for m in data.get("measurements", ())
        ),
        detections=tuple(
            GoldDetection(page=d["page"], box=tuple(d["box"]), smiles=d.get("smiles"))
            for d in data.get("detections", ())
        ),
        annotation=tuple(
            GoldAnnotation(query_smiles=a["query_smiles"], triplet=a["triplet"])
            for a in data.get("annotation", ())
        ),
    )


def load_gold(path: str | Path) -> list[GoldRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            records.append(gold_from_json(json.loads(line)))
    return records
