"""Parsed-document model: text segments, page images, layout regions,
molecule detections, and augmented pages with printed index labels.

Boxes are (x0, y0, x1, y1) normalized to [0, 1] so records stay
resolution-independent; rendering picks the DPI.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

Box = tuple[float, float, float, float]

SEGMENT_KINDS = ("paragraph", "caption", "table_text")
REGION_KINDS = ("figure", "table")


class DocumentError(ValueError):
    pass


def _check_box(box: Box, where: str) -> None:
    if len(box) != 4:
        raise DocumentError(f"{where}: box needs four coordinates")
    x0, y0, x1, y1 = box
    if not (x0 < x1 and y0 < y1):
        raise DocumentError(f"{where}: box {box} is not positively oriented")
    if min(box) < 0.0 or max(box) > 1.0:
        raise DocumentError(f"{where}: box {box} leaves the page")


@dataclass(frozen=True)
class TextSegment:
    id: str
    text: str
    page: int
    kind: str

    def __post_init__(self):
        if self.kind not in SEGMENT_KINDS:
            raise DocumentError(f"segment {self.id}: unknown kind {self.kind!r}")
        if self.page < 1:
            raise DocumentError(f"segment {self.id}: pages are 1-based")


@dataclass(frozen=True)
class PageImage:
    page: int
    image_ref: str = ""


@dataclass(frozen=True)
class Region:
    id: str
    page: int
    box: Box
    kind: str
    image_ref: str = ""
    caption_id: str = ""

    def __post_init__(self):
        if self.kind not in REGION_KINDS:
            raise DocumentError(f"region {self.id}: unknown kind {self.kind!r}")
        _check_box(self.box, f"region {self.id}")


@dataclass(frozen=True)
class ParsedDocument:
    doc_id: str
    text_segments: tuple[TextSegment, ...] = ()
    page_images: tuple[PageImage, ...] = ()
    regions: tuple[Region, ...] = ()

    def __post_init__(self):
        if not self.doc_id:
            raise DocumentError("document needs a doc_id")
        seen = set()
        for seg in self.text_segments:
            if seg.id in seen:
                raise DocumentError(f"duplicate segment id {seg.id}")
            seen.add(seg.id)
        pages = [p.page for p in self.page_images]
        if len(pages) != len(set(pages)):
            raise DocumentError("duplicate page image")
        rids = [r.id for r in self.regions]
        if len(rids) != len(set(rids)):
            raise DocumentError("duplicate region id")

    def pages(self) -> list[int]:
        out = {p.page for p in self.page_images}
        out.update(s.page for s in self.text_segments)
        out.update(r.page for r in self.regions)
        return sorted(out)

    def segments_of_kind(self, *kinds: str) -> list[TextSegment]:
        return [s for s in self.text_segments if s.kind in kinds]


@dataclass(frozen=True)
class Detection:
    id: int
    page: int
    box: Box
    raw_smiles: Optional[str] = None
    is_markush: bool = False

    def __post_init__(self):
        _check_box(self.box, f"detection {self.id}")
        if self.page < 1:
            raise DocumentError(f"detection {self.id}: pages are 1-based")


@dataclass(frozen=True)
class AugmentedPage:
    page: int
    image_ref: str
    # (detection id, box, printed index label)
    overlays: tuple[tuple[int, Box, int], ...] = ()

    def __post_init__(self):
        dets = [d for d, _, _ in self.overlays]
        labels = [n for _, _, n in self.overlays]
        if len(dets) != len(set(dets)) or len(labels) != len(set(labels)):
            raise DocumentError(f"page {self.page}: overlay ids and labels must be unique")


def document_to_json(doc: ParsedDocument) -> dict:
    return {
        "doc_id": doc.doc_id,
        "text_segments": [
            {"id": s.id, "text": s.text, "page": s.page, "kind": s.kind}
            for s in doc.text_segments
        ],
        "page_images": [
            {"page": p.page, "image_ref": p.image_ref} for p in doc.page_images
        ],
        "regions": [
            {
                "id": r.id,
                "page": r.page,
                "box": list(r.box),
                "kind": r.kind,
                "image_ref": r.image_ref,
                "caption_id": r.caption_id,
            }
            for r in doc.regions
        ],
    }


def document_from_json(data: dict) -> ParsedDocument:
    try:
        return ParsedDocument(
            doc_id=data["doc_id"],
            text_segments=tuple(
                TextSegment(id=s["id"], text=s["text"], page=s["page"], kind=s["kind"])
                for s in data.get("text_segments", ())
            ),
            page_images=tuple(
                PageImage(page=p["page"], image_ref=p.get("image_ref", ""))
                for p in data.get("page_images", ())
            ),
            regions=tuple(
                Region(
                    id=r["id"],
                    page=r["page"],
                    box=tuple(r["box"]),
                    kind=r["kind"],
                    image_ref=r.get("image_ref", ""),
                    caption_id=r.get("caption_id", ""),
                )
                for r in data.get("regions", ())
            ),
        )
    except (KeyError, TypeError) as exc:
        raise DocumentError(f"malformed document payload: {exc}") from exc


def detection_to_json(d: Detection) -> dict:
    return {
        "id": d.id,
        "page": d.page,
        "box": list(d.box),
        "raw_smiles": d.raw_smiles,
        "is_markush": d.is_markush,
    }


def detection_from_json(data: dict) -> Detection:
    return Detection(
        id=data["id"],
        page=data["page"],
        box=tuple(data["box"]),
        raw_smiles=data.get("raw_smiles"),
        is_markush=data.get("is_markush", False),
    )
