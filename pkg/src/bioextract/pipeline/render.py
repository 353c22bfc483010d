"""Render augmented pages: the stored page image (or a synthesized blank
letter page when the ref is missing) with detection boxes and their printed
index labels drawn on top."""

from __future__ import annotations

import io
from pathlib import Path
from typing import Optional

from PIL import Image, ImageDraw

from .document import AugmentedPage, ParsedDocument

PAGE_ASPECT = 11.0 / 8.5  # letter portrait

_BOX_COLOR = (200, 16, 16)
_LABEL_BG = (200, 16, 16)
_LABEL_FG = (255, 255, 255)


def render_page(
    parsed: Optional[ParsedDocument],
    page_view: AugmentedPage,
    dpi: int = 200,
    base_dir: Optional[str] = None,
) -> Image.Image:
    image = _base_image(page_view.image_ref, dpi, base_dir)
    if parsed is not None and page_view.image_ref == "":
        _sketch_text(image, parsed, page_view.page)
    draw = ImageDraw.Draw(image)
    w, h = image.size
    stroke = max(2, dpi // 100)
    for _, box, label in page_view.overlays:
        x0, y0, x1, y1 = box
        rect = (x0 * w, y0 * h, x1 * w, y1 * h)
        draw.rectangle(rect, outline=_BOX_COLOR, width=stroke)
        tag = str(label)
        pad = stroke * 2
        tw, th = _text_size(draw, tag)
        draw.rectangle(
            (rect[0], rect[1] - th - 2 * pad, rect[0] + tw + 2 * pad, rect[1]),
            fill=_LABEL_BG,
        )
        draw.text((rect[0] + pad, rect[1] - th - pad), tag, fill=_LABEL_FG)
    return image


def render_page_png(
    parsed: Optional[ParsedDocument],
    page_view: AugmentedPage,
    dpi: int = 200,
    base_dir: Optional[str] = None,
) -> bytes:
    image = render_page(parsed, page_view, dpi, base_dir)
    buf = io.BytesIO()
    image.save(buf, format="PNG")
    return buf.getvalue()


def _base_image(image_ref: str, dpi: int, base_dir: Optional[str]) -> Image.Image:
    if image_ref:
        path = Path(image_ref)
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        if path.is_file():
            return Image.open(path).convert("RGB")
    width = int(8.5 * dpi)
    return Image.new("RGB", (width, int(width * PAGE_ASPECT)), (255, 255, 255))


def _sketch_text(image: Image.Image, parsed: ParsedDocument, page: int) -> None:
    """Blank-page stand-in: show the page's text segments so a reviewer has
    the source context even without real page scans."""
    draw = ImageDraw.Draw(image)
    w, h = image.size
    margin = w // 12
    y = margin
    for seg in parsed.text_segments:
        if seg.page != page:
            continue
        for line in _wrap(seg.text, 90):
            if y > h - margin:
                return
            draw.text((margin, y), line, fill=(40, 40, 40))
            y += int(h * 0.015)
        y += int(h * 0.01)


def _wrap(text: str, width: int) -> list[str]:
    words = text.split()
    lines: list[str] = []
    current = ""
    for word in words:
        trial = f"{current} {word}".strip()
        if len(trial) > width and current:
            lines.append(current)
            current = word
        else:
            current = trial
    if current:
        lines.append(current)
    return lines


def _text_size(draw: ImageDraw.ImageDraw, text: str) -> tuple[int, int]:
    left, top, right, bottom = draw.textbbox((0, 0), text)
    return right - left, bottom - top
