"""Splits a text-region crop into per-character boxes and 20x30 glyphs.

Boxes come either from the internal connected-component segmenter or
from an hOCR file produced by an external OCR engine; both yield ids in
reading order (row bands top to bottom, boxes left to right).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from html.parser import HTMLParser

import numpy as np

from . import raster
from .errors import MalformedHocr, NoGlyphs
from .raster import BBox, GrayImage
from .textloc import TextRegion

log = logging.getLogger(__name__)

GLYPH_W = 20
GLYPH_H = 30

GlyphMatrix = np.ndarray  # (GLYPH_H, GLYPH_W) uint8, values {0, 255}

MIN_GLYPH_AREA = 4  # px^2
BAND_OVERLAP = 0.5  # vertical-extent overlap joining a row band
MERGE_OVERLAP = 0.6  # horizontal overlap merging split glyph parts


@dataclass(frozen=True)
class CharBox:
    u: int  # 1-based id in reading order
    bbox: BBox  # text-region coordinates
    source: str  # "internal" | "hocr"
    recognized_char: str | None = None


def preprocess_for_ocr(region: TextRegion) -> GrayImage:
    """Binarize a text crop so glyph ink is 255 on a 0 background."""
    crop = region.crop
    if crop.shape[0] < 8 or crop.shape[1] < 8:
        raise ValueError("text crop must be at least 8x8")
    stage = raster.median_filter(crop, 3)
    stage = raster.gaussian_blur(stage, 1, 5)
    stage = raster.bilateral_filter(stage, 9, 75.0, 75.0)
    _, binary = raster.otsu_threshold(stage)
    return raster.bitwise_not(binary)


def _vertical_overlap(a: BBox, b: BBox) -> float:
    inter = min(a.bottom, b.bottom) - max(a.y, b.y)
    return inter / min(a.h, b.h) if inter > 0 else 0.0


def _horizontal_overlap(a: BBox, b: BBox) -> float:
    inter = min(a.right, b.right) - max(a.x, b.x)
    return inter / min(a.w, b.w) if inter > 0 else 0.0


def _union_box(a: BBox, b: BBox) -> BBox:
    x = min(a.x, b.x)
    y = min(a.y, b.y)
    return BBox(x, y, max(a.right, b.right) - x, max(a.bottom, b.bottom) - y)


def _group(boxes: list[BBox], joined) -> list[list[BBox]]:
    parent = list(range(len(boxes)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(boxes)):
        for j in range(i + 1, len(boxes)):
            if joined(boxes[i], boxes[j]):
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)

    groups: dict[int, list[BBox]] = {}
    for i, box in enumerate(boxes):
        groups.setdefault(find(i), []).append(box)
    return list(groups.values())


def _absorb_fragments(boxes: list[BBox]) -> list[BBox]:
    """Fuse dots/accents into the glyph they hover over.

    A fragment is under half its partner's height, stacked within one
    fragment-height of it, and >= 60% horizontally overlapping; row
    neighbors have matching heights and are never fused.
    """

    def stacked(a: BBox, b: BBox) -> bool:
        if _horizontal_overlap(a, b) < MERGE_OVERLAP:
            return False
        if min(a.h, b.h) >= 0.5 * max(a.h, b.h):
            return False
        gap = max(a.y, b.y) - min(a.bottom, b.bottom)
        return gap <= min(a.h, b.h)

    return [_merge_all(group) for group in _group(boxes, stacked)]


def segment_glyphs(binary: GrayImage) -> list[CharBox]:
    """Character boxes from 8-connected ink components, ids in reading order."""
    comps = raster.connected_components(binary)
    boxes = [bbox for bbox, area in comps if area >= MIN_GLYPH_AREA]
    if not boxes:
        raise NoGlyphs("no components of glyph size")
    boxes = _absorb_fragments(boxes)

    bands = _group(boxes, lambda a, b: _vertical_overlap(a, b) >= BAND_OVERLAP)
    bands.sort(key=lambda band: min(b.y for b in band))

    result: list[CharBox] = []
    for band in bands:
        # Horizontally split stroke pieces at glyph height fuse here.
        merged = [
            _merge_all(group)
            for group in _group(band, lambda a, b: _horizontal_overlap(a, b) >= MERGE_OVERLAP)
        ]
        merged.sort(key=lambda b: b.x)
        for bbox in merged:
            result.append(CharBox(u=len(result) + 1, bbox=bbox, source="internal"))
    return result


def _merge_all(boxes: list[BBox]) -> BBox:
    out = boxes[0]
    for box in boxes[1:]:
        out = _union_box(out, box)
    return out


class _HocrParser(HTMLParser):
    """Collects bbox quadruples from elements classed ocrx_cword / ocr_char."""

    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.found: list[tuple[BBox | None, list[str], str]] = []
        self._open: list[tuple[str, int] | None] = []  # (tag, found index) per depth

    def handle_starttag(self, tag, attrs):
        entry = self._recognize(tag, dict(attrs))
        self._open.append((tag, len(self.found) - 1) if entry else None)

    def handle_startendtag(self, tag, attrs):
        self._recognize(tag, dict(attrs))

    def handle_endtag(self, tag):
        while self._open:
            top = self._open.pop()
            if top is None or top[0] == tag:
                break

    def handle_data(self, data):
        for slot in reversed(self._open):
            if slot is not None:
                self.found[slot[1]][1].append(data)
                break

    def _recognize(self, tag: str, attrs: dict[str, str | None]) -> bool:
        cls = attrs.get("class") or ""
        if "ocrx_cword" not in cls and "ocr_char" not in cls:
            return False
        line, offset = self.getpos()
        title = attrs.get("title")
        if title is None:
            raise MalformedHocr(f"<{tag}> lacks a title attribute", line, offset)
        self.found.append((self._parse_bbox(title, line, offset), [], f"{line}:{offset}"))
        return True

    @staticmethod
    def _parse_bbox(title: str, line: int, offset: int) -> BBox | None:
        for prop in title.split(";"):
            parts = prop.split()
            if not parts or parts[0] != "bbox":
                continue
            if len(parts) != 5:
                raise MalformedHocr(f"bbox expects 4 coordinates, got {len(parts) - 1}", line, offset)
            try:
                x0, y0, x1, y1 = (int(p) for p in parts[1:])
            except ValueError:
                raise MalformedHocr(f"non-integer bbox in {title!r}", line, offset) from None
            if min(x0, y0, x1, y1) < 0:
                raise MalformedHocr(f"negative bbox coordinate in {title!r}", line, offset)
            if x1 <= x0 or y1 <= y0:
                log.warning("rejecting empty hOCR box %r at line %d", title, line)
                return None
            return BBox(x0, y0, x1 - x0, y1 - y0)
        raise MalformedHocr("title carries no bbox property", line, offset)


def parse_hocr(text: str) -> list[CharBox]:
    """Character boxes from the hOCR subset, ids in document order."""
    parser = _HocrParser()
    parser.feed(text)
    parser.close()
    boxes: list[CharBox] = []
    for bbox, chunks, _ in parser.found:
        if bbox is None:
            continue  # rejected empty box, already reported
        char = "".join(chunks).strip()
        boxes.append(
            CharBox(
                u=len(boxes) + 1,
                bbox=bbox,
                source="hocr",
                recognized_char=char if len(char) == 1 else None,
            )
        )
    return boxes


def normalize_glyph(binary: GrayImage, box: CharBox) -> GlyphMatrix:
    """Nearest-neighbor resample of the box to 20x30, re-binarized at 128."""
    h, w = binary.shape
    if not box.bbox.inside(w, h):
        raise ValueError(f"box {box.bbox} exceeds the {w}x{h} image")
    crop = binary[box.bbox.slices()]
    ys = np.arange(GLYPH_H) * crop.shape[0] // GLYPH_H
    xs = np.arange(GLYPH_W) * crop.shape[1] // GLYPH_W
    sampled = crop[ys[:, None], xs[None, :]]
    return np.where(sampled >= 128, 255, 0).astype(np.uint8)
