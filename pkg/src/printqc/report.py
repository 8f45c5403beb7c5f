"""Annotated-image rendering and the canonical JSON inspection report."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .alignment import AlignmentResult
from .errors import OutOfBounds
from .glyphseg import CharBox
from .misprint import LABEL_MISPRINT, MisprintResult
from .raster import BBox, RgbImage
from .shadestats import LABEL_FADED, LABEL_OVER, ShadeStats, round_half_up

COLOR_REGION = (255, 0, 0)
COLOR_GOOD = (0, 255, 0)
COLOR_OVER = (255, 0, 0)
COLOR_FADED = (255, 255, 0)
COLOR_MISPRINT = (255, 0, 0)

MISPRINT_INSET = 2  # px inside the shade rectangle, keeps both visible


@dataclass(frozen=True)
class InspectionReport:
    image: str
    region: BBox
    alignment: AlignmentResult
    shade: ShadeStats
    boxes: tuple[CharBox, ...]
    misprint: MisprintResult | None
    timings_ms: dict[str, int]


def _draw_rect(img: np.ndarray, box: BBox, color: tuple[int, int, int]) -> None:
    h, w = img.shape[:2]
    if not box.inside(w, h):
        raise OutOfBounds(f"rectangle {box} exceeds the {w}x{h} image")
    x0, y0, x1, y1 = box.x, box.y, box.right - 1, box.bottom - 1
    img[y0, x0 : x1 + 1] = color
    img[y1, x0 : x1 + 1] = color
    img[y0 : y1 + 1, x0] = color
    img[y0 : y1 + 1, x1] = color


def _shade_color(label: str) -> tuple[int, int, int]:
    if label == LABEL_OVER:
        return COLOR_OVER
    if label == LABEL_FADED:
        return COLOR_FADED
    return COLOR_GOOD


def annotate(
    img: RgbImage,
    region: BBox,
    boxes: list[CharBox] | tuple[CharBox, ...],
    shade_labels: list[str] | tuple[str, ...] | None = None,
    misprint_labels: list[str] | tuple[str, ...] | None = None,
) -> RgbImage:
    """Draw the region and per-box verdict rectangles; input is untouched."""
    out = img.copy()
    _draw_rect(out, region, COLOR_REGION)
    for i, box in enumerate(boxes):
        b = box.bbox
        absolute = BBox(b.x + region.x, b.y + region.y, b.w, b.h)
        color = _shade_color(shade_labels[i]) if shade_labels else COLOR_GOOD
        _draw_rect(out, absolute, color)
        if misprint_labels and misprint_labels[i] == LABEL_MISPRINT:
            if b.w > 2 * MISPRINT_INSET and b.h > 2 * MISPRINT_INSET:
                inner = BBox(
                    absolute.x + MISPRINT_INSET,
                    absolute.y + MISPRINT_INSET,
                    absolute.w - 2 * MISPRINT_INSET,
                    absolute.h - 2 * MISPRINT_INSET,
                )
                _draw_rect(out, inner, COLOR_MISPRINT)
    return out


def _bbox_dict(b: BBox) -> dict[str, int]:
    return {"x": b.x, "y": b.y, "w": b.w, "h": b.h}


def write_report(r: InspectionReport) -> str:
    """Canonical JSON: fixed key order, 2-decimal qs fields, byte-stable."""
    shade_boxes = [
        {
            "u": box.u,
            "bbox": _bbox_dict(box.bbox),
            "h_map": r.shade.values[i],
            "label": r.shade.labels[i],
        }
        for i, box in enumerate(r.boxes)
    ]
    doc: dict = {
        "image": r.image,
        "region": _bbox_dict(r.region),
        "alignment": {
            "u": r.alignment.u,
            "d": r.alignment.d,
            "l": r.alignment.l,
            "ud_thresh": r.alignment.ud_thresh,
            "l_thresh": r.alignment.l_thresh,
            "vertical": r.alignment.vertical_pass,
            "horizontal": r.alignment.horizontal_pass,
        },
        "shade": {
            "n": r.shade.n,
            "mean": r.shade.mean,
            "variance": r.shade.variance,
            "boxes": shade_boxes,
            "gb": r.shade.gb_count,
            "bb": r.shade.bb_count,
            "qs_i": round_half_up(r.shade.qs_i),
        },
        "misprint": None,
        "timings_ms": dict(sorted(r.timings_ms.items())),
    }
    if r.misprint is not None:
        doc["misprint"] = {
            "m": r.misprint.m,
            "mean": r.misprint.mean,
            "variance": r.misprint.variance,
            "boxes": [
                {"u": box.u, "d": r.misprint.distances[i], "label": r.misprint.labels[i]}
                for i, box in enumerate(r.boxes)
            ],
            "gpb": r.misprint.gpb_count,
            "mpb": r.misprint.mpb_count,
            "qs_gpb": round_half_up(r.misprint.qs_gpb),
        }
    return json.dumps(doc, indent=2) + "\n"
