"""Text-vs-object alignment margins and pass/fail verdicts."""

from __future__ import annotations

from dataclasses import dataclass

from .raster import BBox
from .textloc import ObjectGeometry


@dataclass(frozen=True)
class AlignmentResult:
    u: int  # |object top - text top|
    d: int  # |object bottom - text bottom|
    l: int  # |object left - text left|
    ud_thresh: int  # text height
    l_thresh: int  # floor(object width / 4)
    vertical_pass: bool
    horizontal_pass: bool


def verdicts(u: int, d: int, l: int, ud_thresh: int, l_thresh: int) -> tuple[bool, bool]:
    """Vertical passes when |U - D| <= UD threshold; horizontal when L <= L threshold."""
    return abs(u - d) <= ud_thresh, l <= l_thresh


def assess_alignment(obj: ObjectGeometry, text: BBox) -> AlignmentResult:
    u = abs(obj.y_o - text.y)
    d = abs((obj.y_o + obj.h_o) - (text.y + text.h))
    l = abs(obj.x_o - text.x)
    ud_thresh = text.h
    l_thresh = obj.w_o // 4
    vertical, horizontal = verdicts(u, d, l, ud_thresh, l_thresh)
    return AlignmentResult(u, d, l, ud_thresh, l_thresh, vertical, horizontal)
