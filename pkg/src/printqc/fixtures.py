"""Synthetic label renderer with exact per-glyph ground truth.

Glyphs come from an embedded 5x7 dot-matrix font scaled by an integer
cell factor, so every ink pixel, tight box, and effective intensity is
known ahead of rendering. This is the oracle substrate for end-to-end
tests: fade multipliers, corrupted glyphs, and salt-and-pepper noise
are all injected deterministically from a seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import SpecError
from .misprint import ALPHABET
from .raster import BBox, RgbImage, save_png
from .textloc import ObjectGeometry

# 5x7 glyph rows, top to bottom; bit 4 is the leftmost column.
FONT_5X7: dict[str, tuple[int, ...]] = {
    "A": (0b01110, 0b10001, 0b10001, 0b11111, 0b10001, 0b10001, 0b10001),
    "B": (0b11110, 0b10001, 0b10001, 0b11110, 0b10001, 0b10001, 0b11110),
    "C": (0b01110, 0b10001, 0b10000, 0b10000, 0b10000, 0b10001, 0b01110),
    "D": (0b11100, 0b10010, 0b10001, 0b10001, 0b10001, 0b10010, 0b11100),
    "E": (0b11111, 0b10000, 0b10000, 0b11110, 0b10000, 0b10000, 0b11111),
    "F": (0b11111, 0b10000, 0b10000, 0b11110, 0b10000, 0b10000, 0b10000),
    "G": (0b01110, 0b10001, 0b10000, 0b10111, 0b10001, 0b10001, 0b01111),
    "H": (0b10001, 0b10001, 0b10001, 0b11111, 0b10001, 0b10001, 0b10001),
    "I": (0b01110, 0b00100, 0b00100, 0b00100, 0b00100, 0b00100, 0b01110),
    "J": (0b00111, 0b00010, 0b00010, 0b00010, 0b00010, 0b10010, 0b01100),
    "K": (0b10001, 0b10010, 0b10100, 0b11000, 0b10100, 0b10010, 0b10001),
    "L": (0b10000, 0b10000, 0b10000, 0b10000, 0b10000, 0b10000, 0b11111),
    "M": (0b10001, 0b11011, 0b10101, 0b10101, 0b10001, 0b10001, 0b10001),
    "N": (0b10001, 0b10001, 0b11001, 0b10101, 0b10011, 0b10001, 0b10001),
    "O": (0b01110, 0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b01110),
    "P": (0b11110, 0b10001, 0b10001, 0b11110, 0b10000, 0b10000, 0b10000),
    "Q": (0b01110, 0b10001, 0b10001, 0b10001, 0b10101, 0b10010, 0b01101),
    "R": (0b11110, 0b10001, 0b10001, 0b11110, 0b10100, 0b10010, 0b10001),
    "S": (0b01111, 0b10000, 0b10000, 0b01110, 0b00001, 0b00001, 0b11110),
    "T": (0b11111, 0b00100, 0b00100, 0b00100, 0b00100, 0b00100, 0b00100),
    "U": (0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b01110),
    "V": (0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b01010, 0b00100),
    "W": (0b10001, 0b10001, 0b10001, 0b10101, 0b10101, 0b10101, 0b01010),
    "X": (0b10001, 0b10001, 0b01010, 0b00100, 0b01010, 0b10001, 0b10001),
    "Y": (0b10001, 0b10001, 0b01010, 0b00100, 0b00100, 0b00100, 0b00100),
    "Z": (0b11111, 0b00001, 0b00010, 0b00100, 0b01000, 0b10000, 0b11111),
    "0": (0b01110, 0b10001, 0b10011, 0b10101, 0b11001, 0b10001, 0b01110),
    "1": (0b00100, 0b01100, 0b00100, 0b00100, 0b00100, 0b00100, 0b01110),
    "2": (0b01110, 0b10001, 0b00001, 0b00010, 0b00100, 0b01000, 0b11111),
    "3": (0b11111, 0b00010, 0b00100, 0b00010, 0b00001, 0b10001, 0b01110),
    "4": (0b00010, 0b00110, 0b01010, 0b10010, 0b11111, 0b00010, 0b00010),
    "5": (0b11111, 0b10000, 0b11110, 0b00001, 0b00001, 0b10001, 0b01110),
    "6": (0b00110, 0b01000, 0b10000, 0b11110, 0b10001, 0b10001, 0b01110),
    "7": (0b11111, 0b00001, 0b00010, 0b00100, 0b01000, 0b01000, 0b01000),
    "8": (0b01110, 0b10001, 0b10001, 0b01110, 0b10001, 0b10001, 0b01110),
    "9": (0b01110, 0b10001, 0b10001, 0b01111, 0b00001, 0b00010, 0b01100),
    "-": (0b00000, 0b00000, 0b00000, 0b01110, 0b00000, 0b00000, 0b00000),
}

FONT_W = 5
FONT_H = 7


@dataclass(frozen=True)
class GlyphTruth:
    bbox: BBox  # tight extent of drawn ink, image coordinates
    char: str
    ink: int  # effective ink intensity actually drawn


@dataclass(frozen=True)
class LabelSpec:
    object: ObjectGeometry = ObjectGeometry(30, 30, 440, 280)
    background: int = 220  # object surface
    ink: int = 40
    lines: tuple[str, ...] = ("SAMPLE-TEXT",)
    cell: int = 4  # integer scale of the 5x7 font
    fade_map: dict[int, float] = field(default_factory=dict)  # 1-based glyph index
    corrupt: frozenset[int] = frozenset()  # 1-based glyph indices
    noise: float = 0.0  # salt-and-pepper fraction
    seed: int = 0
    surround: int = 12  # canvas outside the object
    width: int | None = None  # canvas; default mirrors the object margins
    height: int | None = None

    def canvas_size(self) -> tuple[int, int]:
        w = self.width if self.width is not None else self.object.x_o * 2 + self.object.w_o
        h = self.height if self.height is not None else self.object.y_o * 2 + self.object.h_o
        return w, h

    def validate(self) -> None:
        if not self.lines or any(not line for line in self.lines):
            raise SpecError("lines must be non-empty strings")
        for line in self.lines:
            bad = set(line) - set(ALPHABET)
            if bad:
                raise SpecError(f"characters outside the alphabet: {sorted(bad)}")
        if self.cell < 1:
            raise SpecError("cell scale must be >= 1")
        for idx, mult in self.fade_map.items():
            if not 0 < mult <= 4:
                raise SpecError(f"fade multiplier {mult} for glyph {idx} outside (0, 4]")
        if not 0 <= self.noise <= 0.05:
            raise SpecError(f"noise fraction {self.noise} outside [0, 0.05]")
        if not (0 <= self.background <= 255 and 0 <= self.ink <= 255 and 0 <= self.surround <= 255):
            raise SpecError("intensities must lie in [0, 255]")
        w, h = self.canvas_size()
        if self.object.x_o + self.object.w_o > w or self.object.y_o + self.object.h_o > h:
            raise SpecError("object box exceeds the canvas")
        block_w, block_h = self._block_size()
        if block_w > self.object.w_o or block_h > self.object.h_o:
            raise SpecError("text block does not fit inside the object box")

    def _block_size(self) -> tuple[int, int]:
        s = self.cell
        widest = max(len(line) for line in self.lines)
        rows = len(self.lines)
        return widest * 6 * s - s, rows * FONT_H * s + (rows - 1) * 3 * s


def glyph_cells(spec: LabelSpec) -> list[tuple[int, int, str]]:
    """Top-left corner of each glyph cell in reading order, lines centered."""
    s = spec.cell
    _, block_h = spec._block_size()
    top = spec.object.y_o + (spec.object.h_o - block_h) // 2
    cells = []
    for row, line in enumerate(spec.lines):
        line_w = len(line) * 6 * s - s
        x = spec.object.x_o + (spec.object.w_o - line_w) // 2
        y = top + row * (FONT_H * s + 3 * s)
        for ch in line:
            cells.append((x, y, ch))
            x += 6 * s
    return cells


def _effective_ink(spec: LabelSpec, index: int) -> int:
    mult = spec.fade_map.get(index, 1.0)
    value = spec.background - (spec.background - spec.ink) * mult
    return int(np.clip(np.floor(value + 0.5), 0, 255))


def _connected_noise(rng: np.random.Generator) -> np.ndarray:
    """Random two-valued 5x7 cell mask, resampled until 8-connected.

    Corruption is drawn at the font-cell scale so its blobs survive the
    OCR pre-filters the way real misprinted strokes would; connectivity
    keeps it a single detected box.
    """
    while True:
        mask = rng.integers(0, 2, size=(FONT_H, FONT_W)).astype(bool)
        if mask.sum() < FONT_H * FONT_W // 3:
            continue
        if _is_connected(mask):
            return mask


def _is_connected(mask: np.ndarray) -> bool:
    ys, xs = np.nonzero(mask)
    if ys.size == 0:
        return False
    seen = np.zeros_like(mask, dtype=bool)
    stack = [(int(ys[0]), int(xs[0]))]
    seen[ys[0], xs[0]] = True
    count = 1
    while stack:
        y, x = stack.pop()
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                ny, nx = y + dy, x + dx
                if (
                    0 <= ny < mask.shape[0]
                    and 0 <= nx < mask.shape[1]
                    and mask[ny, nx]
                    and not seen[ny, nx]
                ):
                    seen[ny, nx] = True
                    count += 1
                    stack.append((ny, nx))
    return count == int(mask.sum())


def render_label(spec: LabelSpec) -> tuple[RgbImage, list[GlyphTruth]]:
    """Draw the label and return it with the exact per-glyph ground truth."""
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    w, h = spec.canvas_size()
    canvas = np.full((h, w), spec.surround, dtype=np.uint8)
    obj = spec.object
    canvas[obj.y_o : obj.y_o + obj.h_o, obj.x_o : obj.x_o + obj.w_o] = spec.background

    s = spec.cell
    truth: list[GlyphTruth] = []
    for index, (cx, cy, ch) in enumerate(glyph_cells(spec), start=1):
        rows = FONT_5X7[ch]
        if index in spec.corrupt:
            mask = _connected_noise(rng)
            cell = np.repeat(np.repeat(mask, s, axis=0), s, axis=1)
            patch = np.where(cell, spec.ink, spec.background).astype(np.uint8)
            canvas[cy : cy + FONT_H * s, cx : cx + FONT_W * s] = patch
            ys, xs = np.nonzero(cell)
            bbox = BBox(
                cx + int(xs.min()),
                cy + int(ys.min()),
                int(xs.max() - xs.min()) + 1,
                int(ys.max() - ys.min()) + 1,
            )
            truth.append(GlyphTruth(bbox=bbox, char=ch, ink=spec.ink))
            continue
        ink = _effective_ink(spec, index)
        min_x = min_y = 10**9
        max_x = max_y = -1
        for ry, bits in enumerate(rows):
            for rx in range(FONT_W):
                if bits & (1 << (FONT_W - 1 - rx)):
                    x0, y0 = cx + rx * s, cy + ry * s
                    canvas[y0 : y0 + s, x0 : x0 + s] = ink
                    min_x, min_y = min(min_x, x0), min(min_y, y0)
                    max_x, max_y = max(max_x, x0 + s - 1), max(max_y, y0 + s - 1)
        bbox = BBox(min_x, min_y, max_x - min_x + 1, max_y - min_y + 1)
        truth.append(GlyphTruth(bbox=bbox, char=ch, ink=ink))

    if spec.noise > 0:
        count = int(np.floor(spec.noise * canvas.size + 0.5))
        flat = rng.choice(canvas.size, size=count, replace=False)
        values = np.where(np.arange(count) % 2 == 0, 255, 0).astype(np.uint8)
        canvas.ravel()[flat] = values

    return np.repeat(canvas[:, :, None], 3, axis=2), truth


def emit_hocr(truth: list[GlyphTruth]) -> str:
    """hOCR-subset document whose parse reproduces the truth boxes."""
    if not truth:
        raise ValueError("truth list must be non-empty")
    lines = [
        "<!DOCTYPE html>",
        "<html>",
        "<body>",
        '<div class="ocr_page">',
    ]
    for g in truth:
        b = g.bbox
        lines.append(
            f'<span class="ocrx_cword" title="bbox {b.x} {b.y} {b.right} {b.bottom}">{g.char}</span>'
        )
    lines += ["</div>", "</body>", "</html>", ""]
    return "\n".join(lines)


def truth_json(truth: list[GlyphTruth]) -> str:
    records = [
        {"x": g.bbox.x, "y": g.bbox.y, "w": g.bbox.w, "h": g.bbox.h, "char": g.char, "ink": g.ink}
        for g in truth
    ]
    return json.dumps(records, indent=2) + "\n"


def spec_from_json(text: str) -> LabelSpec:
    """Build a LabelSpec from its JSON form; invariants checked by render."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"invalid spec JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise SpecError("spec JSON must be an object")
    kwargs: dict = {}
    try:
        if "object" in data:
            o = data["object"]
            kwargs["object"] = ObjectGeometry(o["x_o"], o["y_o"], o["W_o"], o["H_o"])
        if "lines" in data:
            kwargs["lines"] = tuple(str(s) for s in data["lines"])
        if "fade_map" in data:
            kwargs["fade_map"] = {int(k): float(v) for k, v in data["fade_map"].items()}
        if "corrupt" in data:
            kwargs["corrupt"] = frozenset(int(i) for i in data["corrupt"])
        for key in ("background", "ink", "cell", "seed", "surround", "width", "height"):
            if key in data and data[key] is not None:
                kwargs[key] = int(data[key])
        if "noise" in data:
            kwargs["noise"] = float(data["noise"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecError(f"malformed spec field: {exc}") from exc
    try:
        return LabelSpec(**kwargs)
    except (TypeError, ValueError) as exc:
        raise SpecError(str(exc)) from exc


def write_fixture(spec: LabelSpec, out_dir: str | Path) -> tuple[Path, Path, Path]:
    """Render and write label.png, truth.json, and label.hocr."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    img, truth = render_label(spec)
    png = out / "label.png"
    save_png(png, img)
    tj = out / "truth.json"
    tj.write_text(truth_json(truth), encoding="utf-8")
    hocr = out / "label.hocr"
    hocr.write_text(emit_hocr(truth), encoding="utf-8")
    return png, tj, hocr
