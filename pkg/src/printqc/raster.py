"""Pixel-level image operations the inspection pipeline composes.

Images are numpy arrays: ``GrayImage`` is (H, W) uint8, ``RgbImage`` is
(H, W, 3) uint8. All filters replicate edges at the border and round
half-up to the nearest integer after float arithmetic, so outputs are
reproducible bit-for-bit across runs.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import DegenerateHistogram, EvenKernel, NotBinary

GrayImage = np.ndarray  # (H, W) uint8
RgbImage = np.ndarray  # (H, W, 3) uint8

MORPH_OPS = ("erode", "dilate", "open", "close", "tophat")


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box, top-left origin, y grows downward."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.w < 1 or self.h < 1:
            raise ValueError(f"degenerate box {self.w}x{self.h}")
        if self.x < 0 or self.y < 0:
            raise ValueError(f"negative box origin ({self.x}, {self.y})")

    @property
    def right(self) -> int:
        return self.x + self.w

    @property
    def bottom(self) -> int:
        return self.y + self.h

    def slices(self) -> tuple[slice, slice]:
        return slice(self.y, self.bottom), slice(self.x, self.right)

    def inside(self, width: int, height: int) -> bool:
        return self.right <= width and self.bottom <= height


@dataclass(frozen=True)
class Kernel:
    """Odd-sized rectangular kernel footprint."""

    kw: int
    kh: int
    role: str = "structuring-element"

    def __post_init__(self):
        if self.kw < 1 or self.kh < 1 or self.kw % 2 == 0 or self.kh % 2 == 0:
            raise EvenKernel(f"kernel must be odd-sized and >= 1, got {self.kw}x{self.kh}")


def _round_u8(values: np.ndarray) -> np.ndarray:
    # Round half up, then clamp; np.round would round half to even.
    return np.clip(np.floor(values + 0.5), 0, 255).astype(np.uint8)


def _check_gray(img: np.ndarray) -> None:
    if img.ndim != 2 or img.dtype != np.uint8 or img.size == 0:
        raise ValueError("expected a non-empty (H, W) uint8 image")


def load_png(path: str | Path) -> np.ndarray:
    """Read an 8-bit grayscale or RGB PNG as a uint8 array."""
    with Image.open(path) as im:
        if im.mode == "L":
            return np.asarray(im, dtype=np.uint8)
        return np.asarray(im.convert("RGB"), dtype=np.uint8)


def save_png(path: str | Path, img: np.ndarray) -> None:
    if img.ndim == 2:
        Image.fromarray(img, mode="L").save(path, format="PNG")
    elif img.ndim == 3 and img.shape[2] == 3:
        Image.fromarray(img, mode="RGB").save(path, format="PNG")
    else:
        raise ValueError(f"cannot encode array of shape {img.shape} as PNG")


def to_grayscale(img: RgbImage) -> GrayImage:
    """BT.601 luma: gray = 0.299 R + 0.587 G + 0.114 B, rounded half up."""
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError("expected an (H, W, 3) image")
    rgb = img.astype(np.float64)
    gray = 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]
    return _round_u8(gray)


def resize_to_width(img: GrayImage, target_w: int) -> GrayImage:
    """Bilinear resize to ``target_w`` preserving aspect ratio."""
    _check_gray(img)
    if target_w < 1:
        raise ValueError("target width must be >= 1")
    h, w = img.shape
    if w == target_w:
        return img.copy()
    target_h = max(1, int(np.floor(h * target_w / w + 0.5)))
    return _bilinear(img.astype(np.float64), target_w, target_h)


def _bilinear(src: np.ndarray, out_w: int, out_h: int) -> GrayImage:
    # Pixel-center alignment: src = (dst + 0.5) * scale - 0.5.
    h, w = src.shape
    xs = np.clip((np.arange(out_w) + 0.5) * (w / out_w) - 0.5, 0.0, w - 1.0)
    ys = np.clip((np.arange(out_h) + 0.5) * (h / out_h) - 0.5, 0.0, h - 1.0)
    x0 = np.floor(xs).astype(np.intp)
    y0 = np.floor(ys).astype(np.intp)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = xs - x0
    fy = ys - y0
    top = src[y0[:, None], x0] * (1 - fx) + src[y0[:, None], x1] * fx
    bot = src[y1[:, None], x0] * (1 - fx) + src[y1[:, None], x1] * fx
    return _round_u8(top * (1 - fy)[:, None] + bot * fy[:, None])


def _gaussian_kernel(k: int) -> np.ndarray:
    sigma = 0.3 * ((k - 1) / 2 - 1) + 0.8
    offsets = np.arange(k) - (k - 1) / 2
    weights = np.exp(-(offsets**2) / (2 * sigma * sigma))
    return weights / weights.sum()


def _correlate1d(img: np.ndarray, kernel: np.ndarray, axis: int) -> np.ndarray:
    k = kernel.size
    if k == 1:
        return img * kernel[0]
    r = k // 2
    pad = [(0, 0), (0, 0)]
    pad[axis] = (r, r)
    padded = np.pad(img, pad, mode="edge")
    windows = np.lib.stride_tricks.sliding_window_view(padded, k, axis=axis)
    return windows @ kernel


def gaussian_blur(img: GrayImage, kw: int, kh: int) -> GrayImage:
    """Separable Gaussian blur; sigma per axis follows 0.3((k-1)/2 - 1) + 0.8."""
    _check_gray(img)
    if kw % 2 == 0 or kh % 2 == 0 or kw < 1 or kh < 1:
        raise EvenKernel(f"blur kernel must be odd, got {kw}x{kh}")
    out = img.astype(np.float64)
    if kw > 1:
        out = _correlate1d(out, _gaussian_kernel(kw), axis=1)
    if kh > 1:
        out = _correlate1d(out, _gaussian_kernel(kh), axis=0)
    return _round_u8(out)


def equalize_histogram(img: GrayImage) -> GrayImage:
    """Cumulative-distribution remap stretching the histogram toward [0, 255]."""
    _check_gray(img)
    hist = np.bincount(img.ravel(), minlength=256)
    cdf = np.cumsum(hist)
    nonzero = np.flatnonzero(hist)
    cdf_min = cdf[nonzero[0]]
    total = img.size
    if cdf_min == total:
        return img.copy()  # single-bin histogram: identity
    lut = _round_u8((cdf - cdf_min) / (total - cdf_min) * 255.0)
    return lut[img]


def median_filter(img: GrayImage, k: int) -> GrayImage:
    """Median over a k x k edge-replicated neighborhood."""
    _check_gray(img)
    if k % 2 == 0 or k < 1:
        raise EvenKernel(f"median kernel must be odd, got {k}")
    if k == 1:
        return img.copy()
    r = k // 2
    padded = np.pad(img, r, mode="edge")
    windows = np.lib.stride_tricks.sliding_window_view(padded, (k, k))
    return np.median(windows, axis=(-2, -1)).astype(np.uint8)


def bilateral_filter(img: GrayImage, d: int, sigma_color: float, sigma_space: float) -> GrayImage:
    """Edge-preserving smoothing: spatial x intensity Gaussian weighted mean."""
    _check_gray(img)
    if d % 2 == 0 or d < 1:
        raise EvenKernel(f"bilateral diameter must be odd, got {d}")
    r = d // 2
    src = img.astype(np.float64)
    padded = np.pad(src, r, mode="edge")
    h, w = src.shape
    acc = np.zeros_like(src)
    weight = np.zeros_like(src)
    inv_color = -0.5 / (sigma_color * sigma_color)
    inv_space = -0.5 / (sigma_space * sigma_space)
    for dy in range(-r, r + 1):
        for dx in range(-r, r + 1):
            shifted = padded[r + dy : r + dy + h, r + dx : r + dx + w]
            wgt = np.exp((dy * dy + dx * dx) * inv_space + (shifted - src) ** 2 * inv_color)
            acc += wgt * shifted
            weight += wgt
    return _round_u8(acc / weight)


def _rect_min(img: np.ndarray, kw: int, kh: int) -> np.ndarray:
    out = img
    if kw > 1:
        padded = np.pad(out, ((0, 0), (kw // 2, kw // 2)), mode="edge")
        out = np.lib.stride_tricks.sliding_window_view(padded, kw, axis=1).min(axis=-1)
    if kh > 1:
        padded = np.pad(out, ((kh // 2, kh // 2), (0, 0)), mode="edge")
        out = np.lib.stride_tricks.sliding_window_view(padded, kh, axis=0).min(axis=-1)
    return out


def _rect_max(img: np.ndarray, kw: int, kh: int) -> np.ndarray:
    out = img
    if kw > 1:
        padded = np.pad(out, ((0, 0), (kw // 2, kw // 2)), mode="edge")
        out = np.lib.stride_tricks.sliding_window_view(padded, kw, axis=1).max(axis=-1)
    if kh > 1:
        padded = np.pad(out, ((kh // 2, kh // 2), (0, 0)), mode="edge")
        out = np.lib.stride_tricks.sliding_window_view(padded, kh, axis=0).max(axis=-1)
    return out


def morphology(img: GrayImage, op: str, se: Kernel) -> GrayImage:
    """Flat rectangular morphology: erode/dilate/open/close/tophat."""
    _check_gray(img)
    if op not in MORPH_OPS:
        raise ValueError(f"unknown morphology op {op!r}")
    if se.role != "structuring-element":
        raise ValueError("morphology requires a structuring-element kernel")
    kw, kh = se.kw, se.kh
    if op == "erode":
        return _rect_min(img, kw, kh).astype(np.uint8)
    if op == "dilate":
        return _rect_max(img, kw, kh).astype(np.uint8)
    if op == "open":
        return _rect_max(_rect_min(img, kw, kh), kw, kh).astype(np.uint8)
    if op == "close":
        return _rect_min(_rect_max(img, kw, kh), kw, kh).astype(np.uint8)
    opened = _rect_max(_rect_min(img.astype(np.int16), kw, kh), kw, kh)
    return np.clip(img.astype(np.int16) - opened, 0, 255).astype(np.uint8)


_SCHARR_X = np.array([[-3, 0, 3], [-10, 0, 10], [-3, 0, 3]], dtype=np.float64)


def gradient_x_normalized(img: GrayImage) -> GrayImage:
    """|Scharr d/dx| rescaled so min maps to 0 and max to 255."""
    _check_gray(img)
    if img.shape[1] < 3:
        raise ValueError("image must be at least 3 pixels wide")
    padded = np.pad(img.astype(np.float64), 1, mode="edge")
    h, w = img.shape
    resp = np.zeros((h, w), dtype=np.float64)
    for dy in range(3):
        for dx in range(3):
            c = _SCHARR_X[dy, dx]
            if c:
                resp += c * padded[dy : dy + h, dx : dx + w]
    resp = np.abs(resp)
    lo, hi = resp.min(), resp.max()
    if hi == lo:
        return np.zeros_like(img)
    return _round_u8((resp - lo) * (255.0 / (hi - lo)))


def otsu_from_histogram(hist: np.ndarray) -> int:
    """Threshold maximizing between-class variance; smallest argmax wins."""
    hist = np.asarray(hist, dtype=np.float64)
    if hist.shape != (256,):
        raise ValueError("expected a 256-bin histogram")
    total = hist.sum()
    if total <= 0 or np.count_nonzero(hist) < 2:
        raise DegenerateHistogram("histogram has a single occupied bin")
    levels = np.arange(256, dtype=np.float64)
    w0 = np.cumsum(hist)
    sum0 = np.cumsum(levels * hist)
    w1 = total - w0
    valid = (w0 > 0) & (w1 > 0)
    mu0 = np.where(valid, sum0 / np.where(w0 > 0, w0, 1), 0.0)
    mu1 = np.where(valid, (sum0[-1] - sum0) / np.where(w1 > 0, w1, 1), 0.0)
    var_between = np.where(valid, w0 * w1 * (mu0 - mu1) ** 2, -1.0)
    return int(np.argmax(var_between))


def otsu_threshold(img: GrayImage) -> tuple[int, GrayImage]:
    """Otsu binarization: pixels above the threshold become 255."""
    _check_gray(img)
    hist = np.bincount(img.ravel(), minlength=256)
    t = otsu_from_histogram(hist)
    return t, np.where(img > t, 255, 0).astype(np.uint8)


def bitwise_not(img: GrayImage) -> GrayImage:
    _check_gray(img)
    return (255 - img.astype(np.int16)).astype(np.uint8)


def connected_components(binary: GrayImage) -> list[tuple[BBox, int]]:
    """8-connected components of 255-pixels: (tight bbox, pixel area) each.

    Result is ordered by the (y, x) of each component's top-left corner.
    """
    _check_gray(binary)
    if not np.isin(binary, (0, 255)).all():
        raise NotBinary("connected_components requires a {0, 255} image")

    parent: list[int] = []

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(a: int, b: int) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    # Union-find over per-row runs of foreground pixels.
    h, w = binary.shape
    fg = binary == 255
    rows: list[list[tuple[int, int, int]]] = []  # (x0, x1, label) per run
    for y in range(h):
        row = fg[y]
        bounded = np.diff(np.concatenate(([False], row, [False])).astype(np.int8))
        starts = np.flatnonzero(bounded == 1)
        ends = np.flatnonzero(bounded == -1)
        runs = []
        for x0, x1 in zip(starts, ends):
            label = len(parent)
            parent.append(label)
            runs.append((int(x0), int(x1), label))
        if y > 0:
            # 8-connectivity: runs [x0, x1) and [px0, px1) touch iff
            # px0 <= x1 and x0 <= px1 (diagonal contact included).
            prev = rows[-1]
            pi = 0
            for x0, x1, label in runs:
                while pi < len(prev) and prev[pi][1] < x0:
                    pi += 1
                pj = pi
                while pj < len(prev) and prev[pj][0] <= x1:
                    union(label, prev[pj][2])
                    pj += 1
        rows.append(runs)

    stats: dict[int, list[int]] = {}  # root -> [min_x, min_y, max_x, max_y, area]
    for y, runs in enumerate(rows):
        for x0, x1, label in runs:
            root = find(label)
            s = stats.get(root)
            if s is None:
                stats[root] = [x0, y, x1 - 1, y, x1 - x0]
            else:
                s[0] = min(s[0], x0)
                s[2] = max(s[2], x1 - 1)
                s[3] = y
                s[4] += x1 - x0

    comps = [
        (BBox(s[0], s[1], s[2] - s[0] + 1, s[3] - s[1] + 1), s[4]) for s in stats.values()
    ]
    comps.sort(key=lambda c: (c[0].y, c[0].x))
    return comps
