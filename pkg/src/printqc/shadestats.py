"""Per-box intensity statistics and n-sigma shade classification.

Each detected character box contributes one value: the mean gray level
of all pixels inside it. Boxes whose value leaves the closed n-sigma
band around the population mean are flagged as over-printed or faded,
with the direction controlled by the ink polarity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

import numpy as np

from .errors import DegenerateData, EmptySet
from .glyphseg import CharBox
from .raster import GrayImage

LABEL_GOOD = "Good"
LABEL_OVER = "Over"
LABEL_FADED = "Faded"

POLARITIES = ("ink-dark", "ink-light")


@dataclass(frozen=True)
class ShadeStats:
    values: tuple[float, ...]  # mean intensity per box, index order 1..B
    mean: float
    variance: float
    n: float
    polarity: str
    labels: tuple[str, ...]
    gb_count: int
    bb_count: int
    qs_i: float  # percentage, unrounded


@dataclass(frozen=True)
class DensityEstimate:
    x: tuple[float, ...]  # 100 evaluation points
    f: tuple[float, ...]
    bandwidth: float


@dataclass(frozen=True)
class HistogramFit:
    edges: tuple[float, ...]  # bins + 1 entries
    counts: tuple[int, ...]
    mean: float
    sigma: float


def round_half_up(value: float, digits: int = 2) -> float:
    return float(Decimal(repr(value)).quantize(Decimal(10) ** -digits, rounding=ROUND_HALF_UP))


def box_intensity(gray_region: GrayImage, box: CharBox) -> float:
    """Mean gray level over every pixel of the box (pre-binarization crop)."""
    h, w = gray_region.shape
    if not box.bbox.inside(w, h):
        raise ValueError(f"box {box.bbox} exceeds the {w}x{h} region")
    return float(gray_region[box.bbox.slices()].mean())


def population_stats(values: list[float] | tuple[float, ...]) -> tuple[float, float]:
    """Mean and population (1/B) variance of the values."""
    if len(values) == 0:
        raise EmptySet("no values to aggregate")
    arr = np.asarray(values, dtype=np.float64)
    mean = float(arr.mean())
    return mean, float(((arr - mean) ** 2).mean())


def quality_success(good: int, bad: int) -> float:
    """Percentage of good boxes among all boxes."""
    if good + bad == 0:
        raise EmptySet("no boxes counted")
    return good / (good + bad) * 100.0


def classify_shade(
    values: list[float] | tuple[float, ...], n: float, polarity: str = "ink-dark"
) -> ShadeStats:
    """Label each box Good/Over/Faded against the closed n-sigma interval.

    With dark ink, heavier printing lowers a box's gray mean, so values
    below the band are over-printed and values above it are faded; the
    ink-light polarity swaps the two.
    """
    if n <= 0:
        raise ValueError("quality index n must be positive")
    if polarity not in POLARITIES:
        raise ValueError(f"unknown polarity {polarity!r}")
    mean, variance = population_stats(values)
    sigma = math.sqrt(variance)
    lo, hi = mean - n * sigma, mean + n * sigma
    below, above = (LABEL_OVER, LABEL_FADED) if polarity == "ink-dark" else (LABEL_FADED, LABEL_OVER)
    labels = tuple(
        LABEL_GOOD if lo <= v <= hi else (below if v < lo else above) for v in values
    )
    gb = sum(1 for lab in labels if lab == LABEL_GOOD)
    bb = len(labels) - gb
    return ShadeStats(
        values=tuple(float(v) for v in values),
        mean=mean,
        variance=variance,
        n=float(n),
        polarity=polarity,
        labels=labels,
        gb_count=gb,
        bb_count=bb,
        qs_i=quality_success(gb, bb),
    )


def gaussian_kde_pdf(
    values: list[float] | tuple[float, ...], bandwidth: float, xs: np.ndarray
) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    u = (np.asarray(xs, dtype=np.float64)[:, None] - arr[None, :]) / bandwidth
    k = np.exp(-0.5 * u * u) / math.sqrt(2 * math.pi)
    return k.sum(axis=1) / (arr.size * bandwidth)


def kde_estimate(values: list[float] | tuple[float, ...]) -> DensityEstimate:
    """Gaussian KDE at 100 points, Silverman bandwidth 1.06 s B^(-1/5)."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size < 2:
        raise DegenerateData("need at least two values for a density estimate")
    sample_sd = float(arr.std(ddof=1))
    if sample_sd == 0:
        raise DegenerateData("zero spread; density estimate is a point mass")
    bandwidth = 1.06 * sample_sd * arr.size ** (-1 / 5)
    xs = np.linspace(arr.min() - 3 * bandwidth, arr.max() + 3 * bandwidth, 100)
    f = gaussian_kde_pdf(arr, bandwidth, xs)
    return DensityEstimate(x=tuple(xs.tolist()), f=tuple(f.tolist()), bandwidth=bandwidth)


def histogram_with_normal_fit(
    values: list[float] | tuple[float, ...], bins: int
) -> HistogramFit:
    """Equal-width histogram over [min, max] plus a normal fit of the values."""
    if bins < 1:
        raise ValueError("bins must be >= 1")
    arr = np.asarray(values, dtype=np.float64)
    if arr.size < 2:
        raise DegenerateData("need at least two values for a histogram")
    if arr.min() == arr.max():
        raise DegenerateData("zero spread; histogram range is empty")
    counts, edges = np.histogram(arr, bins=bins, range=(float(arr.min()), float(arr.max())))
    mean, variance = population_stats(values)
    return HistogramFit(
        edges=tuple(edges.tolist()),
        counts=tuple(int(c) for c in counts),
        mean=mean,
        sigma=math.sqrt(variance),
    )


def density_csv(est: DensityEstimate) -> str:
    lines = ["x,f"]
    lines += [f"{x!r},{f!r}" for x, f in zip(est.x, est.f)]
    return "\n".join(lines) + "\n"


def histogram_csv(fit: HistogramFit) -> str:
    lines = ["bin_lo,bin_hi,count"]
    lines += [
        f"{lo!r},{hi!r},{count}"
        for lo, hi, count in zip(fit.edges[:-1], fit.edges[1:], fit.counts)
    ]
    return "\n".join(lines) + "\n"
