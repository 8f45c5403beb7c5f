"""Locates the single text-containing region on a product photo.

The chain works at a fixed resized width: grayscale, blur, equalize,
top-hat, horizontal gradient, close, binarize, then blob merging. The
widest-area component with a text-like aspect ratio wins.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import raster
from .errors import DegenerateHistogram, NoTextRegion
from .raster import BBox, GrayImage, Kernel, RgbImage


@dataclass(frozen=True)
class ObjectGeometry:
    """Frame of the industrial object in image coordinates."""

    x_o: int
    y_o: int
    w_o: int
    h_o: int

    def __post_init__(self):
        if self.w_o < 1 or self.h_o < 1:
            raise ValueError("object box must have positive extent")


@dataclass(frozen=True)
class TextRegion:
    bbox: BBox
    crop: GrayImage  # grayscale pixels of exactly bbox, pre-binarization
    score: float

    def __post_init__(self):
        if self.crop.shape != (self.bbox.h, self.bbox.w):
            raise ValueError("crop dimensions must match the bbox")


@dataclass(frozen=True)
class LocalizeConfig:
    resize_width: int = 500
    median_k: int = 3  # impulse prefilter ahead of the blur; 1 disables
    blur_kw: int = 9
    blur_kh: int = 11
    word_close_se: tuple[int, int] = (13, 5)
    blob_close_se: tuple[int, int] = (21, 21)
    dilate_iterations: int = 2  # 3x3 SE per iteration
    aspect_min: float = 2.0
    aspect_max: float = 12.0
    min_area_frac: float = 0.01

    def __post_init__(self):
        if not self.aspect_min < self.aspect_max:
            raise ValueError("aspect_min must be below aspect_max")
        if not 0 < self.min_area_frac < 1:
            raise ValueError("min_area_frac must lie in (0, 1)")


def pick_text_box(
    components: list[tuple[BBox, int]], image_w: int, image_h: int, cfg: LocalizeConfig
) -> tuple[BBox, int]:
    """Largest-area component passing the area floor and aspect window."""
    floor = cfg.min_area_frac * image_w * image_h
    best: tuple[BBox, int] | None = None
    for bbox, area in components:
        aspect = bbox.w / bbox.h
        if area < floor or not cfg.aspect_min <= aspect <= cfg.aspect_max:
            continue
        if best is None or area > best[1]:
            best = (bbox, area)
    if best is None:
        raise NoTextRegion("no component passed the area/aspect filters")
    return best


def object_silhouette(gray: GrayImage) -> ObjectGeometry:
    """Bounding box of the largest bright component; full frame if degenerate."""
    h, w = gray.shape
    try:
        _, binary = raster.otsu_threshold(gray)
        comps = raster.connected_components(binary)
    except DegenerateHistogram:
        comps = []
    if not comps:
        return ObjectGeometry(0, 0, w, h)
    bbox, _ = max(comps, key=lambda c: c[1])
    return ObjectGeometry(bbox.x, bbox.y, bbox.w, bbox.h)


def locate_text_region(
    img: RgbImage, cfg: LocalizeConfig = LocalizeConfig()
) -> tuple[TextRegion, ObjectGeometry]:
    if img.shape[0] < 32 or img.shape[1] < 32:
        raise ValueError("image must be at least 32x32")
    gray = raster.resize_to_width(raster.to_grayscale(img), cfg.resize_width)

    word_se = Kernel(*cfg.word_close_se)
    blob_se = Kernel(*cfg.blob_close_se)
    try:
        # Salt-and-pepper impulses survive the Gaussian as small bumps that
        # histogram equalization then amplifies; kill them before blurring.
        stage = raster.median_filter(gray, cfg.median_k)
        stage = raster.gaussian_blur(stage, cfg.blur_kw, cfg.blur_kh)
        stage = raster.equalize_histogram(stage)
        stage = raster.morphology(stage, "tophat", word_se)
        stage = raster.gradient_x_normalized(stage)
        stage = raster.morphology(stage, "close", word_se)
        _, stage = raster.otsu_threshold(stage)
        stage = raster.morphology(stage, "close", blob_se)
        for _ in range(cfg.dilate_iterations):
            stage = raster.morphology(stage, "dilate", Kernel(3, 3))
        components = raster.connected_components(stage)
    except DegenerateHistogram as exc:
        raise NoTextRegion("image has no separable structure") from exc

    h, w = gray.shape
    bbox, area = pick_text_box(components, w, h, cfg)
    crop = gray[bbox.slices()].copy()
    region = TextRegion(bbox=bbox, crop=crop, score=float(area))
    return region, object_silhouette(gray)
