"""Print-quality inspection for text on industrial objects."""

from .alignment import AlignmentResult, assess_alignment
from .errors import (
    CorruptStore,
    DegenerateData,
    DegenerateHistogram,
    EmptySet,
    EmptyTrainingSet,
    EvenKernel,
    InvalidLabel,
    MalformedHocr,
    NoGlyphs,
    NotBinary,
    NoTextRegion,
    OutOfBounds,
    PrintQCError,
    SpecError,
)
from .glyphseg import CharBox, normalize_glyph, parse_hocr, preprocess_for_ocr, segment_glyphs
from .misprint import (
    ALPHABET,
    MisprintResult,
    TrainingSet,
    add_sample,
    detect_misprints,
    load_training_set,
    nearest_distance,
    new_training_set,
)
from .raster import BBox, Kernel
from .report import InspectionReport, annotate, write_report
from .shadestats import (
    DensityEstimate,
    ShadeStats,
    box_intensity,
    classify_shade,
    histogram_with_normal_fit,
    kde_estimate,
    population_stats,
)
from .textloc import LocalizeConfig, ObjectGeometry, TextRegion, locate_text_region

__version__ = "0.1.0"

__all__ = [
    "ALPHABET",
    "AlignmentResult",
    "BBox",
    "CharBox",
    "CorruptStore",
    "DegenerateData",
    "DegenerateHistogram",
    "DensityEstimate",
    "EmptySet",
    "EmptyTrainingSet",
    "EvenKernel",
    "InspectionReport",
    "InvalidLabel",
    "Kernel",
    "LocalizeConfig",
    "MalformedHocr",
    "MisprintResult",
    "NoGlyphs",
    "NoTextRegion",
    "NotBinary",
    "ObjectGeometry",
    "OutOfBounds",
    "PrintQCError",
    "ShadeStats",
    "SpecError",
    "TextRegion",
    "TrainingSet",
    "add_sample",
    "annotate",
    "assess_alignment",
    "box_intensity",
    "classify_shade",
    "detect_misprints",
    "histogram_with_normal_fit",
    "kde_estimate",
    "load_training_set",
    "locate_text_region",
    "nearest_distance",
    "new_training_set",
    "normalize_glyph",
    "parse_hocr",
    "population_stats",
    "preprocess_for_ocr",
    "segment_glyphs",
    "write_report",
]
