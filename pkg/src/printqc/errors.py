"""Exception types shared across the inspection pipeline."""

from __future__ import annotations


class PrintQCError(Exception):
    """Base class for all printqc errors."""


class EvenKernel(PrintQCError):
    """A filter kernel dimension was even; kernels must be odd-sized."""


class DegenerateHistogram(PrintQCError):
    """All pixels share one intensity; no threshold separates two classes."""


class NotBinary(PrintQCError):
    """An operation requiring a two-valued {0, 255} image got something else."""


class NoTextRegion(PrintQCError):
    """No candidate component survived the area/aspect filters."""


class NoGlyphs(PrintQCError):
    """Glyph segmentation found no character-sized components."""


class MalformedHocr(PrintQCError):
    """An hOCR element carried an unparseable bbox; position is recorded."""

    def __init__(self, message: str, line: int, offset: int):
        super().__init__(f"{message} (line {line}, offset {offset})")
        self.line = line
        self.offset = offset


class EmptySet(PrintQCError):
    """Statistics requested over an empty value list."""


class DegenerateData(PrintQCError):
    """Too few or zero-spread values for a density/histogram estimate."""


class EmptyTrainingSet(PrintQCError):
    """Classification requested against a store with no samples."""


class InvalidLabel(PrintQCError):
    """A training label fell outside the A-Z / 0-9 / '-' alphabet."""


class CorruptStore(PrintQCError):
    """The MRD/HRD store pair failed validation on load."""


class SpecError(PrintQCError):
    """A synthetic label spec violated one of its invariants."""


class OutOfBounds(PrintQCError):
    """A rectangle to draw fell outside the target image."""
