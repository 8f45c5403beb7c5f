"""Supervised glyph matching against the MRD/HRD training stores.

The matcher is a plain nearest-neighbor scan over 20x30 binarized glyph
matrices with an L1 pixel metric (255 x Hamming distance on two-valued
data). Boxes whose distance leaves the closed m-sigma band around the
population mean are flagged as misprints.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import CorruptStore, EmptyTrainingSet, InvalidLabel
from .glyphseg import GLYPH_H, GLYPH_W, GlyphMatrix
from .shadestats import population_stats, quality_success

ALPHABET = "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789-"

LABEL_GOOD_PRINT = "GoodPrint"
LABEL_MISPRINT = "Misprint"

MRD_MAGIC = b"MRD1"
MRD_FILENAME = "store.mrd"
HRD_FILENAME = "store.hrd"
GLYPH_BYTES = GLYPH_W * GLYPH_H


@dataclass(frozen=True)
class TrainingSet:
    mrd: tuple[GlyphMatrix, ...]
    hrd: tuple[str, ...]
    path: Path | None = None  # store directory; persisted on every add

    def __len__(self) -> int:
        return len(self.mrd)


@dataclass(frozen=True)
class MisprintResult:
    distances: tuple[float, ...]
    mean: float
    variance: float
    m: float
    labels: tuple[str, ...]
    gpb_count: int
    mpb_count: int
    qs_gpb: float  # percentage, unrounded


def _check_glyph(glyph: GlyphMatrix) -> None:
    if glyph.shape != (GLYPH_H, GLYPH_W) or glyph.dtype != np.uint8:
        raise ValueError(f"glyph must be {GLYPH_W}x{GLYPH_H} uint8, got {glyph.shape}")
    if not np.isin(glyph, (0, 255)).all():
        raise ValueError("glyph must be two-valued {0, 255}")


def new_training_set(path: str | Path | None = None) -> TrainingSet:
    return TrainingSet(mrd=(), hrd=(), path=Path(path) if path else None)


def add_sample(ts: TrainingSet, glyph: GlyphMatrix, label: str) -> TrainingSet:
    """Append a (glyph, label) pair to both stores; rewrites the persisted files."""
    if len(label) != 1 or label not in ALPHABET:
        raise InvalidLabel(f"label {label!r} outside alphabet {ALPHABET}")
    _check_glyph(glyph)
    updated = replace(ts, mrd=ts.mrd + (glyph.copy(),), hrd=ts.hrd + (label,))
    if updated.path is not None:
        save_training_set(updated)
    return updated


def save_training_set(ts: TrainingSet) -> None:
    if ts.path is None:
        raise ValueError("training set has no store path")
    ts.path.mkdir(parents=True, exist_ok=True)
    blob = bytearray(MRD_MAGIC)
    blob += struct.pack("<I", len(ts.mrd))
    for glyph in ts.mrd:
        blob += glyph.tobytes()
    (ts.path / MRD_FILENAME).write_bytes(bytes(blob))
    (ts.path / HRD_FILENAME).write_text("".join(f"{c}\n" for c in ts.hrd), encoding="utf-8")


def load_training_set(path: str | Path) -> TrainingSet:
    """Load and cross-validate the MRD/HRD pair from a store directory."""
    path = Path(path)
    mrd_path = path / MRD_FILENAME
    hrd_path = path / HRD_FILENAME
    if not mrd_path.exists() or not hrd_path.exists():
        raise CorruptStore(f"missing store files under {path}")
    raw = mrd_path.read_bytes()
    if len(raw) < 8 or raw[:4] != MRD_MAGIC:
        raise CorruptStore("bad MRD magic")
    (count,) = struct.unpack("<I", raw[4:8])
    if len(raw) != 8 + count * GLYPH_BYTES:
        raise CorruptStore(f"MRD payload size mismatch for {count} records")
    glyphs = []
    for i in range(count):
        rec = np.frombuffer(
            raw, dtype=np.uint8, count=GLYPH_BYTES, offset=8 + i * GLYPH_BYTES
        ).reshape(GLYPH_H, GLYPH_W)
        if not np.isin(rec, (0, 255)).all():
            raise CorruptStore(f"MRD record {i} is not two-valued")
        glyphs.append(rec.copy())
    labels = hrd_path.read_text(encoding="utf-8").splitlines()
    if len(labels) != count:
        raise CorruptStore(f"HRD has {len(labels)} labels for {count} MRD records")
    for i, label in enumerate(labels):
        if len(label) != 1 or label not in ALPHABET:
            raise CorruptStore(f"HRD line {i + 1} holds invalid label {label!r}")
    return TrainingSet(mrd=tuple(glyphs), hrd=tuple(labels), path=path)


def pixel_distance(a: GlyphMatrix, b: GlyphMatrix) -> int:
    """L1 distance over the 600 8-bit positions."""
    return int(np.abs(a.astype(np.int16) - b.astype(np.int16)).sum())


def nearest_distance(
    ts: TrainingSet, glyph: GlyphMatrix, k: int = 1, normalize: bool = False
) -> tuple[str, float]:
    """Majority label among the k nearest samples plus the closest distance.

    Label ties go to the tied label with the smallest distance, then the
    lowest training index. ``normalize`` divides by the 600-px glyph size.
    """
    if len(ts) == 0:
        raise EmptyTrainingSet("cannot classify against an empty store")
    if not 1 <= k <= len(ts):
        raise ValueError(f"k={k} outside 1..{len(ts)}")
    _check_glyph(glyph)
    stack = np.stack(ts.mrd).astype(np.int16)
    dists = np.abs(stack - glyph.astype(np.int16)).reshape(len(ts), -1).sum(axis=1)
    order = sorted(range(len(ts)), key=lambda i: (dists[i], i))
    top = order[:k]
    votes: dict[str, int] = {}
    for i in top:
        votes[ts.hrd[i]] = votes.get(ts.hrd[i], 0) + 1
    best_count = max(votes.values())
    winner = min(
        (i for i in top if votes[ts.hrd[i]] == best_count),
        key=lambda i: (dists[i], i),
    )
    d = float(dists[order[0]])
    if normalize:
        d /= GLYPH_BYTES
    return ts.hrd[winner], d


def detect_misprints(
    distances: list[float] | tuple[float, ...], m: float, upper_tail_only: bool = False
) -> MisprintResult:
    """Label each box GoodPrint/Misprint against the closed m-sigma band."""
    if m <= 0:
        raise ValueError("quality index m must be positive")
    mean, variance = population_stats(distances)
    sigma = variance**0.5
    lo, hi = mean - m * sigma, mean + m * sigma
    if upper_tail_only:
        lo = float("-inf")
    labels = tuple(
        LABEL_GOOD_PRINT if lo <= d <= hi else LABEL_MISPRINT for d in distances
    )
    gpb = sum(1 for lab in labels if lab == LABEL_GOOD_PRINT)
    mpb = len(labels) - gpb
    return MisprintResult(
        distances=tuple(float(d) for d in distances),
        mean=mean,
        variance=variance,
        m=float(m),
        labels=labels,
        gpb_count=gpb,
        mpb_count=mpb,
        qs_gpb=quality_success(gpb, mpb),
    )
