"""Acceptance gate: one test per criterion, each printing PASS/FAIL.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines.
"""

from __future__ import annotations

import json
import math
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pytest

from printqc import cli, fixtures, glyphseg, misprint, raster, textloc
from printqc.alignment import assess_alignment
from printqc.fixtures import GlyphTruth, LabelSpec
from printqc.glyphseg import parse_hocr
from printqc.misprint import add_sample, detect_misprints, nearest_distance, pixel_distance
from printqc.raster import BBox
from printqc.shadestats import classify_shade
from printqc.textloc import ObjectGeometry

LINES = ("ADFGHKMNOPQR", "SUWZ1235689")
REST_LINE = ("BCEIJLTVXY047-",)
FADED_BOX = 9  # 'O', 1-based reading order
CORRUPT_BOXES = frozenset({5, 17})


@contextmanager
def criterion(name: str):
    try:
        yield
    except Exception:
        print(f"ACCEPTANCE {name}: FAIL")
        raise
    print(f"ACCEPTANCE {name}: PASS")


def segment_fixture(spec: LabelSpec):
    rgb, truth = fixtures.render_label(spec)
    region, _ = textloc.locate_text_region(rgb)
    binary = glyphseg.preprocess_for_ocr(region)
    boxes = glyphseg.segment_glyphs(binary)
    return rgb, truth, region, binary, boxes


@pytest.fixture(scope="module")
def trained_store(tmp_path_factory) -> Path:
    """37 clean glyphs: the inspected layout plus the remaining alphabet."""
    store = tmp_path_factory.mktemp("acc") / "store"
    ts = misprint.new_training_set(store)
    for spec in (LabelSpec(lines=LINES, seed=3), LabelSpec(lines=REST_LINE, seed=3)):
        _, truth, _, binary, boxes = segment_fixture(spec)
        assert len(boxes) == len(truth)
        for box, t in zip(boxes, truth):
            ts = add_sample(ts, glyphseg.normalize_glyph(binary, box), t.char)
    assert len(ts) == 37
    return store


def test_alignment_oracle():
    with criterion("alignment oracle (Table I)"):
        obj = ObjectGeometry(0, 0, 476, 262)
        text = BBox(59, 42, 300, 170)
        start = time.perf_counter()
        r = assess_alignment(obj, text)
        elapsed = time.perf_counter() - start
        assert (r.u, r.d, r.l) == (42, 50, 59)
        assert (r.ud_thresh, r.l_thresh) == (170, 119)
        assert r.vertical_pass and r.horizontal_pass
        assert elapsed < 0.001


def test_qs_arithmetic():
    with criterion("QS arithmetic (Tables II-III)"):
        # (13, 10) at n=1: 13 central values, 10 symmetric outliers
        st = classify_shade([0.0] * 13 + [9.0] * 5 + [-9.0] * 5, 1.0)
        assert (st.gb_count, st.bb_count) == (13, 10)
        assert st.qs_i == pytest.approx(56.52, abs=0.005)
        # (22, 1) at n=2: single spike
        st = classify_shade([0.0] * 22 + [100.0], 2.0)
        assert (st.gb_count, st.bb_count) == (22, 1)
        assert st.qs_i == pytest.approx(95.65, abs=0.005)
        # (23, 0): zero spread keeps every box
        st = classify_shade([66.0] * 23, 3.0)
        assert (st.gb_count, st.bb_count) == (23, 0)
        assert st.qs_i == pytest.approx(100.0, abs=0.005)
        # (21, 2) misprints
        res = detect_misprints([0.0] * 21 + [5000.0, 5001.0], 2.0)
        assert (res.gpb_count, res.mpb_count) == (21, 2)
        assert res.qs_gpb == pytest.approx(91.30, abs=0.005)


def test_sigma_consistency():
    with criterion("sigma consistency (Q factors)"):
        sigma = math.sqrt(6.0)
        table = {1: 2.44, 2: 4.89, 3: 7.35}
        exact = {1: 2.449, 2: 4.899, 3: 7.348}
        for n in (1, 2, 3):
            q = n * sigma
            assert round(q, 3) == exact[n]
            truncated = math.floor(q * 100) / 100
            rounded = round(q, 2)
            assert min(abs(truncated - table[n]), abs(rounded - table[n])) <= 0.01
        sigma_d = 3727.68
        assert round(1 * sigma_d, 2) == 3727.68
        assert round(2 * sigma_d, 2) == 7455.36
        assert round(3 * sigma_d, 2) == 11183.04


def test_otsu_matches_exhaustive_search():
    with criterion("Otsu vs exhaustive search (1000 histograms)"):
        rng = np.random.default_rng(2024)
        start = time.perf_counter()
        mismatches = 0
        checked = 0
        for _ in range(1000):
            hist = rng.integers(0, 40, size=256)
            if np.count_nonzero(hist) < 2:
                continue
            checked += 1
            total = int(hist.sum())
            grand = float((np.arange(256) * hist).sum())
            w0 = 0.0
            sum0 = 0.0
            best_t, best_var = 0, -1.0
            for t in range(256):
                w0 += hist[t]
                sum0 += t * hist[t]
                w1 = total - w0
                if w0 == 0 or w1 == 0:
                    continue
                var = w0 * w1 * (sum0 / w0 - (grand - sum0) / w1) ** 2
                if var > best_var:
                    best_var, best_t = var, t
            if raster.otsu_from_histogram(hist) != best_t:
                mismatches += 1
        elapsed = time.perf_counter() - start
        assert checked >= 990
        assert mismatches == 0
        assert elapsed < 1.0


def test_gaussian_coverage():
    with criterion("Gaussian coverage at n = 1, 2, 3"):
        rng = np.random.default_rng(777)
        values = rng.normal(66.0, 6.0, size=10_000).tolist()
        for n, expected in ((1.0, 68.27), (2.0, 95.45), (3.0, 99.73)):
            st = classify_shade(values, n)
            good_pct = st.gb_count / 100.0
            assert abs(good_pct - expected) <= 1.5


def test_monotonicity_in_quality_index():
    with criterion("GB_c and GPB monotone in n and m"):
        rng = np.random.default_rng(555)
        grid = (0.25, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0)
        for _ in range(200):
            size = int(rng.integers(2, 40))
            values = rng.normal(rng.uniform(-50, 50), rng.uniform(0.1, 30), size=size).tolist()
            gb = [classify_shade(values, n).gb_count for n in grid]
            assert gb == sorted(gb)
            distances = [abs(v) for v in values]
            gpb = [detect_misprints(distances, m).gpb_count for m in grid]
            assert gpb == sorted(gpb)


def region_hocr(rgb: np.ndarray, truth: list[GlyphTruth]) -> tuple[str, BBox]:
    """Truth boxes shifted into the located region frame, clipped at its edges."""
    region, _ = textloc.locate_text_region(rgb)
    rb = region.bbox
    rel = []
    for t in truth:
        x0, y0 = max(t.bbox.x - rb.x, 0), max(t.bbox.y - rb.y, 0)
        x1, y1 = min(t.bbox.right - rb.x, rb.w), min(t.bbox.bottom - rb.y, rb.h)
        rel.append(GlyphTruth(bbox=BBox(x0, y0, x1 - x0, y1 - y0), char=t.char, ink=t.ink))
    return fixtures.emit_hocr(rel), rb


def test_end_to_end_shade(tmp_path):
    with criterion("end-to-end shade (one faded glyph at n = 2)"):
        spec = LabelSpec(lines=LINES, fade_map={FADED_BOX: 0.5}, seed=7)
        rgb, truth = fixtures.render_label(spec)
        raster.save_png(tmp_path / "faded.png", rgb)
        hocr, _ = region_hocr(rgb, truth)
        (tmp_path / "boxes.hocr").write_text(hocr, encoding="utf-8")
        start = time.perf_counter()
        rc = cli.main(
            [
                "inspect",
                str(tmp_path / "faded.png"),
                "--n",
                "2.0",
                "--hocr",
                str(tmp_path / "boxes.hocr"),
                "--out",
                str(tmp_path / "out"),
            ]
        )
        elapsed = time.perf_counter() - start
        assert rc == 2
        doc = json.loads((tmp_path / "out" / "report.json").read_text())
        labels = [b["label"] for b in doc["shade"]["boxes"]]
        assert len(labels) == 23
        assert labels[FADED_BOX - 1] == "Faded"
        assert all(lab == "Good" for i, lab in enumerate(labels) if i != FADED_BOX - 1)
        assert elapsed < 2.0


def test_end_to_end_misprint(trained_store, tmp_path):
    with criterion("end-to-end misprint (2 corrupted, m = 1, 2, 3)"):
        spec = LabelSpec(lines=LINES, corrupt=CORRUPT_BOXES, seed=119)
        rgb, _ = fixtures.render_label(spec)
        raster.save_png(tmp_path / "bad.png", rgb)
        for m in ("1", "2", "3"):
            out = tmp_path / f"out{m}"
            rc = cli.main(
                [
                    "inspect",
                    str(tmp_path / "bad.png"),
                    "--m",
                    m,
                    "--store",
                    str(trained_store),
                    "--out",
                    str(out),
                ]
            )
            assert rc == 2
            doc = json.loads((out / "report.json").read_text())
            flagged = [b["u"] for b in doc["misprint"]["boxes"] if b["label"] == "Misprint"]
            assert flagged == sorted(CORRUPT_BOXES)
            assert doc["misprint"]["gpb"] == 21 and doc["misprint"]["mpb"] == 2
            assert doc["misprint"]["qs_gpb"] == pytest.approx(91.30, abs=0.005)


def test_knn_self_classification(trained_store):
    with criterion("k-NN self-classification and L1 metric"):
        ts = misprint.load_training_set(trained_store)
        for glyph, label in zip(ts.mrd, ts.hrd):
            got, d = nearest_distance(ts, glyph, k=1)
            assert d == 0.0
            assert got == label or pixel_distance(ts.mrd[ts.hrd.index(got)], glyph) == 0
        rng = np.random.default_rng(31337)
        glyphs = [
            (rng.random((30, 20)) < 0.5).astype(np.uint8) * 255 for _ in range(60)
        ]
        checked = 0
        for i in range(0, 60, 3):
            a, b, c = glyphs[i], glyphs[(i + 7) % 60], glyphs[(i + 13) % 60]
            for _ in range(17):
                assert pixel_distance(a, b) == pixel_distance(b, a)
                assert pixel_distance(a, a) == 0
                assert pixel_distance(a, c) <= pixel_distance(a, b) + pixel_distance(b, c)
                checked += 3
                a, b, c = b, c, a
        assert checked >= 1000


def test_hocr_round_trip_and_errors():
    with criterion("hOCR round trip and malformed positions"):
        rng = np.random.default_rng(404)
        for _ in range(100):
            count = int(rng.integers(1, 30))
            truth = [
                GlyphTruth(
                    bbox=BBox(
                        int(rng.integers(0, 500)),
                        int(rng.integers(0, 300)),
                        int(rng.integers(1, 50)),
                        int(rng.integers(1, 50)),
                    ),
                    char=misprint.ALPHABET[int(rng.integers(0, 37))],
                    ink=int(rng.integers(0, 256)),
                )
                for _ in range(count)
            ]
            boxes = parse_hocr(fixtures.emit_hocr(truth))
            assert [b.bbox for b in boxes] == [t.bbox for t in truth]
            assert [b.recognized_char for b in boxes] == [t.char for t in truth]
        for bad_line, doc in (
            (3, '<html>\n<body>\n<span class="ocrx_cword" title="bbox 1 2 3">X</span>\n</body></html>'),
            (1, '<span class="ocr_char" title="bbox a b 3 4">X</span>'),
            (2, '<div>\n<span class="ocrx_cword" title="bbox 1 2 3 4 5">X</span></div>'),
        ):
            with pytest.raises(glyphseg.MalformedHocr) as err:
                parse_hocr(doc)
            assert err.value.line == bad_line


def test_determinism_of_inspect(trained_store, tmp_path):
    with criterion("byte-identical reruns of cmd_inspect"):
        spec = LabelSpec(lines=LINES, corrupt=CORRUPT_BOXES, seed=119)
        rgb, _ = fixtures.render_label(spec)
        raster.save_png(tmp_path / "img.png", rgb)
        args = [
            "inspect",
            str(tmp_path / "img.png"),
            "--store",
            str(trained_store),
            "--fixed-timings",
        ]
        assert cli.main(args + ["--out", str(tmp_path / "a")]) == 2
        assert cli.main(args + ["--out", str(tmp_path / "b")]) == 2
        for name in ("report.json", "annotated.png"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
