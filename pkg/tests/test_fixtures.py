from __future__ import annotations

import dataclasses
import json

import pytest

from printqc import fixtures, raster
from printqc.errors import SpecError
from printqc.fixtures import FONT_5X7, LabelSpec, render_label
from printqc.misprint import ALPHABET
from printqc.textloc import ObjectGeometry


class TestFont:
    def test_covers_alphabet(self):
        assert set(FONT_5X7) == set(ALPHABET)

    def test_every_glyph_has_ink(self):
        for ch, rows in FONT_5X7.items():
            assert any(bits for bits in rows), ch

    def test_rows_fit_five_bits(self):
        for rows in FONT_5X7.values():
            assert len(rows) == 7
            assert all(0 <= bits < 32 for bits in rows)

    def test_glyphs_distinct(self):
        assert len({rows for rows in FONT_5X7.values()}) == len(FONT_5X7)


class TestRender:
    def test_single_glyph(self):
        spec = LabelSpec(lines=("A",))
        rgb, truth = render_label(spec)
        assert len(truth) == 1
        gray = raster.to_grayscale(rgb)
        t = truth[0]
        ink_pixels = gray[t.bbox.y : t.bbox.bottom, t.bbox.x : t.bbox.right]
        assert (ink_pixels[ink_pixels != spec.background] == spec.ink).all()
        assert (ink_pixels == spec.ink).sum() > 0

    def test_two_line_count(self):
        spec = LabelSpec(lines=("ADFGHKMNOPQR", "SUWZ1235689"))
        _, truth = render_label(spec)
        assert len(truth) == 23

    def test_deterministic_bytes(self):
        spec = LabelSpec(lines=("ABC", "123"), noise=0.01, corrupt=frozenset({2}), seed=99)
        a, ta = render_label(spec)
        b, tb = render_label(spec)
        assert (a == b).all()
        assert ta == tb

    def test_boxes_disjoint_with_ink(self):
        spec = LabelSpec(lines=("ADFGHKMNOPQR", "SUWZ1235689"), corrupt=frozenset({3}))
        rgb, truth = render_label(spec)
        gray = raster.to_grayscale(rgb)
        for i, t in enumerate(truth):
            patch = gray[t.bbox.y : t.bbox.bottom, t.bbox.x : t.bbox.right]
            assert (patch == t.ink).sum() >= 1
            for other in truth[i + 1 :]:
                no_x = t.bbox.right <= other.bbox.x or other.bbox.right <= t.bbox.x
                no_y = t.bbox.bottom <= other.bbox.y or other.bbox.bottom <= t.bbox.y
                assert no_x or no_y

    def test_fade_multiplier_lightens(self):
        spec = LabelSpec(lines=("AB",), fade_map={2: 0.5})
        _, truth = render_label(spec)
        nominal, faded = truth
        assert nominal.ink == 40
        assert faded.ink == 130  # 220 - (220-40)*0.5

    def test_over_multiplier_darkens_and_clamps(self):
        spec = LabelSpec(lines=("AB",), fade_map={2: 4.0})
        _, truth = render_label(spec)
        assert truth[1].ink == 0  # 220 - 180*4 clamps at 0

    def test_corrupt_cell_is_noise(self):
        spec = LabelSpec(lines=("AB",), corrupt=frozenset({1}), seed=5)
        rgb, truth = render_label(spec)
        gray = raster.to_grayscale(rgb)
        t = truth[0]
        patch = gray[t.bbox.y : t.bbox.bottom, t.bbox.x : t.bbox.right]
        ink_frac = (patch == spec.ink).mean()
        assert 0.2 < ink_frac < 0.8  # noise, not a drawn glyph

    def test_noise_fraction_applied(self):
        base = LabelSpec(lines=("ABC",), seed=1)
        noisy = dataclasses.replace(base, noise=0.02)
        img_a, _ = render_label(base)
        img_b, _ = render_label(noisy)
        changed = (img_a != img_b).any(axis=2).sum()
        assert changed == round(0.02 * img_a.shape[0] * img_a.shape[1])


class TestSpecValidation:
    def test_empty_lines(self):
        with pytest.raises(SpecError):
            render_label(LabelSpec(lines=()))
        with pytest.raises(SpecError):
            render_label(LabelSpec(lines=("AB", "")))

    def test_alphabet_enforced(self):
        with pytest.raises(SpecError):
            render_label(LabelSpec(lines=("ab",)))

    def test_multiplier_bounds(self):
        with pytest.raises(SpecError):
            render_label(LabelSpec(lines=("AB",), fade_map={1: 0.0}))
        with pytest.raises(SpecError):
            render_label(LabelSpec(lines=("AB",), fade_map={1: 4.5}))

    def test_noise_bounds(self):
        with pytest.raises(SpecError):
            render_label(LabelSpec(lines=("AB",), noise=0.06))

    def test_text_must_fit_object(self):
        with pytest.raises(SpecError):
            render_label(LabelSpec(lines=("AAAAAAAAAA",), object=ObjectGeometry(5, 5, 50, 40)))

    def test_object_must_fit_canvas(self):
        with pytest.raises(SpecError):
            render_label(LabelSpec(lines=("A",), width=100, height=100))


class TestSpecJson:
    def test_full_round_trip(self):
        text = json.dumps(
            {
                "object": {"x_o": 20, "y_o": 25, "W_o": 300, "H_o": 200},
                "background": 210,
                "ink": 50,
                "lines": ["ABC", "12"],
                "cell": 4,
                "fade_map": {"2": 0.75},
                "corrupt": [3],
                "noise": 0.01,
                "seed": 11,
            }
        )
        spec = fixtures.spec_from_json(text)
        assert spec.object == ObjectGeometry(20, 25, 300, 200)
        assert spec.lines == ("ABC", "12")
        assert spec.fade_map == {2: 0.75}
        assert spec.corrupt == frozenset({3})

    def test_defaults_apply(self):
        spec = fixtures.spec_from_json('{"lines": ["AB"]}')
        assert spec.cell == 4 and spec.seed == 0

    def test_bad_json(self):
        with pytest.raises(SpecError):
            fixtures.spec_from_json("{nope")

    def test_non_object(self):
        with pytest.raises(SpecError):
            fixtures.spec_from_json("[1,2]")

    def test_malformed_object_box(self):
        with pytest.raises(SpecError):
            fixtures.spec_from_json('{"object": {"x_o": 1}}')


class TestWriteFixture:
    def test_three_files(self, tmp_path):
        spec = LabelSpec(lines=("AB", "12"))
        png, truth_json, hocr = fixtures.write_fixture(spec, tmp_path / "out")
        assert png.exists() and truth_json.exists() and hocr.exists()
        records = json.loads(truth_json.read_text())
        assert len(records) == 4
        assert set(records[0]) == {"x", "y", "w", "h", "char", "ink"}
        img = raster.load_png(png)
        assert img.shape == (*spec.canvas_size()[::-1], 3)

    def test_hocr_parse_matches_truth(self, tmp_path):
        from printqc import glyphseg

        spec = LabelSpec(lines=("Q4-",))
        _, _, hocr = fixtures.write_fixture(spec, tmp_path / "out")
        boxes = glyphseg.parse_hocr(hocr.read_text())
        _, truth = render_label(spec)
        assert [b.bbox for b in boxes] == [t.bbox for t in truth]
        assert [b.recognized_char for b in boxes] == [t.char for t in truth]
