"""Command-line entry points: inspect, train, synth.

``inspect`` runs the full pipeline on one PNG and writes report.json,
annotated.png, and density.csv into the output directory. ``train``
hosts the labeling session HTTP API. ``synth`` renders a synthetic
label fixture from a JSON spec.

Exit codes: 0 all enabled checks passed, 1 error, 2 quality failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import fixtures, glyphseg, misprint, raster, session, shadestats, textloc
from .alignment import assess_alignment
from .errors import PrintQCError
from .raster import BBox
from .report import InspectionReport, annotate, write_report
from .textloc import LocalizeConfig, ObjectGeometry

DEFAULT_PORT = 7878


@dataclass(frozen=True)
class RunConfig:
    localize: LocalizeConfig = LocalizeConfig()
    n: float = 2.0
    m: float = 2.0
    k: int = 1
    polarity: str = "ink-dark"
    hocr: Path | None = None  # box source: hOCR file instead of the segmenter
    store: Path | None = None  # training store directory
    out: Path = Path("out")
    upper_tail_only: bool = False
    normalize_distance: bool = False
    alignment_original_scale: bool = False
    fixed_timings: bool = False  # zero timings for byte-reproducible reports

    def __post_init__(self):
        if self.n <= 0 or self.m <= 0:
            raise ValueError("quality indices n and m must be positive")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.polarity not in shadestats.POLARITIES:
            raise ValueError(f"unknown polarity {self.polarity!r}")


def _use_color() -> bool:
    return os.environ.get("PRINTQC_NO_COLOR") is None and sys.stderr.isatty()


def _fail(message: str) -> int:
    if _use_color():
        message = f"\x1b[31m{message}\x1b[0m"
    print(f"error: {message}", file=sys.stderr)
    return 1


def load_config(path: str | Path, base: RunConfig | None = None) -> RunConfig:
    """Apply a flat JSON config over the defaults (or ``base``)."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, dict):
        raise ValueError("config must be a JSON object")
    cfg = base or RunConfig()
    loc_fields = {f.name for f in fields(LocalizeConfig)}
    run_fields = {f.name for f in fields(RunConfig)}
    loc_kwargs: dict = {}
    run_kwargs: dict = {}
    for key, value in data.items():
        if key in loc_fields:
            if key in ("word_close_se", "blob_close_se"):
                value = tuple(int(v) for v in value)
            loc_kwargs[key] = value
        elif key in run_fields and key != "localize":
            if key in ("hocr", "store", "out") and value is not None:
                value = Path(value)
            run_kwargs[key] = value
        else:
            raise ValueError(f"unknown config key {key!r}")
    if loc_kwargs:
        run_kwargs["localize"] = replace(cfg.localize, **loc_kwargs)
    return replace(cfg, **run_kwargs)


def _resize_rgb(img: np.ndarray, width: int) -> np.ndarray:
    channels = [raster.resize_to_width(img[:, :, c], width) for c in range(3)]
    return np.stack(channels, axis=2)


def _scale_for_alignment(
    obj: ObjectGeometry, text: BBox, factor: float
) -> tuple[ObjectGeometry, BBox]:
    def s(v: int) -> int:
        return int(np.floor(v * factor + 0.5))

    return (
        ObjectGeometry(s(obj.x_o), s(obj.y_o), max(1, s(obj.w_o)), max(1, s(obj.h_o))),
        BBox(s(text.x), s(text.y), max(1, s(text.w)), max(1, s(text.h))),
    )


def _clamp_to_region(boxes: list[glyphseg.CharBox], w: int, h: int) -> list[glyphseg.CharBox]:
    kept: list[glyphseg.CharBox] = []
    for box in boxes:
        b = box.bbox
        x0, y0 = max(0, b.x), max(0, b.y)
        x1, y1 = min(w, b.right), min(h, b.bottom)
        if x1 - x0 < 1 or y1 - y0 < 1:
            print(f"warning: dropping out-of-region hOCR box {b}", file=sys.stderr)
            continue
        kept.append(
            glyphseg.CharBox(
                u=len(kept) + 1,
                bbox=BBox(x0, y0, x1 - x0, y1 - y0),
                source=box.source,
                recognized_char=box.recognized_char,
            )
        )
    return kept


def cmd_inspect(image_path: str | Path, cfg: RunConfig) -> int:
    timings: dict[str, int] = {}
    clock = time.perf_counter

    def lap(stage: str, start: float) -> None:
        timings[stage] = 0 if cfg.fixed_timings else int((clock() - start) * 1000)

    try:
        img = raster.load_png(image_path)
        if img.ndim == 2:
            img = np.repeat(img[:, :, None], 3, axis=2)

        t0 = clock()
        region, obj = textloc.locate_text_region(img, cfg.localize)
        lap("locate", t0)

        t0 = clock()
        if cfg.alignment_original_scale:
            factor = img.shape[1] / cfg.localize.resize_width
            alignment = assess_alignment(*_scale_for_alignment(obj, region.bbox, factor))
        else:
            alignment = assess_alignment(obj, region.bbox)
        lap("align", t0)

        t0 = clock()
        binary = glyphseg.preprocess_for_ocr(region)
        if cfg.hocr is not None:
            boxes = glyphseg.parse_hocr(Path(cfg.hocr).read_text(encoding="utf-8"))
            boxes = _clamp_to_region(boxes, region.bbox.w, region.bbox.h)
        else:
            boxes = glyphseg.segment_glyphs(binary)
        glyphs = [glyphseg.normalize_glyph(binary, box) for box in boxes]
        lap("segment", t0)

        t0 = clock()
        values = [shadestats.box_intensity(region.crop, box) for box in boxes]
        shade = shadestats.classify_shade(values, cfg.n, cfg.polarity)
        lap("shade", t0)

        mis = None
        if cfg.store is not None:
            t0 = clock()
            ts = misprint.load_training_set(cfg.store)
            distances = [
                misprint.nearest_distance(ts, g, cfg.k, cfg.normalize_distance)[1]
                for g in glyphs
            ]
            mis = misprint.detect_misprints(distances, cfg.m, cfg.upper_tail_only)
            lap("misprint", t0)

        t0 = clock()
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        resized = _resize_rgb(img, cfg.localize.resize_width)
        annotated = annotate(
            resized, region.bbox, boxes, shade.labels, mis.labels if mis else None
        )
        raster.save_png(out / "annotated.png", annotated)
        try:
            density = shadestats.density_csv(shadestats.kde_estimate(values))
        except shadestats.DegenerateData:
            density = "x,f\n"
        (out / "density.csv").write_text(density, encoding="utf-8")
        lap("write", t0)

        rep = InspectionReport(
            image=Path(image_path).name,
            region=region.bbox,
            alignment=alignment,
            shade=shade,
            boxes=tuple(boxes),
            misprint=mis,
            timings_ms=timings,
        )
        (out / "report.json").write_text(write_report(rep), encoding="utf-8")
    except (OSError, PrintQCError, ValueError) as exc:
        return _fail(str(exc))

    checks = {
        "vertical alignment": alignment.vertical_pass,
        "horizontal alignment": alignment.horizontal_pass,
        "shade": shade.bb_count == 0,
    }
    if mis is not None:
        checks["misprint"] = mis.mpb_count == 0
    for name, ok in checks.items():
        print(f"{name}: {'pass' if ok else 'FAIL'}")
    return 0 if all(checks.values()) else 2


def _session_items(region: textloc.TextRegion) -> list[session.SessionItem]:
    binary = glyphseg.preprocess_for_ocr(region)
    boxes = glyphseg.segment_glyphs(binary)
    return [
        session.SessionItem(
            box_id=box.u,
            crop=region.crop[box.bbox.slices()].copy(),
            glyph=glyphseg.normalize_glyph(binary, box),
        )
        for box in boxes
    ]


def _find_ui_dir(flag: str | None) -> Path | None:
    candidates = []
    if flag:
        candidates.append(Path(flag))
    env = os.environ.get("PRINTQC_UI_DIR")
    if env:
        candidates.append(Path(env))
    candidates.append(Path("frontend") / "dist")
    for cand in candidates:
        if (cand / "index.html").is_file():
            return cand
    return None


def cmd_train(image_path: str | Path, store: str | Path, port: int, ui: str | None = None) -> int:
    try:
        img = raster.load_png(image_path)
        if img.ndim == 2:
            img = np.repeat(img[:, :, None], 3, axis=2)
        region, _ = textloc.locate_text_region(img)
        items = _session_items(region)
        store_path = Path(store)
        if (store_path / misprint.MRD_FILENAME).exists():
            ts = misprint.load_training_set(store_path)
        else:
            ts = misprint.new_training_set(store_path)
        sess = session.LabelingSession(items, ts)
        server = session.make_session_server(sess, port, _find_ui_dir(ui))
    except (OSError, PrintQCError, ValueError) as exc:
        return _fail(str(exc))

    print(f"labeling session: {len(items)} boxes on http://127.0.0.1:{port}/")
    session.serve_until_done(server, sess)
    labeled, skipped = sess.counts()
    print(f"session complete: {labeled} labeled, {skipped} skipped; store size {len(sess.store)}")
    return 0


def cmd_synth(spec_path: str | Path, out_dir: str | Path) -> int:
    try:
        spec = fixtures.spec_from_json(Path(spec_path).read_text(encoding="utf-8"))
        png, truth, hocr = fixtures.write_fixture(spec, out_dir)
    except (OSError, PrintQCError) as exc:
        return _fail(str(exc))
    print(f"wrote {png}, {truth}, {hocr}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="printqc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_inspect = sub.add_parser("inspect", help="inspect one label image")
    p_inspect.add_argument("image")
    p_inspect.add_argument("--n", type=float, default=None, help="shade quality index")
    p_inspect.add_argument("--m", type=float, default=None, help="misprint quality index")
    p_inspect.add_argument("--k", type=int, default=None, help="nearest neighbors")
    p_inspect.add_argument("--hocr", default=None, help="hOCR box file (region coordinates)")
    p_inspect.add_argument("--store", default=None, help="training store directory")
    p_inspect.add_argument("--out", default=None, help="output directory")
    p_inspect.add_argument("--config", default=None, help="JSON config file; flags win")
    p_inspect.add_argument("--polarity", choices=shadestats.POLARITIES, default=None)
    p_inspect.add_argument(
        "--fixed-timings", action="store_true", help="zero report timings for byte-stable output"
    )

    p_train = sub.add_parser("train", help="host a labeling session")
    p_train.add_argument("image")
    p_train.add_argument("--store", required=True, help="training store directory")
    p_train.add_argument("--port", type=int, default=DEFAULT_PORT)
    p_train.add_argument("--ui", default=None, help="directory holding the labeler UI bundle")

    p_synth = sub.add_parser("synth", help="render a synthetic label fixture")
    p_synth.add_argument("spec")
    p_synth.add_argument("--out", required=True, help="output directory")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "inspect":
        try:
            cfg = RunConfig()
            if args.config:
                cfg = load_config(args.config, cfg)
            overrides: dict = {}
            if args.n is not None:
                overrides["n"] = args.n
            if args.m is not None:
                overrides["m"] = args.m
            if args.k is not None:
                overrides["k"] = args.k
            if args.hocr is not None:
                overrides["hocr"] = Path(args.hocr)
            if args.store is not None:
                overrides["store"] = Path(args.store)
            if args.out is not None:
                overrides["out"] = Path(args.out)
            if args.polarity is not None:
                overrides["polarity"] = args.polarity
            if args.fixed_timings:
                overrides["fixed_timings"] = True
            cfg = replace(cfg, **overrides)
        except (OSError, ValueError) as exc:
            return _fail(f"bad configuration: {exc}")
        return cmd_inspect(args.image, cfg)
    if args.command == "train":
        return cmd_train(args.image, args.store, args.port, args.ui)
    return cmd_synth(args.spec, args.out)


if __name__ == "__main__":
    sys.exit(main())
