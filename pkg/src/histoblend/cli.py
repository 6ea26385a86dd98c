"""Command-line entry points for the batch workflows and the studio server."""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

import numpy as np

from . import curriculum as curr
from .blendlab import blend_sequence, fig3_grid, write_trace
from .concordance import iter_screen, summarize, write_records_jsonl
from .config import ProjectConfig, load_config, make_backend, resolve_embeddings
from .imaging import QCParams, SlideRaster, TileSpec, extract_tiles, load_raster, load_rois, png_encode
from .metrics import frechet_distance, gaussian_moments
from .service import create_app


def parse_seed_range(text: str) -> tuple[int, int]:
    """'a..b' with both ends inclusive, so 0..99 names one hundred seeds."""
    m = re.fullmatch(r"(\d+)\.\.(\d+)", text)
    if not m:
        raise ValueError(f"seed range must look like 'a..b', got {text!r}")
    a, b = int(m.group(1)), int(m.group(2))
    if b < a:
        raise ValueError(f"empty seed range {text!r}")
    return a, b


def _load_config_arg(path: str | None) -> ProjectConfig:
    return load_config(path) if path else ProjectConfig()


def _load_features(path: str) -> np.ndarray:
    if path.endswith((".csv", ".txt")):
        arr = np.loadtxt(path, delimiter=",")
    else:
        arr = np.load(path)
    # a flat file is one feature column, not one sample row
    return arr.reshape(-1, 1) if arr.ndim == 1 else arr


def _cmd_tile(args: argparse.Namespace) -> int:
    rois = load_rois(args.roi) if args.roi else []
    slide = SlideRaster(pixels=load_raster(args.slide), mpp=args.mpp, rois=rois)
    slide_id = args.slide_id or Path(args.slide).stem
    spec = TileSpec(um=args.tile_um, px=args.tile_px)
    reports = extract_tiles(slide, slide_id, spec, QCParams(), args.out)
    kept = sum(1 for r in reports if r.accepted)
    print(f"{slide_id}: {kept}/{len(reports)} tiles accepted -> {args.out}")
    return 0


def _cmd_screen(args: argparse.Namespace) -> int:
    config = _load_config_arg(args.config)
    backend = make_backend(config)
    embeddings = resolve_embeddings(config, backend)
    first, last = parse_seed_range(args.seed_range)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    records = list(iter_screen(backend, first, last, embeddings, config.thresholds))
    write_records_jsonl(records, out / "concordance.jsonl")
    summary = summarize(records)
    (out / "summary.json").write_text(json.dumps(summary.to_json(), indent=2))
    print(summary.line())
    return 0


def _cmd_blend(args: argparse.Namespace) -> int:
    config = _load_config_arg(args.config)
    backend = make_backend(config)
    embeddings = resolve_embeddings(config, backend)
    trace = blend_sequence(backend, args.seed, args.steps, embeddings)
    manifest = write_trace(trace, args.out)
    print(f"wrote {len(trace.steps)} frames and {manifest}")
    return 0


def _cmd_fig3(args: argparse.Namespace) -> int:
    config = _load_config_arg(args.config)
    backend = make_backend(config)
    embeddings = resolve_embeddings(config, backend)
    cells = fig3_grid(backend, args.seed, embeddings)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = []
    for cell in cells:
        name = f"{cell.label}.png"
        (out / name).write_bytes(png_encode(cell.image.pixels))
        manifest.append(
            {
                "label": cell.label,
                "ranges": [list(r) for r in cell.ranges],
                "frame": name,
                "pred": list(cell.prediction.values),
            }
        )
    (out / "grid.json").write_text(json.dumps({"seed": args.seed, "cells": manifest}, indent=2))
    print(f"wrote 6 cells -> {out}")
    return 0


def _cmd_fid(args: argparse.Namespace) -> int:
    a = gaussian_moments(_load_features(args.features_a))
    b = gaussian_moments(_load_features(args.features_b))
    value = frechet_distance(a, b)
    doc = {"fid": value}
    if args.out:
        Path(args.out).write_text(json.dumps(doc))
    print(json.dumps(doc))
    return 0


def _cmd_curriculum_build(args: argparse.Namespace) -> int:
    cases = curr.load_cases_csv(args.cases)
    paper = curr.build_test(cases, args.rng_seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.tiles:
        paper = curr.render_trios(paper, args.tiles, out / "trios")
    curr.save_paper(paper, out / "test.json")
    print(f"built {len(paper.items)} items from {len(cases)} cases -> {out / 'test.json'}")
    return 0


def _cmd_curriculum_score(args: argparse.Namespace) -> int:
    paper = curr.load_paper(args.test)
    answers = curr.load_answers_csv(args.answers)
    sheets = [curr.score_test(paper, a, who) for who, a in sorted(answers.items())]
    doc = {"sheets": [s.to_json() for s in sheets]}
    Path(args.out).write_text(json.dumps(doc, indent=2))
    for s in sheets:
        print(f"{s.respondent}: overall {s.overall:.3f}")
    return 0


def _load_sheets(path: str) -> list[curr.ScoreSheet]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return [
        curr.ScoreSheet(
            respondent=s["respondent"],
            overall=float(s["overall"]),
            by_stratum={k: float(v) for k, v in s["by_stratum"].items()},
            n_items=int(s["n_items"]),
            n_by_stratum={k: int(v) for k, v in s.get("n_by_stratum", {}).items()},
        )
        for s in doc["sheets"]
    ]


def _cmd_curriculum_analyze(args: argparse.Namespace) -> int:
    report = curr.analyze_improvement(_load_sheets(args.pre), _load_sheets(args.post))
    if args.out:
        Path(args.out).write_text(json.dumps(report.to_json(), indent=2))
    print(report.to_text())
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    config = _load_config_arg(args.config)
    app = create_app(config, data_dir=args.data, frontend_dir=args.frontend)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="histoblend")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tile", help="tile a slide raster with QC filtering")
    p.add_argument("--slide", required=True)
    p.add_argument("--mpp", type=float, required=True)
    p.add_argument("--roi")
    p.add_argument("--slide-id")
    p.add_argument("--tile-um", type=float, default=302.0)
    p.add_argument("--tile-px", type=int, default=299)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_tile)

    p = sub.add_parser("screen", help="concordance-screen a seed range")
    p.add_argument("--seed-range", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.set_defaults(func=_cmd_screen)

    p = sub.add_parser("blend", help="class-blend sweep for one seed")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--steps", type=int, default=11)
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.set_defaults(func=_cmd_blend)

    p = sub.add_parser("fig3", help="six-cell layer-blend preset grid for one seed")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.set_defaults(func=_cmd_fig3)

    p = sub.add_parser("fid", help="Frechet distance between two feature files")
    p.add_argument("--features-a", required=True)
    p.add_argument("--features-b", required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_fid)

    p = sub.add_parser("curriculum", help="build, score, or analyze tests")
    csub = p.add_subparsers(dest="subcommand", required=True)

    c = csub.add_parser("build")
    c.add_argument("--cases", required=True)
    c.add_argument("--rng-seed", type=int, required=True)
    c.add_argument("--out", required=True)
    c.add_argument("--tiles")
    c.set_defaults(func=_cmd_curriculum_build)

    c = csub.add_parser("score")
    c.add_argument("--test", required=True)
    c.add_argument("--answers", required=True)
    c.add_argument("--out", required=True)
    c.set_defaults(func=_cmd_curriculum_score)

    c = csub.add_parser("analyze")
    c.add_argument("--pre", required=True)
    c.add_argument("--post", required=True)
    c.add_argument("--out")
    c.set_defaults(func=_cmd_curriculum_analyze)

    p = sub.add_parser("serve", help="run the studio HTTP service")
    p.add_argument("--config")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--data", default="studio-data")
    p.add_argument("--frontend")
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except Exception as exc:  # surface a clean diagnostic, not a traceback
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
