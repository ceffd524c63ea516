"""Command-line front over the toolkit.

Exit codes: 0 success, 1 domain error (one-line JSON diagnostic on
stderr), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .corpus import (Manifest, SpacingParams, corpus_stats,
                     export_trainer_layout, load_glyph_set, scan_corpus,
                     split, validate_corpus, write_synth_corpus)
from .engine import ocr_page, resolve_engine
from .errors import KurdocrError
from .evalkit import align, char_accuracy, render_diff
from .layout import SegmentationParams, segment_lines
from .raster import (Binarizer, PreprocessPlan, apply_plan, load_binary,
                     load_raster, save_png)
from .textnorm import NormalizationPolicy, load_alphabet_file, normalize


def _policy_from_args(args) -> NormalizationPolicy:
    if getattr(args, "policy", None):
        data = json.loads(Path(args.policy).read_text(encoding="utf-8"))
        policy = NormalizationPolicy.from_json(data)
    else:
        policy = NormalizationPolicy()
    if getattr(args, "fold_historical", False):
        policy.historical_fold = True
    return policy


def _add_shared(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0, help="seed for any randomness")
    parser.add_argument("--dpi", type=float, default=None,
                        help="override image DPI metadata")
    parser.add_argument("--policy", default=None,
                        help="normalization policy JSON file")
    parser.add_argument("--profile", default=None,
                        help="engine profile: mock:*, a JSON path, or a shipped name")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kurdocr",
        description="OCR tooling for historical Arabic-script Kurdish publications")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="clean a page image into ink bits")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True, help="output PNG path")
    p.add_argument("--binarizer", choices=["otsu", "sauvola"], default="otsu")
    p.add_argument("--sauvola-window", type=int, default=31)
    p.add_argument("--sauvola-k", type=float, default=0.5)
    p.add_argument("--sauvola-r", type=float, default=128.0)
    p.add_argument("--target-dpi", type=float, default=None)
    p.add_argument("--despeckle-area", type=int, default=4)
    p.add_argument("--morph", default=None, metavar="OP:RADIUS",
                   help="dilate:1 or erode:2 applied after binarization")
    p.add_argument("--no-deskew", action="store_true")
    p.add_argument("--deskew-half-range", type=float, default=10.0)
    p.add_argument("--no-polarity", action="store_true")
    p.add_argument("--border", choices=["trim_and_pad", "none"], default="trim_and_pad")
    p.add_argument("--pad", type=int, default=10)
    p.add_argument("--max-image-mb", type=float, default=256.0)
    _add_shared(p)

    p = sub.add_parser("segment", help="split a page into line images")
    p.add_argument("input")
    p.add_argument("-o", "--outdir", required=True)
    p.add_argument("--noise-floor", type=int, default=2)
    p.add_argument("--min-gap", type=int, default=4)
    p.add_argument("--min-height", type=int, default=8)
    p.add_argument("--smooth-window", type=int, default=3)
    _add_shared(p)

    p = sub.add_parser("corpus-scan", help="index a ground-truth directory")
    p.add_argument("root")
    p.add_argument("-o", "--output", default=None,
                   help="manifest path (default ROOT/.kurdocr/manifest.json)")
    _add_shared(p)

    p = sub.add_parser("corpus-validate", help="validate transcripts and images")
    p.add_argument("root")
    p.add_argument("--alphabet", default=None, help="alphabet config file")
    p.add_argument("--strict", action="store_true",
                   help="exit 1 when any issue is found")
    _add_shared(p)

    p = sub.add_parser("corpus-stats", help="per-publication line/char counts")
    p.add_argument("root")
    p.add_argument("--json", action="store_true", dest="as_json")
    _add_shared(p)

    p = sub.add_parser("corpus-split", help="assign deterministic train/eval splits")
    p.add_argument("root")
    p.add_argument("--eval-fraction", type=float, default=0.1)
    p.add_argument("-o", "--output", default=None,
                   help="manifest path (default ROOT/.kurdocr/manifest.json)")
    _add_shared(p)

    p = sub.add_parser("corpus-export", help="write the trainer ground-truth layout")
    p.add_argument("root")
    p.add_argument("-o", "--outdir", required=True)
    p.add_argument("--manifest", default=None,
                   help="manifest with split assignments (default ROOT/.kurdocr/manifest.json)")
    _add_shared(p)

    p = sub.add_parser("synth", help="render synthetic lines from glyph images")
    p.add_argument("--texts", required=True, help="file with one line of text per line")
    p.add_argument("--glyphs", required=True, help="glyph set directory")
    p.add_argument("-o", "--outdir", required=True)
    p.add_argument("--gap-mean", type=float, default=2.0)
    p.add_argument("--gap-sd", type=float, default=0.0)
    p.add_argument("--jitter-sd", type=float, default=0.0)
    p.add_argument("--publication", default=None)
    p.add_argument("--year", type=int, default=None)
    _add_shared(p)

    p = sub.add_parser("ocr", help="run an engine over a page image")
    p.add_argument("input")
    p.add_argument("--whole-page", action="store_true",
                   help="one engine call for the page instead of per line")
    p.add_argument("--fold-historical", action="store_true")
    p.add_argument("--json", action="store_true", dest="as_json")
    _add_shared(p)

    p = sub.add_parser("eval", help="character/word accuracy of hyp vs ref")
    p.add_argument("--ref", required=True)
    p.add_argument("--hyp", required=True)
    p.add_argument("--fold-historical", action="store_true")
    p.add_argument("--json", action="store_true", dest="as_json")
    p.add_argument("--diff", action="store_true", help="print an aligned diff")
    _add_shared(p)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--config", default=None, help="service config JSON")
    p.add_argument("--corpus", default=None)
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--ui", default=None, help="static UI bundle directory")
    _add_shared(p)

    return parser


def _plan_from_args(args) -> PreprocessPlan:
    morph = None
    if args.morph:
        op, _, radius = args.morph.partition(":")
        morph = (op, int(radius or 1))
    return PreprocessPlan(
        force_polarity=not args.no_polarity,
        target_dpi=args.target_dpi,
        binarizer=Binarizer(args.binarizer, args.sauvola_window,
                            args.sauvola_k, args.sauvola_r),
        despeckle_max_area=args.despeckle_area,
        morphology=morph,
        deskew=not args.no_deskew,
        deskew_half_range=args.deskew_half_range,
        border=args.border,
        border_pad=args.pad,
        max_image_mb=args.max_image_mb,
    )


def cmd_preprocess(args) -> int:
    image = load_raster(args.input, dpi_override=args.dpi,
                        max_image_mb=args.max_image_mb)
    plan = _plan_from_args(args)
    binary, trace = apply_plan(image, plan)
    save_png(binary, args.output)
    print(json.dumps({"output": args.output, "width": binary.width,
                      "height": binary.height, "trace": trace},
                     ensure_ascii=False))
    return 0


def cmd_segment(args) -> int:
    page = load_binary(args.input, dpi_override=args.dpi)
    params = SegmentationParams(args.noise_floor, args.min_gap,
                                args.min_height, args.smooth_window)
    segments = segment_lines(page, params)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    stem = Path(args.input).stem
    from .layout import crop
    boxes = []
    for seg in segments:
        line = crop(page, seg.box)
        save_png(line, outdir / f"{stem}_{seg.index:03d}.png")
        boxes.append({"page": str(args.input), **seg.to_json()})
    manifest_path = outdir / f"{stem}_boxes.json"
    manifest_path.write_text(
        json.dumps({"page": str(args.input), "params": params.to_json(),
                    "segments": boxes}, ensure_ascii=False, indent=2),
        encoding="utf-8")
    print(json.dumps({"segments": len(segments), "manifest": str(manifest_path)}))
    return 0


def _default_manifest_path(root: str) -> Path:
    return Path(root) / ".kurdocr" / "manifest.json"


def cmd_corpus_scan(args) -> int:
    manifest = scan_corpus(args.root)
    out = Path(args.output) if args.output else _default_manifest_path(args.root)
    out.parent.mkdir(parents=True, exist_ok=True)
    manifest.save(out)
    print(json.dumps({"manifest": str(out), "pairs": len(manifest.pairs),
                      "orphans": len(manifest.orphans)}))
    return 0


def cmd_corpus_validate(args) -> int:
    alphabet = load_alphabet_file(args.alphabet) if args.alphabet else None
    report = validate_corpus(scan_corpus(args.root), alphabet)
    print(json.dumps(report.to_json(), ensure_ascii=False, indent=2))
    if args.strict and report.issue_total:
        return 1
    return 0


def cmd_corpus_stats(args) -> int:
    stats = corpus_stats(scan_corpus(args.root))
    if args.as_json:
        print(json.dumps(stats.to_json(), ensure_ascii=False, indent=2))
        return 0
    width = max([len(r.publication) for r in stats.rows] + [len("Publication")])
    print(f"{'Publication':<{width}}  {'Year':>5}  {'Lines':>6}  {'Chars':>8}")
    for row in stats.rows:
        year = row.year if row.year is not None else "-"
        print(f"{row.publication:<{width}}  {year!s:>5}  {row.lines:>6}  {row.chars:>8}")
    print(f"{'Total':<{width}}  {'':>5}  {stats.total_lines:>6}  {stats.total_chars:>8}")
    return 0


def cmd_corpus_split(args) -> int:
    manifest = split(scan_corpus(args.root), args.eval_fraction, args.seed)
    out = Path(args.output) if args.output else _default_manifest_path(args.root)
    out.parent.mkdir(parents=True, exist_ok=True)
    manifest.save(out)
    eval_count = sum(1 for p in manifest.pairs if p.split == "eval")
    print(json.dumps({"manifest": str(out), "pairs": len(manifest.pairs),
                      "eval": eval_count,
                      "train": len(manifest.pairs) - eval_count}))
    return 0


def cmd_corpus_export(args) -> int:
    manifest_path = Path(args.manifest) if args.manifest else _default_manifest_path(args.root)
    if manifest_path.is_file():
        manifest = Manifest.load(manifest_path)
    else:
        manifest = scan_corpus(args.root)
    out = export_trainer_layout(manifest, args.outdir)
    print(json.dumps({"outdir": str(out), "pairs": len(manifest.pairs)}))
    return 0


def cmd_synth(args) -> int:
    texts = [line for line in
             Path(args.texts).read_text(encoding="utf-8").splitlines()
             if line.strip()]
    glyphs = load_glyph_set(args.glyphs)
    spacing = SpacingParams(args.gap_mean, args.gap_sd, args.jitter_sd)
    written = write_synth_corpus(texts, glyphs, args.outdir, spacing,
                                 seed=args.seed, publication=args.publication,
                                 year=args.year)
    print(json.dumps({"outdir": args.outdir, "lines": len(written)}))
    return 0


def cmd_ocr(args) -> int:
    if args.profile is None:
        raise KurdocrError("ocr requires --profile")
    image = load_raster(args.input, dpi_override=args.dpi)
    spec = resolve_engine(args.profile)
    policy = _policy_from_args(args)
    result = ocr_page(image, PreprocessPlan(), spec,
                      by_line=not args.whole_page, policy=policy)
    if args.as_json:
        print(json.dumps(result.to_json(), ensure_ascii=False, indent=2))
    else:
        print(result.text)
    return 0


def cmd_eval(args) -> int:
    ref = Path(args.ref).read_text(encoding="utf-8")
    hyp = Path(args.hyp).read_text(encoding="utf-8")
    policy = _policy_from_args(args)
    report = char_accuracy(ref, hyp, policy, doc_id=args.hyp, keep_ops=args.diff)
    if args.as_json:
        print(json.dumps(report.to_json(), ensure_ascii=False, indent=2))
    else:
        print(f"accuracy {report.accuracy_display}%  cer {report.cer_display}%  "
              f"chars {report.chars}  errors {report.errors}  "
              f"wer {report.wer:.4f}")
    if args.diff:
        from .evalkit import Alignment
        print(render_diff(Alignment(report.ops)))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app, load_config
    config = load_config(args.config)
    if args.corpus:
        config.corpus_root = args.corpus
    if args.port:
        config.port = args.port
    if args.ui:
        config.ui_dist = args.ui
    if args.profile:
        config.default_profile = args.profile
    app = create_app(config)
    uvicorn.run(app, host="0.0.0.0", port=config.port)
    return 0


_COMMANDS = {
    "preprocess": cmd_preprocess,
    "segment": cmd_segment,
    "corpus-scan": cmd_corpus_scan,
    "corpus-validate": cmd_corpus_validate,
    "corpus-stats": cmd_corpus_stats,
    "corpus-split": cmd_corpus_split,
    "corpus-export": cmd_corpus_export,
    "synth": cmd_synth,
    "ocr": cmd_ocr,
    "eval": cmd_eval,
    "serve": cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except KurdocrError as exc:
        print(json.dumps(exc.to_json(), ensure_ascii=False), file=sys.stderr)
        return 1
    except OSError as exc:
        print(json.dumps({"error": "IoError", "message": str(exc)},
                         ensure_ascii=False), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
