"""Command line interface: detect / eval / synth.

Standard output carries machine-readable results only; progress and
diagnostics go to standard error. Exit codes: 0 success, 1 an eval
assertion failed, 2 usage / configuration / I-O error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import VidtextError
from .evaluation import detections_from_run, evaluate, load_ground_truth
from .filtering import FilterConfig
from .frames import open_sequence
from .pipeline import PipelineConfig, process_sequence, render_overlays, run_to_json, save_run
from .synthetic import clip_spec_from_dict, generate_synthetic_clip, write_clip

_PIPELINE_KEYS = {
    "theta": float,
    "split_threshold": float,
    "min_block": int,
    "density_tol": float,
    "density_floor": float,
    "dedup_iou": float,
    "jobs": int,
}
_FILTER_KEYS = {
    "sigma": float,
    "window": int,
    "shift": int,
    "min_area": int,
    "min_width": int,
    "min_height": int,
    "match_tol_pos": int,
    "match_tol_density": float,
    "temporal_remeasure": bool,
}
_FILTER_FIELDS = {"window": "window_n", "shift": "shift_k"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vidtext",
        description="Detect static superimposed text regions in video frame sequences.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    detect = sub.add_parser("detect", help="run detection over a frame sequence")
    detect.add_argument("--frames", required=True, help="frame directory, glob, or manifest JSON")
    detect.add_argument("--out", required=True, help="path for the run-report JSON")
    detect.add_argument("--overlay-dir", help="write per-frame PNGs with confirmed boxes drawn")
    detect.add_argument("--config", help="JSON config file (defaults < file < flags)")
    detect.add_argument("--theta", type=float, help="change-trigger threshold on the pair histogram difference")
    detect.add_argument("--split-threshold", type=float, dest="split_threshold", help="edge density above which a block splits")
    detect.add_argument("--min-block", type=int, dest="min_block", help="smallest block dimension the split may produce")
    detect.add_argument("--density-tol", type=float, dest="density_tol", help="max density gap between merged neighbor blocks")
    detect.add_argument("--density-floor", type=float, dest="density_floor", help="min leaf density to take part in merging")
    detect.add_argument("--sigma", type=float, help="min gray distance between the two dominant crop peaks")
    detect.add_argument("--window", type=int, help="temporal window length in frames")
    detect.add_argument("--shift", type=int, help="frame stride inside the temporal window")
    detect.add_argument("--min-area", type=int, dest="min_area", help="min region area in pixels")
    detect.add_argument("--match-pos-tol", type=int, dest="match_tol_pos", help="position/size tolerance for window matching")
    detect.add_argument("--match-density-tol", type=float, dest="match_tol_density", help="density tolerance for window matching")
    detect.add_argument("--jobs", type=int, help="worker threads for window checks (default 1)")
    detect.add_argument("--dump-edges", dest="dump_edges", help="write per-pair edge/binary/difference PGMs here")
    detect.add_argument("--dump-quadtree", dest="dump_quadtree", help="write per-pair quadtree leaf maps here")
    detect.set_defaults(func=_cmd_detect)

    evaluate_p = sub.add_parser("eval", help="score a run report against ground truth")
    evaluate_p.add_argument("--detections", required=True, help="run-report JSON from detect")
    evaluate_p.add_argument("--truth", required=True, help="ground-truth JSON array")
    evaluate_p.add_argument("--iou", type=float, default=0.5, help="min spatial IoU for a match (default 0.5)")
    evaluate_p.add_argument("--temporal-overlap", type=int, default=1, help="min shared frames for a match (default 1)")
    evaluate_p.add_argument("--assert-over-detected", type=float, help="exit 1 if correct/detected falls below this")
    evaluate_p.add_argument("--assert-over-truth", type=float, help="exit 1 if correct/ground-truth falls below this")
    evaluate_p.set_defaults(func=_cmd_eval)

    synth = sub.add_parser("synth", help="generate a synthetic annotated clip")
    synth.add_argument("--spec", required=True, help="clip spec JSON")
    synth.add_argument("--out", required=True, help="output directory for frames + gt.json")
    synth.add_argument("--seed", type=int, help="override the spec's seed")
    synth.set_defaults(func=_cmd_synth)

    return parser


def _load_config_file(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if not isinstance(payload, dict):
        raise VidtextError(f"{path}: config must be a JSON object")
    return payload


def _build_pipeline_config(args) -> PipelineConfig:
    values: dict = {}
    if args.config:
        values.update(_load_config_file(args.config))
    for key in list(_PIPELINE_KEYS) + list(_FILTER_KEYS):
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag

    pipeline_kwargs = {}
    filter_kwargs = {}
    for key, value in values.items():
        if key in _PIPELINE_KEYS:
            pipeline_kwargs[key] = _PIPELINE_KEYS[key](value)
        elif key in _FILTER_KEYS:
            filter_kwargs[_FILTER_FIELDS.get(key, key)] = _FILTER_KEYS[key](value)
        else:
            raise VidtextError(f"{key}: unknown configuration key")
    return PipelineConfig(filter=FilterConfig(**filter_kwargs), **pipeline_kwargs)


def _cmd_detect(args) -> int:
    cfg = _build_pipeline_config(args)
    seq = open_sequence(args.frames)
    print(f"detect: {len(seq)} frames {seq.width}x{seq.height} from {args.frames}", file=sys.stderr)
    run = process_sequence(seq, cfg, dump_edges=args.dump_edges, dump_quadtree=args.dump_quadtree)
    save_run(run, str(args.frames), cfg, args.out)
    confirmed = len(run.confirmed)
    print(
        f"detect: {run.pairs_processed} pairs, {run.pairs_triggered} triggered, "
        f"{confirmed} confirmed region(s) in {run.elapsed:.2f}s -> {args.out}",
        file=sys.stderr,
    )
    if args.overlay_dir:
        written = render_overlays(run, seq, args.overlay_dir)
        print(f"detect: wrote {written} overlay image(s) to {args.overlay_dir}", file=sys.stderr)
    return 0


def _cmd_eval(args) -> int:
    with open(args.detections, encoding="utf-8") as fh:
        run_payload = json.load(fh)
    detected = detections_from_run(run_payload)
    truth = load_ground_truth(args.truth)
    report = evaluate(detected, truth, iou_min=args.iou, temporal_overlap_min=args.temporal_overlap)
    print(json.dumps(report.to_json(), indent=2, sort_keys=True))

    failed = []
    if args.assert_over_detected is not None:
        value = report.ratio_over_detected
        if value is None or value < args.assert_over_detected:
            failed.append(f"ratio_over_detected {value} < {args.assert_over_detected}")
    if args.assert_over_truth is not None:
        value = report.ratio_over_truth
        if value is None or value < args.assert_over_truth:
            failed.append(f"ratio_over_truth {value} < {args.assert_over_truth}")
    for message in failed:
        print(f"assert failed: {message}", file=sys.stderr)
    return 1 if failed else 0


def _cmd_synth(args) -> int:
    with open(args.spec, encoding="utf-8") as fh:
        payload = json.load(fh)
    if args.seed is not None:
        payload["seed"] = args.seed
    spec = clip_spec_from_dict(payload)
    seq, truth = generate_synthetic_clip(spec)
    write_clip(args.out, seq, truth)
    print(
        f"synth: wrote {len(seq)} frames {seq.width}x{seq.height} and "
        f"{len(truth)} ground-truth region(s) to {args.out}",
        file=sys.stderr,
    )
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (VidtextError, OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
