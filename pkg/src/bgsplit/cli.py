"""Command-line pipeline: decompose a frame stack, measure frames, detect
dark moving regions, and score detections, emitting every artifact as a file.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import detect, frameio, framestack, metrics, solver
from .errors import InputError, NumericError

_TABLE_HEADER = "GT\tTP\tFP\tFN\tr(%)\tp(%)\tap(%)"


def _mu0_flag(text):
    if text == "auto":
        return "auto"
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f'mu0 must be a number or "auto", got {text!r}')


def _roi_flag(text):
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError(f"roi must be x,y,w,h, got {text!r}")
    try:
        x, y, w, h = (int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"roi components must be integers, got {text!r}")
    return detect.BoundingBox(x=x, y=y, w=w, h=h)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bgsplit",
        description="Split grayscale video into background, foreground, and "
                    "noise; detect dark moving regions; score detections.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="decompose a frame stack and write all artifacts")
    p.add_argument("manifest", help="frame manifest JSON")
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.add_argument("--xi", type=float, help="sparsity weight (default 1/sqrt(max(m,n)))")
    p.add_argument("--gamma", type=float, help="noise weight (default scale-aware)")
    p.add_argument("--rho", type=float, help="penalty growth factor (default 1.5)")
    p.add_argument("--mu0", type=_mu0_flag, help='initial penalty or "auto" (default auto)')
    p.add_argument("--mu-max", type=float, help="penalty cap (default 1e7*mu0)")
    p.add_argument("--tol", type=float, help="relative residual tolerance (default 1e-7)")
    p.add_argument("--max-iter", type=int, help="iteration cap (default 500)")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("entropy", help="per-frame gray-level entropy")
    _add_metric_input_flags(p)
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("contrast", help="per-frame 4-neighborhood contrast in a region")
    _add_metric_input_flags(p)
    p.add_argument("--roi", type=_roi_flag, required=True, help="region as x,y,w,h")
    p.set_defaults(func=cmd_contrast)

    p = sub.add_parser("detect", help="detect dark regions in a decomposition's foreground")
    p.add_argument("rundir", help="output directory of a previous decompose run")
    p.add_argument("--tau", type=float, help="darkness threshold (default per-frame auto)")
    p.add_argument("--min-area", type=int, default=detect.DEFAULT_MIN_AREA,
                   help="minimum component area in pixels")
    p.add_argument("--connectivity", type=int, choices=(4, 8),
                   default=detect.DEFAULT_CONNECTIVITY)
    p.add_argument("-o", "--output", help="detections JSON (default RUNDIR/detections.json)")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("evaluate", help="score detections against annotations")
    p.add_argument("--detections", help="detections JSON")
    p.add_argument("--annotations", help="ground-truth JSON")
    p.add_argument("--iou", type=float, default=0.5, help="IoU match threshold")
    p.add_argument("--tp", type=int, help="pre-matched true-positive count")
    p.add_argument("--fp", type=int, help="pre-matched false-positive count")
    p.add_argument("--fn", type=int, help="pre-matched false-negative count")
    p.add_argument("-o", "--output", help="write the full report JSON here")
    p.set_defaults(func=cmd_evaluate)

    return parser


def _add_metric_input_flags(p):
    p.add_argument("input", help="frame manifest JSON, or a raw matrix dump with --raw")
    p.add_argument("--raw", action="store_true", help="input is a raw matrix dump")
    p.add_argument("--height", type=int, help="frame height (required with --raw)")
    p.add_argument("--width", type=int, help="frame width (required with --raw)")
    p.add_argument("--rescale-magnitude", action="store_true",
                   help="treat frames as signed components and map |v| to full range")
    p.add_argument("--json", dest="json_out", help="also write results as JSON")


def _load_metric_frames(args):
    if args.raw:
        if args.height is None or args.width is None:
            raise InputError("--raw input needs --height and --width")
        matrix = frameio.read_matrix(args.input)
        stack = framestack.unstack(matrix, args.height, args.width)
    else:
        stack, _ = frameio.load_manifest(args.input)
    frames = [stack[i] for i in range(len(stack))]
    if args.rescale_magnitude:
        frames = [metrics.magnitude_rescale(f) for f in frames]
    return frames


def _update_run_config(directory, section, payload):
    path = Path(directory) / "run-config.json"
    doc = json.loads(path.read_text(encoding="utf-8")) if path.exists() else {}
    doc[section] = payload
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _write_component_frames(directory, matrix, height, width, lo, hi):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    stack = framestack.unstack(matrix, height, width)
    for i in range(len(stack)):
        levels = frameio.quantize_levels(stack[i], lo, hi)
        frameio.write_pgm(directory / f"frame_{i:05d}.pgm", levels, maxval=65535)
    scale = {"value_min": lo, "value_max": hi, "maxval": 65535,
             "map": "level = round((value - value_min) / (value_max - value_min) * maxval)"}
    (directory / "scale.json").write_text(
        json.dumps(scale, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def cmd_decompose(args):
    stack, meta = frameio.load_manifest(args.manifest)
    D = framestack.stack(stack)
    overrides = {}
    for name in ("xi", "gamma", "rho", "mu0", "tol"):
        value = getattr(args, name)
        if value is not None:
            overrides[name] = value
    if args.mu_max is not None:
        overrides["mu_max"] = args.mu_max
    if args.max_iter is not None:
        overrides["max_iter"] = args.max_iter
    cfg = solver.SolverConfig(**overrides)
    result = solver.solve(D, cfg)

    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    _write_component_frames(out / "background", np.clip(result.B, 0.0, 1.0),
                            meta["height"], meta["width"], lo=0.0, hi=1.0)
    _write_component_frames(out / "foreground", result.X,
                            meta["height"], meta["width"], lo=-1.0, hi=1.0)
    _write_component_frames(out / "noise", result.E,
                            meta["height"], meta["width"], lo=-1.0, hi=1.0)
    frameio.write_matrix(out / "background.raw", result.B)
    frameio.write_matrix(out / "foreground.raw", result.X)
    frameio.write_matrix(out / "noise.raw", result.E)
    solver.write_trace_csv(result.trace, out / "trace.csv")
    _update_run_config(out, "decompose", {
        "input": dict(meta, manifest=str(args.manifest)),
        "flags": {name: getattr(args, name) for name in
                  ("xi", "gamma", "rho", "mu0", "mu_max", "tol", "max_iter")},
        "resolved": result.config,
        "result": {"converged": result.converged, "iterations": result.iterations,
                   "residual": result.trace[-1].residual},
    })
    print(f"decomposed {meta['frame_count']} frames: converged={result.converged} "
          f"iterations={result.iterations} residual={result.trace[-1].residual:.3e}")
    return 0


def cmd_entropy(args):
    frames = _load_metric_frames(args)
    values = [metrics.information_entropy(f) for f in frames]
    print("frame,entropy_bits")
    for i, v in enumerate(values):
        print(f"{i},{v!r}")
    mean = float(np.mean(values))
    print(f"mean,{mean!r}")
    if args.json_out:
        doc = {"entropy_bits": values, "mean": mean,
               "config": {"rescale_magnitude": bool(args.rescale_magnitude)}}
        Path(args.json_out).write_text(
            json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return 0


def cmd_contrast(args):
    frames = _load_metric_frames(args)
    values = [metrics.shadow_contrast(f, args.roi) for f in frames]
    print("frame,contrast")
    for i, v in enumerate(values):
        print(f"{i},{v!r}")
    mean = float(np.mean(values))
    print(f"mean,{mean!r}")
    if args.json_out:
        doc = {"contrast": values, "mean": mean,
               "config": {"roi": [args.roi.x, args.roi.y, args.roi.w, args.roi.h],
                          "rescale_magnitude": bool(args.rescale_magnitude)}}
        Path(args.json_out).write_text(
            json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return 0


def cmd_detect(args):
    rundir = Path(args.rundir)
    config_path = rundir / "run-config.json"
    run_doc = json.loads(config_path.read_text(encoding="utf-8"))
    try:
        dims = run_doc["decompose"]["input"]
        height, width = int(dims["height"]), int(dims["width"])
    except (KeyError, TypeError) as exc:
        raise InputError(f"{config_path}: missing decompose dimensions") from exc
    X = frameio.read_matrix(rundir / "foreground.raw")
    detections = detect.detect_foreground(
        X, height, width,
        tau=args.tau, min_area=args.min_area, connectivity=args.connectivity)
    out = Path(args.output) if args.output else rundir / "detections.json"
    detect.save_detections(detections, out)
    _update_run_config(rundir, "detect", {
        "tau": args.tau, "min_area": args.min_area,
        "connectivity": args.connectivity, "output": out.name,
    })
    print(f"{len(detections)} detections -> {out}")
    return 0


def _print_report_line(gt, tp, fp, fn, r_pct, p_pct, ap_pct=None):
    ap_text = f"{ap_pct:.2f}" if ap_pct is not None else "-"
    print(_TABLE_HEADER)
    print(f"{gt}\t{tp}\t{fp}\t{fn}\t{r_pct:.2f}\t{p_pct:.2f}\t{ap_text}")


def cmd_evaluate(args):
    counts = (args.tp, args.fp, args.fn)
    if any(c is not None for c in counts):
        if any(c is None for c in counts):
            raise InputError("summary mode needs all of --tp, --fp, --fn")
        tp, fp, fn = counts
        r, p = metrics.precision_recall(tp, fp, fn)
        _print_report_line(tp + fn, tp, fp, fn, r, p)
        return 0
    if not args.detections or not args.annotations:
        raise InputError("evaluate needs --detections and --annotations "
                         "(or --tp/--fp/--fn for a pre-matched summary)")
    detections = detect.load_detections(args.detections)
    ground_truths = metrics.load_ground_truth(args.annotations)
    report = metrics.evaluate_detections(detections, ground_truths, iou_min=args.iou)
    _print_report_line(report.gt_count, report.tp, report.fp, report.fn,
                       100.0 * report.recall, 100.0 * report.precision,
                       100.0 * report.ap)
    if args.output:
        metrics.save_report(report, args.output, config={"iou_min": args.iou})
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"bgsplit: input error: {exc}", file=sys.stderr)
    except NumericError as exc:
        print(f"bgsplit: numeric error: {exc}", file=sys.stderr)
    except json.JSONDecodeError as exc:
        print(f"bgsplit: input error: invalid JSON: {exc}", file=sys.stderr)
    except ValueError as exc:
        print(f"bgsplit: input error: {exc}", file=sys.stderr)
    except OSError as exc:
        print(f"bgsplit: i/o error: {exc}", file=sys.stderr)
    return 1


def entrypoint():
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
