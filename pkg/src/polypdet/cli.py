"""Command-line surface: classify frames, evaluate datasets, calibrate the
decision threshold, run robustness studies, generate phantoms, render overlays.

Exit codes: 0 success, 1 input error, 2 configuration error, 3 internal error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import evaluate as ev
from . import io, phantom, reports
from .classifier import process_frame
from .errors import (
    CalibrationError,
    InputError,
    ManifestError,
    ParameterError,
    PolypdetError,
)
from .params import PipelineParams
from .render import render_overlay

EXIT_INPUT = 1
EXIT_CONFIG = 2
EXIT_INTERNAL = 3


def _parse_value(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            continue
    return text


def _load_params(args) -> PipelineParams:
    """Defaults < params file < --set flags."""
    values = {}
    if getattr(args, "params", None):
        for lineno, line in enumerate(Path(args.params).read_text().splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParameterError(f"{args.params}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            values[key] = _parse_value(value)
    for item in getattr(args, "set", None) or []:
        if "=" not in item:
            raise ParameterError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        values[key.strip()] = _parse_value(value.strip())
    try:
        return PipelineParams(**values)
    except TypeError as e:
        raise ParameterError(str(e)) from None


def _add_params_args(parser):
    parser.add_argument("--params", help="key=value parameter file")
    parser.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a single parameter (repeatable)")


def cmd_classify(args) -> int:
    params = _load_params(args)
    for image in args.images:
        decision = process_frame(image, params, frame_id=Path(image).name)
        print(decision.to_json())
    return 0


def _scores(args, params) -> list[ev.FrameScore]:
    records = ev.load_manifest(args.manifest)
    result = ev.score_dataset(
        records, params, cache_path=getattr(args, "cache", None),
        threads=getattr(args, "threads", 1),
    )
    for frame_id, err in sorted(result.failed.items()):
        print(f"failed: {frame_id}: {err}", file=sys.stderr)
    return result.scores


def cmd_evaluate(args) -> int:
    params = _load_params(args)
    scores = _scores(args, params)
    training = [s for s in scores if s.patient == args.train_patient]
    if not training:
        raise CalibrationError(f"no frames for training patient {args.train_patient!r}")
    r_p = ev.select_threshold(training, args.target_spec)
    frame_curve = ev.roc_per_frame(scores)
    polyp_curve = ev.roc_per_polyp(scores) if any(s.sequence for s in scores) else None
    per_patient = ev.per_patient_false_positives(scores, r_p)
    extra = {
        "training_patient": args.train_patient,
        "target_specificity": args.target_spec,
        "training_specificity": ev.specificity(training, r_p),
        "specificity": ev.specificity(scores, r_p),
        "sensitivity_per_frame": ev.sensitivity_per_frame(scores, r_p),
    }
    if polyp_curve is not None:
        extra["sensitivity_per_polyp"] = ev.sensitivity_per_polyp(scores, r_p)
    path = reports.write_report(args.out, frame_curve, polyp_curve, r_p,
                                per_patient, extra=extra)
    print(f"report written to {path}")
    return 0


def cmd_roc(args) -> int:
    params = _load_params(args)
    scores = _scores(args, params)
    frame_curve = ev.roc_per_frame(scores)
    polyp_curve = ev.roc_per_polyp(scores) if any(s.sequence for s in scores) else None
    path = reports.write_report(args.out, frame_curve, polyp_curve, None, None)
    print(f"report written to {path}")
    return 0


def cmd_calibrate(args) -> int:
    params = _load_params(args)
    scores = _scores(args, params)
    training = [s for s in scores if s.patient == args.train_patient]
    if not training:
        raise CalibrationError(f"no frames for training patient {args.train_patient!r}")
    r_p = ev.select_threshold(training, args.target_spec)
    print(json.dumps({
        "r_p": r_p,
        "training_specificity": ev.specificity(training, r_p),
        "target_specificity": args.target_spec,
    }))
    return 0


def cmd_sensitivity(args) -> int:
    params = _load_params(args)
    records = ev.load_manifest(args.manifest)
    report = ev.sensitivity_study(
        records, params, r_p=args.r_p, threads=args.threads,
        cache_dir=args.cache_dir, n_normal=args.n_normal,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    payload = {
        "r_p": report.r_p,
        "base_spec": report.base_spec,
        "base_sens_frame": report.base_sens_frame,
        "base_sens_polyp": report.base_sens_polyp,
        "rows": [row.__dict__ for row in report.rows],
    }
    path = out / "sensitivity.json"
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    print(f"sensitivity study written to {path}")
    return 0


def cmd_synth(args) -> int:
    manifest = phantom.generate_dataset(
        args.out,
        n_polyp_sequences=args.sequences,
        frames_per_sequence=args.frames_per_sequence,
        n_normal=args.normals,
        seed=args.seed,
    )
    print(f"manifest written to {manifest}")
    return 0


def cmd_render(args) -> int:
    params = _load_params(args)
    decision, artifacts = process_frame(
        args.image, params, frame_id=Path(args.image).name, keep_artifacts=True
    )
    overlay = render_overlay(io.load_image(args.image), decision, artifacts)
    overlay.save(args.out)
    print(f"overlay written to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polypdet")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="classify frames, printing one JSON line each")
    p.add_argument("images", nargs="+")
    _add_params_args(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("evaluate", help="score a dataset, calibrate and write reports")
    p.add_argument("--manifest", required=True)
    p.add_argument("--train-patient", required=True)
    p.add_argument("--target-spec", type=float, default=90.0)
    p.add_argument("--out", required=True)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--cache")
    _add_params_args(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("roc", help="score a dataset and write ROC reports")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--cache")
    _add_params_args(p)
    p.set_defaults(func=cmd_roc)

    p = sub.add_parser("calibrate", help="pick the smallest threshold meeting a "
                                         "training specificity target")
    p.add_argument("--manifest", required=True)
    p.add_argument("--train-patient", required=True)
    p.add_argument("--target-spec", type=float, default=90.0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--cache")
    _add_params_args(p)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("sensitivity", help="+10%% parameter robustness study")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--r-p", type=int, default=None)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--cache-dir")
    p.add_argument("--n-normal", type=int, default=4000)
    _add_params_args(p)
    p.set_defaults(func=cmd_sensitivity)

    p = sub.add_parser("synth", help="generate a synthetic dataset with manifest")
    p.add_argument("--out", required=True)
    p.add_argument("--sequences", type=int, default=16)
    p.add_argument("--frames-per-sequence", type=int, default=10)
    p.add_argument("--normals", type=int, default=400)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("render", help="draw the decision overlay onto a frame")
    p.add_argument("--image", required=True)
    p.add_argument("--out", required=True)
    _add_params_args(p)
    p.set_defaults(func=cmd_render)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ManifestError) as e:
        print(f"error: input: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (ParameterError, CalibrationError) as e:
        print(f"error: config: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except PolypdetError as e:
        print(f"error: internal: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
