"""Evaluation report files: report.json, per-basis ROC CSVs and an SVG plot."""
from __future__ import annotations

import csv
import json
from dataclasses import asdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "polypdet"
import matplotlib.pyplot as plt

from .evaluate import RocCurve, SensitivityReport


def write_roc_csv(path, curve: RocCurve) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["r_p", "fpr", "tpr"])
        for rp, fpr, tpr in curve.points:
            writer.writerow([rp, f"{fpr:.6f}", f"{tpr:.6f}"])


def write_roc_svg(path, frame_curve: RocCurve, polyp_curve: RocCurve | None) -> None:
    """Both ROC curves plus the no-discrimination diagonal."""
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.plot([0, 1], [0, 1], "k-", linewidth=0.8, label="no discrimination")
    xs = [p[1] for p in frame_curve.points]
    ys = [p[2] for p in frame_curve.points]
    ax.plot(xs, ys, "b.-", markersize=3, label="per frame")
    if polyp_curve is not None:
        xs = [p[1] for p in polyp_curve.points]
        ys = [p[2] for p in polyp_curve.points]
        ax.plot(xs, ys, "r.-", markersize=3, label="per polyp")
    ax.set_xlabel("FPR")
    ax.set_ylabel("TPR")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1.02)
    ax.legend(loc="lower right")
    fig.savefig(path, format="svg", bbox_inches="tight", metadata={"Date": None})
    plt.close(fig)


def write_report(
    out_dir,
    frame_curve: RocCurve,
    polyp_curve: RocCurve | None,
    chosen_r_p: int | None,
    per_patient: list[dict] | None,
    sensitivity: SensitivityReport | None = None,
    extra: dict | None = None,
) -> Path:
    """Write report.json, roc_frame.csv, roc_polyp.csv and roc.svg."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    report = {
        "roc_per_frame": {
            "points": [list(p) for p in frame_curve.points],
            "auc": frame_curve.auc(),
            "n_positive": frame_curve.n_positive,
            "n_negative": frame_curve.n_negative,
        },
        "chosen_r_p": chosen_r_p,
        "per_patient_false_positives": per_patient,
    }
    if polyp_curve is not None:
        report["roc_per_polyp"] = {
            "points": [list(p) for p in polyp_curve.points],
            "auc": polyp_curve.auc(),
            "n_sequences": polyp_curve.n_positive,
        }
    if sensitivity is not None:
        report["sensitivity_study"] = {
            "r_p": sensitivity.r_p,
            "base_spec": sensitivity.base_spec,
            "base_sens_frame": sensitivity.base_sens_frame,
            "base_sens_polyp": sensitivity.base_sens_polyp,
            "rows": [asdict(r) for r in sensitivity.rows],
        }
    if extra:
        report.update(extra)

    report_path = out_dir / "report.json"
    with open(report_path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    write_roc_csv(out_dir / "roc_frame.csv", frame_curve)
    if polyp_curve is not None:
        write_roc_csv(out_dir / "roc_polyp.csv", polyp_curve)
    write_roc_svg(out_dir / "roc.svg", frame_curve, polyp_curve)
    return report_path
