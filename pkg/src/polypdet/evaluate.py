"""Dataset scoring, ROC construction, threshold calibration, per-patient
false-positive accounting and the +10% parameter-robustness study.

Frame scores are the integer decision radii, so every ROC sweep re-thresholds
cached scores without touching the pipeline.
"""
from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .classifier import LABEL_POLYP, FrameDecision, process_frame
from .errors import CalibrationError, InputError, ManifestError, MetricError
from .params import ROBUSTNESS_PARAMS, PipelineParams

VALID_LABELS = ("polyp", "normal")


@dataclass(frozen=True)
class FrameRecord:
    frame_id: str
    path: str
    label: str
    patient: str
    sequence: str  # empty for normal frames


@dataclass(frozen=True)
class FrameScore:
    frame_id: str
    score: int
    label: str
    patient: str
    sequence: str


@dataclass
class RocCurve:
    basis: str  # "per-frame" | "per-polyp"
    points: list[tuple[int, float, float]]  # (r_p, fpr, tpr)
    n_positive: int
    n_negative: int

    def at(self, r_p: int) -> tuple[float, float]:
        for rp, fpr, tpr in self.points:
            if rp == r_p:
                return fpr, tpr
        raise MetricError(f"threshold {r_p} not on the curve")

    def auc(self) -> float:
        """Trapezoidal area over the realized points completed with the (0, 0)
        and (1, 1) endpoints (the all-negative and all-positive classifiers)."""
        pts = sorted((fpr, tpr) for _, fpr, tpr in self.points)
        pts = [(0.0, 0.0)] + pts + [(1.0, 1.0)]
        area = 0.0
        for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
            area += (x1 - x0) * (y0 + y1) / 2.0
        return area


def load_manifest(path) -> list[FrameRecord]:
    """Read and validate the frame_id,path,label,patient,sequence CSV."""
    path = Path(path)
    records = []
    seen = set()
    try:
        fh = open(path, newline="")
    except OSError as e:
        raise ManifestError(f"cannot read manifest {path}: {e}") from None
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["frame_id", "path", "label", "patient", "sequence"]:
            raise ManifestError(f"{path}: unexpected header {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 5:
                raise ManifestError(f"{path}:{lineno}: expected 5 fields, got {len(row)}")
            frame_id, img_path, label, patient, sequence = (c.strip() for c in row)
            if label not in VALID_LABELS:
                raise ManifestError(f"{path}:{lineno}: bad label {label!r}")
            if frame_id in seen:
                raise ManifestError(f"{path}:{lineno}: duplicate frame_id {frame_id!r}")
            if label == "polyp" and not sequence:
                raise ManifestError(f"{path}:{lineno}: polyp frame without a sequence id")
            seen.add(frame_id)
            records.append(FrameRecord(frame_id, img_path, label, patient, sequence))
    return records


def _score_one(args) -> tuple[str, FrameDecision | None, str | None]:
    record, params = args
    try:
        decision = process_frame(record.path, params, frame_id=record.frame_id)
        return record.frame_id, decision, None
    except InputError as e:
        return record.frame_id, None, str(e)


@dataclass
class ScoreResult:
    scores: list[FrameScore]
    failed: dict[str, str] = field(default_factory=dict)
    cache_hit: bool = False


def score_dataset(
    records: list[FrameRecord],
    params: PipelineParams,
    cache_path=None,
    threads: int = 1,
) -> ScoreResult:
    """Score every frame; reuse the JSON-lines cache when the params match.

    Unreadable images are reported in ``failed`` and excluded from metrics.
    The cache file starts with a header line carrying the params hash.
    """
    by_id = {r.frame_id: r for r in records}
    if cache_path is not None:
        cached = _read_cache(Path(cache_path), params, set(by_id))
        if cached is not None:
            scores = [
                FrameScore(d.frame_id, d.r_max, by_id[d.frame_id].label,
                           by_id[d.frame_id].patient, by_id[d.frame_id].sequence)
                for d in cached
            ]
            return ScoreResult(scores=scores, cache_hit=True)

    jobs = [(r, params) for r in records]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_score_one, jobs, chunksize=4))
    else:
        results = [_score_one(j) for j in jobs]

    scores, decisions, failed = [], [], {}
    for frame_id, decision, err in results:
        if decision is None:
            failed[frame_id] = err
            continue
        rec = by_id[frame_id]
        decisions.append(decision)
        scores.append(
            FrameScore(frame_id, decision.r_max, rec.label, rec.patient, rec.sequence)
        )

    if cache_path is not None:
        _write_cache(Path(cache_path), params, decisions)
    return ScoreResult(scores=scores, failed=failed)


def _read_cache(path: Path, params: PipelineParams, frame_ids: set[str]):
    if not path.exists():
        return None
    try:
        with open(path) as fh:
            header = json.loads(fh.readline())
            if header.get("params_hash") != params.content_hash():
                return None
            decisions = [FrameDecision.from_json(line) for line in fh if line.strip()]
    except (json.JSONDecodeError, TypeError, KeyError):
        return None
    if {d.frame_id for d in decisions} != frame_ids:
        return None
    return decisions


def _write_cache(path: Path, params: PipelineParams, decisions) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(json.dumps({"params_hash": params.content_hash()}) + "\n")
        for d in decisions:
            fh.write(d.to_json() + "\n")


def _rates_at(scores: list[FrameScore], r_p: int) -> tuple[float, float]:
    n_pos = sum(1 for s in scores if s.label == LABEL_POLYP)
    n_neg = len(scores) - n_pos
    tp = sum(1 for s in scores if s.label == LABEL_POLYP and s.score >= r_p)
    fp = sum(1 for s in scores if s.label != LABEL_POLYP and s.score >= r_p)
    tpr = tp / n_pos if n_pos else 0.0
    fpr = fp / n_neg if n_neg else 0.0
    return fpr, tpr


def _threshold_range(scores) -> range:
    top = max((s.score for s in scores), default=0)
    return range(1, top + 2)


def roc_per_frame(scores: list[FrameScore]) -> RocCurve:
    """ROC over integer thresholds from 1 to max score + 1.

    Zero-score frames are never positives at any positive threshold, so the
    curve need not reach (1, 1).
    """
    n_pos = sum(1 for s in scores if s.label == LABEL_POLYP)
    n_neg = len(scores) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise MetricError("per-frame ROC needs both classes present")
    points = [(rp, *_rates_at(scores, rp)) for rp in _threshold_range(scores)]
    return RocCurve("per-frame", points, n_pos, n_neg)


def roc_per_polyp(scores: list[FrameScore]) -> RocCurve:
    """Per-sequence TPR (a sequence counts as detected if any frame passes)
    against the per-frame FPR."""
    sequences = sorted({s.sequence for s in scores if s.sequence})
    if not sequences:
        raise MetricError("per-polyp ROC needs polyp sequences")
    n_neg = sum(1 for s in scores if s.label != LABEL_POLYP)
    if n_neg == 0:
        raise MetricError("per-polyp ROC needs normal frames for the FPR")
    points = []
    for rp in _threshold_range(scores):
        fpr, _ = _rates_at(scores, rp)
        flags = sum(
            1
            for seq in sequences
            if any(s.score >= rp for s in scores if s.sequence == seq)
        )
        points.append((rp, fpr, flags / len(sequences)))
    return RocCurve("per-polyp", points, len(sequences), n_neg)


def specificity(scores: list[FrameScore], r_p: int) -> float:
    """(1 - FPR) * 100 over the normal frames."""
    fpr, _ = _rates_at(scores, r_p)
    return (1.0 - fpr) * 100.0


def sensitivity_per_frame(scores: list[FrameScore], r_p: int) -> float:
    _, tpr = _rates_at(scores, r_p)
    return tpr * 100.0


def sensitivity_per_polyp(scores: list[FrameScore], r_p: int) -> float:
    sequences = sorted({s.sequence for s in scores if s.sequence})
    if not sequences:
        raise MetricError("no polyp sequences")
    flags = sum(
        1
        for seq in sequences
        if any(s.score >= r_p for s in scores if s.sequence == seq)
    )
    return flags / len(sequences) * 100.0


def select_threshold(training_scores: list[FrameScore], target_spec: float) -> int:
    """Smallest integer threshold reaching the target specificity on the
    training subset."""
    if not any(s.label != LABEL_POLYP for s in training_scores):
        raise CalibrationError("training subset has no normal frames")
    for rp in _threshold_range(training_scores):
        if specificity(training_scores, rp) >= target_spec:
            return rp
    raise CalibrationError(f"specificity {target_spec}% unattainable")


def per_patient_false_positives(scores: list[FrameScore], r_p: int) -> list[dict]:
    """Rows (patient, n_norm, fpn, fpr_percent) plus a Total row."""
    patients = sorted({s.patient for s in scores})
    rows = []
    tot_n = tot_fp = 0
    for patient in patients:
        normals = [s for s in scores if s.patient == patient and s.label != LABEL_POLYP]
        fpn = sum(1 for s in normals if s.score >= r_p)
        n = len(normals)
        tot_n += n
        tot_fp += fpn
        rows.append(
            {"patient": patient, "n_norm": n, "fpn": fpn,
             "fpr_percent": 100.0 * fpn / n if n else 0.0}
        )
    rows.append(
        {"patient": "Total", "n_norm": tot_n, "fpn": tot_fp,
         "fpr_percent": 100.0 * tot_fp / tot_n if tot_n else 0.0}
    )
    return rows


def delta_metric(base: float, perturbed: float) -> float:
    """Absolute relative change |pert - base| / base in percent."""
    if base <= 0:
        raise MetricError(f"base metric must be > 0, got {base}")
    return abs(perturbed - base) / base * 100.0


@dataclass
class SensitivityRow:
    parameter: str
    base_value: float
    perturbed_value: float
    spec: float
    delta_spec: float
    sens_frame: float
    delta_sens_frame: float
    sens_polyp: float
    delta_sens_polyp: float


@dataclass
class SensitivityReport:
    r_p: int
    base_spec: float
    base_sens_frame: float
    base_sens_polyp: float
    rows: list[SensitivityRow]


def reduce_for_robustness(records: list[FrameRecord], n_normal: int = 4000):
    """All polyp frames plus the first n_normal normal frames in manifest order."""
    normals = [r for r in records if r.label == "normal"][:n_normal]
    polyps = [r for r in records if r.label == "polyp"]
    return polyps + normals


def sensitivity_study(
    records: list[FrameRecord],
    base_params: PipelineParams,
    param_names=ROBUSTNESS_PARAMS,
    r_p: int | None = None,
    threads: int = 1,
    cache_dir=None,
    n_normal: int = 4000,
) -> SensitivityReport:
    """Rescore with each parameter perturbed +10% (ceil for integer ones) and
    report relative changes of SPEC and per-frame / per-polyp SENS at fixed
    threshold."""
    subset = reduce_for_robustness(records, n_normal)
    if r_p is None:
        r_p = base_params.r_p
    cache_dir = Path(cache_dir) if cache_dir is not None else None

    def scored(params, tag):
        cache = cache_dir / f"scores_{tag}.jsonl" if cache_dir else None
        return score_dataset(subset, params, cache_path=cache, threads=threads).scores

    base_scores = scored(base_params, "base")
    base_spec = specificity(base_scores, r_p)
    base_sf = sensitivity_per_frame(base_scores, r_p)
    base_sp = sensitivity_per_polyp(base_scores, r_p)

    rows = []
    for name in param_names:
        pert = base_params.perturbed(name)
        scores = scored(pert, name)
        spec = specificity(scores, r_p)
        sf = sensitivity_per_frame(scores, r_p)
        sp = sensitivity_per_polyp(scores, r_p)
        rows.append(
            SensitivityRow(
                parameter=name,
                base_value=getattr(base_params, name),
                perturbed_value=getattr(pert, name),
                spec=spec,
                delta_spec=delta_metric(base_spec, spec) if base_spec > 0 else 0.0,
                sens_frame=sf,
                delta_sens_frame=delta_metric(base_sf, sf) if base_sf > 0 else 0.0,
                sens_polyp=sp,
                delta_sens_polyp=delta_metric(base_sp, sp) if base_sp > 0 else 0.0,
            )
        )
    return SensitivityReport(
        r_p=r_p,
        base_spec=base_spec,
        base_sens_frame=base_sf,
        base_sens_polyp=base_sp,
        rows=rows,
    )
