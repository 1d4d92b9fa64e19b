"""Quantitative evaluation: image-quality measures on frames and
detection scoring against ground-truth boxes.

Image measures quantize pixel values to 8-bit gray levels first, so their
magnitudes are comparable across inputs: ``level = floor(clip(v, 0, 1)*255
+ 0.5)``. Detection scoring follows the usual single-class protocol: greedy
IoU matching by descending score, then precision/recall and the area under
the all-points-interpolated precision-recall curve.
"""

import json
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .detect import BoundingBox, Detection
from .errors import InputError


def quantize_8bit(frame):
    """Clamp to [0, 1] and round to integer gray levels 0..255."""
    v = np.asarray(frame, dtype=np.float64)
    return np.floor(np.clip(v, 0.0, 1.0) * 255.0 + 0.5).astype(np.int64)


def magnitude_rescale(frame):
    """Map a signed component frame to [0, 1] by |v| / max|v|.

    This is the usual display normalization for a foreground component; an
    all-zero frame maps to itself.
    """
    mags = np.abs(np.asarray(frame, dtype=np.float64))
    peak = mags.max(initial=0.0)
    return mags / peak if peak > 0 else mags


def information_entropy(frame):
    """Shannon entropy, in bits, of the 8-bit gray-level histogram."""
    levels = quantize_8bit(frame)
    counts = np.bincount(levels.ravel(), minlength=256)
    p = counts[counts > 0] / levels.size
    return float(-(p * np.log2(p)).sum())


def shadow_contrast(frame, roi):
    """Mean squared gray-level difference over 4-connected pixel pairs
    inside ``roi``.

    Both pair endpoints must lie inside the box, so the box needs at least
    two pixels along one axis.
    """
    arr = np.asarray(frame, dtype=np.float64)
    if arr.ndim != 2:
        raise InputError(f"expected a 2-d frame, got shape {arr.shape}")
    h, w = arr.shape
    if roi.x < 0 or roi.y < 0 or roi.x + roi.w > w or roi.y + roi.h > h:
        raise InputError(f"roi {roi} does not fit in a {h}x{w} frame")
    if roi.w * roi.h < 2:
        raise InputError("roi must contain at least two pixels")
    window = quantize_8bit(arr[roi.y:roi.y + roi.h, roi.x:roi.x + roi.w])
    dh = window[:, 1:] - window[:, :-1]
    dv = window[1:, :] - window[:-1, :]
    pairs = dh.size + dv.size
    return float((np.sum(dh * dh) + np.sum(dv * dv)) / pairs)


def iou(a, b):
    """Intersection over union of two boxes, in [0, 1]."""
    ix = max(a.x, b.x)
    iy = max(a.y, b.y)
    iw = min(a.x + a.w, b.x + b.w) - ix
    ih = min(a.y + a.h, b.y + b.h) - iy
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    union = a.w * a.h + b.w * b.h - inter
    return inter / union


@dataclass(frozen=True)
class GroundTruth:
    frame_index: int
    box: BoundingBox


@dataclass(frozen=True)
class MatchResult:
    """Per-detection true/false-positive labels in canonical score order."""

    detections: list[Detection]  # sorted by (-score, frame, box anchor)
    is_tp: list[bool]
    gt_count: int

    @property
    def tp(self):
        return sum(self.is_tp)

    @property
    def fp(self):
        return len(self.is_tp) - self.tp

    @property
    def fn(self):
        return self.gt_count - self.tp


def _canonical_order(detections):
    return sorted(
        detections,
        key=lambda d: (-d.score, d.frame_index, d.box.y, d.box.x, d.box.w, d.box.h),
    )


def match_detections(detections, ground_truths, iou_min=0.5):
    """Greedy matching: walk detections by descending score; each one claims
    the unmatched same-frame ground truth of highest IoU when that IoU
    reaches ``iou_min``, otherwise it is a false positive. Every ground
    truth is claimed at most once."""
    if not 0.0 < iou_min <= 1.0:
        raise InputError(f"iou_min must lie in (0, 1], got {iou_min}")
    by_frame = defaultdict(list)
    for gi, gt in enumerate(ground_truths):
        by_frame[gt.frame_index].append((gi, gt))
    claimed = [False] * len(ground_truths)
    ordered = _canonical_order(detections)
    labels = []
    for det in ordered:
        best_iou = 0.0
        best_gi = -1
        for gi, gt in by_frame.get(det.frame_index, ()):
            if claimed[gi]:
                continue
            overlap = iou(det.box, gt.box)
            if overlap > best_iou:
                best_iou, best_gi = overlap, gi
        if best_gi >= 0 and best_iou >= iou_min:
            claimed[best_gi] = True
            labels.append(True)
        else:
            labels.append(False)
    return MatchResult(detections=ordered, is_tp=labels, gt_count=len(ground_truths))


def pr_curve(match):
    """Cumulative (recall, precision) points down the score-sorted list.

    Recall is nondecreasing along the list; with zero ground truths recall
    is taken as 0.
    """
    points = []
    tp = fp = 0
    for flag in match.is_tp:
        if flag:
            tp += 1
        else:
            fp += 1
        recall = tp / match.gt_count if match.gt_count else 0.0
        points.append((recall, tp / (tp + fp)))
    return points


def precision_recall(tp, fp, fn):
    """Recall and precision as percentages; 0/0 counts as 0."""
    if min(tp, fp, fn) < 0:
        raise InputError("counts must be nonnegative")
    r = 100.0 * tp / (tp + fn) if tp + fn else 0.0
    p = 100.0 * tp / (tp + fp) if tp + fp else 0.0
    return r, p


def average_precision(curve):
    """Area under the precision envelope of a PR curve (all-points
    interpolation): precision at recall r is replaced by the maximum
    precision at any recall >= r, then the staircase is integrated over
    the distinct recall steps."""
    if not curve:
        return 0.0
    mrec = np.concatenate(([0.0], [r for r, _ in curve], [1.0]))
    mpre = np.concatenate(([0.0], [p for _, p in curve], [0.0]))
    for i in range(mpre.size - 1, 0, -1):
        mpre[i - 1] = max(mpre[i - 1], mpre[i])
    steps = np.where(mrec[1:] != mrec[:-1])[0]
    return float(np.sum((mrec[steps + 1] - mrec[steps]) * mpre[steps + 1]))


@dataclass(frozen=True)
class EvalReport:
    """Detection scoring summary; recall, precision, and ap are fractions
    in [0, 1]."""

    gt_count: int
    tp: int
    fp: int
    fn: int
    recall: float
    precision: float
    ap: float
    curve: list

    def to_dict(self):
        return {
            "gt_count": self.gt_count,
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "recall": self.recall,
            "precision": self.precision,
            "ap": self.ap,
            "curve": [[r, p] for r, p in self.curve],
        }


def evaluate_detections(detections, ground_truths, iou_min=0.5):
    """Match, then summarize counts, precision/recall, and AP."""
    match = match_detections(detections, ground_truths, iou_min)
    curve = pr_curve(match)
    tp, fp, fn = match.tp, match.fp, match.fn
    return EvalReport(
        gt_count=match.gt_count,
        tp=tp, fp=fp, fn=fn,
        recall=tp / (tp + fn) if tp + fn else 0.0,
        precision=tp / (tp + fp) if tp + fp else 0.0,
        ap=average_precision(curve),
        curve=curve,
    )


def save_report(report, path, config=None):
    doc = report.to_dict()
    if config:
        doc["config"] = config
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def load_ground_truth(path):
    """Read annotations as a JSON list of {frame, x, y, w, h}."""
    rows = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(rows, list):
        raise InputError(f"{path}: expected a JSON list of boxes")
    out = []
    for row in rows:
        try:
            out.append(GroundTruth(
                frame_index=int(row["frame"]),
                box=BoundingBox(x=int(row["x"]), y=int(row["y"]),
                                w=int(row["w"]), h=int(row["h"])),
            ))
        except (KeyError, TypeError) as exc:
            raise InputError(f"{path}: malformed annotation entry {row!r}") from exc
    return out
