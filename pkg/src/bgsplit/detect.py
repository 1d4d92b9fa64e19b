"""Threshold-and-label detector for dark moving regions in the foreground.

Moving shadows appear as negative deviations in the foreground component
(the region is darker than the background it replaced), so a pixel is a
candidate when its foreground value is at or below ``-tau``. Candidates are
grouped into connected components, small ones are dropped, and each survivor
becomes a scored detection.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from .errors import InputError
from .framestack import unstack

DEFAULT_MIN_AREA = 9
DEFAULT_CONNECTIVITY = 8
TAU_FLOOR = 0.05
TAU_MEDIAN_FACTOR = 3.0

_FOUR = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)
_EIGHT = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box: top-left corner (x, y), extents (w, h) in pixels."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.w < 1 or self.h < 1:
            raise InputError(f"box extents must be at least 1, got {self.w}x{self.h}")


@dataclass(frozen=True)
class Detection:
    frame_index: int
    box: BoundingBox
    score: float

    def __post_init__(self):
        if not 0.0 <= self.score <= 1.0:
            raise InputError(f"score must lie in [0, 1], got {self.score}")


def threshold_foreground(x_frame, tau):
    """Binary mask of pixels at least ``tau`` darker than the background."""
    if tau <= 0:
        raise InputError(f"tau must be positive, got {tau}")
    return np.asarray(x_frame, dtype=np.float64) <= -tau


def _label_regions(mask, connectivity):
    """Label a mask and list its regions as (anchor, label, box, area),
    ordered by the raster position of each region's first pixel."""
    if connectivity not in (4, 8):
        raise InputError(f"connectivity must be 4 or 8, got {connectivity}")
    mask = np.asarray(mask, dtype=bool)
    labels, count = ndimage.label(mask, structure=_EIGHT if connectivity == 8 else _FOUR)
    if count == 0:
        return labels, []
    flat = labels.ravel()
    ids, first = np.unique(flat, return_index=True)
    areas = np.bincount(flat)
    slices = ndimage.find_objects(labels)
    regions = []
    for lab, anchor in zip(ids, first):
        if lab == 0:
            continue
        sl_y, sl_x = slices[lab - 1]
        box = BoundingBox(
            x=int(sl_x.start), y=int(sl_y.start),
            w=int(sl_x.stop - sl_x.start), h=int(sl_y.stop - sl_y.start),
        )
        regions.append((int(anchor), int(lab), box, int(areas[lab])))
    regions.sort(key=lambda r: r[0])
    return labels, regions


def connected_components(mask, min_area=1, connectivity=DEFAULT_CONNECTIVITY):
    """Tight bounding boxes of mask components with at least ``min_area``
    pixels, as (box, area) pairs in raster order of each region's anchor."""
    _, regions = _label_regions(mask, connectivity)
    return [(box, area) for _, _, box, area in regions if area >= min_area]


def _auto_tau(mags):
    nonzero = mags[mags > 0]
    if nonzero.size == 0:
        return TAU_FLOOR
    return max(TAU_MEDIAN_FACTOR * float(np.median(nonzero)), TAU_FLOOR)


def detect_frame(x_frame, tau=None, min_area=DEFAULT_MIN_AREA,
                 connectivity=DEFAULT_CONNECTIVITY):
    """Detect dark regions in one signed foreground frame.

    ``tau=None`` picks a per-frame threshold of three times the median
    nonzero foreground magnitude, floored at 0.05. Returns (box, score)
    pairs; the score is ``min(1, mean(|x| over the component) / tau)``.
    """
    frame = np.asarray(x_frame, dtype=np.float64)
    mags = np.abs(frame)
    t = float(tau) if tau is not None else _auto_tau(mags)
    mask = threshold_foreground(frame, t)
    labels, regions = _label_regions(mask, connectivity)
    kept = [(box, lab) for _, lab, box, area in regions if area >= min_area]
    if not kept:
        return []
    means = ndimage.mean(mags, labels=labels, index=[lab for _, lab in kept])
    return [(box, min(1.0, float(mean) / t)) for (box, _), mean in zip(kept, means)]


def detect_foreground(X, height, width, tau=None, min_area=DEFAULT_MIN_AREA,
                      connectivity=DEFAULT_CONNECTIVITY):
    """Run the per-frame detector over a column-stacked foreground matrix."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != height * width:
        raise InputError(
            f"foreground matrix shape {X.shape} does not match {height}x{width} frames"
        )
    stack = unstack(X, height, width)
    detections = []
    for i in range(len(stack)):
        for box, score in detect_frame(stack[i], tau, min_area, connectivity):
            detections.append(Detection(frame_index=i, box=box, score=score))
    return detections


def detect_shadows(result, height, width, tau=None, min_area=DEFAULT_MIN_AREA,
                   connectivity=DEFAULT_CONNECTIVITY):
    """Detect shadows on the foreground component of a decomposition result."""
    return detect_foreground(result.X, height, width, tau, min_area, connectivity)


def save_detections(detections, path):
    """Write detections as a JSON list of {frame, x, y, w, h, score}."""
    rows = [
        {"frame": d.frame_index, "x": d.box.x, "y": d.box.y,
         "w": d.box.w, "h": d.box.h, "score": d.score}
        for d in detections
    ]
    Path(path).write_text(json.dumps(rows, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def load_detections(path):
    rows = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(rows, list):
        raise InputError(f"{path}: expected a JSON list of detections")
    out = []
    for row in rows:
        try:
            out.append(Detection(
                frame_index=int(row["frame"]),
                box=BoundingBox(x=int(row["x"]), y=int(row["y"]),
                                w=int(row["w"]), h=int(row["h"])),
                score=float(row["score"]),
            ))
        except (KeyError, TypeError) as exc:
            raise InputError(f"{path}: malformed detection entry {row!r}") from exc
    return out
