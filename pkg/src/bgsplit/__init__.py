"""bgsplit: low-rank + sparse + noise decomposition of grayscale video,
with a dark-region detector and evaluation metrics."""

from .detect import (
    BoundingBox,
    Detection,
    connected_components,
    detect_foreground,
    detect_frame,
    detect_shadows,
    threshold_foreground,
)
from .errors import BgsplitError, InputError, NumericError
from .framestack import FrameStack, normalize, stack, unstack
from .metrics import (
    EvalReport,
    GroundTruth,
    average_precision,
    evaluate_detections,
    information_entropy,
    iou,
    magnitude_rescale,
    match_detections,
    pr_curve,
    precision_recall,
    shadow_contrast,
)
from .prox import SvdFactors, soft_threshold, svd, svt
from .solver import (
    DecompositionResult,
    IterationTrace,
    SolverConfig,
    solve,
    update_background,
    update_foreground,
    update_multiplier,
    update_noise,
    write_trace_csv,
)

__version__ = "0.1.0"

__all__ = [
    "BgsplitError", "InputError", "NumericError",
    "FrameStack", "normalize", "stack", "unstack",
    "SvdFactors", "svd", "soft_threshold", "svt",
    "SolverConfig", "DecompositionResult", "IterationTrace", "solve",
    "update_background", "update_foreground", "update_noise", "update_multiplier",
    "write_trace_csv",
    "BoundingBox", "Detection", "threshold_foreground", "connected_components",
    "detect_frame", "detect_foreground", "detect_shadows",
    "GroundTruth", "EvalReport", "information_entropy", "shadow_contrast",
    "magnitude_rescale", "iou", "match_detections", "pr_curve",
    "precision_recall", "average_precision", "evaluate_detections",
    "__version__",
]
