"""Grayscale frame stacks and their column-stacked matrix view.

A video of n frames, each height x width, lives in two layouts:

* a :class:`FrameStack`, shape ``(n, height, width)``, frame-major;
* the stacked matrix, shape ``(height*width, n)``, where column j is frame j
  flattened in row-major raster order (row index varies slowest).

Pixels are float64. Camera input is normalized to [0, 1]; component stacks
produced by the decomposition (foreground, noise) are signed and are never
clipped here.
"""

import numpy as np

from .errors import InputError


class FrameStack:
    """Temporally ordered grayscale frames sharing one height and width.

    Frames are stored as a single ``(n, height, width)`` float64 array.
    At least two frames are required; a single frame has no temporal
    redundancy to decompose.
    """

    def __init__(self, frames):
        try:
            arr = np.asarray(frames, dtype=np.float64)
        except ValueError as exc:
            raise InputError(f"frames do not share a common shape: {exc}") from exc
        if arr.ndim != 3:
            raise InputError(f"expected (n, height, width) frame data, got shape {arr.shape}")
        if arr.shape[0] < 2:
            raise InputError("a frame stack needs at least two frames")
        if not np.isfinite(arr).all():
            raise InputError("frames contain non-finite values")
        self.frames = arr

    @property
    def height(self):
        return self.frames.shape[1]

    @property
    def width(self):
        return self.frames.shape[2]

    def __len__(self):
        return self.frames.shape[0]

    def __getitem__(self, index):
        return self.frames[index]


def normalize(raw_frame, bit_depth):
    """Map integer pixel values onto [0, 1] by dividing by the full scale.

    ``bit_depth`` must be 8 or 16; raw values must lie in
    ``[0, 2**bit_depth - 1]``.
    """
    if bit_depth not in (8, 16):
        raise InputError(f"bit depth must be 8 or 16, got {bit_depth}")
    raw = np.asarray(raw_frame)
    if not np.issubdtype(raw.dtype, np.integer):
        raise InputError(f"raw pixels must be integers, got dtype {raw.dtype}")
    full_scale = (1 << bit_depth) - 1
    if raw.size and (raw.min() < 0 or raw.max() > full_scale):
        raise InputError(f"raw pixel values outside [0, {full_scale}]")
    return raw.astype(np.float64) / full_scale


def stack(fs):
    """Stack the frames of ``fs`` as the columns of a (height*width, n) matrix.

    Column j equals frame j flattened in row-major raster order, so
    ``unstack(stack(fs), ...)`` reproduces the input bit for bit.
    """
    n = len(fs)
    m = fs.height * fs.width
    return np.ascontiguousarray(fs.frames.reshape(n, m).T)


def unstack(matrix, height, width):
    """Rebuild a FrameStack from a column-stacked matrix.

    Exact inverse of :func:`stack`. Values are passed through unclipped, so
    signed component matrices survive the round trip.
    """
    M = np.asarray(matrix, dtype=np.float64)
    if M.ndim != 2:
        raise InputError(f"expected a 2-d matrix, got shape {M.shape}")
    if height < 1 or width < 1:
        raise InputError("height and width must be positive")
    if M.shape[0] != height * width:
        raise InputError(
            f"matrix has {M.shape[0]} rows, expected height*width = {height * width}"
        )
    return FrameStack(np.ascontiguousarray(M.T).reshape(M.shape[1], height, width))
