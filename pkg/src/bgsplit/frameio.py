"""File formats: binary graymaps, frame manifests, and raw matrix dumps.

Graymaps are the binary (P5) portable graymap flavor: samples are one byte
for maxval < 256, otherwise two bytes big-endian. Frame manifests are JSON
documents listing frame files in temporal order together with the shared
``height``, ``width``, and ``bit_depth``; frame paths are resolved relative
to the manifest's directory.

Raw matrix dumps are little-endian: two uint64 header words (rows m, cols n)
followed by m*n float64 values in column-major order.
"""

import json
import struct
from pathlib import Path

import numpy as np

from .errors import InputError
from .framestack import FrameStack, normalize

_WHITESPACE = b" \t\r\n\v\f"


def _next_token(data, pos):
    # skip whitespace and '#' comments, then collect one header token
    while pos < len(data):
        ch = data[pos:pos + 1]
        if ch in _WHITESPACE:
            pos += 1
        elif ch == b"#":
            while pos < len(data) and data[pos:pos + 1] not in b"\r\n":
                pos += 1
        else:
            break
    start = pos
    while pos < len(data) and data[pos:pos + 1] not in _WHITESPACE:
        pos += 1
    if start == pos:
        raise InputError("truncated graymap header")
    return data[start:pos], pos


def read_pgm(path):
    """Read a binary graymap. Returns ``(pixels, maxval)`` with pixels
    shaped (height, width) as uint8 or uint16."""
    data = Path(path).read_bytes()
    magic, pos = _next_token(data, 0)
    if magic != b"P5":
        raise InputError(f"{path}: not a binary graymap (magic {magic!r})")
    fields = []
    for _ in range(3):
        token, pos = _next_token(data, pos)
        try:
            fields.append(int(token))
        except ValueError as exc:
            raise InputError(f"{path}: bad graymap header token {token!r}") from exc
    width, height, maxval = fields
    if width < 1 or height < 1 or not 0 < maxval < 65536:
        raise InputError(f"{path}: bad graymap dimensions or maxval")
    pos += 1  # single whitespace byte before the raster
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    count = width * height
    raster = data[pos:pos + count * dtype.itemsize]
    if len(raster) != count * dtype.itemsize:
        raise InputError(f"{path}: truncated graymap raster")
    pixels = np.frombuffer(raster, dtype=dtype).reshape(height, width)
    if pixels.max(initial=0) > maxval:
        raise InputError(f"{path}: sample exceeds declared maxval {maxval}")
    return pixels.astype(np.uint16 if maxval > 255 else np.uint8), maxval


def write_pgm(path, levels, maxval):
    """Write integer gray levels as a binary graymap."""
    arr = np.asarray(levels)
    if arr.ndim != 2:
        raise InputError(f"expected a 2-d level array, got shape {arr.shape}")
    if not 0 < maxval < 65536:
        raise InputError(f"maxval must be in [1, 65535], got {maxval}")
    if arr.size and (arr.min() < 0 or arr.max() > maxval):
        raise InputError(f"levels outside [0, {maxval}]")
    height, width = arr.shape
    header = f"P5\n{width} {height}\n{maxval}\n".encode("ascii")
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    Path(path).write_bytes(header + arr.astype(dtype).tobytes())


def quantize_levels(values, lo, hi, maxval=65535):
    """Affine-map real values onto integer levels: clamp to [lo, hi], then
    ``level = round((v - lo) / (hi - lo) * maxval)`` with round half up."""
    if hi <= lo:
        raise InputError("quantization range must have hi > lo")
    x = (np.clip(np.asarray(values, dtype=np.float64), lo, hi) - lo) / (hi - lo)
    return np.floor(x * maxval + 0.5).astype(np.uint16)


def levels_to_values(levels, lo, hi, maxval=65535):
    """Inverse of :func:`quantize_levels` up to quantization error."""
    return np.asarray(levels, dtype=np.float64) / maxval * (hi - lo) + lo


def load_manifest(path):
    """Load a frame manifest and its frames into a normalized FrameStack.

    Returns ``(stack, meta)`` where meta carries the manifest's height,
    width, bit_depth, and frame count.
    """
    manifest_path = Path(path)
    doc = json.loads(manifest_path.read_text(encoding="utf-8"))
    for key in ("height", "width", "bit_depth", "frames"):
        if key not in doc:
            raise InputError(f"{path}: manifest is missing key {key!r}")
    height, width = int(doc["height"]), int(doc["width"])
    bit_depth = int(doc["bit_depth"])
    entries = doc["frames"]
    if not isinstance(entries, list) or len(entries) < 2:
        raise InputError(f"{path}: manifest must list at least two frames")
    base = manifest_path.parent
    frames = np.empty((len(entries), height, width), dtype=np.float64)
    for i, rel in enumerate(entries):
        frame_path = base / rel
        raw, _ = read_pgm(frame_path)
        if raw.shape != (height, width):
            raise InputError(
                f"{frame_path}: frame is {raw.shape[0]}x{raw.shape[1]}, "
                f"manifest says {height}x{width}"
            )
        frames[i] = normalize(raw, bit_depth)
    meta = {
        "height": height,
        "width": width,
        "bit_depth": bit_depth,
        "frame_count": len(entries),
    }
    return FrameStack(frames), meta


def write_manifest(path, frame_files, height, width, bit_depth):
    """Write a manifest JSON referencing already-written frame files."""
    doc = {
        "height": int(height),
        "width": int(width),
        "bit_depth": int(bit_depth),
        "frames": [str(f) for f in frame_files],
    }
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def write_matrix(path, matrix):
    """Dump a matrix as ``<u8 m><u8 n>`` then float64 column-major data,
    all little-endian."""
    M = np.asarray(matrix, dtype=np.float64)
    if M.ndim != 2:
        raise InputError(f"expected a 2-d matrix, got shape {M.shape}")
    header = struct.pack("<QQ", M.shape[0], M.shape[1])
    Path(path).write_bytes(header + M.astype("<f8", copy=False).tobytes(order="F"))


def read_matrix(path):
    """Read a matrix written by :func:`write_matrix`."""
    data = Path(path).read_bytes()
    if len(data) < 16:
        raise InputError(f"{path}: truncated matrix header")
    m, n = struct.unpack_from("<QQ", data)
    expected = 16 + m * n * 8
    if len(data) != expected:
        raise InputError(f"{path}: matrix payload is {len(data)} bytes, expected {expected}")
    values = np.frombuffer(data, dtype="<f8", offset=16, count=m * n)
    return values.reshape((m, n), order="F").copy()
