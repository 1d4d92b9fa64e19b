"""Proximal operators used by the decomposition.

Two shrinkage maps do all the work: elementwise soft thresholding (the
l1-norm prox) and singular-value thresholding (the nuclear-norm prox, which
soft-thresholds the spectrum of a thin SVD and remultiplies).
"""

from dataclasses import dataclass

import numpy as np

from .errors import InputError, NumericError


@dataclass(frozen=True)
class SvdFactors:
    """Thin SVD ``U @ diag(singular_values) @ V.T`` with a fixed sign
    convention so repeated factorizations of the same matrix are
    bit-identical."""

    U: np.ndarray                # (m, r), orthonormal columns
    singular_values: np.ndarray  # (r,), nonincreasing, nonnegative
    V: np.ndarray                # (n, r), orthonormal columns


def svd(matrix):
    """Deterministic thin SVD.

    Each column of U is flipped, together with its partner column of V, so
    that the entry of largest absolute value in the U column is nonnegative.
    The product U @ diag(s) @ V.T is unchanged by the flips.
    """
    Q = np.asarray(matrix, dtype=np.float64)
    if Q.ndim != 2:
        raise InputError(f"expected a 2-d matrix, got shape {Q.shape}")
    if not np.isfinite(Q).all():
        raise InputError("matrix contains non-finite entries")
    try:
        U, s, Vh = np.linalg.svd(Q, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"singular value decomposition failed: {exc}") from exc
    V = Vh.T
    peak_rows = np.argmax(np.abs(U), axis=0)
    flip = U[peak_rows, np.arange(U.shape[1])] < 0
    U[:, flip] *= -1.0
    V[:, flip] *= -1.0
    return SvdFactors(U=U, singular_values=s, V=V)


def soft_threshold(matrix, eps):
    """Elementwise shrinkage ``sign(q) * max(|q| - eps, 0)``."""
    if eps < 0:
        raise InputError(f"threshold must be nonnegative, got {eps}")
    Q = np.asarray(matrix, dtype=np.float64)
    return np.sign(Q) * np.maximum(np.abs(Q) - eps, 0.0)


def svt_with_spectrum(matrix, eps):
    """Singular-value thresholding, also returning the shrunk spectrum.

    Returns ``(U @ diag(max(s - eps, 0)) @ V.T, max(s - eps, 0))``.
    """
    if eps < 0:
        raise InputError(f"threshold must be nonnegative, got {eps}")
    factors = svd(matrix)
    shrunk = np.maximum(factors.singular_values - eps, 0.0)
    return (factors.U * shrunk) @ factors.V.T, shrunk


def svt(matrix, eps):
    """Singular-value thresholding: soft-threshold the spectrum by ``eps``."""
    return svt_with_spectrum(matrix, eps)[0]


def spectral_rank(singular_values, rel_tol=1e-12):
    """Count singular values above the floating-point noise floor
    ``rel_tol * max(singular_values)``."""
    s = np.asarray(singular_values, dtype=np.float64)
    if s.size == 0:
        return 0
    top = s.max()
    if top <= 0:
        return 0
    return int(np.count_nonzero(s > rel_tol * top))
