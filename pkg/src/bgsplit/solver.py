"""Alternating-direction decomposition of a frame matrix D into a low-rank
background B, a sparse foreground X, and a dense noise term E.

The solver minimizes

    ||B||_* + xi * ||X||_1 + gamma * ||E||_F^2   subject to   D = B + X + E

by augmented-Lagrangian splitting. Each sweep updates, in order:

    B   <- svt(D - X - E + Y/mu, 1/mu)
    X   <- soft_threshold(D - B - E + Y/mu, xi/mu)
    E   <- (D - B - X + Y/mu) / (1 + 2*gamma/mu)
    Y   <- Y + mu * (D - B - X - E);   mu <- min(rho * mu, mu_max)

and stops once the relative Frobenius residual ||D - B - X - E||_F / ||D||_F
drops to the tolerance or the iteration cap is hit.
"""

from dataclasses import dataclass, field

import numpy as np

from . import prox
from .errors import InputError, NumericError


@dataclass(frozen=True)
class SolverConfig:
    """Hyperparameters. ``None`` (or ``"auto"`` for mu0) selects a
    data-dependent default at solve time; see :meth:`resolved`.

    xi       sparsity weight; default 1/sqrt(max(m, n))
    gamma    noise weight; default 30 * xi * m * n / ||D||_F^2, which caps the
             per-entry magnitude the quadratic term will absorb at 1/60 of the
             data's RMS entry (larger deviations are left to the foreground)
    rho      penalty growth factor per sweep, must exceed 1
    mu0      initial penalty; "auto" resolves to 1.25 / sigma_1(D)
    mu_max   penalty cap; default 1e7 * mu0
    tol      relative Frobenius residual tolerance
    max_iter sweep cap
    """

    xi: float | None = None
    gamma: float | None = None
    rho: float = 1.5
    mu0: float | str = "auto"
    mu_max: float | None = None
    tol: float = 1e-7
    max_iter: int = 500

    def __post_init__(self):
        if self.xi is not None and self.xi <= 0:
            raise InputError(f"xi must be positive, got {self.xi}")
        if self.gamma is not None and self.gamma < 0:
            raise InputError(f"gamma must be nonnegative, got {self.gamma}")
        if self.rho <= 1:
            raise InputError(f"rho must exceed 1, got {self.rho}")
        if self.mu0 != "auto" and not (isinstance(self.mu0, (int, float)) and self.mu0 > 0):
            raise InputError(f'mu0 must be positive or "auto", got {self.mu0!r}')
        if self.mu_max is not None and self.mu_max <= 0:
            raise InputError(f"mu_max must be positive, got {self.mu_max}")
        if self.tol <= 0:
            raise InputError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise InputError(f"max_iter must be at least 1, got {self.max_iter}")

    def resolved(self, D):
        """Concrete hyperparameter values for the data matrix ``D``.

        Requires ``D != 0``; the all-zero matrix short-circuits in
        :func:`solve` before any parameter is needed.
        """
        m, n = D.shape
        xi = self.xi if self.xi is not None else 1.0 / np.sqrt(max(m, n))
        if self.gamma is not None:
            gamma = self.gamma
        else:
            fro2 = float(np.linalg.norm(D, "fro")) ** 2
            if fro2 == 0:
                raise InputError("cannot resolve gamma for an all-zero matrix")
            gamma = 30.0 * xi * (m * n) / fro2
        if self.mu0 == "auto":
            sigma1 = float(np.linalg.svd(D, compute_uv=False)[0])
            if sigma1 == 0:
                raise InputError("cannot resolve mu0 for an all-zero matrix")
            mu0 = 1.25 / sigma1
        else:
            mu0 = float(self.mu0)
        mu_max = self.mu_max if self.mu_max is not None else 1e7 * mu0
        if mu_max < mu0:
            raise InputError(f"mu_max {mu_max} is below mu0 {mu0}")
        return {
            "xi": float(xi),
            "gamma": float(gamma),
            "rho": float(self.rho),
            "mu0": mu0,
            "mu_max": float(mu_max),
            "tol": float(self.tol),
            "max_iter": int(self.max_iter),
        }


@dataclass(frozen=True)
class IterationTrace:
    """One convergence-trace row."""

    iteration: int
    residual: float   # relative Frobenius residual after the sweep
    rank_b: int       # rank of B above the spectral noise floor
    nnz_x: int        # exact nonzero count of X
    mu: float         # penalty value used by this sweep's updates


@dataclass(frozen=True)
class DecompositionResult:
    B: np.ndarray
    X: np.ndarray
    E: np.ndarray
    Y: np.ndarray
    trace: list[IterationTrace]
    converged: bool
    iterations: int
    config: dict = field(default_factory=dict)  # resolved hyperparameters


def _check_mu(mu):
    if mu <= 0:
        raise InputError(f"mu must be positive, got {mu}")


def _background_step(D, X, E, Y, mu):
    _check_mu(mu)
    return prox.svt_with_spectrum(D - X - E + Y / mu, 1.0 / mu)


def update_background(D, X, E, Y, mu):
    """Nuclear-norm prox step: threshold the spectrum of
    ``D - X - E + Y/mu`` by ``1/mu``."""
    B, _ = _background_step(D, X, E, Y, mu)
    return B


def update_foreground(D, B, E, Y, mu, xi):
    """l1 prox step: soft-threshold ``D - B - E + Y/mu`` by ``xi/mu``."""
    _check_mu(mu)
    if xi <= 0:
        raise InputError(f"xi must be positive, got {xi}")
    return prox.soft_threshold(D - B - E + Y / mu, xi / mu)


def update_noise(D, B, X, Y, mu, gamma):
    """Closed-form ridge step: scale ``D - B - X + Y/mu`` by
    ``1 / (1 + 2*gamma/mu)``."""
    _check_mu(mu)
    if gamma < 0:
        raise InputError(f"gamma must be nonnegative, got {gamma}")
    return (D - B - X + Y / mu) / (1.0 + 2.0 * gamma / mu)


def update_multiplier(Y, mu, D, B, X, E, rho, mu_max):
    """Dual ascent on the constraint plus geometric penalty growth.

    Returns ``(Y + mu*(D - B - X - E), min(rho*mu, mu_max))``.
    """
    _check_mu(mu)
    if rho <= 1:
        raise InputError(f"rho must exceed 1, got {rho}")
    return Y + mu * (D - B - X - E), min(rho * mu, mu_max)


def solve(D, config=None):
    """Run the full decomposition on a column-stacked frame matrix.

    B, X, E, and Y start at zero. The all-zero matrix returns the trivial
    decomposition immediately. Raises :class:`NumericError` if a sweep
    produces non-finite values, naming the iteration.
    """
    D = np.asarray(D, dtype=np.float64)
    if D.ndim != 2:
        raise InputError(f"expected a 2-d matrix, got shape {D.shape}")
    if D.shape[1] < 2:
        raise InputError("decomposition needs at least two frames (columns)")
    if not np.isfinite(D).all():
        raise InputError("matrix contains non-finite entries")
    cfg = config if config is not None else SolverConfig()

    d_norm = float(np.linalg.norm(D, "fro"))
    if d_norm == 0.0:
        zeros = np.zeros_like(D)
        trivial_mu = float(cfg.mu0) if cfg.mu0 != "auto" else 0.0
        trace = [IterationTrace(iteration=1, residual=0.0, rank_b=0, nnz_x=0, mu=trivial_mu)]
        resolved = {
            "xi": cfg.xi if cfg.xi is not None else 1.0 / np.sqrt(max(D.shape)),
            "gamma": cfg.gamma if cfg.gamma is not None else 0.0,
            "rho": float(cfg.rho),
            "mu0": trivial_mu,
            "mu_max": float(cfg.mu_max) if cfg.mu_max is not None else 0.0,
            "tol": float(cfg.tol),
            "max_iter": int(cfg.max_iter),
        }
        return DecompositionResult(
            B=zeros, X=zeros.copy(), E=zeros.copy(), Y=zeros.copy(),
            trace=trace, converged=True, iterations=1, config=resolved,
        )

    params = cfg.resolved(D)
    xi, gamma, rho = params["xi"], params["gamma"], params["rho"]
    mu, mu_max = params["mu0"], params["mu_max"]

    B = np.zeros_like(D)
    X = np.zeros_like(D)
    E = np.zeros_like(D)
    Y = np.zeros_like(D)
    trace = []
    converged = False

    for k in range(1, params["max_iter"] + 1):
        mu_used = mu
        B, spectrum = _background_step(D, X, E, Y, mu)
        X = update_foreground(D, B, E, Y, mu, xi)
        E = update_noise(D, B, X, Y, mu, gamma)
        Y, mu = update_multiplier(Y, mu, D, B, X, E, rho, mu_max)
        residual = float(np.linalg.norm(D - B - X - E, "fro")) / d_norm
        if not np.isfinite(residual):
            raise NumericError(f"non-finite values at iteration {k}")
        trace.append(IterationTrace(
            iteration=k,
            residual=residual,
            rank_b=prox.spectral_rank(spectrum),
            nnz_x=int(np.count_nonzero(X)),
            mu=mu_used,
        ))
        if residual <= params["tol"]:
            converged = True
            break

    return DecompositionResult(
        B=B, X=X, E=E, Y=Y,
        trace=trace, converged=converged, iterations=len(trace), config=params,
    )


def write_trace_csv(trace, path):
    """Write the convergence trace with header ``iter,residual,rank_B,nnz_X,mu``."""
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write("iter,residual,rank_B,nnz_X,mu\n")
        for row in trace:
            fh.write(f"{row.iteration},{row.residual!r},{row.rank_b},{row.nnz_x},{row.mu!r}\n")
