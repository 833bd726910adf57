"""Closed-form spectra, projection curves and OU scales.

Frequency conventions follow the source formulas: the flat and momentum
eigenvalues use cos(pi k / n), the OU eigenvalues use cos(2 pi k / n). The
OU values therefore come in mirrored pairs (k and n - k) and have to be
sorted before they line up with a sorted PCA spectrum; ``predicted_spectrum``
does this.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, SpecError
from .processes import FLAT, MOMENTUM, OU, ProcessSpec, canonical_kind

DEFAULT_K_CAP = 200


def _check_alpha(alpha):
    if not 0.0 < alpha < 2.0:
        raise DomainError(f"alpha must lie in (0, 2), got {alpha}")


def circulant_eigenvalue(first_row, k: int) -> float:
    """k-th eigenvalue of the circulant matrix with the given first row.

    Evaluates c_0 + c_{n-1} w + c_{n-2} w^2 + ... + c_1 w^{n-1} with
    w = exp(2 pi i k / n) and returns the real part.
    """
    c = np.asarray(first_row, dtype=np.float64)
    n = c.shape[0]
    if not 0 <= k <= n - 1:
        raise DomainError(f"k={k} outside [0, {n - 1}]")
    m = np.arange(n)
    coeffs = c[(n - m) % n]
    w = np.exp(2j * np.pi * k * m / n)
    return float(np.real(coeffs @ w))


def flat_eigenvalue(k, n):
    """0.5 / (1 - cos(pi k / n)); exact for the centered walk when 1 <= k <= n-1."""
    k = np.asarray(k, dtype=np.float64)
    if np.any(k < 1) or np.any(k > n):
        raise DomainError(f"k must lie in [1, n={n}]")
    out = 0.5 / (1.0 - np.cos(np.pi * k / n))
    return float(out) if out.ndim == 0 else out


def flat_trace(n: int) -> float:
    """Trace of (S^T S)^{-1} for the uncentered walk: n (n + 1) / 2."""
    if n < 1:
        raise DomainError("n must be >= 1")
    return n * (n + 1) / 2.0


def flat_centered_trace(n: int) -> float:
    """Trace after centering, (n^2 - 1) / 6, which equals sum_{k=1}^{n-1} flat_eigenvalue(k, n)."""
    if n < 1:
        raise DomainError("n must be >= 1")
    return (n * n - 1) / 6.0


def flat_variance_ratio(k):
    k = np.asarray(k, dtype=np.float64)
    if np.any(k < 1):
        raise DomainError("k must be >= 1")
    out = 6.0 / (np.pi ** 2 * k ** 2)
    return float(out) if out.ndim == 0 else out


def momentum_eigenvalue(k, n, gamma):
    if not 0.0 <= gamma < 1.0:
        raise DomainError(f"gamma must lie in [0, 1), got {gamma}")
    k = np.asarray(k, dtype=np.float64)
    if np.any(k < 1) or np.any(k > n):
        raise DomainError(f"k must lie in [1, n={n}]")
    theta = np.pi * k / n
    if gamma == 0.0:
        denom = 1.0 - np.cos(theta)
    else:
        g = gamma
        denom = 1.0 + g + g * g - (1.0 + g) ** 2 * np.cos(theta) + g * np.cos(2.0 * theta)
    out = 0.5 / denom
    return float(out) if out.ndim == 0 else out


def ou_eigenvalue(k, n, alpha, mode: str = "exact"):
    """OU spectrum; ``approx`` is the small-frequency expansion of ``exact``."""
    _check_alpha(alpha)
    k = np.asarray(k, dtype=np.float64)
    if np.any(k < 1) or np.any(k > n - 1):
        raise DomainError(f"k must lie in [1, n-1={n - 1}]")
    keep = 1.0 - alpha
    if mode == "exact":
        out = 1.0 / (1.0 + keep ** 2 - 2.0 * keep * np.cos(2.0 * np.pi * k / n))
    elif mode == "approx":
        out = 1.0 / (4.0 * np.pi ** 2 * k ** 2 * keep / n ** 2 + alpha ** 2)
    else:
        raise DomainError(f"mode must be 'exact' or 'approx', got {mode!r}")
    return float(out) if out.ndim == 0 else out


def lissajous_projection(k: int, n: int, lambda_k: float) -> np.ndarray:
    """sqrt(2 lambda_k / n) cos(pi k t / n) sampled at t = 1..n."""
    if not 1 <= k <= n:
        raise DomainError(f"k={k} outside [1, {n}]")
    if not lambda_k > 0:
        raise DomainError("lambda_k must be positive")
    t = np.arange(1, n + 1, dtype=np.float64)
    return np.sqrt(2.0 * lambda_k / n) * np.cos(np.pi * k * t / n)


def critical_radius(alpha: float) -> float:
    _check_alpha(alpha)
    return 1.0 / np.sqrt(alpha * (2.0 - alpha))


def mixing_steps(alpha: float) -> float:
    _check_alpha(alpha)
    return 1.0 / (alpha * (2.0 - alpha))


@dataclass
class AnalyticSpectrum:
    kind: str
    params: dict
    n: int
    k: np.ndarray
    eigenvalues: np.ndarray
    ratios: np.ndarray
    notes: list = field(default_factory=list)

    @property
    def explained_ratio(self) -> np.ndarray:
        return self.ratios


def predicted_spectrum(spec: ProcessSpec, n: int, k: int = None) -> AnalyticSpectrum:
    """Closed-form spectrum for components 1..k of an n-step walk.

    The formula is evaluated over every nonconstant mode k = 1..n-1, sorted
    in descending order, and normalised by the finite sum over those modes.
    """
    if isinstance(spec, str):
        spec = ProcessSpec(canonical_kind(spec))
    if n < 2:
        raise DomainError("n must be >= 2")
    k = min(n - 1, DEFAULT_K_CAP) if k is None else int(k)
    if not 1 <= k <= n - 1:
        raise DomainError(f"k={k} must lie in [1, n-1={n - 1}]")
    modes = np.arange(1, n)
    notes = []
    if spec.kind == FLAT:
        lam = flat_eigenvalue(modes, n)
        params = {}
    elif spec.kind == MOMENTUM:
        lam = momentum_eigenvalue(modes, n, spec.gamma)
        params = {"gamma": spec.gamma}
    elif spec.kind == OU:
        lam = ou_eigenvalue(modes, n, spec.alpha)
        params = {"alpha": spec.alpha}
        notes.append("OU modes k and n-k are degenerate; values sorted before indexing")
    else:
        raise SpecError(f"no closed-form spectrum for process kind {spec.kind!r}")
    lam = np.sort(np.atleast_1d(lam), kind="stable")[::-1]
    ratios = lam / lam.sum()
    return AnalyticSpectrum(spec.kind, params, n, np.arange(1, k + 1), lam[:k].copy(), ratios[:k].copy(), notes)
