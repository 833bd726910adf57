"""Empirical-versus-analytic comparison metrics."""

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .analytic import lissajous_projection
from .errors import DimensionMismatchError, DomainError
from .processes import Trajectory

# Predicted spectra flatter than this over the compared range are dominated
# by the upward bias of sorting noisy, nearly equal eigenvalues.
FLAT_SPECTRUM_RANGE = 2.0


@dataclass
class SpectrumMetrics:
    k: list
    per_k: list
    median_rel_error: float
    max_rel_error: float
    scale: str
    sorting_bias: dict = field(default_factory=dict)


def _spectrum_values(spec, scale):
    if scale == "raw":
        return np.asarray(getattr(spec, "eigenvalues", spec), dtype=np.float64)
    ratios = getattr(spec, "explained_ratio", None)
    if ratios is not None:
        return np.asarray(ratios, dtype=np.float64)
    arr = np.asarray(spec, dtype=np.float64)
    return arr / arr.sum()


def spectrum_error(empirical, predicted, k_range=(1, 20), scale: str = "ratio") -> SpectrumMetrics:
    """Per-component relative error |emp - pred| / pred over ``k_range`` (inclusive, 1-based).

    Parameters
    ----------
    empirical, predicted
        Either result objects (``PcaResult``, ``AnalyticSpectrum``, spectrum
        tables) or plain arrays of eigenvalues sorted in descending order.
        A plain array is treated as the complete spectrum when normalising.
    scale : {"ratio", "raw"}
        Compare explained-variance ratios (default) or raw eigenvalues.
    """
    if scale not in ("ratio", "raw"):
        raise DomainError(f"scale must be 'ratio' or 'raw', got {scale!r}")
    lo, hi = int(k_range[0]), int(k_range[1])
    if lo < 1 or hi < lo:
        raise DomainError(f"empty k range {k_range}")
    emp = _spectrum_values(empirical, scale)
    pred = _spectrum_values(predicted, scale)
    if emp.shape[0] < hi or pred.shape[0] < hi:
        raise DimensionMismatchError(
            f"k range ends at {hi} but spectra have {emp.shape[0]} and {pred.shape[0]} entries"
        )
    e = emp[lo - 1:hi]
    p = pred[lo - 1:hi]
    rel = np.abs(e - p) / p

    dyn = float(p.max() / p.min())
    excess = float(e[0] / p[0] - 1.0)
    bias = {
        "flagged": bool(dyn < FLAT_SPECTRUM_RANGE and excess > 0.0),
        "predicted_dynamic_range": dyn,
        "low_k_excess": excess,
    }
    return SpectrumMetrics(
        k=list(range(lo, hi + 1)),
        per_k=rel.tolist(),
        median_rel_error=float(np.median(rel)),
        max_rel_error=float(np.max(rel)),
        scale=scale,
        sorting_bias=bias,
    )


def _pearson_abs(a, b) -> float:
    a = np.asarray(a, dtype=np.float64) - np.mean(a)
    b = np.asarray(b, dtype=np.float64) - np.mean(b)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise DomainError("correlation undefined for a zero-variance series")
    return float(min(1.0, abs(a @ b) / (na * nb)))


def projection_match(empirical_proj, k: int, n: int, lambda_k: float) -> float:
    """|Pearson correlation| between a projection series and its Lissajous cosine."""
    series = np.asarray(empirical_proj, dtype=np.float64)
    if series.shape != (n,):
        raise DimensionMismatchError(f"projection has shape {series.shape}, expected ({n},)")
    return _pearson_abs(series, lissajous_projection(k, n, lambda_k))


def count_zero_crossings(series) -> int:
    s = np.sign(np.asarray(series, dtype=np.float64))
    s = s[s != 0]
    return int(np.count_nonzero(s[1:] != s[:-1]))


def plateau_estimate(distance_series, tail_fraction: float = 0.2) -> float:
    """Mean of the last ceil(tail_fraction * n) values."""
    if not 0.0 < tail_fraction <= 1.0:
        raise DomainError(f"tail_fraction must lie in (0, 1], got {tail_fraction}")
    s = np.asarray(distance_series, dtype=np.float64)
    m = max(1, math.ceil(tail_fraction * s.shape[0]))
    return float(np.mean(s[-m:]))


def iterate_average_error(traj: Trajectory, minimum=None) -> np.ndarray:
    """||(1/t) sum_{s<=t} x_s - minimum|| for t = 1..n (Polyak average error)."""
    X = traj.states if isinstance(traj, Trajectory) else np.asarray(traj, dtype=np.float64)
    m = np.zeros(X.shape[1]) if minimum is None else np.asarray(minimum, dtype=np.float64)
    if m.shape != (X.shape[1],):
        raise DimensionMismatchError(f"minimum has shape {m.shape}, states have d={X.shape[1]}")
    out = np.empty(X.shape[0])
    running = np.zeros(X.shape[1])
    for t in range(X.shape[0]):
        running += X[t]
        out[t] = np.linalg.norm(running / (t + 1) - m)
    return out


@dataclass
class ComparisonReport:
    spectrum: Optional[SpectrumMetrics] = None
    projection: Optional[dict] = None
    plateau: Optional[dict] = None
    averaging: Optional[dict] = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "spectrum": None if self.spectrum is None else asdict(self.spectrum),
            "projection": self.projection,
            "plateau": self.plateau,
            "averaging": self.averaging,
        }
        out.update(self.extra)
        return out


def projection_metrics(projections, components, n: int, lambdas) -> dict:
    """Correlation with the Lissajous cosine and zero-crossing count per component."""
    P = np.asarray(projections, dtype=np.float64)
    corr, zc = [], []
    for j, k in enumerate(components):
        corr.append(projection_match(P[:, j], k, n, lambdas[j]))
        zc.append(count_zero_crossings(P[:, j]))
    return {"k": list(components), "per_k_corr": corr, "zero_crossings": zc}


def plateau_metrics(distances, tail_fraction: float, predicted: Optional[float]) -> dict:
    est = plateau_estimate(distances, tail_fraction)
    rel = None if predicted is None else abs(est - predicted) / predicted
    return {"estimate": est, "predicted": predicted, "rel_dev": rel, "tail_fraction": tail_fraction}
