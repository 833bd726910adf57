"""Zero-mean Gaussian step noise with unit covariance trace."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateCovarianceError, InvalidDimensionError

ISOTROPIC = "isotropic"
FACTOR = "factor"
# distinct from the simulation stream default_rng(seed)
FACTOR_STREAM = 2


@dataclass(frozen=True, eq=False)
class NoiseModel:
    """Step-noise distribution.

    Isotropic models draw each coordinate from N(0, 1/dim). Factor models
    draw ``factor @ z`` with ``z`` standard normal; the stored factor is
    already scaled so that ``trace(factor @ factor.T) == 1``.
    """

    kind: str
    dim: int
    factor: Optional[np.ndarray] = None

    @property
    def covariance_trace(self) -> float:
        if self.kind == ISOTROPIC:
            return 1.0
        return float(np.sum(self.factor ** 2))

    def covariance(self) -> np.ndarray:
        """Dense ``dim x dim`` covariance. Only sensible for small ``dim``."""
        if self.kind == ISOTROPIC:
            return np.eye(self.dim) / self.dim
        return self.factor @ self.factor.T

    def describe(self) -> dict:
        out = {"kind": self.kind, "dim": self.dim}
        if self.factor is not None:
            out["rank_bound"] = int(self.factor.shape[1])
        return out


def make_isotropic(d: int) -> NoiseModel:
    if int(d) != d or d < 1:
        raise InvalidDimensionError(f"noise dimension must be a positive integer, got {d!r}")
    return NoiseModel(ISOTROPIC, int(d))


def make_factor_covariance(factor) -> NoiseModel:
    """Noise with covariance proportional to ``factor @ factor.T``.

    The factor is rescaled by ``sqrt(trace(F F^T))`` (its Frobenius norm), so
    the covariance of the returned model has unit trace. No ``d x d``
    factorisation is ever formed.
    """
    F = np.array(factor, dtype=np.float64, copy=True)
    if F.ndim == 1:
        F = F[:, None]
    if F.ndim != 2 or F.shape[0] < 1 or F.shape[1] < 1:
        raise InvalidDimensionError(f"factor must be a non-empty 2-D matrix, got shape {F.shape}")
    if not np.all(np.isfinite(F)):
        raise DegenerateCovarianceError("factor contains non-finite entries")
    scale = np.sqrt(np.sum(F ** 2))
    if scale == 0.0:
        raise DegenerateCovarianceError("factor is all zeros; covariance would be degenerate")
    F /= scale
    F.setflags(write=False)
    return NoiseModel(FACTOR, F.shape[0], F)


def random_factor(d: int, m: Optional[int] = None, seed=0) -> np.ndarray:
    """Standard-normal ``d x m`` matrix (square by default) for building Sigma = R R^T.

    Drawn from the stream ``[seed, FACTOR_STREAM]`` so a factor seed never
    replays the noise stream of a simulation with the same integer seed.
    """
    m = d if m is None else m
    rng = np.random.default_rng([seed, FACTOR_STREAM])
    return rng.standard_normal((d, m))


def sample(model: NoiseModel, rng: np.random.Generator) -> np.ndarray:
    """Draw a single noise vector of length ``model.dim``."""
    if model.kind == ISOTROPIC:
        return rng.standard_normal(model.dim) * (1.0 / np.sqrt(model.dim))
    z = rng.standard_normal(model.factor.shape[1])
    return model.factor @ z


def sample_many(model: NoiseModel, rng: np.random.Generator, size: int) -> np.ndarray:
    """Draw ``size`` independent noise vectors as the rows of a matrix."""
    if model.kind == ISOTROPIC:
        return rng.standard_normal((size, model.dim)) * (1.0 / np.sqrt(model.dim))
    z = rng.standard_normal((size, model.factor.shape[1]))
    return z @ model.factor.T
