"""PCA of high-dimensional random walks, momentum walks and OU processes."""

from .analytic import (
    AnalyticSpectrum,
    circulant_eigenvalue,
    critical_radius,
    flat_centered_trace,
    flat_eigenvalue,
    flat_trace,
    flat_variance_ratio,
    lissajous_projection,
    mixing_steps,
    momentum_eigenvalue,
    ou_eigenvalue,
    predicted_spectrum,
)
from .compare import (
    ComparisonReport,
    count_zero_crossings,
    iterate_average_error,
    plateau_estimate,
    projection_match,
    spectrum_error,
)
from .noise import NoiseModel, make_factor_covariance, make_isotropic, sample
from .pca import PcaResult, center, eigh_symmetric, gram, pca_direct, pca_trajectory
from .processes import (
    ProcessSpec,
    Trajectory,
    distance_from_origin,
    fit_exponential_decay,
    simulate,
    simulate_linreg_sgd,
    step_norms,
)
from .trajectory_io import random_project, read_trajectory, subsample, write_trajectory

__version__ = "0.1.0"
