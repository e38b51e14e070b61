"""Moment stability of linear systems with multiplicative white noise.

The system is ``x^t = (A + B^t) x^{t-1}`` with a fixed matrix ``A`` and
mean-zero noise matrices ``B^t`` that are independent across steps.
"""

from .dynamics import (
    LyapunovFit,
    MomentSeries,
    SystemSpec,
    estimate_moments,
    exact_L2,
    exact_second_moment,
    fit_lyapunov,
    log_state_histogram,
    simulate_trajectory,
)
from .errors import *  # noqa: F401,F403
from .noise import NoiseModel, NoiseStats, epsilon_squared, noise_covariance, sample_noise
from .spectral import (
    SpectralSummary,
    angle_decomposition_check,
    dominant_triple,
    matrix_two_norm,
    rank1_power_error,
    spectral_summary,
)

__version__ = "0.1.0"
