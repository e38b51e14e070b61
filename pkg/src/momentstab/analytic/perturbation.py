"""Small-noise perturbation expansion around the dominant mode."""

import warnings

import numpy as np

from ..errors import RegimeViolation
from ..noise import NoiseStats
from ..spectral import SpectralSummary
from .types import LyapunovEstimate

SMALL_NOISE_WARN = 0.1


def perturbation_Lp(spec: SpectralSummary, stats: NoiseStats, p, symmetric_noise: bool = True) -> LyapunovEstimate:
    """``L_p ~ p log(lam) + p(p-1) eps2 / 2``.

    The returned estimate carries ``moment(t, x0)``, the matching prediction
    ``|v . x0|^p exp(t L_p)`` of ``<|x^t|^p>``, under ``extra["moment"]``.
    The neglected terms are ``O(eps^4)`` for symmetrically distributed
    noise and ``O(eps^3)`` otherwise.
    """
    eps2 = stats.eps2
    value = p * np.log(abs(spec.lam)) + p * (p - 1) * eps2 / 2.0
    order = 4 if symmetric_noise else 3
    notes = [f"error O(eps^{order}); assumes |eps| < 1 with probability 1"]
    if eps2 > SMALL_NOISE_WARN:
        warnings.warn(f"eps^2 = {eps2:.3g} is not small; perturbation estimate unreliable", RegimeViolation, stacklevel=2)
        notes.append(f"eps^2 = {eps2:.3g} > {SMALL_NOISE_WARN}")
    v = spec.v

    def moment(t, x0):
        return np.abs(v @ np.asarray(x0, dtype=float)) ** p * np.exp(np.asarray(t, dtype=float) * value)

    return LyapunovEstimate("perturbation", p, float(value), validity="; ".join(notes), extra={"eps2": eps2, "moment": moment})


def large_n_L2(n: int, a: float, sigma_a2: float, b2: float, symmetric: bool = False) -> LyapunovEstimate:
    """Large-``n`` second-moment exponent for homogeneous noise.

    The dominant eigenvalue is taken as ``n a`` for an arbitrary matrix and
    ``n a + sigma_a2 / a`` for a symmetric one with element mean ``a`` and
    element variance ``sigma_a2``.
    """
    if symmetric:
        lam = n * a + sigma_a2 / a
        damping = (n**2 + 2 * n * sigma_a2 / a**2) / 2.0
    else:
        lam = n * a
        damping = float(n**2)
    value = 2 * np.log(abs(lam)) + (b2 / a**2) / damping
    return LyapunovEstimate("large_n", 2, float(value), validity="asymptotic in n", extra={"lam": float(lam)})
