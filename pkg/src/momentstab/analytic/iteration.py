"""Iteration method: a finite Markov chain for the second moment.

The state ``x^t`` is split according to how many steps ago the most recent
noise matrix acted. With ``alpha_m`` describing how well ``A**m`` is captured
by its dominant mode, the squared norms of the pieces evolve by the
nonnegative matrix ``M_r`` built here. ``alpha_m`` is used exactly for
``m < r`` and set to 1 beyond, so ``r = 1`` is the rank-1 closure and the
estimate improves as ``r`` grows.
"""

import warnings

import numpy as np

from ..errors import RegimeViolation, UnsupportedNoise
from ..noise import NoiseModel, NoiseStats
from ..spectral import SpectralSummary
from .types import LyapunovEstimate

def model_alpha(spec: SpectralSummary, model: NoiseModel) -> np.ndarray:
    """The alpha sequence appropriate for the noise kind."""
    if model.kind == "UH":
        return spec.alpha
    if model.kind == "T":
        return spec.alpha_total
    raise UnsupportedNoise(f"alpha corrections are defined for UH and T noise, not {model.kind}")


def iteration_matrix(lam: float, alpha, f_u: float, f_v: float, k: int, n: int, b2: float, r: int) -> np.ndarray:
    """The ``(r+1) x (r+1)`` matrix ``M_r``.

    State order is ``[>= r A's since the last B, r-1, ..., 1, 0]``.
    ``alpha`` must hold at least ``r - 1`` entries (``alpha[0]`` is
    ``alpha_1``).
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    alpha = np.asarray(alpha, dtype=float)
    if alpha.size < r - 1:
        raise ValueError(f"need {r - 1} alpha values for r={r}")
    l2 = lam**2
    a = np.concatenate([[1.0], alpha[: r - 1], [1.0]])  # a[m] = alpha_m with alpha_0 := 1 placeholder
    M = np.zeros((r + 1, r + 1))
    M[0, 0] = l2
    # state with j A's sits at index r - j; index 0 collects j >= r
    for j in range(1, r + 1):
        src = r - j + 1
        dst = r - j
        if j == 1:
            M[dst, src] = l2 * a[1] * f_v / n
        else:
            M[dst, src] = l2 * a[j] / a[j - 1]
    M[r, :] = n * f_u * b2
    M[r, r] = n**k * b2
    return M


def iteration_L2(spec: SpectralSummary, stats: NoiseStats, model: NoiseModel, r: int = 1) -> LyapunovEstimate:
    """Log of the largest eigenvalue of ``M_r``.

    UH and T noise support any ``r >= 1``. UP noise is only available at
    ``r = 1``, via the closed form in ``w2``.
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    if model.kind in ("UP", "SP") and r > 1:
        raise UnsupportedNoise("proportional noise only supports r = 1")
    if model.kind == "UP":
        s = model.f * model.q**2 * spec.w2
        mu = spec.lam**2 * (1 + s + np.sqrt((1 - s) ** 2 + 4 * s * spec.w2)) / 2.0
        return LyapunovEstimate("iteration_r", 2, float(np.log(mu)), r=1, validity="rank-1 approximation of A")
    if model.kind not in ("UH", "T"):
        raise UnsupportedNoise(f"iteration method is not available for {model.kind} noise")
    if model.b2 == 0:
        return LyapunovEstimate("iteration_r", 2, float(2 * np.log(abs(spec.lam))), r=r)
    alpha = model_alpha(spec, model)
    if alpha.size < r - 1:
        raise ValueError(f"spectral summary holds {alpha.size} alphas; r={r} needs {r - 1}")
    M = iteration_matrix(spec.lam, alpha, stats.f_u, stats.f_v, stats.k, spec.n, model.b2, r)
    # M_r is small and nonnegative, so its Perron root is the largest modulus
    mu = float(np.max(np.abs(np.linalg.eigvals(M))))
    return LyapunovEstimate("iteration_r", 2, float(np.log(mu)), r=r)


def large_noise_L2(spec: SpectralSummary, stats: NoiseStats, n: int, b2: float) -> LyapunovEstimate:
    """First order in ``delta = lam^2 / (n^k b2)`` around the pure-noise limit.

    ``stats`` must come from UH (``k = 1``) or T (``k = 2``) noise.
    """
    if stats.f_u is None or stats.f_v is None or stats.k is None:
        raise UnsupportedNoise("large-noise limit needs UH or T noise")
    k = stats.k
    alpha1 = float(spec.alpha_total[0] if k == 2 else spec.alpha[0])
    nk_b2 = n**k * b2
    delta = spec.lam**2 / nk_b2
    note = ""
    if delta >= 1:
        warnings.warn(f"delta = {delta:.3g} >= 1: outside the large-noise regime", RegimeViolation, stacklevel=2)
        note = f"delta = {delta:.3g} >= 1"
    value = np.log(nk_b2) + delta * alpha1 * stats.f_u * stats.f_v / n**k
    return LyapunovEstimate("large_noise", 2, float(value), validity=note, extra={"delta": float(delta)})
