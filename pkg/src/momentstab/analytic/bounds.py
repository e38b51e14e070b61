"""Norm-based sufficient conditions for moment convergence."""

from functools import lru_cache

import numpy as np

from ..errors import UnstableMean, UnsupportedNoise
from ..noise import NoiseModel, sample_noise
from ..rng import derive_rng
from ..spectral import as_matrix, dominant_triple, matrix_two_norm

NORM_SAMPLES = 1000


def mean_noise_norm(model: NoiseModel, A, samples: int = NORM_SAMPLES, seed: int = 0) -> float:
    """Sample mean of the spectral norm of ``B``."""
    A = as_matrix(A)
    if model.homogeneous:
        # the noise law does not involve A, so the estimate depends on n only
        return _homogeneous_norm(model, A.shape[0], samples, seed)
    return _sampled_norm(model, A, samples, seed)


def _sampled_norm(model, A, samples, seed) -> float:
    rng = derive_rng(seed, "analytic.mean_noise_norm")
    B = sample_noise(model, A, rng, size=samples)
    return float(np.mean(np.linalg.norm(B, ord=2, axis=(1, 2))))


@lru_cache(maxsize=64)
def _homogeneous_norm(model: NoiseModel, n: int, samples: int, seed: int) -> float:
    return _sampled_norm(model, np.zeros((n, n)), samples, seed)


def convergence_bounds(A, model: NoiseModel, n=None, samples: int = NORM_SAMPLES, seed: int = 0) -> dict:
    """Sufficient thresholds on ``b2`` for homogeneous noise.

    ``all_moment``: ``<|B|_2> < 1 - |A|_2``. The norm scales linearly in
    ``b``, so one Monte Carlo estimate of ``<|B|_2> / b`` turns the
    condition into a bound on ``b2``.

    ``second_moment``: ``|A|_2^2 + n^k b2 < 1``.

    ``all_moment_large_n`` and ``second_moment_large_n`` replace the norm
    of ``A`` by ``lam`` and use the large-n noise norm: ``2 b sqrt(n)``
    for UH and SH, ``b n sqrt(2 / pi)`` for T.
    Thresholds are 0 when the norm of ``A`` is already at least 1.
    """
    A = as_matrix(A)
    n = A.shape[0] if n is None else n
    if model.kind not in ("UH", "SH", "T"):
        raise UnsupportedNoise("bounds are stated for homogeneous noise")
    lam, _, _ = dominant_triple(A)
    if abs(lam) >= 1:
        raise UnstableMean(f"lambda = {lam} >= 1")
    normA = matrix_two_norm(A)
    unit = mean_noise_norm(model.with_b2(1.0), A, samples, seed)
    k = model.k
    large_n_unit = n * np.sqrt(2.0 / np.pi) if model.kind == "T" else 2.0 * np.sqrt(n)
    return {
        "all_moment": max(0.0, 1.0 - normA) ** 2 / unit**2,
        "second_moment": max(0.0, 1.0 - normA**2) / n**k,
        "all_moment_large_n": (1.0 - abs(lam)) ** 2 / large_n_unit**2,
        "second_moment_large_n": (1.0 - lam**2) / n**k,
        "norm_A": normA,
        "mean_unit_noise_norm": unit,
    }
