"""Scalar system ``x_t = (a + b_t) x_{t-1}`` and the pure-noise limit."""

from math import comb
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from ..errors import UnsupportedNoise
from ..noise import NoiseModel
from .types import LyapunovEstimate


def noise_ratio_moments(a: float, b2: float, p: int, dist: str = "normal", truncate: Optional[float] = None):
    """``<(b/a)^k>`` for ``k = 1..p`` when ``b`` has variance ``b2``.

    ``dist`` is ``"normal"`` or ``"uniform"`` (on ``+-sqrt(3 b2)``).
    ``truncate`` rejects draws with ``|b| > truncate`` (normal only).
    """
    b = np.sqrt(b2)
    out = []
    for k in range(1, p + 1):
        if k % 2 or b == 0:
            m = 0.0
        elif dist == "normal" and truncate is None:
            m = float(stats.norm.moment(k, scale=b))
        elif dist == "normal":
            c = truncate / b
            m = float(stats.truncnorm.moment(k, -c, c, scale=b))
        elif dist == "uniform":
            h = np.sqrt(3.0) * b
            if truncate is not None:
                h = min(h, truncate)
            m = h**k / (k + 1)
        else:
            raise ValueError(f"unknown distribution {dist!r}")
        out.append(m / a**k)
    return out


def scalar_moment_exact(a: float, noise_moments: Sequence[float], p: int, t, x0: float = 1.0):
    """Exact ``<x_t^p>`` of the scalar system.

    Parameters
    ----------
    noise_moments : sequence
        ``<(b/a)^k>`` for ``k = 1..p`` (see :func:`noise_ratio_moments`).
    t : int or array
        Time(s) at which to evaluate.
    """
    if len(noise_moments) < p:
        raise ValueError(f"need {p} noise moments, got {len(noise_moments)}")
    growth = 1.0 + sum(comb(p, k) * noise_moments[k - 1] for k in range(1, p + 1))
    t = np.asarray(t, dtype=float)
    return x0**p * (a**p * growth) ** t


def scalar_Lp_exact(a: float, noise_moments: Sequence[float], p: int) -> LyapunovEstimate:
    growth = 1.0 + sum(comb(p, k) * noise_moments[k - 1] for k in range(1, p + 1))
    return LyapunovEstimate("scalar_exact", p, float(np.log(abs(a) ** p * growth)))


def scalar_Lp_approx(a: float, b2: float, p) -> LyapunovEstimate:
    """Small-noise log-normal estimate ``p log a + p(p-1)(b/a)^2 / 2``."""
    ratio2 = b2 / a**2
    value = p * np.log(abs(a)) + p * (p - 1) * ratio2 / 2.0
    note = ""
    if np.sqrt(ratio2) > 0.3:
        note = f"b/a = {np.sqrt(ratio2):.3g} exceeds 0.3; the expansion in b/a is unreliable"
    return LyapunovEstimate("scalar_approx", p, float(value), validity=note)


def noise_only_L2(model: NoiseModel, n: int, variances=None) -> LyapunovEstimate:
    """Second-moment exponent when the mean matrix vanishes.

    ``variances`` optionally gives an ``n x n`` array of unequal element
    variances, whose mean replaces ``b2``.
    """
    if model.kind not in ("UH", "T"):
        raise UnsupportedNoise(f"noise-only limit is defined for UH and T noise, not {model.kind}")
    b2 = model.b2 if variances is None else float(np.mean(variances))
    if variances is not None and np.shape(variances) != (n, n):
        raise ValueError("variances must be n x n")
    note = "" if variances is None else "unequal variances replaced by their mean"
    with np.errstate(divide="ignore"):
        value = float(np.log(n**model.k * b2))
    return LyapunovEstimate("noise_only", 2, value, validity=note)
