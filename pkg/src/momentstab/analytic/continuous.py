"""Continuous-time counterpart in the all-equal-matrix limit."""

from .types import LyapunovEstimate


def continuous_mva_Lp(n: int, a: float, b2: float, p) -> LyapunovEstimate:
    """Exponent of ``dx = ((aG - I) dt + b G dw) x`` with ``n a = 1 - delta``.

    The discrete analogue, first order in ``delta``, is returned in
    ``extra["discrete"]``.
    """
    delta = 1.0 - n * a
    noise = p * (p - 1) * n**2 * b2 / 2.0
    cont = -p * delta + noise
    disc = -p * delta + noise * (1.0 - 2.0 * delta)
    return LyapunovEstimate(
        "continuous_mva",
        p,
        float(cont),
        validity="first order in delta and b2",
        extra={"discrete": float(disc), "delta": float(delta)},
    )
