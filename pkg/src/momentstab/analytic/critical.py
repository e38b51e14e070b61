"""Critical noise variance and stability diagrams."""

from typing import Optional

import numpy as np
from scipy.optimize import brentq

from ..dynamics import SystemSpec, exact_L2
from ..errors import NonConvergence, UnstableMean, UnsupportedNoise
from ..noise import NoiseModel, NoiseStats
from ..spectral import SpectralSummary
from .bounds import convergence_bounds
from .types import CriticalReport

BISECTION_XTOL = 1e-14
_DENSE_MAX_N = 12


def bcrit_formula(lam: float, n: int, k: int, fufv: float, alpha1: float = 1.0) -> float:
    """``1 / (n^k + alpha1 f_u f_v lam^2 / (1 - lam^2))``."""
    lam2 = lam**2
    if lam2 >= 1:
        raise UnstableMean(f"lambda = {lam} is not inside the unit circle")
    return 1.0 / (n**k + alpha1 * fufv * lam2 / (1.0 - lam2))


def _exact_L2_at(A, model: NoiseModel, b2: float) -> float:
    sys = SystemSpec(A, model.with_b2(b2), np.ones(A.shape[0]))
    method = "dense" if A.shape[0] <= _DENSE_MAX_N else "power"
    return exact_L2(sys, method=method)


def bc2_exact(A, model: NoiseModel, guess: float, xtol: float = BISECTION_XTOL) -> float:
    """Root of ``exact_L2(b2) = 0`` for homogeneous noise.

    The bracket starts at ``[0, 2 guess]`` and doubles until the exponent
    changes sign.
    """
    A = np.asarray(A, dtype=float)
    if model.kind not in ("UH", "SH", "T"):
        raise UnsupportedNoise("exact critical value needs homogeneous noise")
    if _exact_L2_at(A, model, 0.0) >= 0:
        raise UnstableMean("unperturbed second moment already diverges")
    hi = 2.0 * guess if guess > 0 else 1.0
    for _ in range(200):
        if _exact_L2_at(A, model, hi) > 0:
            break
        hi *= 2.0
    else:
        raise NonConvergence("no sign change found while expanding the bracket")
    return float(brentq(lambda b2: _exact_L2_at(A, model, b2), 0.0, hi, xtol=xtol, rtol=4 * np.finfo(float).eps))


def critical_value(
    spec: SpectralSummary,
    stats: NoiseStats,
    model: NoiseModel,
    n: Optional[int] = None,
    A=None,
    bounds: bool = True,
    seed: int = 0,
) -> CriticalReport:
    """Critical ``b2`` where the second moment starts to diverge.

    Parameters
    ----------
    A : array, optional
        When given, the exact value is found by bisection on the exact
        second-moment exponent and the norm bounds are attached.
    """
    if model.kind not in ("UH", "T"):
        raise UnsupportedNoise("critical value formulas cover UH and T noise")
    n = spec.n if n is None else n
    lam = spec.lam
    if abs(lam) >= 1:
        raise UnstableMean(f"lambda = {lam} >= 1: the mean itself diverges")
    k = stats.k
    fufv = stats.f_u * stats.f_v
    alpha1 = float(spec.alpha_total[0] if k == 2 else spec.alpha[0])
    small = bcrit_formula(lam, n, k, fufv)
    large = bcrit_formula(lam, n, k, fufv, alpha1)
    exact = None
    bnd = {}
    if A is not None:
        exact = bc2_exact(A, model, small)
        if bounds:
            bnd = convergence_bounds(A, model, seed=seed)
    well = all(0.8 <= x <= 1.3 for x in (stats.f_u, stats.f_v, alpha1))
    return CriticalReport(
        bc2_small=small,
        bc2_large=large,
        bc2_unified=small,
        bc2_exact=exact,
        qc=float(n / abs(lam) * np.sqrt(small)),
        bounds=bnd,
        well_behaved=well,
    )


def mva_fufv(n: int, kind: str) -> float:
    """``f_u f_v`` for an all-equal matrix: 1 for UH, ``n^2`` for T."""
    if kind == "UH":
        return 1.0
    if kind == "T":
        return float(n**2)
    raise UnsupportedNoise(f"stability diagram needs UH or T noise, not {kind}")


def stability_diagram(n: int, kind: str, lambda_grid) -> np.ndarray:
    """Rows ``(lam, bc2, qc)`` over a grid of dominant eigenvalues.

    ``lambda_grid`` is either an iterable of values in ``(0, 1)`` or an
    integer ``m``, meaning ``lam = i / (m + 1)`` for ``i = 1..m``.
    """
    if np.isscalar(lambda_grid):
        m = int(lambda_grid)
        lams = np.arange(1, m + 1) / (m + 1)
    else:
        lams = np.asarray(list(lambda_grid), dtype=float)
    if np.any((lams <= 0) | (lams >= 1)):
        raise ValueError("lambda grid must lie in (0, 1)")
    k = 2 if kind == "T" else 1
    fufv = mva_fufv(n, kind)
    bc2 = np.array([bcrit_formula(l, n, k, fufv) for l in lams])
    qc = n / lams * np.sqrt(bc2)
    return np.column_stack([lams, bc2, qc])
