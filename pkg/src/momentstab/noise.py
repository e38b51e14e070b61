"""The five multiplicative noise models and their second-order statistics.

Kinds
-----
UH  uncorrelated homogeneous     <B_ij B_kl> = b2 d_ik d_jl
SH  symmetric homogeneous        <B_ij B_kl> = b2 (d_ik d_jl + d_il d_jk)
T   totally correlated           <B_ij B_kl> = b2
UP  uncorrelated proportional    <B_ij B_kl> = f q2 A_ij^2 d_ik d_jl
SP  symmetric proportional       <B_ij B_kl> = f q2 A_ij^2 (d_ik d_jl + d_il d_jk)

Homogeneous kinds take ``b2`` as the element variance whatever the
distribution. Proportional kinds draw ``B_ij = q A_ij xi`` with ``xi`` unit
normal or uniform on [-1, 1], so the element variance carries the factor
``f`` (1 or 1/3).
"""

from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
from scipy import stats

from .errors import AsymmetricSystem, ConfigError
from .spectral import SpectralSummary, as_matrix

KINDS = ("UH", "SH", "T", "UP", "SP")
HOMOGENEOUS = ("UH", "SH", "T")
PROPORTIONAL = ("UP", "SP")
SYMMETRIC = ("SH", "SP")
_F = {"normal": 1.0, "uniform": 1.0 / 3.0}
_SQRT3 = np.sqrt(3.0)


@dataclass(frozen=True)
class NoiseModel:
    kind: str
    b2: float = 0.0
    q: float = 0.0
    dist: str = "normal"
    truncate: Optional[float] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown noise kind {self.kind!r}; expected one of {KINDS}")
        if self.dist not in _F:
            raise ConfigError(f"unknown noise distribution {self.dist!r}")
        if not (self.b2 >= 0 and self.q >= 0):
            raise ConfigError("noise parameters b2 and q must be nonnegative")
        if self.truncate is not None and not self.truncate > 0:
            raise ConfigError("truncate must be positive when given")

    @property
    def f(self) -> float:
        return _F[self.dist]

    @property
    def homogeneous(self) -> bool:
        return self.kind in HOMOGENEOUS

    @property
    def k(self) -> int:
        return 2 if self.kind == "T" else 1

    def with_b2(self, b2: float) -> "NoiseModel":
        return NoiseModel(self.kind, b2=b2, q=self.q, dist=self.dist, truncate=self.truncate)

    def with_q(self, q: float) -> "NoiseModel":
        return NoiseModel(self.kind, b2=self.b2, q=q, dist=self.dist, truncate=self.truncate)

    def to_dict(self) -> dict:
        d = asdict(self)
        if self.homogeneous:
            d.pop("q")
        else:
            d.pop("b2")
        if self.truncate is None:
            d.pop("truncate")
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "NoiseModel":
        unknown = set(d) - {"kind", "b2", "q", "dist", "truncate"}
        if unknown:
            raise ConfigError(f"unknown noise fields: {sorted(unknown)}")
        try:
            return cls(
                kind=d["kind"],
                b2=float(d.get("b2", 0.0)),
                q=float(d.get("q", 0.0)),
                dist=d.get("dist", "normal"),
                truncate=None if d.get("truncate") is None else float(d["truncate"]),
            )
        except KeyError as exc:
            raise ConfigError("noise model needs a 'kind'") from exc


@dataclass(frozen=True)
class NoiseStats:
    """Small-noise parameter and the correlation constants of the iteration method.

    ``f_u``, ``f_v`` and ``k`` are only defined for UH and T noise and are
    ``None`` otherwise.
    """

    eps2: float
    f_u: Optional[float] = None
    f_v: Optional[float] = None
    k: Optional[int] = None


def _require_symmetric(model: NoiseModel, A: np.ndarray):
    if model.kind in SYMMETRIC and not np.allclose(A, A.T, rtol=0, atol=1e-12 * max(1.0, np.abs(A).max())):
        raise AsymmetricSystem(f"{model.kind} noise needs a symmetric matrix")


def _base_scale(model: NoiseModel, A: Optional[np.ndarray], n: int) -> np.ndarray:
    """Per-element scale multiplying the standard draw, before symmetrisation."""
    if model.homogeneous:
        s = np.full((n, n), np.sqrt(model.b2))
    else:
        if A is None:
            raise ValueError("proportional noise needs the matrix A")
        s = model.q * np.abs(A)
    if model.kind in SYMMETRIC:
        s = s.copy()
        s[np.diag_indices(n)] *= np.sqrt(2.0)
    return s


def _standard(model: NoiseModel, rng, shape) -> np.ndarray:
    # homogeneous kinds: unit variance; proportional kinds: unit scale
    if model.dist == "normal":
        return rng.standard_normal(shape)
    half = _SQRT3 if model.homogeneous else 1.0
    return rng.uniform(-half, half, shape)


def _draw_truncated(model, scale, rng, shape):
    z = _standard(model, rng, shape)
    if model.truncate is None:
        return z * scale
    bad = np.abs(z * scale) > model.truncate
    while np.any(bad):
        z[bad] = _standard(model, rng, int(bad.sum()))
        bad = np.abs(z * scale) > model.truncate
    return z * scale


def sample_noise(model: NoiseModel, A, rng: np.random.Generator, size: Optional[int] = None) -> np.ndarray:
    """Draw one noise matrix, or ``size`` independent ones stacked on axis 0."""
    A = as_matrix(A)
    n = A.shape[0]
    _require_symmetric(model, A)
    lead = () if size is None else (size,)
    if model.kind == "T":
        s = np.sqrt(model.b2)
        z = _draw_truncated(model, s, rng, lead + (1, 1))
        return np.broadcast_to(z, lead + (n, n)).copy()
    scale = _base_scale(model, A, n)
    B = _draw_truncated(model, scale, rng, lead + (n, n))
    if model.kind in SYMMETRIC:
        upper = np.triu(B)
        B = upper + np.swapaxes(np.triu(B, 1), -1, -2)
    return B


def _truncated_variance(scale: np.ndarray, bound: Optional[float], model: NoiseModel) -> np.ndarray:
    """Variance of ``scale * z`` for the model's standard draw, after rejection."""
    scale = np.asarray(scale, dtype=float)
    if model.dist == "normal":
        base = np.ones_like(scale)
    else:
        base = np.ones_like(scale) if model.homogeneous else np.full_like(scale, 1.0 / 3.0)
    var = base * scale**2
    if bound is None:
        return var
    out = var.copy()
    pos = scale > 0
    c = bound / scale[pos]
    if model.dist == "normal":
        out[pos] = scale[pos] ** 2 * stats.truncnorm.var(-c, c)
    else:
        half = _SQRT3 if model.homogeneous else 1.0
        h = np.minimum(half, c)
        out[pos] = scale[pos] ** 2 * h**2 / 3.0
    return out


def variance_matrix(model: NoiseModel, A) -> np.ndarray:
    """``<B_ij^2>`` for every element (truncation included)."""
    A = as_matrix(A)
    n = A.shape[0]
    if model.kind == "T":
        v = _truncated_variance(np.array([np.sqrt(model.b2)]), model.truncate, model)[0]
        return np.full((n, n), v)
    return _truncated_variance(_base_scale(model, A, n), model.truncate, model)


def noise_covariance(model: NoiseModel, A, i: int, j: int, k: int, l: int) -> float:
    """``<B_ij B_kl>`` from the model's correlation rule."""
    A = as_matrix(A)
    n = A.shape[0]
    for idx in (i, j, k, l):
        if not 0 <= idx < n:
            raise IndexError(f"index {idx} out of range for n={n}")
    d = lambda a, b: 1.0 if a == b else 0.0  # noqa: E731
    if model.homogeneous:
        c = model.b2
    else:
        c = model.f * model.q**2 * A[i, j] ** 2
    if model.kind in ("UH", "UP"):
        return c * d(i, k) * d(j, l)
    if model.kind in ("SH", "SP"):
        return c * (d(i, k) * d(j, l) + d(i, l) * d(j, k))
    return c


def correlation_constants(model: NoiseModel, spec: SpectralSummary):
    """``(f_u, f_v, k)`` for UH and T noise, ``(None, None, None)`` otherwise."""
    if model.kind == "UH":
        return 1.0, spec.v2, 1
    if model.kind == "T":
        return spec.sum_u**2, spec.sum_v**2, 2
    return None, None, None


def epsilon_squared(model: NoiseModel, spec: SpectralSummary, A) -> NoiseStats:
    """``<(v^T B u / lam)^2>`` in closed form for each noise kind."""
    A = as_matrix(A)
    _require_symmetric(model, A)
    u, v, lam2 = spec.u, spec.v, spec.lam**2
    if model.truncate is not None:
        # closed forms assume untruncated variances; use the exact quadratic form
        eps2 = _quadratic_form(model, A, u, v) / lam2
    elif model.kind == "UH":
        eps2 = spec.v2 * model.b2 / lam2
    elif model.kind == "SH":
        eps2 = model.b2 * (spec.v2 + float(v @ u) ** 2) / lam2
    elif model.kind == "T":
        eps2 = model.b2 * spec.sum_v**2 * spec.sum_u**2 / lam2
    elif model.kind == "UP":
        eps2 = model.f * model.q**2 * np.sum(np.outer(v**2, u**2) * A**2) / lam2
    else:
        eps2 = model.f * model.q**2 * np.sum(A**2 * (np.outer(v**2, u**2) + np.outer(v * u, v * u))) / lam2
    f_u, f_v, k = correlation_constants(model, spec)
    return NoiseStats(eps2=float(eps2), f_u=f_u, f_v=f_v, k=k)


def _quadratic_form(model: NoiseModel, A, u, v) -> float:
    V = variance_matrix(model, A)
    if model.kind == "T":
        return float(V[0, 0] * np.sum(v) ** 2 * np.sum(u) ** 2)
    base = float(np.sum(V * np.outer(v**2, u**2)))
    if model.kind in SYMMETRIC:
        off = V * np.outer(v * u, v * u)
        base += float(np.sum(off) - np.trace(off))
    return base
