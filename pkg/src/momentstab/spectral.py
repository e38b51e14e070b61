"""Eigen-structure and conditioning diagnostics of the unperturbed matrix.

All functions take a plain square ``numpy`` array. The dominant eigenvalue
must be real and strictly dominant in magnitude; anything else is rejected
with :class:`~momentstab.errors.NonSimpleDominant` or
:class:`~momentstab.errors.ComplexDominant`.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ComplexDominant, DefectiveMatrix, NonSimpleDominant

DOMINANCE_RTOL = 1e-9
IMAG_RTOL = 1e-10


def as_matrix(A) -> np.ndarray:
    """Validate and return ``A`` as a finite square float array."""
    A = np.array(A, dtype=float)
    if A.ndim == 0:
        A = A.reshape(1, 1)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise ValueError(f"expected a nonempty square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


@dataclass(frozen=True)
class SpectralSummary:
    """Conditioning diagnostics of a matrix with a simple dominant eigenvalue.

    ``alpha[r-1]`` holds ``sum((A**r)**2) / (v2 * lam**(2r))`` (uncorrelated
    noise convention). ``alpha_total[r-1]`` holds
    ``sum(A**r)**2 / (sum(u)**2 sum(v)**2 lam**(2r))``, the quantity that
    plays the same role under totally correlated noise.
    """

    n: int
    lam: float
    lambda2_abs: float
    gap: float
    u: np.ndarray
    v: np.ndarray
    kappa: float
    v2: float
    w2: float
    henrici: float
    alpha: np.ndarray
    alpha_total: np.ndarray

    @property
    def sum_u(self) -> float:
        return float(np.sum(self.u))

    @property
    def sum_v(self) -> float:
        return float(np.sum(self.v))

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "lambda": self.lam,
            "lambda2_abs": self.lambda2_abs,
            "gap": self.gap,
            "u": self.u.tolist(),
            "v": self.v.tolist(),
            "kappa": self.kappa,
            "v2": self.v2,
            "w2": self.w2,
            "henrici": self.henrici,
            "alpha": self.alpha.tolist(),
            "alpha_total": self.alpha_total.tolist(),
        }


def _real_vector(z: np.ndarray) -> np.ndarray:
    # fix the arbitrary complex phase using the largest component
    k = np.argmax(np.abs(z))
    z = z * (np.abs(z[k]) / z[k])
    return z.real


def _check_dominance(w: np.ndarray, scale: float) -> int:
    order = np.argsort(-np.abs(w), kind="stable")
    i = order[0]
    lam = w[i]
    if abs(lam.imag) > IMAG_RTOL * max(scale, 1e-300):
        raise ComplexDominant(f"dominant eigenvalue {lam} is not real")
    top = abs(lam)
    second = abs(w[order[1]]) if w.size > 1 else 0.0
    if top == 0.0 or (top - second) / top <= DOMINANCE_RTOL:
        raise NonSimpleDominant(
            f"dominant eigenvalue not simple/strictly dominant (|l1|={top}, |l2|={second})"
        )
    return i


def dominant_triple(A):
    """Dominant eigenvalue with its right and left eigenvectors.

    Returns
    -------
    lam : float
        Dominant eigenvalue (real, may be negative).
    u : ndarray
        Right eigenvector with ``|u| = 1``, sign chosen so ``sum(u) >= 0``.
    v : ndarray
        Left eigenvector scaled so that ``v @ u = 1``.
    """
    A = as_matrix(A)
    scale = np.linalg.norm(A)
    w, vl, vr = scipy.linalg.eig(A, left=True, right=True)
    i = _check_dominance(w, scale)
    lam = float(w[i].real)
    u = _real_vector(vr[:, i])
    u /= np.linalg.norm(u)
    if u.sum() < 0:
        u = -u
    v = _real_vector(vl[:, i])
    v = v / (v @ u)
    return lam, u, v


def second_eigenvalue_abs(A) -> float:
    w = np.linalg.eigvals(as_matrix(A))
    if w.size == 1:
        return 0.0
    return float(np.sort(np.abs(w))[-2])


def henrici_number(A) -> float:
    """Frobenius norm of the commutator ``A A^T - A^T A``."""
    A = as_matrix(A)
    return float(np.linalg.norm(A @ A.T - A.T @ A))


def alpha_sequence(A, lam, u, v, r_max, convention="UH") -> np.ndarray:
    """Successive corrections to the rank-1 approximation of ``A**r``.

    ``convention="UH"`` uses the sum of squared entries normalised by
    ``v2``; ``"T"`` uses the squared sum of entries normalised by
    ``sum(u)**2 sum(v)**2``.
    """
    A = as_matrix(A)
    out = np.empty(r_max)
    if convention == "UH":
        denom = float(v @ v)
    elif convention == "T":
        denom = float(np.sum(u) ** 2 * np.sum(v) ** 2)
    else:
        raise ValueError(f"unknown alpha convention {convention!r}")
    P = np.eye(A.shape[0])
    for r in range(1, r_max + 1):
        # divide by lam each step so powers of ill-scaled matrices stay finite
        P = (P @ A) / lam
        if convention == "UH":
            out[r - 1] = np.sum(P * P) / denom
        else:
            out[r - 1] = np.sum(P) ** 2 / denom if denom > 0 else np.nan
    return out


def spectral_summary(A, r_max: int = 10) -> SpectralSummary:
    A = as_matrix(A)
    lam, u, v = dominant_triple(A)
    l2 = second_eigenvalue_abs(A)
    v2 = float(v @ v)
    return SpectralSummary(
        n=A.shape[0],
        lam=lam,
        lambda2_abs=l2,
        gap=abs(lam) - l2,
        u=u,
        v=v,
        kappa=float(np.sqrt(v2)),
        v2=v2,
        w2=float(np.sum(v**2 * u**2)),
        henrici=henrici_number(A),
        alpha=alpha_sequence(A, lam, u, v, r_max, "UH"),
        alpha_total=alpha_sequence(A, lam, u, v, r_max, "T"),
    )


def matrix_two_norm(A) -> float:
    """Spectral norm, ``sqrt(rho(A A^T))``."""
    return float(np.linalg.norm(as_matrix(A), 2))


def rank1_power_error(A, p: int) -> float:
    """Relative Frobenius error of ``A**p ~ lam**p u v^T``."""
    if p < 1:
        raise ValueError("p must be >= 1")
    A = as_matrix(A)
    lam, u, v = dominant_triple(A)
    # work with (A/lam)**p; the ratio is scale free
    P = np.linalg.matrix_power(A / lam, p)
    return float(np.linalg.norm(P - np.outer(u, v)) / np.linalg.norm(P))


def angle_decomposition_check(A, cond_max: float = 1e12) -> float:
    """Residual of ``v2 = 1 - sum_{i>1} (u . e_i^R)(v . e_i^L)``.

    ``e_i^R`` are the columns of the eigenvector matrix ``P`` and ``e_i^L``
    the rows of ``P^{-1}``; the dominant column is replaced by ``u`` so that
    the dominant row of ``P^{-1}`` is ``v``.
    """
    A = as_matrix(A)
    lam, u, v = dominant_triple(A)
    w, P = np.linalg.eig(A)
    i = int(np.argmin(np.abs(w - lam)))
    P = P.astype(complex)
    P[:, i] = u
    if np.linalg.cond(P) > cond_max:
        raise DefectiveMatrix("eigenvector matrix is numerically singular")
    Pinv = np.linalg.solve(P, np.eye(A.shape[0]))
    others = [j for j in range(A.shape[0]) if j != i]
    s = sum((u @ P[:, j]) * (Pinv[j, :] @ v) for j in others)
    return float(abs((v @ v) - 1.0 + s))


def stochastic_lambda2_bound(A) -> float:
    """Upper bound on ``|lambda_2|`` for a row-stochastic matrix.

    ``min(1 - sum_j min_i A_ij, sum_j max_i A_ij - 1)`` (column extremes).
    """
    A = as_matrix(A)
    return float(min(1.0 - A.min(axis=0).sum(), A.max(axis=0).sum() - 1.0))
