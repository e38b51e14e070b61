"""Monte Carlo simulation of ``x^t = (A + B^t) x^{t-1}`` and the exact
second-moment propagator used to grade every approximation.

Ensemble runs are processed in fixed-size blocks, each with its own random
stream derived from ``(seed, block index)``. Block results are concatenated
in block order, so the output does not depend on the number of workers.

Inside the ensemble engine every run is carried as a unit direction plus a
log-magnitude. Runs whose magnitude exceeds ``OVERFLOW_MAGNITUDE`` are
counted as flagged but still contribute to the moment estimates.
"""

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (
    AsymmetricSystem,
    ConfigError,
    DegenerateWindow,
    NonConvergence,
    NonSimpleDominant,
    ComplexDominant,
    OverflowWarning,
    SignFlip,
    UnsupportedNoise,
)
from .noise import SYMMETRIC, NoiseModel, sample_noise, variance_matrix
from .rng import derive_rng
from .spectral import as_matrix, dominant_triple

OVERFLOW_MAGNITUDE = 1e100
BLOCK_SIZE = 2048
BOOTSTRAP_RESAMPLES = 200
_BOOT_CHUNK = 25
HEAVY_TAIL_CAVEAT = (
    "fitted exponent is positive: finite ensembles underestimate divergent "
    "moments at large t because the dominating rare events are seldom sampled"
)


@dataclass(frozen=True)
class SystemSpec:
    A: np.ndarray
    noise: NoiseModel
    x0: np.ndarray

    def __post_init__(self):
        A = as_matrix(self.A)
        x0 = np.array(self.x0, dtype=float).reshape(-1)
        if x0.shape[0] != A.shape[0]:
            raise ConfigError(f"x0 has length {x0.shape[0]}, matrix is {A.shape[0]}x{A.shape[0]}")
        if not np.any(x0):
            raise ConfigError("x0 must be nonzero")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "x0", x0)
        try:
            _, _, v = dominant_triple(A)
        except (NonSimpleDominant, ComplexDominant):
            return
        xs = x0 / np.max(np.abs(x0))  # scaled so the norms below cannot overflow
        if abs(v @ xs) < 1e-8 * np.linalg.norm(v) * np.linalg.norm(xs):
            warnings.warn("x0 is orthogonal to the left dominant eigenvector", stacklevel=3)

    @property
    def n(self) -> int:
        return self.A.shape[0]


@dataclass
class Trajectory:
    states: np.ndarray
    overflowed: bool = False


def simulate_trajectory(sys: SystemSpec, t_max: int, rng: np.random.Generator) -> Trajectory:
    """One realisation ``x^0 .. x^t_max``; truncated if it leaves float range."""
    if t_max < 1:
        raise ValueError("t_max must be >= 1")
    states = [sys.x0.copy()]
    x = sys.x0.copy()
    for _ in range(t_max):
        B = sample_noise(sys.noise, sys.A, rng)
        with np.errstate(over="ignore", invalid="ignore"):
            x = (sys.A + B) @ x
        if not np.all(np.isfinite(x)):
            warnings.warn("trajectory overflowed; truncated", OverflowWarning, stacklevel=2)
            return Trajectory(np.array(states), overflowed=True)
        states.append(x)
    return Trajectory(np.array(states))


@dataclass
class _BlockResult:
    logscale: np.ndarray      # (m, T+1)
    direction: np.ndarray     # (m, n) at t_max
    sum_x: np.ndarray         # (T+1, n)
    sum_x2: np.ndarray        # (T+1, n)


def _run_block(sys: SystemSpec, t_max: int, m: int, rng: np.random.Generator) -> _BlockResult:
    n = sys.n
    A_T = sys.A.T
    nrm0 = np.linalg.norm(sys.x0)
    d = np.tile(sys.x0 / nrm0, (m, 1))
    ls = np.full(m, np.log(nrm0))
    logscale = np.empty((m, t_max + 1))
    logscale[:, 0] = ls
    sum_x = np.zeros((t_max + 1, n))
    sum_x2 = np.zeros((t_max + 1, n))
    sum_x[0] = m * sys.x0
    sum_x2[0] = m * sys.x0**2
    for t in range(1, t_max + 1):
        B = sample_noise(sys.noise, sys.A, rng, size=m)
        y = d @ A_T + np.einsum("mij,mj->mi", B, d)
        nrm = np.linalg.norm(y, axis=1)
        alive = nrm > 0
        d = np.where(alive[:, None], y / np.where(alive, nrm, 1.0)[:, None], d)
        with np.errstate(divide="ignore"):
            ls = ls + np.log(nrm)
        logscale[:, t] = ls
        with np.errstate(over="ignore", invalid="ignore"):
            x = d * np.exp(ls)[:, None]
            sum_x[t] = x.sum(axis=0)
            sum_x2[t] = (x * x).sum(axis=0)
    return _BlockResult(logscale, d, sum_x, sum_x2)


def _run_ensemble(sys, t_max, runs, seed, purpose, workers=None):
    if runs < 1:
        raise ValueError("runs must be >= 1")
    sizes = [min(BLOCK_SIZE, runs - s) for s in range(0, runs, BLOCK_SIZE)]

    def job(b):
        return _run_block(sys, t_max, sizes[b], derive_rng(seed, purpose, b))

    workers = workers or os.cpu_count() or 1
    if workers == 1 or len(sizes) == 1:
        blocks = [job(b) for b in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(job, range(len(sizes))))
    return blocks


@dataclass
class MomentSeries:
    """Ensemble estimates of ``<|x^t|^p>`` for ``t = 0..t_max``.

    ``estimates[t, i]`` is the moment of order ``p_orders[i]``;
    ``log_estimates`` holds the same values in log form and stays finite
    when the moments themselves overflow. ``replicates`` holds bootstrap
    replicates of ``log_estimates`` (shape ``(resamples, T+1, P)``).
    """

    times: np.ndarray
    p_orders: list
    estimates: np.ndarray
    stderr: np.ndarray
    log_estimates: np.ndarray
    flagged_runs: np.ndarray
    runs: int
    seed: Optional[int]
    replicates: Optional[np.ndarray] = None
    mean_state: Optional[np.ndarray] = None
    mean_state_stderr: Optional[np.ndarray] = None

    def column(self, p) -> int:
        return self.p_orders.index(p)

    def rows(self):
        """``(t, p, estimate, stderr, flagged_runs)`` tuples, t-major."""
        for ti, t in enumerate(self.times):
            for pi, p in enumerate(self.p_orders):
                yield int(t), p, float(self.estimates[ti, pi]), float(self.stderr[ti, pi]), int(self.flagged_runs[ti])


def _bootstrap_counts(runs: int, resamples: int, rng: np.random.Generator):
    for _ in range(resamples):
        yield np.bincount(rng.integers(0, runs, size=runs), minlength=runs)


def estimate_moments(
    sys: SystemSpec,
    p_list: Sequence[float],
    t_max: int,
    runs: int,
    seed: int,
    workers: Optional[int] = None,
    resamples: int = BOOTSTRAP_RESAMPLES,
) -> MomentSeries:
    """Ensemble averages of ``|x^t|^p`` with bootstrap standard errors."""
    p_list = list(p_list)
    if not p_list:
        raise ValueError("p_list must be nonempty")
    if t_max < 1:
        raise ValueError("t_max must be >= 1")
    blocks = _run_ensemble(sys, t_max, runs, seed, "dynamics.estimate_moments", workers)
    logscale = np.concatenate([b.logscale for b in blocks], axis=0)
    sum_x = sum(b.sum_x for b in blocks)
    sum_x2 = sum(b.sum_x2 for b in blocks)
    T1 = t_max + 1
    P = len(p_list)

    est = np.empty((T1, P))
    log_est = np.empty((T1, P))
    se = np.zeros((T1, P))
    scaled, shift = [], []
    for i, p in enumerate(p_list):
        lv = p * logscale
        mx = np.max(lv, axis=0)
        mx = np.where(np.isfinite(mx), mx, 0.0)
        sc = np.exp(lv - mx)
        with np.errstate(divide="ignore", over="ignore"):
            log_est[:, i] = mx + np.log(sc.mean(axis=0))
            est[:, i] = np.exp(log_est[:, i])
        scaled.append(sc)
        shift.append(mx)
    reps = None
    if resamples:
        rep = np.empty((P, resamples, T1))
        counts = _bootstrap_counts(runs, resamples, derive_rng(seed, "dynamics.bootstrap"))
        for c0 in range(0, resamples, _BOOT_CHUNK):
            W = np.array([next(counts) for _ in range(min(_BOOT_CHUNK, resamples - c0))], dtype=float) / runs
            for i in range(P):
                rep[i, c0:c0 + W.shape[0]] = W @ scaled[i]
        reps = np.empty((resamples, T1, P))
        for i in range(P):
            with np.errstate(divide="ignore", over="ignore"):
                reps[:, :, i] = shift[i] + np.log(rep[i])
                se[:, i] = rep[i].std(axis=0, ddof=1) * np.exp(shift[i])
    # exact at t = 0
    x0n = np.linalg.norm(sys.x0)
    for i, p in enumerate(p_list):
        est[0, i] = x0n**p
        log_est[0, i] = p * np.log(x0n)
        se[0, i] = 0.0
    flagged = (logscale > np.log(OVERFLOW_MAGNITUDE)).sum(axis=0)
    mean_state = sum_x / runs
    with np.errstate(over="ignore", invalid="ignore"):
        var_state = np.maximum(sum_x2 / runs - mean_state**2, 0.0) * runs / max(runs - 1, 1)
    return MomentSeries(
        times=np.arange(T1),
        p_orders=p_list,
        estimates=est,
        stderr=se,
        log_estimates=log_est,
        flagged_runs=flagged,
        runs=runs,
        seed=seed,
        replicates=reps,
        mean_state=mean_state,
        mean_state_stderr=np.sqrt(var_state / runs),
    )


@dataclass
class LyapunovFit:
    p: float
    L_p: float
    ci: float
    window: tuple
    caveat: Optional[str] = None


def _slope(t: np.ndarray, y: np.ndarray) -> float:
    tc = t - t.mean()
    return float(tc @ (y - y.mean()) / (tc @ tc))


def fit_lyapunov(series: MomentSeries, p, window, z: float = 3.0) -> LyapunovFit:
    """Least-squares slope of ``log <|x^t|^p>`` over ``window = (t_lo, t_hi)``.

    The half-width ``ci`` is ``z`` times the bootstrap standard deviation of
    the slope when replicates are available, otherwise ``z`` times the
    slope error propagated from ``stderr`` assuming independent points.
    """
    t_lo, t_hi = int(window[0]), int(window[1])
    times = np.asarray(series.times)
    if t_lo < times[0] or t_hi > times[-1] or t_hi - t_lo + 1 < 5:
        raise DegenerateWindow(f"window {window} must hold >= 5 points inside {times[0]}..{times[-1]}")
    i = series.column(p)
    sel = (times >= t_lo) & (times <= t_hi)
    t = times[sel].astype(float)
    y = series.log_estimates[sel, i]
    if not np.all(np.isfinite(y)):
        raise DegenerateWindow("nonpositive or non-finite estimates inside the window")
    L = _slope(t, y)
    if series.replicates is not None and series.replicates.shape[0] > 1:
        rep = series.replicates[:, sel, i]
        ok = np.all(np.isfinite(rep), axis=1)
        slopes = np.array([_slope(t, r) for r in rep[ok]])
        sd = float(slopes.std(ddof=1)) if slopes.size > 1 else 0.0
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            sig = np.where(series.estimates[sel, i] > 0, series.stderr[sel, i] / series.estimates[sel, i], 0.0)
        tc = t - t.mean()
        w = tc / (tc @ tc)
        sd = float(np.sqrt(np.sum(w**2 * sig**2)))
    caveat = HEAVY_TAIL_CAVEAT if (L > 0 and p >= 2) else None
    return LyapunovFit(p=p, L_p=L, ci=z * sd, window=(t_lo, t_hi), caveat=caveat)


# ----------------------------------------------------------------------------
# exact second-moment propagation
# ----------------------------------------------------------------------------

def noise_map(sys: SystemSpec):
    """The linear map ``S -> <B S B^T>`` for symmetric ``S``."""
    model, A = sys.noise, sys.A
    if model.kind in SYMMETRIC and not np.allclose(A, A.T, rtol=0, atol=1e-12 * max(1.0, np.abs(A).max())):
        if model.kind == "SP":
            raise UnsupportedNoise("SP noise with an asymmetric matrix is not supported")
        raise AsymmetricSystem("SH noise needs a symmetric matrix")
    V = variance_matrix(model, A)
    n = sys.n
    if model.kind == "T":
        c = V[0, 0]
        G = np.ones((n, n))
        return lambda S: c * S.sum() * G
    if model.kind in ("UH", "UP"):
        return lambda S: np.diag(V @ np.diag(S))
    Voff = V.copy()
    np.fill_diagonal(Voff, 0.0)
    return lambda S: np.diag(V @ np.diag(S)) + Voff * S


def second_moment_operator(sys: SystemSpec):
    """``S -> A S A^T + <B S B^T>``, the one-step map of ``E[x x^T]``."""
    N = noise_map(sys)
    A = sys.A
    return lambda S: A @ S @ A.T + N(S)


def exact_second_moment(sys: SystemSpec, t_max: int) -> np.ndarray:
    """``<|x^t|^2>`` for ``t = 0..t_max`` by exact covariance propagation."""
    K = second_moment_operator(sys)
    S = np.outer(sys.x0, sys.x0)
    out = np.empty(t_max + 1)
    out[0] = np.trace(S)
    for t in range(1, t_max + 1):
        S = K(S)
        out[t] = np.trace(S)
    return out


def _vech_basis(n):
    idx = [(a, b) for a in range(n) for b in range(a, n)]
    return idx


def operator_matrix(sys: SystemSpec) -> np.ndarray:
    """Dense matrix of the second-moment map on the symmetric subspace.

    Coordinates are the upper-triangle entries ``S_ab, a <= b``.
    """
    K = second_moment_operator(sys)
    n = sys.n
    idx = _vech_basis(n)
    M = np.empty((len(idx), len(idx)))
    rows = tuple(np.array(i) for i in zip(*idx))
    for c, (a, b) in enumerate(idx):
        E = np.zeros((n, n))
        E[a, b] = E[b, a] = 1.0
        M[:, c] = K(E)[rows]
    return M


def exact_L2(sys: SystemSpec, method: str = "power", tol: float = 1e-12, max_iter: int = 100_000) -> float:
    """Exact second-moment Lyapunov exponent.

    Log of the spectral radius of the second-moment map, by power iteration
    from the identity (``method="power"``) or by a dense eigensolve of
    :func:`operator_matrix` (``method="dense"``).
    """
    if method == "dense":
        w = np.linalg.eigvals(operator_matrix(sys))
        return float(np.log(np.max(np.abs(w))))
    if method != "power":
        raise ValueError(f"unknown method {method!r}")
    K = second_moment_operator(sys)
    S = np.eye(sys.n) / sys.n
    mu = np.nan
    res = np.inf
    for _ in range(max_iter):
        S1 = K(S)
        mu = np.trace(S1)
        if mu <= 0:
            return float("-inf")
        res = np.linalg.norm(S1 - mu * S) / np.linalg.norm(S1)
        S = S1 / mu
        if res <= tol:
            return float(np.log(mu))
    raise NonConvergence(f"power iteration did not converge in {max_iter} steps (residual {res:.3g})", residual=res)


@dataclass
class LogHistogram:
    samples: np.ndarray
    mean: float
    sd: float
    sign_flips: int
    runs: int
    t: int
    predicted_mean: Optional[float] = None
    predicted_sd: Optional[float] = None
    meta: dict = field(default_factory=dict)


def log_state_histogram(
    sys: SystemSpec,
    t: int,
    runs: int,
    seed: int,
    eps2: Optional[float] = None,
    component: int = 0,
    workers: Optional[int] = None,
) -> LogHistogram:
    """Samples of ``log(x^t_c / <x^t_c>)`` with their Gaussian fit.

    ``<x^t_c>`` is the exact expected value ``(A^t x0)_c``. Runs with
    ``x^t_c / <x^t_c> <= 0`` are excluded and counted in ``sign_flips``.
    If ``eps2`` is given, the small-noise predictions ``-t eps2 / 2`` and
    ``sqrt(t eps2)`` are attached.
    """
    expected = (np.linalg.matrix_power(sys.A, t) @ sys.x0)[component]
    if expected == 0:
        raise ValueError("expected value of the component is zero")
    blocks = _run_ensemble(sys, t, runs, seed, "dynamics.log_state_histogram", workers)
    ls = np.concatenate([b.logscale[:, -1] for b in blocks])
    d = np.concatenate([b.direction[:, component] for b in blocks])
    ratio_sign = np.sign(d) * np.sign(expected)
    good = ratio_sign > 0
    flips = int((~good).sum())
    if not np.any(good):
        raise SignFlip("every run changed sign")
    samples = ls[good] + np.log(np.abs(d[good])) - np.log(abs(expected))
    out = LogHistogram(
        samples=samples,
        mean=float(samples.mean()),
        sd=float(samples.std(ddof=1)) if samples.size > 1 else 0.0,
        sign_flips=flips,
        runs=runs,
        t=t,
    )
    if eps2 is not None:
        out.predicted_mean = -t * eps2 / 2.0
        out.predicted_sd = float(np.sqrt(t * eps2))
    return out
