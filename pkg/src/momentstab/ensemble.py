"""Random matrix ensembles and conditioning scatter studies."""

import csv
import io
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ComplexDominant, ConfigError, NonSimpleDominant, RejectionExhausted
from .rng import derive_rng
from .spectral import dominant_triple, henrici_number, second_eigenvalue_abs

GENERATORS = ("normal", "uniform", "sparse_nonneg", "uniform_smallvar", "symmetric_normal")
METRICS = ("gap", "kappa", "henrici", "sigma_A")
REJECTION_CAP = 10_000

_DEFAULTS = {
    "normal": {"mean": 0.0, "sd": 1.0},
    "uniform": {"lo": 0.0, "hi": 1.0},
    "sparse_nonneg": {"zero_prob": 0.5, "lo": 0.0, "hi": 1.0},
    "uniform_smallvar": {"mean": 0.2, "sd": 0.01},
    "symmetric_normal": {"mean": 0.0, "sd": 1.0},
}


@dataclass(frozen=True)
class EnsembleSpec:
    """How to draw one random ``n x n`` matrix.

    ``generator`` is one of ``normal(mean, sd)``, ``uniform(lo, hi)``,
    ``sparse_nonneg(zero_prob, lo, hi)``, ``uniform_smallvar(mean, sd)``
    (uniform with the given mean and standard deviation) or
    ``symmetric_normal(mean, sd)``. Accepted matrices are rescaled so that
    the dominant eigenvalue equals ``normalize_lambda`` (skipped when it is
    ``None``).
    """

    n: int
    generator: str = "normal"
    params: dict = field(default_factory=dict)
    normalize_lambda: Optional[float] = 1.0
    count: int = 1
    max_attempts: int = REJECTION_CAP

    def __post_init__(self):
        if self.n < 1 or self.count < 1:
            raise ConfigError("n and count must be positive")
        if self.generator not in GENERATORS:
            raise ConfigError(f"unknown generator {self.generator!r}; expected one of {GENERATORS}")
        unknown = set(self.params) - set(_DEFAULTS[self.generator])
        if unknown:
            raise ConfigError(f"unknown parameters for {self.generator}: {sorted(unknown)}")
        merged = {**_DEFAULTS[self.generator], **self.params}
        if not all(np.isfinite(float(v)) for v in merged.values()):
            raise ConfigError("generator parameters must be finite")
        object.__setattr__(self, "params", merged)

    def to_dict(self) -> dict:
        return asdict(self)


def _draw(spec: EnsembleSpec, rng: np.random.Generator) -> np.ndarray:
    n, p = spec.n, spec.params
    g = spec.generator
    if g == "normal":
        return rng.normal(p["mean"], p["sd"], (n, n))
    if g == "uniform":
        return rng.uniform(p["lo"], p["hi"], (n, n))
    if g == "sparse_nonneg":
        A = rng.uniform(p["lo"], p["hi"], (n, n))
        A[rng.random((n, n)) < p["zero_prob"]] = 0.0
        return A
    if g == "uniform_smallvar":
        half = np.sqrt(3.0) * p["sd"]
        return rng.uniform(p["mean"] - half, p["mean"] + half, (n, n))
    S = rng.normal(p["mean"], p["sd"], (n, n))
    return np.triu(S) + np.triu(S, 1).T


@dataclass
class Draw:
    A: np.ndarray
    attempts: int


def generate(spec: EnsembleSpec, rng: np.random.Generator) -> Draw:
    """Draw until the dominant eigenvalue is real and simple, then rescale."""
    for attempt in range(1, spec.max_attempts + 1):
        A = _draw(spec, rng)
        try:
            lam, _, _ = dominant_triple(A)
        except (NonSimpleDominant, ComplexDominant):
            continue
        if spec.normalize_lambda is not None:
            A = A * (spec.normalize_lambda / lam)
        return Draw(A, attempt)
    raise RejectionExhausted(f"no acceptable matrix after {spec.max_attempts} attempts")


def draw_matrices(spec: EnsembleSpec, seed: int, purpose: str = "ensemble.generate"):
    """``spec.count`` accepted draws; draw ``i`` uses its own stream."""
    return [generate(spec, derive_rng(seed, purpose, i)) for i in range(spec.count)]


def matrix_metrics(A: np.ndarray) -> dict:
    lam, u, v = dominant_triple(A)
    return {
        "gap": abs(lam) - second_eigenvalue_abs(A),
        "kappa": float(np.linalg.norm(v)),
        "henrici": henrici_number(A),
        "sigma_A": float(np.std(A)),
        "w2": float(np.sum(v**2 * u**2)),
        "lam": lam,
    }


@dataclass
class ScatterTable:
    columns: list
    rows: list
    acceptance_rate: float

    def column(self, name) -> np.ndarray:
        return np.array([r[self.columns.index(name)] for r in self.rows])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([repr(x) if isinstance(x, float) else x for x in r])
        return buf.getvalue()


def scatter_study(spec: EnsembleSpec, metrics: Sequence[str] = METRICS, seed: int = 0) -> ScatterTable:
    """One row per accepted matrix with the requested conditioning metrics."""
    metrics = list(metrics)
    if not metrics:
        raise ValueError("metrics must be nonempty")
    bad = set(metrics) - set(METRICS) - {"w2", "lam"}
    if bad:
        raise ValueError(f"unknown metrics {sorted(bad)}")
    cols = ["draw_index"] + metrics + ["accepted_attempts"]
    rows = []
    attempts = 0
    for i, d in enumerate(draw_matrices(spec, seed)):
        m = matrix_metrics(d.A)
        rows.append([i] + [m[k] for k in metrics] + [d.attempts])
        attempts += d.attempts
    return ScatterTable(cols, rows, acceptance_rate=spec.count / attempts)
