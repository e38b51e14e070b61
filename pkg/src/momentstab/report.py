"""Side-by-side second-moment exponents from every available method."""

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import analytic
from .config import ExperimentConfig
from .dynamics import HEAVY_TAIL_CAVEAT, estimate_moments, exact_L2, fit_lyapunov
from .errors import MomentStabError
from .noise import epsilon_squared
from .spectral import spectral_summary
from .structure import classify


@dataclass
class StabilityReport:
    spectral: dict
    noise: dict
    L2: dict = field(default_factory=dict)
    critical: Optional[dict] = None
    bounds: Optional[dict] = None
    classification: Optional[dict] = None
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "spectral": self.spectral,
            "noise": self.noise,
            "L2": self.L2,
            "critical": self.critical,
            "bounds": self.bounds,
            "classification": self.classification,
            "notes": self.notes,
        }


def _attempt(report: StabilityReport, label: str, fn):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            out = fn()
        except MomentStabError as exc:
            report.notes.append(f"{label}: {type(exc).__name__}: {exc}")
            out = None
    for w in caught:
        report.notes.append(f"{label}: {w.message}")
    return out


def build_report(exp: ExperimentConfig, workers: Optional[int] = None) -> StabilityReport:
    sys = exp.system
    model = sys.noise
    r = exp.analysis.r
    spec = spectral_summary(sys.A, r_max=max(r, 10))
    stats = epsilon_squared(model, spec, sys.A)
    rep = StabilityReport(
        spectral=spec.to_dict(),
        noise={**model.to_dict(), "eps2": stats.eps2, "f_u": stats.f_u, "f_v": stats.f_v, "k": stats.k},
    )
    methods = exp.analysis.methods
    if "mc" in methods:
        def mc():
            run = exp.run
            series = estimate_moments(sys, [2], run.t_max, run.runs, run.seed, workers=workers)
            window = run.fit_window or (run.t_max // 2, run.t_max)
            fit = fit_lyapunov(series, 2, window)
            out = {"value": fit.L_p, "ci": fit.ci, "window": list(fit.window), "runs": run.runs}
            if fit.caveat:
                out["caveat"] = fit.caveat
            return out

        rep.L2["monte_carlo"] = _attempt(rep, "monte_carlo", mc)
    if "exact" in methods:
        rep.L2["exact"] = _attempt(rep, "exact", lambda: exact_L2(sys))
    if "perturbation" in methods:
        rep.L2["perturbation"] = _attempt(rep, "perturbation", lambda: analytic.perturbation_Lp(spec, stats, 2).value)
    if "iteration" in methods:
        rr = r if model.kind in ("UH", "T") else 1
        rep.L2[f"iteration_r{rr}"] = _attempt(rep, "iteration", lambda: analytic.iteration_L2(spec, stats, model, rr).value)
    if "large_noise" in methods and model.kind in ("UH", "T"):
        rep.L2["large_noise"] = _attempt(
            rep, "large_noise", lambda: analytic.large_noise_L2(spec, stats, spec.n, model.b2).value
        )
    if "critical" in methods:
        crit = _attempt(rep, "critical", lambda: analytic.critical_value(spec, stats, model, A=sys.A, bounds=False))
        rep.critical = crit.to_dict() if crit is not None else None
    if "bounds" in methods:
        rep.bounds = _attempt(rep, "bounds", lambda: analytic.convergence_bounds(sys.A, model, seed=exp.run.seed))
    if np.all(sys.A >= 0):
        rep.classification = classify(sys.A).to_dict()
    positive = [v["value"] if isinstance(v, dict) else v for v in rep.L2.values() if v is not None]
    if rep.L2.get("monte_carlo") and any(p > 0 for p in positive):
        rep.notes.append(HEAVY_TAIL_CAVEAT)
    return rep
