"""Result containers shared by the analytic approximations."""

from dataclasses import dataclass, field
from typing import Optional

METHODS = (
    "scalar_exact",
    "scalar_approx",
    "noise_only",
    "perturbation",
    "large_n",
    "iteration_r",
    "large_noise",
    "exact_operator",
    "continuous_mva",
)


@dataclass(frozen=True)
class LyapunovEstimate:
    """A moment Lyapunov exponent together with how it was obtained.

    ``validity`` is a human-readable note about the regime in which the
    method is trustworthy; it is empty when no caveat applies. ``extra``
    carries method-specific by-products (for instance the discrete
    counterpart of a continuous-time exponent).
    """

    method: str
    p: float
    value: float
    r: Optional[int] = None
    validity: str = ""
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")

    def to_dict(self) -> dict:
        d = {"method": self.method, "p": self.p, "value": self.value}
        if self.r is not None:
            d["r"] = self.r
        if self.validity:
            d["validity"] = self.validity
        if self.extra:
            d.update(self.extra)
        return d


@dataclass(frozen=True)
class CriticalReport:
    """Critical noise variance from every available route.

    ``bc2_exact`` is ``None`` when the exact oracle was not run. ``bounds``
    maps bound names to the sufficient thresholds on ``b2``.
    """

    bc2_small: float
    bc2_large: float
    bc2_unified: float
    bc2_exact: Optional[float]
    qc: float
    bounds: dict = field(default_factory=dict)
    well_behaved: bool = True

    def to_dict(self) -> dict:
        return {
            "bc2_small": self.bc2_small,
            "bc2_large": self.bc2_large,
            "bc2_unified": self.bc2_unified,
            "bc2_exact": self.bc2_exact,
            "qc": self.qc,
            "bounds": dict(self.bounds),
            "well_behaved": self.well_behaved,
        }
