"""Closed-form and approximate moment Lyapunov exponents."""

from .bounds import convergence_bounds, mean_noise_norm
from .continuous import continuous_mva_Lp
from .critical import bc2_exact, bcrit_formula, critical_value, mva_fufv, stability_diagram
from .iteration import iteration_L2, iteration_matrix, large_noise_L2, model_alpha
from .perturbation import large_n_L2, perturbation_Lp
from .scalar import noise_only_L2, noise_ratio_moments, scalar_Lp_approx, scalar_Lp_exact, scalar_moment_exact
from .types import CriticalReport, LyapunovEstimate

__all__ = [
    "CriticalReport",
    "LyapunovEstimate",
    "bc2_exact",
    "bcrit_formula",
    "continuous_mva_Lp",
    "convergence_bounds",
    "critical_value",
    "iteration_L2",
    "iteration_matrix",
    "large_n_L2",
    "large_noise_L2",
    "mean_noise_norm",
    "model_alpha",
    "mva_fufv",
    "noise_only_L2",
    "noise_ratio_moments",
    "perturbation_Lp",
    "scalar_Lp_approx",
    "scalar_Lp_exact",
    "scalar_moment_exact",
    "stability_diagram",
]
