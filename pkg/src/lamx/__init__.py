"""Local asymptotic minimax estimation of ``theta = f(g(beta))``.

``g`` is a translation- and scale-equivariant piecewise linear map built from
coordinates, convex combinations, maxima and minima; ``f`` is a scalar map
with a single kink.  The estimator shifts the plug-in value by a bias
constant chosen to minimise a simulated worst-case risk.
"""

__version__ = "0.1.0"

from .bias import BiasConfig, RiskSurfaceResult, b_hat, c_hat
from .bound import BoundResult, BoundSpec, b_pop, minimax_bound
from .errors import AssumptionError, ConfigError, InputError, UnsupportedDesignError
from .estim import (
    EstimateReport,
    Sample,
    estimate_fixed_bias,
    estimate_minimax,
    estimate_selective_bias,
    fit_moments,
)
from .gmap import (
    GMap,
    coord_map,
    dderiv,
    evaluate,
    gn_hat,
    linear_map,
    max_map,
    min_map,
    parse_gmap,
)
from .harness import ExperimentConfig, RiskCurve, run_experiment
from .kink import KinkMap, parse_kink, s_hat, slope_scale
from .loss import Loss, parse_loss

__all__ = [
    "AssumptionError", "BiasConfig", "BoundResult", "BoundSpec", "ConfigError",
    "EstimateReport", "ExperimentConfig", "GMap", "InputError", "KinkMap", "Loss",
    "RiskCurve", "RiskSurfaceResult", "Sample", "UnsupportedDesignError", "b_hat", "b_pop",
    "c_hat", "coord_map", "dderiv", "estimate_fixed_bias", "estimate_minimax",
    "estimate_selective_bias", "evaluate", "fit_moments", "gn_hat", "linear_map", "max_map",
    "min_map", "minimax_bound", "parse_gmap", "parse_kink", "parse_loss", "run_experiment",
    "s_hat", "slope_scale",
]
