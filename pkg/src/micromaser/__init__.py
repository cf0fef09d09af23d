"""Phase structure, correlations and trapping states of the idealized micromaser."""

__version__ = "0.1.0"

from .core import (MaserParams, PhotonDistribution, PhysicalParams, from_physical, moments,
                   q, stationary_distribution, thermal_distribution, thermal_mean, w)
from .correlation import (AtomCorrelator, build_generator, exact_correlation, fit_xi_A,
                          gamma_A, lambda_nz, xi_ansatz_E, xi_master_M, xi_mean_field,
                          xi_sumrule, xi_thermal)
from .errors import (ConfigError, DomainError, InvalidParameterError, MicromaserError,
                     NoCrossingError, NoTransitionError, QuadratureError)
from .phase import (classify, critical_detuning, phase_diagram, theta0_star, theta_k,
                    theta_maser_maser, theta_maser_thermal, theta_thermal_maser, triple_points)
from .potential import enumerate_saddles, gaussian_mixture, v0_of_x, v0_on_branch
from .trapping import dip_scan, order_parameter_scan, trapping_thetas

__all__ = [
    "__version__",
    "MaserParams", "PhysicalParams", "PhotonDistribution", "from_physical", "q", "w",
    "stationary_distribution", "moments", "thermal_distribution", "thermal_mean",
    "enumerate_saddles", "gaussian_mixture", "v0_of_x", "v0_on_branch",
    "theta0_star", "theta_k", "theta_maser_maser", "theta_thermal_maser",
    "theta_maser_thermal", "critical_detuning", "triple_points", "classify", "phase_diagram",
    "build_generator", "lambda_nz", "exact_correlation", "AtomCorrelator", "gamma_A",
    "fit_xi_A", "xi_thermal", "xi_ansatz_E", "xi_master_M", "xi_mean_field", "xi_sumrule",
    "trapping_thetas", "order_parameter_scan", "dip_scan",
    "MicromaserError", "InvalidParameterError", "DomainError", "NoTransitionError",
    "NoCrossingError", "QuadratureError", "ConfigError",
]
