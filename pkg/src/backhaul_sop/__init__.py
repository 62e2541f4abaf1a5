"""Secrecy outage probability of an underlay cognitive small-cell network
with unreliable wireless backhaul: closed form, quadrature and Monte Carlo.
"""
__version__ = "0.1.0"

from .analytic import (
    SopBreakdown,
    cdf_gamma_sd,
    cdf_gamma_sd_tilde,
    cdf_gamma_se,
    pdf_gamma_se,
    rho,
    sop_closed_form,
    sop_quadrature,
)
from .model import (
    ChannelMeans,
    PrimaryParams,
    SecondaryParams,
    SystemParams,
    ValidationError,
    db_to_linear,
    validate,
)
from .montecarlo import McConfig, McEstimate, estimate_sop
from .power import PowerAllocation, cdf_gamma_R, compute_power_allocation, compute_xi
from .specfun import ei_neg, exp_ei_neg_scaled

__all__ = [
    "ChannelMeans", "McConfig", "McEstimate", "PowerAllocation", "PrimaryParams", "SecondaryParams",
    "SopBreakdown", "SystemParams", "ValidationError", "cdf_gamma_R", "cdf_gamma_sd", "cdf_gamma_sd_tilde",
    "cdf_gamma_se", "compute_power_allocation", "compute_xi", "db_to_linear", "ei_neg", "estimate_sop",
    "exp_ei_neg_scaled", "pdf_gamma_se", "rho", "sop_closed_form", "sop_quadrature", "validate",
]
