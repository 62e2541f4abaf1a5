"""Secondary transmit power under the primary outage constraint.

The secondary transmitter is allowed the largest SNR for which the primary
receiver's outage probability ``P[Gamma_R < Gamma_0]`` equals the tolerated
level ``phi``.  When no positive power meets the constraint the secondary
stays silent.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import PrimaryParams, SystemParams


class DomainError(ValueError):
    """Argument outside the domain where a formula is defined."""


@dataclass(frozen=True)
class PowerAllocation:
    xi: float
    gamma_S: float
    feasible: bool


def compute_xi(primary: PrimaryParams, lambda_tr: float) -> float:
    """Normalised secondary power that meets the primary constraint with equality.

    Negative or zero values mean the primary link alone already violates the
    constraint, so no secondary power is admissible.
    """
    gamma_0 = primary.gamma_0
    ratio = math.exp(-lambda_tr * gamma_0 / primary.gamma_T) / (1.0 - primary.phi)
    return (ratio - 1.0) / (lambda_tr * gamma_0)


def compute_power_allocation(params: SystemParams) -> PowerAllocation:
    primary = params.primary
    xi = compute_xi(primary, params.channels.lambda_tr)
    if xi > 0:
        return PowerAllocation(xi=xi, gamma_S=primary.gamma_T * params.channels.lambda_sr * xi, feasible=True)
    return PowerAllocation(xi=xi, gamma_S=0.0, feasible=False)


def cdf_gamma_R(x, gamma_T, gamma_S, lambda_tr, lambda_sr):
    """CDF of the primary receiver SINR with one interfering secondary.

    ``Gamma_R = gamma_T |h_TR|^2 / (gamma_S |h_SR|^2 + 1)`` with exponential
    gains of rates ``lambda_tr`` and ``lambda_sr``.  Accepts scalars or arrays;
    negative thresholds map to 0.
    """
    if not gamma_S > 0:
        raise DomainError("gamma_S must be positive; a silent secondary leaves Gamma_R purely exponential")
    x = np.asarray(x, dtype=float)
    d = lambda_sr * gamma_T / (lambda_tr * gamma_S)
    xp = np.maximum(x, 0.0)
    out = -np.expm1(np.log(d / (xp + d)) - lambda_tr * xp / gamma_T)
    out = np.where(x < 0, 0.0, out)
    return float(out) if out.ndim == 0 else out
