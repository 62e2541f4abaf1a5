"""Reference scenario and random scenario generation."""
from __future__ import annotations

import numpy as np

from .model import ChannelMeans, PrimaryParams, SecondaryParams, SystemParams, db_to_linear, validate
from .power import compute_xi

BASELINE_CHANNELS_DB = {
    "lambda_tr_db": 3.0,
    "lambda_td_db": -6.0,
    "lambda_te_db": 6.0,
    "lambda_sr_db": -3.0,
    "lambda_sd_db": 3.0,
    "lambda_se_db": -3.0,
}


def baseline_params(pt_db: float = 10.0, K: int = 6, reliability: float = 0.99, phi: float = 0.1,
                    beta: float = 0.5, r_th: float = 0.5) -> SystemParams:
    """The reference scenario; every figure preset varies one of its fields."""
    return validate(SystemParams(
        primary=PrimaryParams(gamma_T=db_to_linear(pt_db), beta=beta, phi=phi),
        secondary=SecondaryParams(K=K, reliability=reliability, r_th=r_th),
        channels=ChannelMeans.from_db(**BASELINE_CHANNELS_DB),
    ))


def random_params(rng: np.random.Generator, k_max: int = 8, feasible: bool = True,
                  max_attempts: int = 1000) -> SystemParams:
    """Draw a valid scenario with parameters spread over practical ranges.

    With ``feasible=True`` draws are repeated until the secondary is allowed a
    positive transmit power.
    """
    for _ in range(max_attempts):
        primary = PrimaryParams(
            gamma_T=db_to_linear(rng.uniform(0.0, 40.0)),
            beta=rng.uniform(0.2, 2.0),
            phi=rng.uniform(0.01, 0.5),
        )
        channels = ChannelMeans.from_db(**{key: rng.uniform(-6.0, 6.0) for key in BASELINE_CHANNELS_DB})
        if feasible and compute_xi(primary, channels.lambda_tr) <= 0:
            continue
        secondary = SecondaryParams(
            K=int(rng.integers(1, k_max + 1)),
            reliability=rng.uniform(0.5, 1.0),
            r_th=rng.uniform(0.1, 2.0),
        )
        return validate(SystemParams(primary=primary, secondary=secondary, channels=channels))
    raise RuntimeError("could not draw a feasible scenario")
