"""Scenario description shared by every solver in the package.

All powers are carried as SNRs with the noise power normalised to one, so the
primary transmit power in dB is the same number as its SNR in dB.  Channel
power gains are exponential and each ``lambda_*`` is the *rate* of that
exponential (mean gain ``1 / lambda``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

#: Largest number of small-cell transmitters accepted.  The CDF of the best
#: S-D link is an alternating binomial sum; beyond this size even the
#: extended-precision fallback gets needlessly expensive.
MAX_TRANSMITTERS = 64


class ValidationError(ValueError):
    """Raised when a scenario violates one or more invariants.

    ``errors`` holds one ``(path, message)`` pair per violated field, in the
    order the checks were made.
    """

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(f"{path}: {msg}" for path, msg in self.errors))


def db_to_linear(x_db: float) -> float:
    """Convert a decibel value to linear scale, ``10 ** (x_db / 10)``."""
    x_db = float(x_db)
    if not math.isfinite(x_db):
        raise ValidationError([("x_db", f"must be finite, got {x_db!r}")])
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    x = float(x)
    if not (x > 0 and math.isfinite(x)):
        raise ValidationError([("x", f"must be positive and finite, got {x!r}")])
    return 10.0 * math.log10(x)


@dataclass(frozen=True)
class ChannelMeans:
    """Exponential rate parameters of the six channel power gains (linear)."""

    lambda_tr: float
    lambda_td: float
    lambda_te: float
    lambda_sr: float
    lambda_sd: float
    lambda_se: float

    @classmethod
    def from_db(cls, **values_db: float) -> "ChannelMeans":
        """Build from ``lambda_xx_db=...`` keyword arguments."""
        linear = {}
        for key, value in values_db.items():
            if not key.endswith("_db"):
                raise TypeError(f"expected a '*_db' keyword, got {key!r}")
            linear[key[: -len("_db")]] = db_to_linear(value)
        return cls(**linear)

    def to_db(self) -> dict[str, float]:
        return {f"{name}_db": linear_to_db(getattr(self, name)) for name in CHANNEL_FIELDS}


CHANNEL_FIELDS = ("lambda_tr", "lambda_td", "lambda_te", "lambda_sr", "lambda_sd", "lambda_se")


@dataclass(frozen=True)
class PrimaryParams:
    """Primary link: transmit SNR, target rate (bits/s/Hz) and tolerated outage."""

    gamma_T: float
    beta: float
    phi: float

    @property
    def gamma_0(self) -> float:
        """SINR threshold of the primary receiver, ``2**beta - 1``."""
        return math.expm1(self.beta * math.log(2.0))


@dataclass(frozen=True)
class SecondaryParams:
    """Small-cell side: number of transmitters, backhaul reliability, secrecy rate."""

    K: int
    reliability: float
    r_th: float


@dataclass(frozen=True)
class SystemParams:
    primary: PrimaryParams
    secondary: SecondaryParams
    channels: ChannelMeans = field(repr=True)


def _finite(value) -> bool:
    try:
        return math.isfinite(float(value))
    except (TypeError, ValueError):
        return False


def _check_primary(p: PrimaryParams) -> list[tuple[str, str]]:
    errors = []
    if not (_finite(p.gamma_T) and p.gamma_T > 0):
        errors.append(("primary.gamma_T", f"must be a positive finite SNR, got {p.gamma_T!r}"))
    if not (_finite(p.beta) and p.beta > 0):
        errors.append(("primary.beta", f"must be positive, got {p.beta!r}"))
    if not _finite(p.phi) or p.phi <= 0:
        errors.append(("primary.phi", f"phi must be strictly greater than 0, got {p.phi!r}"))
    elif p.phi >= 1:
        errors.append(("primary.phi", f"phi must be strictly less than 1, got {p.phi!r}"))
    return errors


def _check_secondary(s: SecondaryParams) -> list[tuple[str, str]]:
    errors = []
    if isinstance(s.K, bool) or not isinstance(s.K, int):
        errors.append(("secondary.K", f"must be an integer, got {s.K!r}"))
    elif s.K < 1:
        errors.append(("secondary.K", f"must be at least 1, got {s.K}"))
    elif s.K > MAX_TRANSMITTERS:
        errors.append(("secondary.K", f"must not exceed {MAX_TRANSMITTERS}, got {s.K}"))
    if not (_finite(s.reliability) and 0 <= s.reliability <= 1):
        errors.append(("secondary.reliability", f"must lie in [0, 1], got {s.reliability!r}"))
    if not (_finite(s.r_th) and s.r_th > 0):
        errors.append(("secondary.r_th", f"must be positive, got {s.r_th!r}"))
    return errors


def _check_channels(c: ChannelMeans) -> list[tuple[str, str]]:
    errors = []
    for name in CHANNEL_FIELDS:
        value = getattr(c, name)
        if not (_finite(value) and value > 0):
            errors.append((f"channels.{name}", f"must be a positive finite rate, got {value!r}"))
    return errors


def validate(params: SystemParams) -> SystemParams:
    """Return ``params`` unchanged if every invariant holds.

    All checks run before raising, so the :class:`ValidationError` lists every
    offending field rather than only the first one.
    """
    errors = []
    errors += _check_primary(params.primary)
    errors += _check_secondary(params.secondary)
    errors += _check_channels(params.channels)
    if errors:
        raise ValidationError(errors)
    return params


def with_overrides(params: SystemParams, *, gamma_T=None, K=None, reliability=None, phi=None) -> SystemParams:
    """Copy of ``params`` with selected fields replaced (not validated)."""
    primary = params.primary
    secondary = params.secondary
    if gamma_T is not None or phi is not None:
        primary = PrimaryParams(
            gamma_T=primary.gamma_T if gamma_T is None else gamma_T,
            beta=primary.beta,
            phi=primary.phi if phi is None else phi,
        )
    if K is not None or reliability is not None:
        secondary = SecondaryParams(
            K=secondary.K if K is None else K,
            reliability=secondary.reliability if reliability is None else reliability,
            r_th=secondary.r_th,
        )
    return SystemParams(primary=primary, secondary=secondary, channels=params.channels)
