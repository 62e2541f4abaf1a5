"""SINR distributions at the destination and the eavesdropper, and the SOP.

Two independent evaluations of the secrecy outage probability live here:

* :func:`sop_closed_form` reduces the outage integral to exponential integrals
  through partial fractions, one pair of integrals per term of the
  order-statistics expansion of the best S-D link.
* :func:`sop_quadrature` integrates ``F_SD(rho (x + 1) - 1) f_SE(x)``
  numerically and serves as the oracle for the closed form.

Both expansions over ``k = 1..K`` are alternating binomial sums.  They are
evaluated in double precision when the cancellation they incur is harmless
and redone with ``mpmath`` at a working precision sized to the cancellation
otherwise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from math import comb

import mpmath
import numpy as np
from scipy import integrate

from . import specfun
from .model import SystemParams
from .power import DomainError, PowerAllocation

_EPS = float(np.finfo(float).eps)

# Float results are kept when their worst-case rounding error stays below
# these absolute budgets; otherwise the sum is recomputed with mpmath.
_CDF_ROUNDING_BUDGET = 1e-12
_SOP_ROUNDING_BUDGET = 1e-11

# |a - b| / b below this switches I1, I2 from partial fractions to a series.
_NEAR_DEGENERATE = 0.1

# Raw SOP values may leave [0, 1] by rounding only up to this much.
_CLAMP_SLACK = 1e-9


class ConsistencyError(ArithmeticError):
    """A computed probability left [0, 1] by more than rounding can explain."""


class QuadratureError(ArithmeticError):
    def __init__(self, message, abs_err_est):
        super().__init__(f"{message} (estimated abs error {abs_err_est:.3g})")
        self.abs_err_est = abs_err_est


def rho(r_th: float) -> float:
    """Linear threshold on ``(1 + Gamma_SD) / (1 + Gamma_SE)``: ``2 ** r_th``."""
    return 2.0 ** r_th


def _clamp_probability(value: float, what: str) -> float:
    if not (-_CLAMP_SLACK <= value <= 1 + _CLAMP_SLACK):
        raise ConsistencyError(f"{what} = {value!r} lies outside [0, 1] beyond rounding slack")
    return min(max(value, 0.0), 1.0)


def _require_gamma_s(gamma_S):
    if not gamma_S > 0:
        raise DomainError("gamma_S must be positive; callers handle a silent secondary separately")


# --------------------------------------------------------------------------
# distributions
# --------------------------------------------------------------------------

def _sd_tilde_terms(x, K, gamma_T, gamma_S, lambda_sd, lambda_td):
    k = np.arange(1, K + 1, dtype=float)
    coef = np.array([comb(K, j) * (-1.0) ** (j + 1) for j in range(1, K + 1)])
    d = lambda_td * gamma_S / (k * lambda_sd * gamma_T)
    x = x[..., None]
    return coef * d / (x + d) * np.exp(-k * lambda_sd * x / gamma_S)


def _sd_tilde_survival_mp(x, K, gamma_T, gamma_S, lambda_sd, lambda_td, dps):
    with mpmath.workdps(dps):
        x = mpmath.mpf(x)
        total = mpmath.mpf(0)
        for k in range(1, K + 1):
            d = mpmath.mpf(lambda_td) * gamma_S / (k * mpmath.mpf(lambda_sd) * gamma_T)
            total += comb(K, k) * (-1) ** (k + 1) * d / (x + d) * mpmath.exp(-k * mpmath.mpf(lambda_sd) * x / gamma_S)
        return float(total)


def cdf_gamma_sd_tilde(x, K, gamma_T, gamma_S, lambda_sd, lambda_td):
    """CDF of the destination SINR given a working backhaul.

    The best of ``K`` transmitters is chosen on the S-D gain, so the CDF is an
    alternating binomial expansion of ``(1 - exp(...))**K``.  Accepts scalars
    or arrays; thresholds ``<= 0`` map to exactly 0.
    """
    _require_gamma_s(gamma_S)
    x = np.asarray(x, dtype=float)
    flat_x = np.maximum(x, 0.0).ravel()
    terms = _sd_tilde_terms(flat_x, K, gamma_T, gamma_S, lambda_sd, lambda_td)
    survival = terms.sum(axis=-1)
    magnitude = np.abs(terms).sum(axis=-1)
    for i in np.flatnonzero((16 * _EPS * magnitude > _CDF_ROUNDING_BUDGET) & (flat_x > 0)):
        dps = 20 + int(math.ceil(math.log10(magnitude[i])))
        survival[i] = _sd_tilde_survival_mp(flat_x[i], K, gamma_T, gamma_S, lambda_sd, lambda_td, dps)
    cdf = 1.0 - survival.reshape(x.shape)
    cdf = np.where(x <= 0, 0.0, cdf)
    if np.any((cdf < -1e-9) | (cdf > 1 + 1e-9)):
        raise ConsistencyError("best-link CDF left [0, 1] beyond rounding slack")
    cdf = np.clip(cdf, 0.0, 1.0)
    return float(cdf) if cdf.ndim == 0 else cdf


def cdf_gamma_sd(x, reliability, K, gamma_T, gamma_S, lambda_sd, lambda_td):
    """CDF of the destination SINR including backhaul failures.

    Failure with probability ``1 - reliability`` puts an atom at zero, so the
    value at ``x = 0`` is exactly ``1 - reliability``.
    """
    x = np.asarray(x, dtype=float)
    tilde = cdf_gamma_sd_tilde(x, K, gamma_T, gamma_S, lambda_sd, lambda_td)
    out = (1.0 - reliability) + reliability * np.asarray(tilde)
    out = np.where(x < 0, 0.0, out)
    return float(out) if out.ndim == 0 else out


def cdf_gamma_se(x, gamma_T, gamma_S, lambda_se, lambda_te):
    _require_gamma_s(gamma_S)
    x = np.asarray(x, dtype=float)
    xp = np.maximum(x, 0.0)
    b = lambda_te * gamma_S / (lambda_se * gamma_T)
    out = -np.expm1(np.log(b / (xp + b)) - lambda_se * xp / gamma_S)
    out = np.where(x < 0, 0.0, out)
    return float(out) if out.ndim == 0 else out


def pdf_gamma_se(x, gamma_T, gamma_S, lambda_se, lambda_te):
    """Density of the eavesdropper SINR (derivative of :func:`cdf_gamma_se`)."""
    _require_gamma_s(gamma_S)
    x = np.asarray(x, dtype=float)
    xp = np.maximum(x, 0.0)
    b = lambda_te * gamma_S / (lambda_se * gamma_T)
    decay = np.exp(-lambda_se * xp / gamma_S)
    out = (lambda_te / gamma_T) * decay / (xp + b) + b * decay / (xp + b) ** 2
    out = np.where(x < 0, 0.0, out)
    return float(out) if out.ndim == 0 else out


# --------------------------------------------------------------------------
# closed form
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class KTerm:
    """Contribution of one order-statistics term ``k`` to the SOP."""

    k: int
    A: float
    B: float
    a: float
    b: float
    c: float
    I1: float
    I2: float

    @property
    def contribution(self) -> float:
        return self.A * self.I1 + self.B * self.I2


@dataclass(frozen=True)
class SopBreakdown:
    sop: float
    rho: float
    per_k: tuple[KTerm, ...]
    extended_precision: bool = False


class _FloatArith:
    exp = staticmethod(math.exp)
    en = staticmethod(specfun.scaled_en)
    eps = _EPS

    @staticmethod
    def num(v):
        return float(v)


class _MpArith:
    """Same arithmetic on mpmath numbers at the current working precision."""

    exp = staticmethod(mpmath.exp)

    @property
    def eps(self):
        return mpmath.mpf(2) ** (-mpmath.mp.prec)

    def en(self, n, z):
        if z <= specfun.SERIES_CUTOFF:
            value, _ = specfun._en_series(n, z, eps=self.eps, log=mpmath.log, euler=+mpmath.euler)
            return mpmath.exp(z) * value
        return specfun._scaled_en_cf(n, z, eps=self.eps)[0]

    @staticmethod
    def num(v):
        return mpmath.mpf(v)


def pair_integrals(a, b, c, arith=_FloatArith):
    """``I1 = int_0^inf e^{-cx} / ((x+a)(x+b)) dx`` and ``I2`` with ``(x+b)^2``.

    Uses ``int_0^inf e^{-cx} (x+b)^{-n} dx = b^{1-n} exp(bc) E_n(bc)``.  Far
    from ``a = b`` the partial-fraction split is used; close to it (including
    exactly at it) the ``1/(x+a)`` factor is expanded in powers of
    ``(a - b)/(x + b)``, which avoids dividing by ``a - b``.
    """
    en = arith.en
    z = b * c
    r = (a - b) / b
    if abs(r) <= _NEAR_DEGENERATE:
        i1 = i2 = arith.num(0)
        power = arith.num(1)
        for m in range(0, 2000):
            t1 = power * en(m + 2, z)
            t2 = power * en(m + 3, z)
            i1 += t1
            i2 += t2
            if abs(t1) <= arith.eps * abs(i1) and abs(t2) <= arith.eps * abs(i2):
                break
            power *= -r
        else:
            raise specfun.ConvergenceError("near-degenerate pole series did not converge")
        return i1 / b, i2 / b**2
    f1_a = en(1, a * c)
    f1_b = en(1, z)
    f2_b = en(2, z) / b
    diff = a - b
    i1 = (f1_b - f1_a) / diff
    i2 = (f1_a - f1_b) / diff**2 + f2_b / diff
    return i1, i2


def _k_terms(arith, params: SystemParams, gamma_S, rho_value):
    ch = params.channels
    K = params.secondary.K
    lam = params.secondary.reliability
    gamma_T = arith.num(params.primary.gamma_T)
    gamma_S = arith.num(gamma_S)
    rho_value = arith.num(rho_value)
    l_td, l_sd, l_se, l_te = (arith.num(v) for v in (ch.lambda_td, ch.lambda_sd, ch.lambda_se, ch.lambda_te))
    b = l_te * gamma_S / (l_se * gamma_T)
    out = []
    for k in range(1, K + 1):
        a = (l_td * gamma_S + k * rho_value * l_sd * gamma_T - k * l_sd * gamma_T) / (k * rho_value * l_sd * gamma_T)
        if not a > 0:
            raise DomainError(
                f"pole a_{k} = {float(a):.6g} is not positive; the partial-fraction closed form needs rho > 1"
            )
        c = (k * rho_value * l_sd + l_se) / gamma_S
        weight = comb(K, k) * arith.num(lam) * (-1) ** (k + 1) * arith.exp(-k * l_sd * (rho_value - 1) / gamma_S)
        A = weight * l_te * l_td * gamma_S / (k * rho_value * l_sd * gamma_T**2)
        B = weight * l_te * l_td * gamma_S**2 / (k * rho_value * l_se * l_sd * gamma_T**2)
        i1, i2 = pair_integrals(a, b, c, arith)
        out.append((k, A, B, a, b, c, i1, i2))
    return out


def sop_closed_form(params: SystemParams, alloc: PowerAllocation, rho_value: float | None = None) -> SopBreakdown:
    """Secrecy outage probability from the exponential-integral closed form.

    ``rho_value`` overrides the threshold ``2 ** r_th``; values that put a pole
    of the integrand inside the integration range raise :class:`DomainError`.
    A silent secondary (``gamma_S == 0``) is always in outage.
    """
    r = rho(params.secondary.r_th) if rho_value is None else float(rho_value)
    if not alloc.gamma_S > 0:
        return SopBreakdown(sop=1.0, rho=r, per_k=())
    raw = _k_terms(_FloatArith, params, alloc.gamma_S, r)
    magnitude = sum(abs(A * i1) + abs(B * i2) for _, A, B, _, _, _, i1, i2 in raw)
    extended = 64 * _EPS * magnitude > _SOP_ROUNDING_BUDGET
    if extended:
        dps = 25 + int(math.ceil(math.log10(max(magnitude, 1.0))))
        with mpmath.workdps(dps):
            mp_terms = _k_terms(_MpArith(), params, alloc.gamma_S, r)
            total = 1 - sum(A * i1 + B * i2 for _, A, B, _, _, _, i1, i2 in mp_terms)
            value = float(total)
            raw = [tuple(float(v) if i else v for i, v in enumerate(t)) for t in mp_terms]
    else:
        value = 1.0 - math.fsum(A * i1 + B * i2 for _, A, B, _, _, _, i1, i2 in raw)
    per_k = tuple(KTerm(*t) for t in raw)
    return SopBreakdown(sop=_clamp_probability(value, "closed-form SOP"), rho=r, per_k=per_k,
                        extended_precision=extended)


# --------------------------------------------------------------------------
# quadrature oracle
# --------------------------------------------------------------------------

def _breakpoints(scales, upper):
    lo = min(s for s in scales if s > 0) / 4.0
    points = [0.0]
    x = lo
    while x < upper:
        points.append(x)
        x *= 4.0
    points.append(upper)
    return points


def sop_quadrature(params: SystemParams, alloc: PowerAllocation, tol: float = 1e-10,
                   rho_value: float | None = None) -> float:
    """SOP by adaptive quadrature of the defining integral.

    ``P[Gamma_SD < rho (1 + Gamma_SE) - 1] = int_0^inf F_SD(rho (x+1) - 1) f_SE(x) dx``.
    The range is cut where the eavesdropper tail mass drops below ``tol / 10``
    and split geometrically around the integrand's natural scales.  The tail
    beyond the cut is bracketed exactly and its midpoint added.
    """
    r = rho(params.secondary.r_th) if rho_value is None else float(rho_value)
    if not alloc.gamma_S > 0:
        return 1.0
    ch = params.channels
    K = params.secondary.K
    lam = params.secondary.reliability
    gamma_T = params.primary.gamma_T
    gamma_S = alloc.gamma_S

    def f_sd(y):
        return cdf_gamma_sd(y, lam, K, gamma_T, gamma_S, ch.lambda_sd, ch.lambda_td)

    def integrand(x):
        return f_sd(r * (x + 1.0) - 1.0) * pdf_gamma_se(x, gamma_T, gamma_S, ch.lambda_se, ch.lambda_te)

    b = ch.lambda_te * gamma_S / (ch.lambda_se * gamma_T)
    se_scale = gamma_S / ch.lambda_se
    # survival of Gamma_SE is <= exp(-x / se_scale)
    upper = se_scale * math.log(10.0 / tol)
    scales = [b, se_scale]
    for k in range(1, K + 1):
        d_k = ch.lambda_td * gamma_S / (k * ch.lambda_sd * gamma_T)
        scales.append(abs(d_k + r - 1.0) / r)
        scales.append(gamma_S / (k * r * ch.lambda_sd + ch.lambda_se))
    if r < 1:
        # F_SD switches on where its argument crosses zero
        scales.append(1.0 / r - 1.0)
    points = _breakpoints(scales, upper)
    if r < 1 and (1.0 / r - 1.0) < upper:
        points = sorted(set(points) | {1.0 / r - 1.0})
    piece_tol = tol / (4 * len(points))
    total = 0.0
    err = 0.0
    for lo, hi in zip(points[:-1], points[1:]):
        value, piece_err = integrate.quad(integrand, lo, hi, epsabs=piece_tol, epsrel=1e-13, limit=200)
        total += value
        err += piece_err
    tail = 1.0 - cdf_gamma_se(upper, gamma_T, gamma_S, ch.lambda_se, ch.lambda_te)
    f_at_upper = f_sd(r * (upper + 1.0) - 1.0)
    total += tail * (1.0 + f_at_upper) / 2.0
    err += tail * (1.0 - f_at_upper) / 2.0
    if err > tol:
        raise QuadratureError("SOP quadrature did not reach the requested tolerance", err)
    return _clamp_probability(total, "quadrature SOP")
