"""Exponential integrals in the exponentially scaled form used by the SOP.

The closed-form SOP needs ``exp(x) * Ei(-x)`` for arguments spanning many
decades.  Forming ``exp(x)`` separately overflows past x ~ 709, so every
routine here returns the scaled product directly:

* ``x <= 1``: power series (with the Euler-Mascheroni constant), then
  multiplied by ``exp(x) <= e``.
* ``x > 1``: modified Lentz evaluation of the continued fraction for
  ``E_n``, whose leading ``exp(-x)`` factor is simply never applied.

``scaled_en(n, x) = exp(x) * E_n(x)`` generalises the pair to the order-n
integrals needed when two poles of the SOP integrand nearly coincide.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

EULER_GAMMA = 0.57721566490153286061

SERIES_CUTOFF = 1.0

_EPS = 2.220446049250313e-16
_TINY = 1e-300
_MAX_ITER = 10_000


class SpecfunDomainError(ValueError):
    pass


class ConvergenceError(ArithmeticError):
    pass


@dataclass(frozen=True)
class ScaledEiResult:
    """``exp(x) * Ei(-x)`` and an estimate of its absolute error."""

    value: float
    abs_err_est: float

    def __float__(self):
        return self.value


def _check_positive(x: float) -> float:
    x = float(x)
    if not x > 0 or math.isnan(x):
        raise SpecfunDomainError(f"argument must be positive, got {x!r}")
    return x


def _en_series(n: int, x, eps=_EPS, log=math.log, euler=EULER_GAMMA):
    """Unscaled ``E_n(x)`` for ``0 < x <= 1`` and an absolute error estimate.

    ``eps``, ``log`` and ``euler`` let the same recurrence run on
    extended-precision numbers.
    """
    if n == 1:
        total = -log(x) - euler
    else:
        total = 1 / (x * 0 + (n - 1))
    magnitude = abs(total)
    fact = x * 0 + 1
    for i in range(1, _MAX_ITER):
        fact *= -x / i
        if i != n - 1:
            term = -fact / (i - n + 1)
        else:
            psi = -euler + sum(1 / (x * 0 + j) for j in range(1, n))
            term = fact * (psi - log(x))
        total += term
        magnitude += abs(term)
        if abs(term) < abs(total) * eps:
            return total, 4 * eps * magnitude
    raise ConvergenceError(f"E_{n} series did not converge at x={x!r}")


def _scaled_en_cf(n: int, x, eps=_EPS):
    """``exp(x) * E_n(x)`` for ``x > 0`` by modified Lentz; converges fast for x > 1."""
    b = x + n
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (n - 1 + i)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = c * d
        h *= delta
        if abs(delta - 1) < eps:
            return h, 2 * (i + 1) * eps * abs(h)
    raise ConvergenceError(f"E_{n} continued fraction did not converge at x={x!r}")


def scaled_en(n: int, x: float) -> float:
    """``exp(x) * E_n(x)`` for integer ``n >= 1`` and ``x > 0``."""
    if n < 1:
        raise SpecfunDomainError(f"order must be >= 1, got {n}")
    x = _check_positive(x)
    if x <= SERIES_CUTOFF:
        value, _ = _en_series(n, x)
        return math.exp(x) * value
    return _scaled_en_cf(n, x)[0]


def exp_ei_neg_scaled(x: float) -> ScaledEiResult:
    """Evaluate ``exp(x) * Ei(-x)`` for ``x > 0`` without forming ``exp(x)``.

    Finite for every positive double, including ``x = 1e6`` where the naive
    product would be ``inf * 0``.
    """
    x = _check_positive(x)
    if x <= SERIES_CUTOFF:
        e1, err = _en_series(1, x)
        scale = math.exp(x)
        value = -scale * e1
        return ScaledEiResult(value, scale * err + _EPS * abs(value))
    value, err = _scaled_en_cf(1, x)
    return ScaledEiResult(-value, err)


def ei_neg(x: float) -> float:
    """``Ei(-x) = -E_1(x)`` for ``x > 0``; underflows gracefully to ``-0.0``."""
    x = _check_positive(x)
    if x <= SERIES_CUTOFF:
        return -_en_series(1, x)[0]
    return -_scaled_en_cf(1, x)[0] * math.exp(-x)
