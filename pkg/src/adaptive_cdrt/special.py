"""Scalar special functions used by the outage expressions.

K1 is evaluated with the ascending series for ``x <= 2`` and with Steed's
continued fraction (Temme's CF2 for order zero) above that.  Both branches
give K0 and K1 together, so the private K0 helper comes for free.
"""

from __future__ import annotations

import math

__all__ = ["DomainError", "bessel_k1", "phi1", "erlang_sf"]

_EULER_GAMMA = 0.57721566490153286061
_SERIES_LIMIT = 2.0
_EPS = 1e-16
_MAX_ITER = 10_000


class DomainError(ValueError):
    """Argument outside the domain of a special function."""


def _check_real(name: str, x: float) -> float:
    x = float(x)
    if math.isnan(x):
        raise DomainError(f"{name} is NaN")
    return x


def _k0_k1_series(x: float) -> tuple[float, float]:
    # A&S 9.6.13 / 9.6.11 with psi(k+1) = -gamma + H_k
    q = 0.25 * x * x
    log_half = math.log(0.5 * x)
    u = 1.0  # q^k / (k!)^2
    t = 1.0  # q^k / (k! (k+1)!)
    psi_k1 = -_EULER_GAMMA  # psi(k+1)
    k0 = 0.0
    s1 = 0.0
    k = 0
    while True:
        psi_k2 = psi_k1 + 1.0 / (k + 1)
        d0 = u * (psi_k1 - log_half)
        d1 = t * (log_half - 0.5 * (psi_k1 + psi_k2))
        k0 += d0
        s1 += d1
        if abs(d0) <= _EPS * abs(k0) and abs(d1) <= _EPS * abs(s1) and k > 2:
            break
        k += 1
        u *= q / (k * k)
        t *= q / (k * (k + 1))
        psi_k1 = psi_k2
        if k > _MAX_ITER:  # pragma: no cover - series always converges for x <= 2
            raise RuntimeError("K0/K1 series failed to converge")
    return k0, 1.0 / x + 0.5 * x * s1


def _k0_k1_steed(x: float) -> tuple[float, float]:
    # Steed's CF2 for mu = 0 (Numerical Recipes ``bessik``)
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = delh = d
    q1, q2 = 0.0, 1.0
    a1 = 0.25
    q = c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, _MAX_ITER):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels / s) < _EPS:
            break
    else:  # pragma: no cover
        raise RuntimeError(f"K0/K1 continued fraction failed at x={x}")
    h *= a1
    k0 = math.sqrt(math.pi / (2.0 * x)) * math.exp(-x) / s
    k1 = k0 * (x + 0.5 - h) / x
    return k0, k1


def _bessel_k01(x: float) -> tuple[float, float]:
    if x <= _SERIES_LIMIT:
        return _k0_k1_series(x)
    return _k0_k1_steed(x)


def _bessel_k0(x: float) -> float:
    x = _check_real("x", x)
    if x <= 0.0:
        raise DomainError(f"K0 needs x > 0, got {x}")
    return _bessel_k01(x)[0]


def bessel_k1(x: float) -> float:
    """Modified Bessel function of the second kind, order one.

    Raises :class:`DomainError` for ``x <= 0`` or NaN.
    """
    x = _check_real("x", x)
    if x <= 0.0:
        raise DomainError(f"K1 needs x > 0, got {x}")
    if math.isinf(x):
        return 0.0
    return _bessel_k01(x)[1]


def _bessel_k_upto(order: int, z: float) -> list[float]:
    """[K_0(z), ..., K_order(z)] by upward recurrence (stable for K)."""
    k0, k1 = _bessel_k01(z)
    out = [k0, k1]
    for nu in range(1, order):
        out.append(out[nu - 1] + 2.0 * nu / z * out[nu])
    return out[: order + 1]


def phi1(x: float) -> float:
    """``sqrt(x) * K1(sqrt(x))``, continuously extended to 1 at ``x = 0``."""
    x = _check_real("x", x)
    if x < 0.0:
        raise DomainError(f"phi1 needs x >= 0, got {x}")
    if x == 0.0:
        return 1.0
    s = math.sqrt(x)
    if math.isinf(s):
        return 0.0
    return s * _bessel_k01(s)[1]


def erlang_sf(n_terms: int, psi: float, y: float) -> float:
    """Survival function of a Gamma(n, rate=psi) variable.

    ``exp(-psi*y) * sum_{m<n} (psi*y)^m / m!``, i.e. the regularized upper
    incomplete gamma Q(n, psi*y).  It is the complement of the CDF of a sum of
    ``n`` i.i.d. exponential channel gains.
    """
    if isinstance(n_terms, bool) or int(n_terms) != n_terms or n_terms < 1:
        raise DomainError(f"n_terms must be a positive integer, got {n_terms!r}")
    n_terms = int(n_terms)
    psi = _check_real("psi", psi)
    y = _check_real("y", y)
    if psi <= 0.0 or math.isinf(psi):
        raise DomainError(f"psi must be positive and finite, got {psi}")
    if y < 0.0:
        raise DomainError(f"y must be >= 0, got {y}")
    z = psi * y
    if math.isinf(z):
        return 0.0
    if z < 700.0:
        term = math.exp(-z)
        total = term
        for m in range(1, n_terms):
            term *= z / m
            total += term
        return min(total, 1.0)
    # exp(-z) underflows; sum the terms in log space instead
    log_z = math.log(z)
    total = 0.0
    for m in range(n_terms):
        total += math.exp(-z + m * log_z - math.lgamma(m + 1))
    return min(total, 1.0)
