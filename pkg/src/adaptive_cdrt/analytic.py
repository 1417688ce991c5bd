"""Closed-form outage probabilities of the DPU, DPR and MDPR schemes.

DPU and DPR are single-antenna schemes; their functions require
``n_antennas == 1``.  The MDPR expressions hold for any ``N >= 1``.

Many of the closed forms are double sums of the shape
``sum_m x^m/m! * (...)``.  They are evaluated here after folding those sums
into Erlang survival functions, which keeps them finite for large ``N`` and
high SNR.  ``AnalyticConstants`` still exposes the raw composite constants so
that callers can check the folded forms against term-by-term evaluation.

x1 under MDPR comes in two flavours.  :func:`op_x1_mdpr` integrates the
NOMA-branch term exactly, which gives ``K_{n-1}`` Bessel factors in the
inner sum.  :func:`op_x1_mdpr_literal` keeps ``K_1`` in every term, as in the
factored expression; that version can leave [0, 1] at high SNR and is
returned unclipped so the defect stays visible.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass

import numpy as np

from .params import ConfigError, DerivedThresholds, SystemParams, derive_thresholds, snr_threshold
from .special import _bessel_k01, erlang_sf, phi1

__all__ = [
    "Method",
    "OpValue",
    "AnalyticConstants",
    "analytic_constants",
    "op_x1_dpu",
    "op_x2_dpu",
    "op_x3_dpu",
    "op_x1_dpr",
    "op_x2_dpr",
    "op_x3_dpr",
    "op_x1_mdpr",
    "op_x1_mdpr_literal",
    "op_x2_mdpr",
    "op_x3_mdpr",
    "closed_form_ops",
]


class Method(str, enum.Enum):
    CLOSED_FORM = "closed_form"
    QUADRATURE = "quadrature"


@dataclass(frozen=True)
class OpValue:
    p: float
    method: Method

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"outage probability out of range: {self.p}")

    def __float__(self) -> float:
        return self.p


@dataclass(frozen=True)
class AnalyticConstants:
    """Composite constants of the closed forms.

    Scalars ``A0, A3, A5, A6, A9, A10``; ``A1, A4, A7`` are indexed by ``m``
    and ``A2, A8`` by ``(m, n)`` (zero above the diagonal).  ``xi_s1`` and
    ``xi_sr`` hold ``psi^m / m!``.  Entries may overflow to ``inf`` for very
    large ``N``; the closed forms themselves never use these arrays.
    """

    psi_s1: float
    psi_sr: float
    psi_r1: float
    psi_r2: float
    xi_s1: np.ndarray
    xi_sr: np.ndarray
    A0: float
    A1: np.ndarray
    A2: np.ndarray
    A3: float
    A4: np.ndarray
    A5: float
    A6: float
    A7: np.ndarray
    A8: np.ndarray
    A9: float
    A10: float


def _build_constants(params: SystemParams) -> AnalyticConstants:
    thr = derive_thresholds(params)
    n = params.n_antennas
    rho_s, rho_r, g0, eta = params.rho_s, params.rho_r, params.g0, params.eta
    ps1, psr, pr1, pr2 = (params.psi(k) for k in ("s1", "sr", "r1", "r2"))
    m = np.arange(n, dtype=float)
    fact = np.array([math.factorial(int(k)) for k in m], dtype=float)
    with np.errstate(over="ignore"):
        xi_s1 = ps1**m / fact
        xi_sr = psr**m / fact
        rho_m = rho_s**-m
    e_tau = math.exp(-psr * thr.tau1)
    binom = np.array([[math.comb(i, j) if j <= i else 0 for j in range(n)] for i in range(n)], float)
    nn = m[None, :]

    a9 = pr1 * rho_s / (ps1 * eta * rho_r)
    with np.errstate(over="ignore", invalid="ignore"):
        a2 = (
            (xi_s1 / (thr.theta * rho_s) ** m)[:, None]
            * binom
            * (psr * thr.theta * thr.theta2 / ps1) ** (nn / 2)
            * e_tau
        )
        a8 = (
            (-math.expm1(-psr * thr.tau1) * xi_s1 * rho_m)[:, None]
            * pr1
            * fact[None, :]
            * (eta * g0 * rho_r) ** nn
            * binom
            * (a9 / pr1) ** (nn + 1)
        )
    return AnalyticConstants(
        psi_s1=ps1,
        psi_sr=psr,
        psi_r1=pr1,
        psi_r2=pr2,
        xi_s1=xi_s1,
        xi_sr=xi_sr,
        A0=thr.theta1 * (thr.theta2 + 1.0) / rho_s,
        A1=-math.expm1(-psr * thr.tau1) * xi_s1 * rho_m,
        A2=a2,
        A3=ps1 / (thr.theta * rho_s),
        A4=-math.expm1(-psr * thr.tau1) * xi_sr * rho_m,
        A5=psr / rho_s,
        A6=pr2 / (g0 * rho_r),
        A7=xi_s1 * e_tau * rho_m,
        A8=a8,
        A9=a9,
        A10=-math.expm1(-ps1 * thr.tau2),
    )


_memo_constants = functools.lru_cache(maxsize=256)(_build_constants)


def analytic_constants(params: SystemParams, memo: bool = False) -> AnalyticConstants:
    """Constants for ``params``; ``memo=True`` reuses earlier results."""
    return _memo_constants(params) if memo else _build_constants(params)


def _thr(params, thr):
    return derive_thresholds(params) if thr is None else thr


def _single_antenna(params: SystemParams, scheme: str) -> None:
    if params.n_antennas != 1:
        raise ConfigError(
            f"{scheme} closed forms are single-antenna; got n_antennas={params.n_antennas}"
        )


def _cf(p: float) -> OpValue:
    # guard against rounding a hair outside [0, 1]
    return OpValue(min(max(p, 0.0), 1.0), Method.CLOSED_FORM)


# --- DPU ------------------------------------------------------------------


def op_x1_dpu(params: SystemParams, thr: DerivedThresholds | None = None) -> OpValue:
    _single_antenna(params, "DPU")
    thr = _thr(params, thr)
    a0 = thr.theta1 * (thr.theta2 + 1.0) / params.rho_s
    return _cf(-math.expm1(-params.psi("s1") * (a0 + thr.tau1)))


def op_x2_dpu(params: SystemParams, thr: DerivedThresholds | None = None) -> OpValue:
    _single_antenna(params, "DPU")
    thr = _thr(params, thr)
    ps1, psr, pr2 = params.psi("s1"), params.psi("sr"), params.psi("r2")
    expo = -(ps1 + psr) * thr.tau1 - pr2 * thr.theta2 / params.rho_r
    return _cf(1.0 - ps1 / (ps1 + psr) * math.exp(expo))


def op_x3_dpu(params: SystemParams, thr: DerivedThresholds | None = None) -> OpValue:
    _single_antenna(params, "DPU")
    thr = _thr(params, thr)
    ps1 = params.psi("s1")
    if thr.theta2 >= thr.theta3:
        return _cf(-math.expm1(-ps1 * thr.tau1))
    return _cf(-math.expm1(-ps1 * thr.theta3 / params.rho_s))


# --- DPR ------------------------------------------------------------------


def op_x1_dpr(
    params: SystemParams,
    thr: DerivedThresholds | None = None,
    method: Method | str = Method.CLOSED_FORM,
) -> OpValue:
    """x1 outage under DPR.

    The closed form replaces the ``exp(-a t - b / t)`` integral by its K1
    approximation, so it is not exact; ``method="quadrature"`` integrates the
    exact event instead.
    """
    _single_antenna(params, "DPR")
    thr = _thr(params, thr)
    if Method(method) is Method.QUADRATURE:
        from .quadrature import op_quadrature

        return op_quadrature("DPR", "x1", params, thr)
    ps1, psr = params.psi("s1"), params.psi("sr")
    a0 = thr.theta1 * (thr.theta2 + 1.0) / params.rho_s
    tau = thr.tau1
    p = (
        1.0
        - psr / (ps1 + psr) * math.exp(-(ps1 + psr) * (a0 + tau))
        - math.exp(-psr * tau - ps1 * a0)
        * -math.expm1(-psr * a0)
        * phi1(4.0 * ps1 * psr * tau * a0)
    )
    return _cf(p)


def op_x2_dpr(params: SystemParams, thr: DerivedThresholds | None = None) -> OpValue:
    _single_antenna(params, "DPR")
    thr = _thr(params, thr)
    psr, pr2 = params.psi("sr"), params.psi("r2")
    return _cf(-math.expm1(-psr * thr.tau1 - pr2 * thr.theta2 / params.rho_r))


def op_x3_dpr(params: SystemParams, thr: DerivedThresholds | None = None) -> OpValue:
    _single_antenna(params, "DPR")
    thr = _thr(params, thr)
    ps1, psr = params.psi("s1"), params.psi("sr")
    tau, c3 = thr.tau1, thr.theta3 / params.rho_s
    if thr.theta2 >= thr.theta3:
        return _cf(1.0 - psr / (ps1 + psr) * math.exp(-(ps1 + psr) * tau))
    p = (
        1.0
        - math.exp(-tau * psr - c3 * ps1)
        + ps1 / (ps1 + psr) * math.exp(-c3 * (ps1 + psr))
    )
    return _cf(p)


# --- MDPR -----------------------------------------------------------------


def _mdpr_x1_parts(params, thr):
    n = params.n_antennas
    ps1, psr = params.psi("s1"), params.psi("sr")
    tau = thr.tau1
    x = ps1 * thr.theta1 * (thr.theta2 + 1.0) / params.rho_s  # psi_s1 * A0
    z2 = 4.0 * x * psr * tau
    q1 = snr_threshold(params.rth_x1, prelog=0.25) / params.rho_s
    oma = -math.expm1(-psr * tau) * erlang_sf(n, ps1, q1)
    return n, ps1, psr, tau, x, z2, oma


def op_x1_mdpr(params: SystemParams, thr: DerivedThresholds | None = None) -> OpValue:
    """x1 outage under MDPR with the NOMA-branch integral done exactly.

    With ``z = 2 sqrt(psi_sr psi_s1 A0 tau1)`` the inner Bessel factors are
    ``z K_{n-1}(z)``; they are generated by a positive three-term recurrence
    on ``e_n = r^{n/2} z K_{n-1}(z) x^n / n!`` (``x = psi_s1 A0``), which
    stays finite at any SNR.
    """
    thr = _thr(params, thr)
    n, ps1, psr, tau, x, z2, oma = _mdpr_x1_parts(params, thr)
    e = [phi1(z2)]
    if n > 1:
        z = math.sqrt(z2)
        e.append(0.5 * z2 * _bessel_k01(z)[0] if z > 0 else 0.0)
    for k in range(1, n - 1):
        e.append(0.25 * z2 * e[k - 1] / (k * (k + 1)) + (k - 1) / (k + 1) * e[k])
    noma = math.exp(-psr * tau) * sum(e[k] * erlang_sf(n - k, 1.0, x) for k in range(n))
    return _cf(1.0 - oma - noma)


def op_x1_mdpr_literal(params: SystemParams, thr: DerivedThresholds | None = None) -> float:
    """The factored x1 expression with ``phi1(z^2)`` in every inner term.

    Returned as a bare float because it is not guaranteed to be a
    probability.
    """
    thr = _thr(params, thr)
    n, ps1, psr, tau, x, z2, oma = _mdpr_x1_parts(params, thr)
    root_r = math.sqrt(psr * tau / x) if x > 0 else 0.0
    # sum_m x^m/m! sum_n C(m,n) r^{n/2} = sum_m (x(1+sqrt r))^m / m!
    y = x * (1.0 + root_r)
    # e^y Q(n, y) is the partial exponential sum; add it up in log space
    if y > 0:
        log_terms = [m * math.log(y) - math.lgamma(m + 1) for m in range(n)]
        top = max(log_terms)
        log_sum = top + math.log(math.fsum(math.exp(t - top) for t in log_terms))
    else:
        log_sum = 0.0
    noma = math.exp(-psr * tau - x + log_sum) * phi1(z2)
    return 1.0 - oma - noma


def op_x2_mdpr(
    params: SystemParams, thr: DerivedThresholds | None = None, exact: bool = False
) -> OpValue:
    """x2 outage under MDPR.

    The default evaluates the factored expression, which treats the beamed
    gain ``Y_sr`` and the full gain ``||h_sr||^2`` as independent in the OMA
    branch.  ``exact=True`` uses ``||h_sr||^2 = Y_sr + Z`` with
    ``Z ~ Gamma(N-1, psi_sr)`` independent of ``Y_sr``.
    """
    thr = _thr(params, thr)
    n = params.n_antennas
    psr, pr2 = params.psi("sr"), params.psi("r2")
    tau = thr.tau1
    u = snr_threshold(params.rth_x2, prelog=0.25) / params.rho_s
    hop2 = math.exp(-pr2 * thr.theta2 / (params.g0 * params.rho_r))
    if not exact:
        oma = -math.expm1(-psr * tau) * erlang_sf(n, psr, u)
    else:
        # P{Y_sr < tau, Y_sr + Z >= u}; u > tau always
        a, b = psr * u, psr * (u - tau)
        oma = 0.0
        ta = tb = 1.0
        for k in range(n - 1):
            ta *= a / (k + 1)
            tb *= b / (k + 1)
            oma += ta - tb
        oma *= math.exp(-a)
    return _cf(1.0 - hop2 * (math.exp(-psr * tau) + oma))


def op_x3_mdpr(params: SystemParams, thr: DerivedThresholds | None = None) -> OpValue:
    """x3 outage under MDPR (the two OMA sub-branches included).

    The expression treats ``Y_sr``, ``Y_s1`` and ``||h_s1||^2`` as
    independent.
    """
    thr = _thr(params, thr)
    n = params.n_antennas
    ps1, psr, pr1 = params.psi("s1"), params.psi("sr"), params.psi("r1")
    rho_s, rho_r, g0, eta = params.rho_s, params.rho_r, params.g0, params.eta
    c3 = thr.theta3 / (g0 * rho_s)
    a9 = pr1 * rho_s / (ps1 * eta * rho_r)
    a10 = -math.expm1(-ps1 * thr.tau2)
    e_tau = math.exp(-psr * thr.tau1)
    clean = erlang_sf(n, ps1, c3)

    # A8 double sum folded: sum_n v^n Q(N - n, psi_s1 c3) with v = th3/(th3+A9)
    v = thr.theta3 / (thr.theta3 + a9)
    jam = 0.0
    vn = 1.0
    for k in range(n):
        jam += vn * erlang_sf(n - k, ps1, c3)
        vn *= v
    jam *= a9 / (thr.theta3 + a9)

    success = (1.0 - a10) * clean + a10 * (e_tau * clean + -math.expm1(-psr * thr.tau1) * jam)
    return _cf(1.0 - success)


_TABLE = {
    "DPU": (op_x1_dpu, op_x2_dpu, op_x3_dpu),
    "DPR": (op_x1_dpr, op_x2_dpr, op_x3_dpr),
    "MDPR": (op_x1_mdpr, op_x2_mdpr, op_x3_mdpr),
}


def closed_form_ops(scheme, params: SystemParams, thr: DerivedThresholds | None = None):
    """``(op_x1, op_x2, op_x3)`` closed-form values for DPU, DPR or MDPR."""
    from .schemes import SchemeKind

    kind = SchemeKind.parse(scheme)
    if not kind.has_closed_form:
        raise ConfigError(f"{kind.value} has no closed-form outage expressions")
    thr = _thr(params, thr)
    return tuple(f(params, thr) for f in _TABLE[kind.value])
