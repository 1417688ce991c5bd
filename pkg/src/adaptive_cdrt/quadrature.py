"""Numerical-integration oracle for the DPU, DPR and MDPR outage events.

Each success event is written as an integral over the keyed gain of the
conditional success probability, using only the channel laws:

* ``|h|^2`` of a single link is Exp(psi);
* ``||h_s1||^2`` is Gamma(N, psi_s1);
* under MRT toward U1, ``Y_sr`` is Exp(psi_sr), independent of
  ``||h_s1||^2``, and ``||h_sr||^2 = Y_sr + Z`` with Z ~ Gamma(N-1, psi_sr);
* with ``B ~ Beta(1, N-1)`` the joint law of ``(Y_sr, Y_s1, ||h_s1||^2)`` is
  ``(R B, G B, G)`` where R, G are the two Gamma(N) norms.

Decoding thresholds come from inverting the SINR expressions directly rather
than from the simplified event algebra, so agreement with a closed form is a
genuine check.  Gamma tails are taken from :mod:`scipy.special`; this module
does not use :mod:`adaptive_cdrt.special`.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy import integrate, special

from .analytic import Method, OpValue
from .params import ConfigError, DerivedThresholds, SystemParams, derive_thresholds, snr_threshold

__all__ = ["QuadratureError", "op_quadrature", "TOLERANCE"]

TOLERANCE = 1e-9
_DECADES = range(-14, 4)


class QuadratureError(ArithmeticError):
    """The integrator could not certify the requested absolute tolerance."""


class _Accumulator:
    def __init__(self):
        self.value = 0.0
        self.error = 0.0

    def quad(self, f, a, b, **kw):
        if b <= a:
            return 0.0
        with warnings.catch_warnings():
            # convergence is judged from the returned error estimates instead
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, err = integrate.quad(f, a, b, epsabs=1e-13, epsrel=1e-12, limit=400, **kw)
        self.value += val
        self.error += err
        return val

    def tail(self, f, lo, scale, extra=()):
        """Integrate ``f`` on ``(lo, inf)`` with breakpoints ``lo + scale*10^k``.

        The geometric ladder resolves integrands that switch on abruptly just
        above ``lo``; ``extra`` adds known jump locations.
        """
        ladder = [lo + scale * 10.0**k for k in _DECADES]
        edges = sorted({lo, *ladder, *(e for e in extra if lo < e < ladder[-1])})
        total = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            total += self.quad(f, a, b)
        total += self.quad(f, edges[-1], math.inf)
        return total


def _erlang_tail(n, psi, y):
    """P{Gamma(n, psi) >= y}; n = 0 is the point mass at zero."""
    if y <= 0:
        return 1.0
    if n == 0:
        return 0.0
    return float(special.gammaincc(n, psi * y))


def _x2_gate(a1, theta2, rho):
    """Smallest gain whose x2 SINR (x1 as interference) reaches theta2."""
    slack = 1.0 - a1 - a1 * theta2
    if slack <= 0:
        return math.inf
    return theta2 / (rho * slack)


_GATE_RTOL = 1e-6


def _clears(gain, gate):
    # Gates that coincide with the gain by construction must not flip on
    # rounding; the slack 1 - a1 (1 + theta2) loses digits as the gain grows.
    return gain >= gate * (1.0 - _GATE_RTOL)


def _dpa(gain, thr):
    return thr.theta * (1.0 - thr.tau1 / gain)


def _switch_point(pred, lo, hi):
    """Where a monotone predicate turns true on ``(lo, hi]``, by bisection."""
    if not pred(hi):
        return hi
    a, b = lo, hi
    for _ in range(200):
        mid = 0.5 * (a + b)
        if mid in (a, b):
            break
        a, b = (a, mid) if pred(mid) else (mid, b)
    return b


def _exp_pdf(psi):
    return lambda y: psi * math.exp(-psi * y)


def _single(params, thr, scheme, signal, strict):
    if params.n_antennas != 1:
        raise ConfigError(f"{scheme} is single-antenna; got n_antennas={params.n_antennas}")
    rho_s, rho_r = params.rho_s, params.rho_r
    ps1, psr, pr2 = params.psi("s1"), params.psi("sr"), params.psi("r2")
    hop2 = math.exp(-pr2 * thr.theta2 / rho_r)
    acc = _Accumulator()

    if scheme == "DPU":
        f_key, scale = _exp_pdf(ps1), 1.0 / ps1

        def succ(y):
            a1 = _dpa(y, thr)
            if a1 <= 0:
                return 0.0
            if signal == "x1":
                ok = _clears(y, _x2_gate(a1, thr.theta2, rho_s)) and rho_s * a1 * y >= thr.theta1
                return float(ok)
            if signal == "x2":
                return math.exp(-psr * _x2_gate(a1, thr.theta2, rho_s)) * hop2
            return float(_clears(y, _x2_gate(a1, thr.theta2, rho_s)) and rho_s * y >= thr.theta3)

    else:  # DPR
        f_key, scale = _exp_pdf(psr), 1.0 / psr

        def succ(x):
            a1 = _dpa(x, thr)
            if a1 <= 0:
                return 0.0
            if signal == "x2":
                ok_r = _clears(x, _x2_gate(a1, thr.theta2, rho_s))
                return float(ok_r) * hop2
            gate = _x2_gate(a1, thr.theta2, rho_s)
            if signal == "x1":
                gate = max(gate, thr.theta1 / (rho_s * a1))
            else:
                gate = max(gate, thr.theta3 / rho_s)
            return math.exp(-ps1 * gate)

    jumps = ()
    if scheme == "DPU" and signal != "x2":
        jumps = (_switch_point(lambda y: succ(y) > 0, thr.tau1, thr.tau1 + 1e3 * scale),)
    acc.tail(lambda y: f_key(y) * succ(y), thr.tau1, scale, jumps)
    return acc


def _mdpr(params, thr, signal, strict):
    n = params.n_antennas
    rho_s, rho_r, g0, eta = params.rho_s, params.rho_r, params.g0, params.eta
    ps1, psr, pr1, pr2 = (params.psi(k) for k in ("s1", "sr", "r1", "r2"))
    tau = thr.tau1
    hop2 = math.exp(-pr2 * thr.theta2 / (g0 * rho_r))
    f_y = _exp_pdf(psr)
    acc = _Accumulator()

    def u1_gate(y):
        # U1 recovers x2 iff ||h_s1||^2 clears this gate (only tested if strict)
        if not strict:
            return 0.0
        return _x2_gate(_dpa(y, thr), thr.theta2, rho_s) * (1.0 - _GATE_RTOL) if y > tau else math.inf

    if signal == "x1":
        q1 = snr_threshold(params.rth_x1, prelog=0.25) / rho_s

        def noma(y):
            a1 = _dpa(y, thr)
            if a1 <= 0:
                return 0.0
            gate = max(u1_gate(y), thr.theta1 / (rho_s * a1))
            return f_y(y) * _erlang_tail(n, ps1, gate)

        acc.tail(noma, tau, 1.0 / psr)
        acc.value += -math.expm1(-psr * tau) * _erlang_tail(n, ps1, q1)
        return acc

    if signal == "x2":
        u = snr_threshold(params.rth_x2, prelog=0.25) / rho_s
        # NOMA: R's x2 is met at the DPA boundary; check it through the SINR
        acc.tail(
            lambda y: f_y(y) * float(y > tau and _clears(y, _x2_gate(_dpa(y, thr), thr.theta2, rho_s))),
            tau,
            1.0 / psr,
        )
        acc.quad(lambda y: f_y(y) * _erlang_tail(n - 1, psr, u - y), 0.0, tau)
        acc.value *= hop2
        acc.error *= hop2
        return acc

    # x3
    c3 = thr.theta3 / (g0 * rho_s)
    tau2 = thr.tau2
    k = eta * g0 * rho_r
    acc.tail(lambda y: f_y(y) * _erlang_tail(n, ps1, max(c3, u1_gate(y))), tau, 1.0 / psr)

    def g_pdf(g):
        return math.exp(n * math.log(ps1) + (n - 1) * math.log(g) - ps1 * g - math.lgamma(n))

    # beyond g_far the Gamma(N) mass is below 1e-20
    g_far = float(special.gammainccinv(n, 1e-20)) / ps1
    g_mode = max(n - 1, 0.5) / ps1

    def jammed_ok(g):
        return g_pdf(g) * -math.expm1(-pr1 * (g / c3 - 1.0) / k)

    def oma_given_b(b, inner: _Accumulator):
        p_down = float(special.gammainc(n, psr * tau / b))
        hi = tau2 / b
        p = _erlang_tail(n, ps1, max(c3, hi))
        top = min(hi, g_far)
        if top > c3:
            pts = [g_mode] if c3 < g_mode < top else None
            p += inner.quad(jammed_ok, c3, top, points=pts)
        return p_down * p

    if n == 1:
        acc.value += oma_given_b(1.0, acc)
    else:
        inner = _Accumulator()
        beta_pdf = lambda b: (n - 1) * (1.0 - b) ** (n - 2)
        # P{R < tau/b} switches on near b ~ psi_sr tau, which can be tiny
        edges = [0.0] + [10.0**k for k in range(-15, 1)]
        for a, b in zip(edges[:-1], edges[1:]):
            acc.quad(lambda t: beta_pdf(t) * oma_given_b(t, inner), a, b)
    return acc


def op_quadrature(
    scheme,
    signal: str,
    params: SystemParams,
    thr: DerivedThresholds | None = None,
    strict: bool = False,
) -> OpValue:
    """Outage probability of ``signal`` under ``scheme`` by numerical integration.

    ``strict`` only affects MDPR x1/x3: it additionally requires U1 to
    recover x2 in the NOMA branch, as the per-trial decoder does.  Without it
    the event is the one behind the factored MDPR expressions.

    Raises :class:`QuadratureError` when the summed error estimates exceed
    ``TOLERANCE``.
    """
    from .schemes import SchemeKind

    kind = SchemeKind.parse(scheme)
    if signal not in ("x1", "x2", "x3"):
        raise ValueError(f"signal must be x1, x2 or x3, got {signal!r}")
    thr = derive_thresholds(params) if thr is None else thr
    if kind in (SchemeKind.DPU, SchemeKind.DPR):
        acc = _single(params, thr, kind.value, signal, strict)
    elif kind is SchemeKind.MDPR:
        acc = _mdpr(params, thr, signal, strict)
    else:
        raise ConfigError(f"no quadrature oracle for {kind.value}")
    if not np.isfinite(acc.value) or acc.error > TOLERANCE:
        raise QuadratureError(
            f"{kind.value} {signal}: error estimate {acc.error:.3g} exceeds {TOLERANCE:g}"
        )
    p = 1.0 - acc.value
    return OpValue(min(max(p, 0.0), 1.0), Method.QUADRATURE)
