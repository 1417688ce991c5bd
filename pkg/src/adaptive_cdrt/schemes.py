"""Per-trial decoding outcomes of the six transmission schemes.

Every evaluator is vectorized over a :class:`ChannelRealization` batch and
returns boolean outage arrays.  Conventions shared by all schemes:

* U1 decodes x2 before x1 (SIC order x2 -> x1).
* With dynamic power allocation, a1 sits on the boundary that makes the
  keyed receiver's x2 SINR exactly theta2, so that receiver's x2 decoding
  is guaranteed by construction and is not re-tested with floating point.
* When the DPA keyed gain is at or below tau1 the system cannot serve
  anyone and all three signals count as in outage.
* x3 at U1 is interference-free only if U1 recovered x2 in the first slot.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization
from .params import ConfigError, DerivedThresholds, SystemParams, snr_threshold

__all__ = [
    "SchemeKind",
    "Branch",
    "OutageFlags",
    "TrialBranch",
    "dpa_coefficient",
    "evaluate",
    "evaluate_dpu",
    "evaluate_dpr",
    "evaluate_mdpr",
    "evaluate_ben1",
    "evaluate_ben2",
    "evaluate_ben3",
]


class SchemeKind(str, enum.Enum):
    DPU = "DPU"
    DPR = "DPR"
    MDPR = "MDPR"
    BEN1 = "BEN1"
    BEN2 = "BEN2"
    BEN3 = "BEN3"

    @property
    def single_antenna(self) -> bool:
        return self in (SchemeKind.DPU, SchemeKind.DPR, SchemeKind.BEN1)

    @property
    def has_closed_form(self) -> bool:
        return self in (SchemeKind.DPU, SchemeKind.DPR, SchemeKind.MDPR)

    @classmethod
    def parse(cls, value: "str | SchemeKind") -> "SchemeKind":
        if isinstance(value, SchemeKind):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise ConfigError(f"unknown scheme {value!r}") from None


class Branch(enum.IntEnum):
    SYSTEM_DOWN = 0
    NOMA = 1
    OMA_DECODED_X2 = 2
    OMA_UNDECODED_X2 = 3


@dataclass(frozen=True)
class OutageFlags:
    out_x1: np.ndarray
    out_x2: np.ndarray
    out_x3: np.ndarray


@dataclass(frozen=True)
class TrialBranch:
    """Operating branch per trial; ``a1_used`` is NaN outside NOMA."""

    branch: np.ndarray
    a1_used: np.ndarray


def dpa_coefficient(gain, thr: DerivedThresholds):
    """Largest x1 power share that still lets the keyed receiver decode x2.

    Returns ``theta * (1 - tau1 / gain)`` when ``gain > tau1``.  For a scalar
    gain at or below ``tau1`` the result is ``None``; for arrays those entries
    are NaN.
    """
    if np.ndim(gain) == 0:
        gain = float(gain)
        if gain <= 0:
            raise ValueError("gain must be positive")
        if gain <= thr.tau1:
            return None
        return thr.theta * (1.0 - thr.tau1 / gain)
    gain = np.asarray(gain, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        a1 = thr.theta * (1.0 - thr.tau1 / gain)
    return np.where(gain > thr.tau1, a1, np.nan)


def _sinr_x2(a1, gain, rho):
    """SINR of x2 while x1 is still interference."""
    return rho * (1.0 - a1) * gain / (rho * a1 * gain + 1.0)


def _require_single_antenna(params: SystemParams, scheme: str) -> None:
    if params.n_antennas != 1:
        raise ConfigError(f"{scheme} is a single-antenna scheme; got n_antennas={params.n_antennas}")


def _dpa_branch(up, a1):
    branch = np.where(up, Branch.NOMA, Branch.SYSTEM_DOWN).astype(np.int8)
    return TrialBranch(branch, np.where(up, a1, np.nan))


def _dpa(gain, thr):
    """(served mask, a1) with a1 zeroed where the system is down."""
    a1 = dpa_coefficient(gain, thr)
    up = ~np.isnan(a1)
    return up, np.where(up, a1, 0.0)


def _dpu_like(params, thr, ch, u1_gain, r_gain, x3_gain, g0):
    rho_s, rho_r = params.rho_s, params.rho_r
    up, a1 = _dpa(u1_gain, thr)
    ok_x1 = up & (rho_s * a1 * u1_gain >= thr.theta1)
    r_ok = _sinr_x2(a1, r_gain, rho_s) >= thr.theta2
    ok_x2 = up & r_ok & (g0 * rho_r * ch.gain_r2 >= thr.theta2)
    ok_x3 = up & (g0 * rho_s * x3_gain >= thr.theta3)
    flags = OutageFlags(~ok_x1, ~ok_x2, ~ok_x3)
    return flags, _dpa_branch(up, a1)


def _fpa(params, thr, ch, u1_gain, r_gain, g0, eta):
    rho_s, rho_r = params.rho_s, params.rho_r
    a1 = params.a1_fixed
    u1_x2 = _sinr_x2(a1, u1_gain, rho_s) >= thr.theta2
    ok_x1 = u1_x2 & (rho_s * a1 * u1_gain >= thr.theta1)
    r_ok = _sinr_x2(a1, r_gain, rho_s) >= thr.theta2
    ok_x2 = r_ok & (g0 * rho_r * ch.gain_r2 >= thr.theta2)
    clean = g0 * rho_s * u1_gain
    jammed = clean / (eta * g0 * rho_r * ch.gain_r1 + 1.0)
    ok_x3 = np.where(u1_x2, clean, jammed) >= thr.theta3
    n = len(ch)
    branch = TrialBranch(np.full(n, Branch.NOMA, dtype=np.int8), np.full(n, a1))
    return OutageFlags(~ok_x1, ~ok_x2, ~ok_x3), branch


def _dpu(params, thr, ch):
    _require_single_antenna(params, "DPU")
    return _dpu_like(params, thr, ch, ch.norm2_s1, ch.norm2_sr, ch.norm2_s1, 1.0)


def _dpr(params, thr, ch):
    _require_single_antenna(params, "DPR")
    rho_s, rho_r = params.rho_s, params.rho_r
    x1, y1 = ch.norm2_sr, ch.norm2_s1
    up, a1 = _dpa(x1, thr)
    u1_x2 = up & (_sinr_x2(a1, y1, rho_s) >= thr.theta2)
    ok_x1 = u1_x2 & (rho_s * a1 * y1 >= thr.theta1)
    ok_x2 = up & (rho_r * ch.gain_r2 >= thr.theta2)
    ok_x3 = u1_x2 & (rho_s * y1 >= thr.theta3)
    return OutageFlags(~ok_x1, ~ok_x2, ~ok_x3), _dpa_branch(up, a1)


def _mdpr(params, thr, ch):
    rho_s, rho_r, g0, eta = params.rho_s, params.rho_r, params.g0, params.eta
    g, y_sr = ch.norm2_s1, ch.y_sr
    noma, a1 = _dpa(y_sr, thr)

    # NOMA: R's x2 is guaranteed by the DPA rule
    u1_x2 = _sinr_x2(a1, g, rho_s) >= thr.theta2
    second_hop = g0 * rho_r * ch.gain_r2 >= thr.theta2
    noma_x1 = u1_x2 & (rho_s * a1 * g >= thr.theta1)
    noma_x3 = u1_x2 & (g0 * rho_s * g >= thr.theta3)

    # OMA fallback: t1 split in two quarter-rate MRT transmissions
    q1 = snr_threshold(params.rth_x1, prelog=0.25)
    q2 = snr_threshold(params.rth_x2, prelog=0.25)
    oma_x1 = rho_s * g >= q1
    oma_x2 = rho_s * ch.norm2_sr >= q2
    u1_has_x2 = rho_s * ch.y_s1 >= q2
    clean = g0 * rho_s * g
    jammed = clean / (eta * g0 * rho_r * ch.gain_r1 + 1.0)
    oma_x3 = np.where(u1_has_x2, clean, jammed) >= thr.theta3

    ok_x1 = np.where(noma, noma_x1, oma_x1)
    ok_x2 = np.where(noma, True, oma_x2) & second_hop
    ok_x3 = np.where(noma, noma_x3, oma_x3)

    branch = np.where(
        noma,
        Branch.NOMA,
        np.where(u1_has_x2, Branch.OMA_DECODED_X2, Branch.OMA_UNDECODED_X2),
    ).astype(np.int8)
    return OutageFlags(~ok_x1, ~ok_x2, ~ok_x3), TrialBranch(branch, np.where(noma, a1, np.nan))


def _ben1(params, thr, ch):
    _require_single_antenna(params, "BEN1")
    return _fpa(params, thr, ch, ch.norm2_s1, ch.norm2_sr, 1.0, 1.0)


def _ben2(params, thr, ch):
    if params.ben2_beam == "u1":
        u1_gain, r_gain = ch.norm2_s1, ch.y_sr
    else:
        u1_gain, r_gain = ch.y_s1, ch.norm2_sr
    return _fpa(params, thr, ch, u1_gain, r_gain, params.g0, params.eta)


def _ben3(params, thr, ch):
    return _dpu_like(params, thr, ch, ch.y_s1, ch.norm2_sr, ch.y_s1, params.g0)


_DISPATCH = {
    SchemeKind.DPU: _dpu,
    SchemeKind.DPR: _dpr,
    SchemeKind.MDPR: _mdpr,
    SchemeKind.BEN1: _ben1,
    SchemeKind.BEN2: _ben2,
    SchemeKind.BEN3: _ben3,
}


def evaluate(
    scheme: SchemeKind | str,
    params: SystemParams,
    thr: DerivedThresholds,
    ch: ChannelRealization,
) -> tuple[OutageFlags, TrialBranch]:
    """Outage flags and operating branch of ``scheme`` for every trial in ``ch``."""
    return _DISPATCH[SchemeKind.parse(scheme)](params, thr, ch)


def evaluate_dpu(params, thr, ch) -> OutageFlags:
    """DPA keyed to the S-U1 gain (single antenna)."""
    return _dpu(params, thr, ch)[0]


def evaluate_dpr(params, thr, ch) -> OutageFlags:
    """DPA keyed to the S-R gain (single antenna)."""
    return _dpr(params, thr, ch)[0]


def evaluate_mdpr(params, thr, ch) -> tuple[OutageFlags, TrialBranch]:
    """MRT toward U1, DPA keyed to the beamformed S-R gain, OMA fallback."""
    return _mdpr(params, thr, ch)


def evaluate_ben1(params, thr, ch) -> OutageFlags:
    return _ben1(params, thr, ch)[0]


def evaluate_ben2(params, thr, ch) -> OutageFlags:
    return _ben2(params, thr, ch)[0]


def evaluate_ben3(params, thr, ch) -> OutageFlags:
    return _ben3(params, thr, ch)[0]
