"""System configuration and the derived SNR thresholds."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ConfigError",
    "SystemParams",
    "DerivedThresholds",
    "derive_thresholds",
    "db_to_linear",
    "snr_threshold",
    "achievable_rate",
]

BEAM_TARGETS = ("u1", "r")


class ConfigError(ValueError):
    """Invalid configuration value or unsupported parameter combination."""


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def snr_threshold(rate: float, prelog: float = 0.5) -> float:
    """Smallest SNR whose ``prelog * ln(1 + snr)`` reaches ``rate`` nats/s/Hz."""
    return math.expm1(rate / prelog)


def achievable_rate(snr, prelog: float = 0.5):
    """``prelog * ln(1 + snr)`` in nats/s/Hz; works on scalars and arrays."""
    return prelog * np.log1p(snr)


@dataclass(frozen=True)
class SystemParams:
    """Geometry, powers, thresholds and antenna settings of one experiment.

    Defaults follow the reference scenario: S-U1 10 m, S-R and R-U1 15 m,
    R-U2 10 m, path-loss exponent 2, equal 0.2 nat/s/Hz targets, sidelobe
    attenuation 0.7 and ten transmit antennas.  ``rho_r_db`` defaults to
    ``rho_s_db`` when left as ``None``.
    """

    d_s1: float = 10.0
    d_sr: float = 15.0
    d_r1: float = 15.0
    d_r2: float = 10.0
    alpha: float = 2.0
    n_antennas: int = 10
    rho_s_db: float = 20.0
    rho_r_db: float | None = None
    g0: float = 1.0
    eta: float = 0.7
    rth_x1: float = 0.2
    rth_x2: float = 0.2
    rth_x3: float = 0.2
    a1_fixed: float = 0.2
    ben2_beam: str = "u1"

    def __post_init__(self):
        if self.rho_r_db is None:
            object.__setattr__(self, "rho_r_db", self.rho_s_db)
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if f.name == "ben2_beam":
                continue
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"{f.name}: expected a number, got {v!r}")
            if not math.isfinite(v):
                raise ConfigError(f"{f.name}: must be finite, got {v!r}")
        for name in ("d_s1", "d_sr", "d_r1", "d_r2"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name}: distances must be > 0")
        if self.alpha < 0:
            raise ConfigError("alpha: path-loss exponent must be >= 0")
        if int(self.n_antennas) != self.n_antennas or self.n_antennas < 1:
            raise ConfigError("n_antennas: must be an integer >= 1")
        object.__setattr__(self, "n_antennas", int(self.n_antennas))
        if not 0 < self.eta <= 1:
            raise ConfigError("eta: sidelobe attenuation must satisfy 0 < eta <= 1")
        if self.g0 <= 0:
            raise ConfigError("g0: mainlobe gain must be > 0")
        for name in ("rth_x1", "rth_x2", "rth_x3"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name}: rate thresholds must be > 0")
        if not 0 < self.a1_fixed < 1:
            raise ConfigError("a1_fixed: must satisfy 0 < a1_fixed < 1")
        if self.ben2_beam not in BEAM_TARGETS:
            raise ConfigError(f"ben2_beam: must be one of {BEAM_TARGETS}")

    def replace(self, **changes) -> "SystemParams":
        return dataclasses.replace(self, **changes)

    def with_rho(self, rho_db: float) -> "SystemParams":
        """Same configuration with both transmit SNRs set to ``rho_db``."""
        return dataclasses.replace(self, rho_s_db=rho_db, rho_r_db=rho_db)

    def with_rth(self, rth: float) -> "SystemParams":
        return dataclasses.replace(self, rth_x1=rth, rth_x2=rth, rth_x3=rth)

    @property
    def rho_s(self) -> float:
        return db_to_linear(self.rho_s_db)

    @property
    def rho_r(self) -> float:
        return db_to_linear(self.rho_r_db)

    def mean_gain(self, link: str) -> float:
        """Average channel gain ``d^-alpha`` of ``link`` in {s1, sr, r1, r2}."""
        return getattr(self, f"d_{link}") ** (-self.alpha)

    def psi(self, link: str) -> float:
        """Inverse mean gain ``d^alpha`` (the exponential rate of |h|^2)."""
        return getattr(self, f"d_{link}") ** self.alpha


@dataclass(frozen=True)
class DerivedThresholds:
    theta1: float
    theta2: float
    theta3: float
    theta: float
    tau1: float
    tau2: float


def derive_thresholds(params: SystemParams) -> DerivedThresholds:
    """SNR thresholds for the half-slot rates plus the DPA constants.

    ``theta`` caps the x1 power share so U1/R can still decode x2;
    ``tau1``/``tau2`` are the smallest gains that carry x2 alone in a half
    slot and in a quarter slot.
    """
    theta1 = snr_threshold(params.rth_x1)
    theta2 = snr_threshold(params.rth_x2)
    theta3 = snr_threshold(params.rth_x3)
    rho_s = params.rho_s
    return DerivedThresholds(
        theta1=theta1,
        theta2=theta2,
        theta3=theta3,
        theta=1.0 / (1.0 + theta2),
        tau1=theta2 / rho_s,
        tau2=snr_threshold(params.rth_x2, prelog=0.25) / rho_s,
    )
