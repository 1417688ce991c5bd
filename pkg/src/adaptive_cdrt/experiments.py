"""Parameter sweeps, threshold optimisation and the built-in figure presets."""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import optimize

from .analytic import closed_form_ops
from .montecarlo import effective_sum_throughput, estimate_ops
from .params import ConfigError, SystemParams
from .schemes import SchemeKind

__all__ = [
    "AXES",
    "Mode",
    "SweepSpec",
    "SweepRow",
    "OptimumResult",
    "effective_params",
    "apply_axis",
    "run_sweep",
    "maximize_on_grid",
    "find_optimal_rth",
    "PRESETS",
    "preset",
]

AXES = ("rho_db", "d_s1", "d_sr", "rth", "a1_fixed")
RTH_RANGE = (0.01, 2.0)


class Mode(str, enum.Enum):
    MC = "MC"
    ANALYTIC = "ANALYTIC"
    BOTH = "BOTH"

    @classmethod
    def parse(cls, value) -> "Mode":
        try:
            return cls(str(value.value if isinstance(value, Mode) else value).upper())
        except ValueError:
            raise ConfigError(f"mode must be one of MC, ANALYTIC, BOTH; got {value!r}") from None


def effective_params(kind: SchemeKind, params: SystemParams) -> SystemParams:
    """Single-antenna schemes always run with ``n_antennas = 1``."""
    if kind.single_antenna and params.n_antennas != 1:
        return params.replace(n_antennas=1)
    return params


def apply_axis(params: SystemParams, axis: str, value: float) -> SystemParams:
    if axis == "rho_db":
        return params.with_rho(value)
    if axis == "rth":
        return params.with_rth(value)
    if axis in ("d_s1", "d_sr", "a1_fixed"):
        return params.replace(**{axis: value})
    raise ConfigError(f"axis must be one of {AXES}; got {axis!r}")


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    grid: tuple[float, ...]
    schemes: tuple[SchemeKind, ...] = (SchemeKind.DPU, SchemeKind.DPR, SchemeKind.MDPR)
    fixed: SystemParams = field(default_factory=SystemParams)
    n_trials: int = 10**6
    seed: int = 0
    mode: Mode = Mode.MC
    threads: int = 1
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "grid", tuple(float(v) for v in self.grid))
        object.__setattr__(self, "schemes", tuple(SchemeKind.parse(s) for s in self.schemes))
        object.__setattr__(self, "mode", Mode.parse(self.mode))
        if self.axis not in AXES:
            raise ConfigError(f"axis must be one of {AXES}; got {self.axis!r}")
        if not self.grid:
            raise ConfigError("grid must not be empty")
        if any(not math.isfinite(v) for v in self.grid):
            raise ConfigError("grid values must be finite")
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise ConfigError("grid must be strictly increasing")
        if not self.schemes:
            raise ConfigError("schemes must not be empty")
        if len(set(self.schemes)) != len(self.schemes):
            raise ConfigError("schemes must not repeat")
        if self.mode is Mode.ANALYTIC:
            missing = [s.value for s in self.schemes if not s.has_closed_form]
            if missing:
                raise ConfigError(f"no closed forms for {', '.join(missing)}; use mode MC or BOTH")
        if isinstance(self.n_trials, bool) or int(self.n_trials) != self.n_trials or self.n_trials < 1:
            raise ConfigError("n_trials must be a positive integer")
        if isinstance(self.seed, bool) or int(self.seed) != self.seed or self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        if isinstance(self.threads, bool) or int(self.threads) != self.threads or self.threads < 1:
            raise ConfigError("threads must be a positive integer")
        for v in self.grid:  # surfaces range errors before any work starts
            apply_axis(self.fixed, self.axis, v)

    def replace(self, **changes) -> "SweepSpec":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class SweepRow:
    """One table line; ``se`` is ``None`` for analytic rows."""

    value: float
    scheme: SchemeKind
    mode: Mode
    op: tuple[float, float, float]
    se: tuple[float, float, float] | None
    est: float
    under_resolved: tuple[bool, bool, bool] = (False, False, False)


def _rates(params: SystemParams):
    return (params.rth_x1, params.rth_x2, params.rth_x3)


def run_sweep(spec: SweepSpec) -> list[SweepRow]:
    """One row per (grid value, scheme, mode), in that order.

    Monte Carlo rows at every grid value reuse the same seed, so all schemes
    and all grid points see common random numbers.
    """
    rows: list[SweepRow] = []
    for value in spec.grid:
        base = apply_axis(spec.fixed, spec.axis, value)
        per_kind = {k: effective_params(k, base) for k in spec.schemes}
        mc = {}
        if spec.mode in (Mode.MC, Mode.BOTH):
            mc = estimate_ops(spec.schemes, per_kind, spec.n_trials, spec.seed, spec.threads)
        for kind in spec.schemes:
            params = per_kind[kind]
            if kind in mc:
                ests = mc[kind]
                op = tuple(e.p_hat for e in ests)
                rows.append(
                    SweepRow(
                        value,
                        kind,
                        Mode.MC,
                        op,
                        tuple(e.std_err for e in ests),
                        effective_sum_throughput(op, _rates(params)).psi,
                        tuple(e.under_resolved for e in ests),
                    )
                )
            if spec.mode is not Mode.MC and kind.has_closed_form:
                op = tuple(v.p for v in closed_form_ops(kind, params))
                est = effective_sum_throughput(op, _rates(params)).psi
                rows.append(SweepRow(value, kind, Mode.ANALYTIC, op, None, est))
    return rows


@dataclass(frozen=True)
class OptimumResult:
    """Maximiser of a 1-D objective.

    ``local_maxima`` lists every interior maximum as ``(x, f(x))`` in
    increasing ``x``.  ``degenerate`` is set when there is none; ``x_star``
    is then the range midpoint for a flat objective or the better endpoint
    otherwise.
    """

    x_star: float
    f_star: float
    local_maxima: tuple[tuple[float, float], ...]
    degenerate: bool


def maximize_on_grid(
    f: Callable[[float], float], lo: float, hi: float, resolution: int = 200, flat_tol: float = 1e-12
) -> OptimumResult:
    """Coarse grid search, then bounded Brent refinement around each peak.

    Every strict-or-plateau interior peak of the grid is bracketed by its
    neighbours and refined separately, so multimodal objectives report all
    of their optima.
    """
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
        raise ValueError("search range must satisfy lo < hi")
    if resolution < 3:
        raise ValueError("resolution must be >= 3")
    xs = np.linspace(lo, hi, resolution)
    fs = np.array([f(float(x)) for x in xs])
    if fs.max() - fs.min() <= flat_tol:
        mid = 0.5 * (lo + hi)
        return OptimumResult(mid, f(mid), (), True)

    # compare on a quantised copy so rounding ripples in flat regions
    # are not mistaken for peaks
    span = fs.max() - fs.min()
    fq = np.round((fs - fs.min()) / span, 9)
    peaks = []
    i = 1
    while i < resolution - 1:
        j = i
        while j + 1 < resolution - 1 and fq[j + 1] == fq[i]:
            j += 1  # walk across a plateau
        if fq[i] > fq[i - 1] and fq[i] > fq[j + 1]:
            peaks.append((i, j))
        i = j + 1

    maxima = []
    for i, j in peaks:
        a, b = float(xs[i - 1]), float(xs[j + 1])
        res = optimize.minimize_scalar(
            lambda x: -f(x), bounds=(a, b), method="bounded", options={"xatol": 1e-9 * (hi - lo)}
        )
        x_best, f_best = float(xs[i]), float(fs[i])
        if -res.fun >= f_best:
            x_best, f_best = float(res.x), float(-res.fun)
        maxima.append((x_best, f_best))

    if not maxima:
        k = 0 if fq[0] >= fq[-1] else resolution - 1
        return OptimumResult(float(xs[k]), float(fs[k]), (), True)
    x_star, f_star = max(maxima, key=lambda m: m[1])
    return OptimumResult(x_star, f_star, tuple(maxima), False)


def find_optimal_rth(
    scheme: SchemeKind | str,
    params: SystemParams,
    search_range: Sequence[float] = RTH_RANGE,
    resolution: int = 200,
    n_trials: int = 10**5,
    seed: int = 0,
    threads: int = 1,
) -> OptimumResult:
    """Equal-threshold ``R_th`` maximising the effective sum throughput.

    DPU, DPR and MDPR use their closed forms; benchmarks fall back to Monte
    Carlo with a fixed seed, which makes the objective deterministic.
    """
    kind = SchemeKind.parse(scheme)
    lo, hi = (float(v) for v in search_range)
    if lo <= 0:
        raise ConfigError("R_th search range must be positive")
    base = effective_params(kind, params)

    def est(rth: float) -> float:
        p = base.with_rth(rth)
        if kind.has_closed_form:
            ops = closed_form_ops(kind, p)
        else:
            ops = estimate_ops([kind], p, n_trials, seed, threads)[kind]
        return effective_sum_throughput(ops, _rates(p)).psi

    return maximize_on_grid(est, lo, hi, resolution)


# --- figure presets --------------------------------------------------------

_ALL = tuple(SchemeKind)
_PROPOSED = (SchemeKind.DPU, SchemeKind.DPR, SchemeKind.MDPR)
_RHO_GRID = tuple(float(v) for v in range(0, 41, 5))


def _fig2():
    return [
        SweepSpec("rho_db", _RHO_GRID, _ALL, SystemParams(d_s1=d), mode=Mode.BOTH, label=f"ds1_{d:g}")
        for d in (10.0, 15.0)
    ]


def _fig3():
    return [
        SweepSpec("rho_db", _RHO_GRID, _ALL, SystemParams(d_sr=d), mode=Mode.BOTH, label=f"dsr_{d:g}")
        for d in (10.0, 15.0, 20.0)
    ]


def _fig4():
    return [
        SweepSpec(
            "rho_db", _RHO_GRID, _PROPOSED, SystemParams().with_rth(r), mode=Mode.BOTH, label=f"rth_{r:g}"
        )
        for r in (0.2, 0.4)
    ]


def _fig5():
    grid = tuple(np.round(np.linspace(0.02, 2.0, 100), 10))
    return [
        SweepSpec("rth", grid, _PROPOSED, SystemParams().with_rho(23.0), mode=Mode.ANALYTIC, label="rho_23")
    ]


def _fig6():
    schemes = (SchemeKind.DPU, SchemeKind.DPR, SchemeKind.BEN1, SchemeKind.BEN2)
    return [
        SweepSpec("rho_db", _RHO_GRID, schemes, SystemParams(a1_fixed=a), mode=Mode.MC, label=f"a1_{a:g}")
        for a in (0.2, 0.5, 0.7)
    ]


def _fig7():
    grid = tuple(np.round(np.arange(0.05, 0.951, 0.05), 10))
    return [
        SweepSpec(
            "a1_fixed",
            grid,
            (SchemeKind.BEN1, SchemeKind.BEN2),
            SystemParams().with_rho(35.0),
            mode=Mode.MC,
            label="rho_35",
        )
    ]


PRESETS: dict[str, Callable[[], list[SweepSpec]]] = {
    "fig2": _fig2,
    "fig3": _fig3,
    "fig4": _fig4,
    "fig5": _fig5,
    "fig6": _fig6,
    "fig7": _fig7,
}


def preset(name: str, **overrides) -> list[SweepSpec]:
    """Built-in sweep specs for ``name``; ``overrides`` replace spec fields
    such as ``n_trials``, ``seed`` or ``threads``."""
    try:
        specs = PRESETS[name]()
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    changes = {k: v for k, v in overrides.items() if v is not None}
    return [s.replace(**changes) for s in specs]
