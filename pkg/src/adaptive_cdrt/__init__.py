"""Outage and throughput evaluation for adaptive NOMA coordinated direct and
relay transmission (CDRT).

A source S serves a near user U1 directly and a far user U2 through a relay
R.  Six transmission schemes are modelled: three with dynamic power
allocation (DPU, DPR, and the multi-antenna MDPR with an OMA fallback) and
three benchmarks (BEN1-BEN3).  The package offers per-trial decoding logic,
a reproducible Monte Carlo engine, closed-form outage probabilities with a
quadrature oracle, parameter sweeps and a CLI.
"""

from .analytic import (
    AnalyticConstants,
    Method,
    OpValue,
    analytic_constants,
    closed_form_ops,
    op_x1_dpr,
    op_x1_dpu,
    op_x1_mdpr,
    op_x1_mdpr_literal,
    op_x2_dpr,
    op_x2_dpu,
    op_x2_mdpr,
    op_x3_dpr,
    op_x3_dpu,
    op_x3_mdpr,
)
from .channel import (
    BLOCK_SIZE,
    ChannelRealization,
    DegenerateChannelError,
    RandomStream,
    draw_channels,
    draw_trial,
    mrt_projection,
)
from .experiments import (
    Mode,
    OptimumResult,
    SweepRow,
    SweepSpec,
    find_optimal_rth,
    maximize_on_grid,
    preset,
    run_sweep,
)
from .montecarlo import EstValue, OpEstimate, effective_sum_throughput, estimate_op, estimate_ops
from .params import ConfigError, DerivedThresholds, SystemParams, derive_thresholds
from .quadrature import QuadratureError, op_quadrature
from .schemes import (
    Branch,
    OutageFlags,
    SchemeKind,
    TrialBranch,
    dpa_coefficient,
    evaluate,
    evaluate_ben1,
    evaluate_ben2,
    evaluate_ben3,
    evaluate_dpr,
    evaluate_dpu,
    evaluate_mdpr,
)
from .special import DomainError, bessel_k1, erlang_sf, phi1

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
