"""Monte Carlo outage estimation and effective sum throughput.

Trials are processed in blocks of :data:`~adaptive_cdrt.channel.BLOCK_SIZE`.
Each block is reduced to integer counts, and counts are summed, so the
estimate is bit-identical for any number of worker threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .channel import BLOCK_SIZE, RandomStream, draw_channels
from .params import SystemParams, derive_thresholds
from .schemes import Branch, SchemeKind, evaluate

__all__ = [
    "UNDER_RESOLVED_BELOW",
    "OpEstimate",
    "EstValue",
    "estimate_op",
    "estimate_ops",
    "effective_sum_throughput",
]

UNDER_RESOLVED_BELOW = 1e-4
SIGNALS = ("x1", "x2", "x3")


@dataclass(frozen=True)
class OpEstimate:
    """Outage rate of one signal.

    ``std_err`` is the binomial standard error, or the rule-of-three bound
    ``3 / n`` when no (or every) trial was in outage.  ``under_resolved``
    marks estimates below :data:`UNDER_RESOLVED_BELOW`, where a desk-sized run
    sees too few events to be trusted.
    """

    p_hat: float
    n_trials: int
    std_err: float
    branch_counts: Mapping[Branch, int] = field(default_factory=dict)
    under_resolved: bool = False

    @classmethod
    def from_counts(
        cls, outages: int, n_trials: int, branch_counts: Mapping[Branch, int] | None = None
    ) -> "OpEstimate":
        if n_trials < 1:
            raise ValueError("n_trials must be >= 1")
        if not 0 <= outages <= n_trials:
            raise ValueError("outage count must lie in [0, n_trials]")
        p = outages / n_trials
        if outages in (0, n_trials):
            se = 3.0 / n_trials
        else:
            se = math.sqrt(p * (1.0 - p) / n_trials)
        return cls(p, n_trials, se, dict(branch_counts or {}), p < UNDER_RESOLVED_BELOW)

    def __float__(self) -> float:
        return self.p_hat


@dataclass(frozen=True)
class EstValue:
    psi: float
    contributions: tuple[float, float, float]


def effective_sum_throughput(ops: Sequence, rates: Sequence[float]) -> EstValue:
    """``sum_i R_i (1 - P_i)`` in nats/s/Hz.

    ``ops`` may hold floats or anything convertible with ``float()`` (for
    example :class:`OpEstimate` or an analytic ``OpValue``).
    """
    if len(ops) != 3 or len(rates) != 3:
        raise ValueError("expected three outage probabilities and three rates")
    probs = [float(p) for p in ops]
    for p in probs:
        if not 0.0 <= p <= 1.0 or math.isnan(p):
            raise ValueError(f"outage probability {p} outside [0, 1]")
    contrib = tuple(float(r) * (1.0 - p) for r, p in zip(rates, probs))
    return EstValue(math.fsum(contrib), contrib)


def _block_counts(kinds, params_by_kind, thr_by_kind, seed, block, size):
    """Outage counts ``(x1, x2, x3)`` and branch histogram per scheme."""
    out = {}
    draws = {}
    for kind in kinds:
        params = params_by_kind[kind]
        ch = draws.get(params)
        if ch is None:
            ch = draws[params] = draw_channels(params, RandomStream(seed, block), size)
        flags, branch = evaluate(kind, params, thr_by_kind[kind], ch)
        counts = tuple(int(np.count_nonzero(f)) for f in (flags.out_x1, flags.out_x2, flags.out_x3))
        hist = np.bincount(branch.branch, minlength=len(Branch))
        out[kind] = (counts, hist)
    return out


def estimate_ops(
    schemes: Iterable[SchemeKind | str],
    params: SystemParams | Mapping[SchemeKind, SystemParams],
    n_trials: int = 10**6,
    seed: int = 0,
    threads: int = 1,
) -> dict[SchemeKind, tuple[OpEstimate, OpEstimate, OpEstimate]]:
    """Estimate all three outage probabilities for several schemes at once.

    Every scheme is evaluated on the same trials (common random numbers).
    ``params`` is either shared or given per scheme; schemes whose
    parameters coincide also share the channel draws themselves.
    """
    kinds = [SchemeKind.parse(s) for s in schemes]
    if not kinds:
        raise ValueError("no schemes given")
    if isinstance(n_trials, bool) or int(n_trials) != n_trials or n_trials < 1:
        raise ValueError(f"n_trials must be a positive integer, got {n_trials!r}")
    n_trials = int(n_trials)
    if threads < 1:
        raise ValueError("threads must be >= 1")
    if isinstance(params, SystemParams):
        params_by_kind = {k: params for k in kinds}
    else:
        params_by_kind = {k: params[k] for k in kinds}
    thr_by_kind = {k: derive_thresholds(p) for k, p in params_by_kind.items()}

    n_blocks, rem = divmod(n_trials, BLOCK_SIZE)
    sizes = [BLOCK_SIZE] * n_blocks + ([rem] if rem else [])

    def job(block):
        return _block_counts(kinds, params_by_kind, thr_by_kind, seed, block, sizes[block])

    if threads == 1:
        results = [job(b) for b in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(job, range(len(sizes))))

    estimates = {}
    for kind in kinds:
        counts = np.zeros(3, dtype=np.int64)
        hist = np.zeros(len(Branch), dtype=np.int64)
        for res in results:
            c, h = res[kind]
            counts += c
            hist += h
        branches = {b: int(hist[b]) for b in Branch if hist[b]}
        estimates[kind] = tuple(
            OpEstimate.from_counts(int(c), n_trials, branches) for c in counts
        )
    return estimates


def estimate_op(
    scheme: SchemeKind | str,
    params: SystemParams,
    n_trials: int = 10**6,
    seed: int = 0,
    threads: int = 1,
) -> tuple[OpEstimate, OpEstimate, OpEstimate]:
    """Monte Carlo estimates of the x1, x2 and x3 outage probabilities."""
    kind = SchemeKind.parse(scheme)
    return estimate_ops([kind], params, n_trials, seed, threads)[kind]
