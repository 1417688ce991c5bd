from __future__ import annotations

import math

import numpy as np
import pytest

from adaptive_cdrt.analytic import closed_form_ops
from adaptive_cdrt.experiments import (
    PRESETS,
    Mode,
    SweepSpec,
    apply_axis,
    effective_params,
    find_optimal_rth,
    maximize_on_grid,
    preset,
    run_sweep,
)
from adaptive_cdrt.params import ConfigError, SystemParams
from adaptive_cdrt.schemes import SchemeKind


class TestMaximizeOnGrid:
    def test_single_peak(self):
        res = maximize_on_grid(lambda x: -((x - 0.3137) ** 2), 0.0, 1.0)
        assert res.x_star == pytest.approx(0.3137, abs=1e-6)
        assert len(res.local_maxima) == 1 and not res.degenerate

    def test_two_peaks_reported_in_order(self):
        f = lambda x: math.exp(-200 * (x - 0.25) ** 2) + 1.5 * math.exp(-200 * (x - 0.7) ** 2)
        res = maximize_on_grid(f, 0.0, 1.0)
        xs = [m[0] for m in res.local_maxima]
        assert xs == pytest.approx([0.25, 0.7], abs=1e-5)
        assert res.x_star == pytest.approx(0.7, abs=1e-5)

    def test_flat_objective(self):
        res = maximize_on_grid(lambda x: 2.0, 1.0, 3.0)
        assert res.degenerate and res.x_star == 2.0 and res.local_maxima == ()

    @pytest.mark.parametrize("sign,edge", [(1.0, 5.0), (-1.0, 1.0)])
    def test_monotone_objective_takes_endpoint(self, sign, edge):
        res = maximize_on_grid(lambda x: sign * x, 1.0, 5.0)
        assert res.degenerate and res.x_star == edge

    def test_rounding_ripples_are_not_peaks(self):
        rng = np.random.default_rng(0)
        noise = dict()

        def f(x):
            base = max(0.0, 1.0 - 4 * (x - 0.3) ** 2)
            return base + noise.setdefault(x, 1e-17 * rng.random())

        res = maximize_on_grid(f, 0.0, 2.0)
        assert len(res.local_maxima) == 1
        assert res.x_star == pytest.approx(0.3, abs=1e-5)

    def test_plateau_peak(self):
        res = maximize_on_grid(lambda x: min(1.0, 5 * x, 5 * (1 - x)), 0.0, 1.0, resolution=101)
        assert len(res.local_maxima) == 1
        assert 0.2 <= res.x_star <= 0.8 and res.f_star == pytest.approx(1.0)

    @pytest.mark.parametrize("lo,hi,res", [(1.0, 1.0, 10), (2.0, 1.0, 10), (0.0, math.inf, 10), (0.0, 1.0, 2)])
    def test_invalid_arguments(self, lo, hi, res):
        with pytest.raises(ValueError):
            maximize_on_grid(lambda x: x, lo, hi, res)


class TestFindOptimalRth:
    def test_interior_optimum_at_defaults(self):
        p = SystemParams().with_rho(23.0)
        res = find_optimal_rth("DPU", p, resolution=120)
        assert not res.degenerate
        assert 0.05 < res.x_star < 1.5
        # the refined point beats its neighbours
        f = lambda r: sum(r * (1 - v.p) for v in closed_form_ops("DPU", p.replace(n_antennas=1).with_rth(r)))
        assert f(res.x_star) >= max(f(res.x_star * 0.99), f(res.x_star * 1.01))

    def test_benchmarks_use_simulation(self):
        p = SystemParams().with_rho(20.0)
        a = find_optimal_rth("BEN2", p, (0.05, 1.0), resolution=15, n_trials=3000, seed=1)
        b = find_optimal_rth("BEN2", p, (0.05, 1.0), resolution=15, n_trials=3000, seed=1)
        assert a == b

    def test_rejects_non_positive_range(self, defaults):
        with pytest.raises(ConfigError):
            find_optimal_rth("DPU", defaults, (0.0, 1.0))


class TestSweepSpec:
    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(axis="eta", grid=(1.0,)),
            dict(axis="rho_db", grid=()),
            dict(axis="rho_db", grid=(5.0, 5.0)),
            dict(axis="rho_db", grid=(10.0, 5.0)),
            dict(axis="rho_db", grid=(math.nan,)),
            dict(axis="rho_db", grid=(5.0,), schemes=()),
            dict(axis="rho_db", grid=(5.0,), schemes=("DPU", "dpu")),
            dict(axis="rho_db", grid=(5.0,), schemes=("BEN2",), mode="ANALYTIC"),
            dict(axis="rho_db", grid=(5.0,), n_trials=0),
            dict(axis="rho_db", grid=(5.0,), seed=-1),
            dict(axis="rho_db", grid=(5.0,), threads=0),
            dict(axis="rho_db", grid=(5.0,), mode="FAST"),
            dict(axis="d_s1", grid=(-1.0, 2.0)),
            dict(axis="a1_fixed", grid=(0.5, 1.2)),
        ],
    )
    def test_rejects_invalid(self, kwargs):
        with pytest.raises(ConfigError):
            SweepSpec(**kwargs)

    def test_normalises_inputs(self):
        spec = SweepSpec("rth", [0.1, 0.2], ["dpu", "mdpr"], mode="both")
        assert spec.grid == (0.1, 0.2)
        assert spec.schemes == (SchemeKind.DPU, SchemeKind.MDPR)
        assert spec.mode is Mode.BOTH


class TestAxes:
    def test_apply_axis(self, defaults):
        assert apply_axis(defaults, "rho_db", 30.0).rho_r_db == 30.0
        assert apply_axis(defaults, "rth", 0.4).rth_x3 == 0.4
        assert apply_axis(defaults, "d_sr", 20.0).d_sr == 20.0
        with pytest.raises(ConfigError):
            apply_axis(defaults, "n_antennas", 3)

    def test_effective_params(self, defaults):
        assert effective_params(SchemeKind.DPR, defaults).n_antennas == 1
        assert effective_params(SchemeKind.BEN3, defaults) is defaults


class TestRunSweep:
    def test_row_order_and_modes(self):
        spec = SweepSpec("rho_db", (5.0, 15.0), ("DPU", "MDPR", "BEN1"), n_trials=5000, mode="BOTH")
        rows = run_sweep(spec)
        keys = [(r.value, r.scheme.value, r.mode.value) for r in rows]
        assert keys == [
            (5.0, "DPU", "MC"), (5.0, "DPU", "ANALYTIC"), (5.0, "MDPR", "MC"), (5.0, "MDPR", "ANALYTIC"), (5.0, "BEN1", "MC"),
            (15.0, "DPU", "MC"), (15.0, "DPU", "ANALYTIC"), (15.0, "MDPR", "MC"), (15.0, "MDPR", "ANALYTIC"), (15.0, "BEN1", "MC"),
        ]
        assert all((r.se is None) == (r.mode is Mode.ANALYTIC) for r in rows)

    def test_analytic_rows_match_closed_forms(self):
        rows = run_sweep(SweepSpec("d_sr", (10.0, 20.0), ("DPR",), mode="ANALYTIC"))
        for r in rows:
            p = SystemParams(n_antennas=1, d_sr=r.value)
            assert r.op == tuple(v.p for v in closed_form_ops("DPR", p))
            assert r.est == pytest.approx(sum(0.2 * (1 - v) for v in r.op))

    def test_common_random_numbers_across_grid(self):
        # DPU x1 depends on the S-U1 link only, so moving R changes nothing
        rows = run_sweep(SweepSpec("d_sr", (10.0, 15.0, 20.0), ("DPU",), n_trials=20_000))
        assert len({r.op[0] for r in rows}) == 1


class TestPresets:
    def test_names(self):
        assert sorted(PRESETS) == ["fig2", "fig3", "fig4", "fig5", "fig6", "fig7"]

    @pytest.mark.parametrize("name", sorted(PRESETS))
    def test_specs_are_valid_and_labelled(self, name):
        specs = preset(name)
        labels = [s.label for s in specs]
        assert specs and all(labels) and len(set(labels)) == len(labels)

    def test_overrides(self):
        specs = preset("fig6", n_trials=1234, seed=None, threads=2)
        assert all(s.n_trials == 1234 and s.threads == 2 and s.seed == 0 for s in specs)

    def test_fig5_is_analytic_at_23_db(self):
        (spec,) = preset("fig5")
        assert spec.mode is Mode.ANALYTIC and spec.fixed.rho_s_db == 23.0 and spec.axis == "rth"

    def test_unknown(self):
        with pytest.raises(ConfigError):
            preset("fig9")
