"""Command-line front end: ``adaptive-cdrt {validate,sweep,optimize}``.

Exit status is 0 on success, 2 for configuration errors and 3 for runtime
failures (numerical or I/O).
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence, TextIO

import numpy as np
import yaml

from .analytic import closed_form_ops
from .experiments import Mode, SweepRow, SweepSpec, effective_params, find_optimal_rth, preset, run_sweep
from .montecarlo import estimate_ops
from .params import ConfigError, SystemParams
from .quadrature import op_quadrature
from .schemes import SchemeKind

__all__ = ["RunConfig", "parse_config", "emit_table", "main", "EXIT_OK", "EXIT_CONFIG", "EXIT_RUNTIME"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

CSV_COLUMNS = ("axis", "scheme", "mode", "op_x1", "se_x1", "op_x2", "se_x2", "op_x3", "se_x3", "est")
FORMATS = ("csv", "json")

log = logging.getLogger("adaptive_cdrt")

_SYSTEM_KEYS = {f.name for f in dataclasses.fields(SystemParams)} | {"rho_db"}
_SWEEP_KEYS = {"axis", "grid", "schemes", "mode", "n_trials", "seed", "threads"}
_OPTIMIZE_KEYS = {"schemes", "range", "resolution"}
_OUTPUT_KEYS = {"format", "path"}
_TOP_KEYS = {"system", "sweep", "optimize", "output", "verbosity"}


@dataclass(frozen=True)
class RunConfig:
    """Everything one CLI invocation needs; built by :func:`parse_config`."""

    params: SystemParams = field(default_factory=SystemParams)
    sweep: SweepSpec = field(
        default_factory=lambda: SweepSpec("rho_db", tuple(range(0, 41, 5)), mode=Mode.BOTH)
    )
    optimize_schemes: tuple[SchemeKind, ...] = (SchemeKind.DPU, SchemeKind.DPR, SchemeKind.MDPR)
    optimize_range: tuple[float, float] = (0.01, 2.0)
    optimize_resolution: int = 200
    fmt: str = "csv"
    out: Path | None = None
    verbosity: int = 0


def _section(doc: dict, name: str, allowed: set[str]) -> dict:
    sec = doc.get(name) or {}
    if not isinstance(sec, dict):
        raise ConfigError(f"{name}: expected a mapping")
    for key in sec:
        if key not in allowed:
            raise ConfigError(f"unknown key '{name}.{key}'")
    return sec


def _grid(value: Any) -> tuple[float, ...]:
    if isinstance(value, dict):
        unknown = set(value) - {"start", "stop", "step"}
        if unknown:
            raise ConfigError(f"unknown key 'sweep.grid.{sorted(unknown)[0]}'")
        try:
            start, stop, step = (float(value[k]) for k in ("start", "stop", "step"))
        except KeyError as exc:
            raise ConfigError(f"sweep.grid: missing '{exc.args[0]}'") from None
        if step <= 0:
            raise ConfigError("sweep.grid.step must be > 0")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(float(np.round(start + i * step, 12)) for i in range(max(count, 0)))
    if isinstance(value, (list, tuple)):
        try:
            return tuple(float(v) for v in value)
        except (TypeError, ValueError):
            raise ConfigError("sweep.grid: values must be numbers") from None
    raise ConfigError("sweep.grid: expected a list or {start, stop, step}")


def parse_config(text: str) -> RunConfig:
    """Parse a YAML (or JSON) run description.

    Omitted keys take the reference defaults.  Unknown keys and invalid
    values raise :class:`ConfigError` naming the key.
    """
    try:
        doc = yaml.safe_load(text) if text.strip() else {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    doc = doc or {}
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a mapping")
    for key in doc:
        if key not in _TOP_KEYS:
            raise ConfigError(f"unknown key '{key}'")

    system = dict(_section(doc, "system", _SYSTEM_KEYS))
    if "rho_db" in system:
        rho = system.pop("rho_db")
        system.setdefault("rho_s_db", rho)
        system.setdefault("rho_r_db", rho)
    try:
        params = SystemParams(**system)
    except TypeError as exc:  # pragma: no cover - keys are pre-filtered
        raise ConfigError(str(exc)) from None

    sw = _section(doc, "sweep", _SWEEP_KEYS)
    default = RunConfig().sweep
    spec = SweepSpec(
        axis=sw.get("axis", default.axis),
        grid=_grid(sw["grid"]) if "grid" in sw else default.grid,
        schemes=tuple(sw.get("schemes", default.schemes)),
        fixed=params,
        n_trials=sw.get("n_trials", default.n_trials),
        seed=sw.get("seed", default.seed),
        mode=sw.get("mode", default.mode),
        threads=sw.get("threads", default.threads),
    )

    opt = _section(doc, "optimize", _OPTIMIZE_KEYS)
    rng = tuple(float(v) for v in opt.get("range", (0.01, 2.0)))
    if len(rng) != 2 or not 0 < rng[0] < rng[1]:
        raise ConfigError("optimize.range must be [lo, hi] with 0 < lo < hi")
    resolution = opt.get("resolution", 200)
    if isinstance(resolution, bool) or not isinstance(resolution, int) or resolution < 3:
        raise ConfigError("optimize.resolution must be an integer >= 3")

    out = _section(doc, "output", _OUTPUT_KEYS)
    fmt = str(out.get("format", "csv")).lower()
    if fmt not in FORMATS:
        raise ConfigError(f"output.format must be one of {FORMATS}")
    verbosity = doc.get("verbosity", 0)
    if isinstance(verbosity, bool) or not isinstance(verbosity, int) or verbosity < 0:
        raise ConfigError("verbosity must be a non-negative integer")

    return RunConfig(
        params=params,
        sweep=spec,
        optimize_schemes=tuple(SchemeKind.parse(s) for s in opt.get("schemes", RunConfig.optimize_schemes)),
        optimize_range=rng,
        optimize_resolution=resolution,
        fmt=fmt,
        out=Path(out["path"]) if out.get("path") else None,
        verbosity=verbosity,
    )


# --- output -----------------------------------------------------------------


def _fmt(x: float | None) -> str:
    return "" if x is None else format(x, ".11e")


def _row_record(row: SweepRow) -> dict:
    se = row.se or (None, None, None)
    return {
        "axis": row.value,
        "scheme": row.scheme.value,
        "mode": row.mode.value,
        "op_x1": row.op[0],
        "se_x1": se[0],
        "op_x2": row.op[1],
        "se_x2": se[1],
        "op_x3": row.op[2],
        "se_x3": se[2],
        "est": row.est,
    }


def _render(records: Sequence[dict], columns: Sequence[str], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(list(records), indent=1) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for rec in records:
        writer.writerow(
            [_fmt(rec[c]) if isinstance(rec[c], float) or rec[c] is None else rec[c] for c in columns]
        )
    return buf.getvalue()


def _write(text: str, destination: Path | TextIO | None) -> None:
    if destination is None:
        sys.stdout.write(text)
    elif isinstance(destination, (str, Path)):
        path = Path(destination)
        try:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    else:
        destination.write(text)


def emit_table(rows: Sequence[SweepRow], fmt: str, destination: Path | TextIO | None) -> None:
    """Write sweep rows as CSV (12 significant digits) or JSON (exact floats).

    Standard-error cells are empty (CSV) or null (JSON) for analytic rows.
    """
    if fmt not in FORMATS:
        raise ConfigError(f"format must be one of {FORMATS}")
    _write(_render([_row_record(r) for r in rows], CSV_COLUMNS, fmt), destination)


# --- subcommands ------------------------------------------------------------


def _validate(cfg: RunConfig) -> list[dict]:
    """Closed form vs quadrature vs Monte Carlo at the configured point."""
    records = []
    spec = cfg.sweep
    kinds = [k for k in spec.schemes if k.has_closed_form]
    per_kind = {k: effective_params(k, cfg.params) for k in kinds}
    mc = estimate_ops(kinds, per_kind, spec.n_trials, spec.seed, spec.threads)
    for kind in kinds:
        params = per_kind[kind]
        cf = closed_form_ops(kind, params)
        for i, sig in enumerate(("x1", "x2", "x3")):
            q = op_quadrature(kind, sig, params, strict=True).p
            est = mc[kind][i]
            gate = max(3 * est.std_err, 0.02 * cf[i].p + 0.005)
            records.append(
                {
                    "scheme": kind.value,
                    "signal": sig,
                    "closed_form": cf[i].p,
                    "quadrature": q,
                    "mc": est.p_hat,
                    "se": est.std_err,
                    "within_gate": abs(est.p_hat - cf[i].p) <= gate,
                }
            )
    return records


def _optimize(cfg: RunConfig) -> list[dict]:
    records = []
    for kind in cfg.optimize_schemes:
        res = find_optimal_rth(
            kind,
            cfg.params,
            cfg.optimize_range,
            cfg.optimize_resolution,
            n_trials=min(cfg.sweep.n_trials, 10**5),
            seed=cfg.sweep.seed,
            threads=cfg.sweep.threads,
        )
        records.append(
            {
                "scheme": kind.value,
                "rth_star": res.x_star,
                "est_star": res.f_star,
                "degenerate": res.degenerate,
                "local_maxima": ";".join(f"{x:.6f}:{fx:.6f}" for x, fx in res.local_maxima),
            }
        )
    return records


def _suffixed(out: Path, label: str) -> Path:
    return out.with_name(f"{out.stem}_{label}{out.suffix}")


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="YAML or JSON run description")
    common.add_argument("--trials", type=int, help="Monte Carlo trials per point")
    common.add_argument("--seed", type=int, help="base seed")
    common.add_argument("--format", choices=FORMATS, help="output format (default csv)")
    common.add_argument("--out", type=Path, help="output file (default stdout)")
    common.add_argument("--threads", type=int, help="worker threads")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(prog="adaptive-cdrt", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="closed form vs quadrature vs Monte Carlo")
    sw = sub.add_parser("sweep", parents=[common], help="figure data tables")
    sw.add_argument("--preset", help="built-in sweep: fig2 .. fig7")
    sub.add_parser("optimize", parents=[common], help="R_th maximising the throughput")
    return parser


def _load(args) -> RunConfig:
    text = ""
    if args.config is not None:
        try:
            text = args.config.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc.strerror or exc}") from None
    cfg = parse_config(text)
    changes = {}
    for flag, name in (("trials", "n_trials"), ("seed", "seed"), ("threads", "threads")):
        if getattr(args, flag) is not None:
            changes[name] = getattr(args, flag)
    sweep = cfg.sweep.replace(**changes) if changes else cfg.sweep
    return dataclasses.replace(
        cfg,
        sweep=sweep,
        fmt=args.format or cfg.fmt,
        out=args.out if args.out is not None else cfg.out,
        verbosity=max(cfg.verbosity, args.verbose),
    )


def _run(args) -> None:
    cfg = _load(args)
    logging.basicConfig(level=logging.WARNING - 10 * min(cfg.verbosity, 2), format="%(message)s")
    if args.command == "validate":
        records = _validate(cfg)
        cols = ("scheme", "signal", "closed_form", "quadrature", "mc", "se", "within_gate")
        _write(_render(records, cols, cfg.fmt), cfg.out)
    elif args.command == "optimize":
        records = _optimize(cfg)
        cols = ("scheme", "rth_star", "est_star", "degenerate", "local_maxima")
        _write(_render(records, cols, cfg.fmt), cfg.out)
    elif args.preset:
        overrides = {"n_trials": args.trials, "seed": args.seed, "threads": args.threads}
        specs = preset(args.preset, **overrides)
        for spec in specs:
            log.info("running %s/%s", args.preset, spec.label)
            dest = _suffixed(cfg.out, spec.label) if cfg.out is not None else None
            emit_table(run_sweep(spec), cfg.fmt, dest)
    else:
        emit_table(run_sweep(cfg.sweep), cfg.fmt, cfg.out)


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits with 2 on bad usage
        return int(exc.code or 0)
    try:
        _run(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # numerical or I/O failure
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
