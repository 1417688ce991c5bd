from __future__ import annotations

from collections import defaultdict

import numpy as np
import pytest

from adaptive_cdrt import SystemParams

# criterion id -> list of (nodeid, passed)
_OUTCOMES: dict[str, list[tuple[str, bool]]] = defaultdict(list)
_NOTES: dict[str, list[str]] = defaultdict(list)


def _criterion_of(item) -> str | None:
    mark = item.get_closest_marker("criterion")
    return str(mark.args[0]) if mark else None


def pytest_runtest_makereport(item, call):
    crit = _criterion_of(item)
    if crit is None:
        return
    if call.when == "call" or (call.when == "setup" and call.excinfo is not None):
        _OUTCOMES[crit].append((item.nodeid, call.excinfo is None))


@pytest.fixture
def acceptance_note(request):
    """Attach a line of context to the criterion summary."""
    crit = _criterion_of(request.node) or "?"
    return lambda text: _NOTES[crit].append(text)


def _main(crit: str) -> str:
    return crit.rstrip("abcdefghijklmnopqrstuvwxyz")


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    groups: dict[str, list[str]] = defaultdict(list)
    for crit in _OUTCOMES:
        groups[_main(crit)].append(crit)
    for main in sorted(groups, key=int):
        subs = sorted(groups[main])
        results = [ok for c in subs for _, ok in _OUTCOMES[c]]
        status = "PASS" if all(results) else "FAIL"
        detail = f"{sum(results)}/{len(results)} checks"
        if subs != [main]:
            parts = []
            for c in subs:
                ok = all(r for _, r in _OUTCOMES[c])
                parts.append(f"{c} {'PASS' if ok else 'FAIL'}")
            detail += "; " + ", ".join(parts)
        tr.write_line(f"criterion {main}: {status} ({detail})")
    for main in sorted(groups, key=int):
        for crit in sorted(groups[main]):
            for note in _NOTES.get(crit, []):
                tr.write_line(f"  [{crit}] {note}")


@pytest.fixture
def defaults() -> SystemParams:
    return SystemParams()


@pytest.fixture
def single() -> SystemParams:
    return SystemParams(n_antennas=1)


def random_params(n: int, seed: int) -> list[SystemParams]:
    """Reproducible spread of configurations over the supported ranges."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        d = rng.uniform(5.0, 25.0, 4)
        out.append(
            SystemParams(
                d_s1=float(d[0]),
                d_sr=float(d[1]),
                d_r1=float(d[2]),
                d_r2=float(d[3]),
                alpha=float(rng.uniform(2.0, 3.0)),
                n_antennas=int(rng.integers(1, 13)),
                rho_s_db=float(rng.uniform(0.0, 40.0)),
                rho_r_db=float(rng.uniform(0.0, 40.0)),
                g0=float(rng.uniform(0.5, 2.0)),
                eta=float(rng.uniform(0.1, 0.95)),
                rth_x1=float(rng.uniform(0.05, 1.0)),
                rth_x2=float(rng.uniform(0.05, 1.0)),
                rth_x3=float(rng.uniform(0.05, 1.0)),
            )
        )
    return out
