"""Exit criteria. Run with ``pytest tests/test_acceptance.py -v``.

Each test prints one PASS/FAIL line; the lines are repeated in the
"acceptance criteria" section of the pytest terminal summary.
"""

import math
import sys
import time

import numpy as np
import pytest

from mesonbell.chsh import ChshSettings, OptimizerOptions, chsh_value, find_threshold, maximize_chsh, verdict
from mesonbell.correlation import (
    CorrelationKind,
    corr_from_table,
    corr_nonunitary,
    corr_renormalized,
    corr_unitary,
    correlation,
    joint_table,
)
from mesonbell.model import builtin_systems
from mesonbell.montecarlo import SettingPair, estimate_chsh, estimate_correlation, sample_events

NU, U, R = CorrelationKind.NON_UNITARY, CorrelationKind.UNITARY, CorrelationKind.RENORMALIZED
TOL = 1e-3
_cache = {}


def threshold(kind, y, **opts):
    key = (kind, y, tuple(sorted(opts.items())))
    if key not in _cache:
        start = time.perf_counter()
        res = find_threshold(kind, y, TOL, OptimizerOptions(**opts))
        _cache[key] = (res, time.perf_counter() - start)
    return _cache[key]


def line(report, number, ok, text):
    report(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {text}")
    return ok


def test_criterion_1_nonunitary_threshold(report):
    res, elapsed = threshold(NU, 0.0)
    ok = abs(res.critical_x - 2.0) <= 0.05 and elapsed < 120
    line(report, 1, ok, f"N_II = {res.critical_x:.4f} (target 2.0 +- 0.05), {elapsed:.1f} s")
    assert elapsed < 120
    assert res.critical_x == pytest.approx(2.0, abs=0.05)


def test_criterion_2_unitary_threshold(report):
    res, elapsed = threshold(U, 0.0)
    ok = abs(res.critical_x - 2.6) <= 0.05 and elapsed < 120
    line(report, 2, ok, f"N_I = {res.critical_x:.4f} (target 2.6 +- 0.05), {elapsed:.1f} s")
    assert elapsed < 120
    assert res.critical_x == pytest.approx(2.6, abs=0.05)


def test_criterion_3_kaon_threshold(report):
    res, elapsed = threshold(U, 1.993)
    ok = abs(res.critical_x - 2.0) <= 0.1 and elapsed < 120
    line(report, 3, ok, f"N_I(y=1.993) = {res.critical_x:.4f} (target 2.0 +- 0.1), {elapsed:.1f} s")
    assert elapsed < 120
    assert res.critical_x == pytest.approx(2.0, abs=0.1)


def test_criterion_4_verdict_table(report):
    expected = {"B0": False, "K0": False, "D0": False, "Bs": True}
    got = {}
    for entry in builtin_systems():
        v = verdict(entry, [NU, U])
        got[entry.name] = (v[NU].violates, v[U].violates)
    ok = all(got[n] == (e, e) for n, e in expected.items())
    summary = ", ".join(f"{n}: {'yes' if a else 'no'}/{'yes' if b else 'no'}" for n, (a, b) in got.items())
    line(report, 4, ok, f"violation (nonunitary/unitary) {summary}")
    assert ok


def test_criterion_5_renormalized_tsirelson(report):
    res = maximize_chsh(R, 0.77, 0.0)
    ok = abs(res.s_max - 2 * math.sqrt(2)) <= 1e-3
    line(report, 5, ok, f"renormalized S_max(x=0.77) = {res.s_max:.6f} (target 2.828427 +- 1e-3)")
    assert ok


def test_criterion_6_table_consistency(report):
    rng = np.random.default_rng(20040101)
    closed = {
        NU: lambda x, y, t: corr_nonunitary(x, t),
        U: corr_unitary,
        R: corr_renormalized,
    }
    worst = 0.0
    for _ in range(1000):
        x, y = rng.uniform(0, 25), rng.uniform(0, 1.99)
        t = tuple(rng.uniform(0, 8, 2))
        table = joint_table(x, y, t)
        for kind, fn in closed.items():
            worst = max(worst, abs(corr_from_table(table, kind) - fn(x, y, t)))
    ok = worst <= 1e-12
    line(report, 6, ok, f"max |table - closed form| over 1000 draws = {worst:.2e} (target <= 1e-12)")
    assert ok


def test_criterion_7_monte_carlo(report):
    start = time.perf_counter()
    x, y, n = 0.77, 0.0, 10**6
    q = math.pi / (4 * x)
    optimal = ChshSettings(0.0, 2 * q, q, 3 * q)
    assert chsh_value(R, x, y, optimal) == pytest.approx(2 * math.sqrt(2), abs=1e-12)
    generic = ChshSettings(1.0, 0.2, 0.5, 1.7)

    failures = []
    worst_se = 0.0
    for settings, seed in ((optimal, 1), (generic, 2)):
        events = sample_events(x, y, settings, n, seed)
        for s, pair in zip(SettingPair, settings.pairs()):
            part = events.for_setting(s)
            for kind in CorrelationKind:
                est = estimate_correlation(part, kind)
                exact = correlation(kind, x, y, pair)
                if abs(est.value - exact) > 5 * est.std_error:
                    failures.append(f"{kind.value} {s.label}")
                if kind is not R:
                    worst_se = max(worst_se, est.std_error)
        if settings is optimal:
            renorm = estimate_chsh(events, R)
    elapsed = time.perf_counter() - start
    sigma = (renorm.value - 2) / renorm.std_error
    ok = not failures and worst_se < 0.005 and sigma > 3 and elapsed < 60
    line(
        report,
        7,
        ok,
        f"all estimates within 5 se: {not failures}; max se (unitary/nonunitary) {worst_se:.4f}; "
        f"renormalized S = {renorm.value:.3f} +- {renorm.std_error:.3f} ({sigma:.1f} sigma above 2); {elapsed:.1f} s",
    )
    assert not failures, failures
    assert worst_se < 0.005
    assert sigma > 3
    assert elapsed < 60


def test_criterion_8_robustness(report):
    shifts = {}
    for kind, name in ((NU, "N_II"), (U, "N_I")):
        base = threshold(kind, 0.0)[0].critical_x
        shifts[f"{name} t_max 16"] = abs(threshold(kind, 0.0, t_max=16.0)[0].critical_x - base)
        shifts[f"{name} grid 21"] = abs(threshold(kind, 0.0, grid_points=21)[0].critical_x - base)
    ok = all(v < TOL for v in shifts.values())
    line(report, 8, ok, "shifts " + ", ".join(f"{k}: {v:.1e}" for k, v in shifts.items()) + f" (target < {TOL})")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
