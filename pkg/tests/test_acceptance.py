"""Acceptance criteria 1-10 at their stated tolerances.

Each criterion is a plain function returning (passed, details); the pytest
wrappers assert on it and every evaluation prints one line

    CRITERION <n> PASS|FAIL <details>

Run ``python3 tests/test_acceptance.py`` for the lines alone, or
``pytest tests/test_acceptance.py`` (the lines are repeated in the terminal
summary).  Long PDE runs are shared between criteria through a cache.
"""

from __future__ import annotations

import math
import sys
import time
from functools import lru_cache

import numpy as np
import pytest
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq, minimize_scalar

from tlsrelax import special
from tlsrelax.cli import pointer_initial_state
from tlsrelax.config import RunConfig
from tlsrelax.field import FieldParams, lag_correlation, stream, trajectory
from tlsrelax.montecarlo import (
    conditional_average, ensemble_average, forward_backward_check, pointer_project,
)
from tlsrelax.pde import RadialGrid, RadialSolver
from tlsrelax.theory import k0_of_t, n_static, pointer_window, r_interpolated
from tlsrelax.tls import PointerBasis

pytestmark = [pytest.mark.acceptance, pytest.mark.slow]

RESULTS: list[str] = []

# J is evaluated only where |N_st| >= this (fixed before looking at the collapse)
J_MIN_ABS_STATIC = 0.05


def _report(n: int, passed: bool, details: str) -> tuple[bool, str]:
    line = f"CRITERION {n} {'PASS' if passed else 'FAIL'} {details}"
    RESULTS.append(line)
    print(line, flush=True)
    return passed, details


def _f(x) -> str:
    return f"{float(x):.4g}"


# --------------------------------------------------------------------------
# shared PDE runs


@lru_cache(maxsize=None)
def _coherence_run(nu: float, t_max: float, dt: float, spacing: float):
    """R, P and K0 on a uniform record grid (recording adds no error)."""
    p = FieldParams(1.0, nu)
    times = np.arange(0.0, t_max + 0.5 * spacing, spacing)
    return RadialSolver(p, RadialGrid(6.0, 2048), dt).run(times).scalars


# At nu <= 0.001 a step of 0.05 changes R by < 1e-7 over t <= 500 (checked in criterion 4).
_STRONG_RUNS = {0.01: dict(t_max=500.0, dt=0.005, spacing=0.05),
                0.001: dict(t_max=5000.0, dt=0.05, spacing=0.05)}


def _strong(nu):
    return _coherence_run(nu, **_STRONG_RUNS[nu])


# --------------------------------------------------------------------------
# criteria


def criterion_1():
    zero = brentq(n_static, 1.0, 2.5, xtol=1e-12)
    res = minimize_scalar(n_static, bracket=(2.0, 3.0, 4.0), tol=1e-10)
    ok = (abs(zero - 1.85) <= 0.01 and abs(res.fun + 0.285) <= 0.005 and abs(res.x - 3.00) <= 0.05)
    return _report(1, ok, f"zero={zero:.5f} (1.85+-0.01) min={res.fun:.5f} (-0.285+-0.005) "
                          f"at={res.x:.5f} (3.00+-0.05)")


def _fit_rate(t, y):
    slope = np.polyfit(t, np.log(y), 1)[0]
    return -slope


def criterion_2():
    p = FieldParams(1.0, 10.0)
    t1 = p.nu / p.omega0**2
    times = np.linspace(0.0, 3 * t1, 301)
    s = RadialSolver(p).run(times).scalars
    rn, rr = _fit_rate(s.times, s.N), _fit_rate(s.times, s.R)
    en, er = rn / (p.omega0**2 / p.nu) - 1, rr / (p.omega0**2 / (2 * p.nu)) - 1
    ok = abs(en) <= 0.05 and abs(er) <= 0.05
    return _report(2, ok, f"nu=10 rate_N={_f(rn)} (rel err {en:+.4f}) rate_R={_f(rr)} "
                          f"(rel err {er:+.4f}) tol=0.05 over t<=3T1")


def criterion_3():
    checks = {"C1": (special.C1, 0.66), "C0": (special.C0, 1.38), "C3": (special.C3, 0.14)}
    ok = all(abs(v - ref) <= 0.005 for v, ref in checks.values()) and special.K == 1 / math.sqrt(2)
    parts = " ".join(f"{k}={v:.6f}" for k, (v, _) in checks.items())
    return _report(3, ok, f"{parts} k={special.K!r} tol=0.005")


def _interp_gap(nu):
    s = _strong(nu)
    m = (s.times >= 0.1) & (s.times <= 500.0)
    gap = np.abs(s.R[m] - r_interpolated(s.times[m], FieldParams(1.0, nu)))
    return float(gap.max()), float(s.times[m][np.argmax(gap)])


def criterion_4():
    # step-size guard for the coarse-step run
    check = _coherence_run(0.001, 500.0, 0.025, 0.05)
    coarse = _strong(0.001)
    n = len(check.times)
    step_err = float(np.abs(coarse.R[:n] - check.R).max())
    g1, t1 = _interp_gap(0.01)
    g2, t2 = _interp_gap(0.001)
    ratio = g1 / g2
    expected = 10 ** (2 / 3)
    trend = g2 < g1 and expected / 2 <= ratio <= expected * 2
    ok = g1 <= 0.03 and trend and step_err < 1e-5
    return _report(4, ok, f"sup|R_pde-R_interp| nu=0.01: {_f(g1)} at t={_f(t1)} (tol 0.03); "
                          f"nu=0.001: {_f(g2)} at t={_f(t2)}; ratio={_f(ratio)} "
                          f"(expect ~{_f(expected)}, trend {'ok' if trend else 'broken'}); "
                          f"dt check {_f(step_err)}")


def criterion_5():
    worst = {}
    for nu in (0.01, 0.001):
        s = _strong(nu)
        m = (nu * s.times >= 2.0) & (nu * s.times <= 5.0)
        tail = special.C1 * np.exp(-math.sqrt(2) * nu * s.times[m])
        worst[nu] = float(np.abs(s.K0[m] / tail - 1).max())
    ok = all(v <= 0.05 for v in worst.values())
    return _report(5, ok, "max|K0_pde/(C1 exp(-sqrt2 nu t))-1| over nu t in [2,5]: "
                          + " ".join(f"nu={nu}: {_f(v)}" for nu, v in worst.items()) + " (tol 0.05)")


@lru_cache(maxsize=None)
def _j_spline(nu):
    p = FieldParams(1.0, nu)
    times = np.arange(0.0, 10.0 + 1e-9, 0.01)
    s = RadialSolver(p).run(times).scalars
    return p, CubicSpline(s.times, s.N)


def _j_on(x, nu):
    p, spline = _j_spline(nu)
    t = x / p.alpha
    nst = n_static(t)
    ok = (np.abs(nst) >= J_MIN_ABS_STATIC) & (t <= 10.0)
    j = np.full(x.shape, np.nan)
    j[ok] = spline(t[ok]) / nst[ok]
    return j


def criterion_6():
    x = np.linspace(0.0, 1.5, 1501)
    j1, j2 = _j_on(x, 0.01), _j_on(x, 0.001)
    both = np.isfinite(j1) & np.isfinite(j2)
    collapse = float(np.abs(j1 - j2)[both].max())
    x_worst = float(x[both][np.argmax(np.abs(j1 - j2)[both])])
    short = x <= 0.5
    law = 1 - x**3 / 6
    dev = {nu: float(np.nanmax(np.abs(j - law)[short])) for nu, j in ((0.01, j1), (0.001, j2))}
    ok = collapse <= 0.02 and all(v <= 0.01 for v in dev.values())
    return _report(6, ok, f"collapse max|J_0.01-J_0.001|={_f(collapse)} at alpha t={_f(x_worst)} "
                          f"over alpha t<={_f(x[both].max())} (tol 0.02); short-time "
                          f"max|J-(1-(alpha t)^3/6)| alpha t<=0.5: nu=0.01 {_f(dev[0.01])}, "
                          f"nu=0.001 {_f(dev[0.001])} (tol 0.01); |N_st|>={J_MIN_ABS_STATIC}")


_C7_RUNS = {0.1: (8.0, 16), 1.0: (8.0, 16), 10.0: (10.0, 20)}


def criterion_7(n_traj=100_000):
    worst = {}
    for nu, (t_max, n_out) in _C7_RUNS.items():
        p = FieldParams(1.0, nu)
        n, r = ensemble_average(p, n_traj, t_max, n_out=n_out, seed=2024, chunk=5000)
        s = RadialSolver(p).run(n.times).scalars
        zn = np.abs(n.values - s.N)[1:] / n.stderr[1:]
        zr = np.abs(r.values.real - s.R)[1:] / r.stderr[1:]
        worst[nu] = (float(zn.max()), float(zr.max()))
    ok = all(max(v) <= 3.0 for v in worst.values())
    body = " ".join(f"nu={nu}: zN={_f(a)} zR={_f(b)}" for nu, (a, b) in worst.items())
    return _report(7, ok, f"{n_traj} trajectories, max z per nu: {body} (tol 3)")


def criterion_8():
    p = FieldParams(1.0, 0.1)
    dt = 0.1 / p.nu
    path = trajectory(p, dt, 4_000_000, stream(8, 90, 0))
    zs = []
    for nt in (0.1, 0.5, 1.0, 2.0):
        lag = int(round(nt / (p.nu * dt)))
        c, err = lag_correlation(path, lag)
        zs.append((nt, (c.real / p.omega0**2 - math.exp(-nt)) / err, c.imag / err))
    ok = all(abs(a) <= 3 and abs(b) <= 3 for _, a, b in zs)
    body = " ".join(f"nu t={nt}: z_re={a:+.2f} z_im={b:+.2f}" for nt, a, b in zs)
    return _report(8, ok, f"{body} (tol 3)")


def criterion_9(n_traj=20_000):
    cfg = RunConfig(scenario="pointer")
    p = FieldParams(1.0, 0.001)
    phi = cfg.phi_prime
    state = pointer_initial_state(cfg)
    rho0 = state.matrix()
    rho_p0 = PointerBasis(phi).to_pointer(rho0)
    cond = conditional_average(p, state, phi, n_traj, 200.0, dt=0.02, seed=9, n_out=40)
    rho_p, err = pointer_project(cond)
    lo, hi = pointer_window(p)
    m = (cond.times >= 50.0) & (cond.times <= 200.0)
    assert lo <= 50.0 and hi >= 200.0
    t = cond.times[m]
    off = np.abs(rho_p[m, 0, 1])
    off_ok = bool(np.all(off <= 0.05 * abs(rho0[1, 0])))
    dpp = np.abs(rho_p[m, 0, 0].real - rho_p0[0, 0].real)
    dmm = np.abs(rho_p[m, 1, 1].real - rho_p0[1, 1].real)
    diag_ok = bool(max(dpp.max(), dmm.max()) <= 0.05)
    c = (rho0[1, 0] * np.exp(-1j * phi)).real
    pred = 0.5 + k0_of_t(t, p) * c
    z_track = np.abs(rho_p[m, 0, 0].real - pred) / err[m, 0, 0].real
    track_ok = bool(z_track.max() <= 3.0)
    k0_pde = RadialSolver(p, dt=0.02).run(cond.times).scalars.K0[m]
    z_pde = np.abs(rho_p[m, 0, 0].real - (0.5 + k0_pde * c)) / err[m, 0, 0].real
    ok = off_ok and diag_ok and track_ok
    return _report(9, ok, f"t in [50,200], {n_traj} paths: max|rho'+-|={_f(off.max())} "
                          f"(tol {_f(0.05 * abs(rho0[1, 0]))}) {'ok' if off_ok else 'FAIL'}; "
                          f"max diag drift={_f(max(dpp.max(), dmm.max()))} (tol 0.05) "
                          f"{'ok' if diag_ok else 'FAIL'}; tracking 1/2+K0 Re c: max z={_f(z_track.max())} "
                          f"with closed-form K0 {'ok' if track_ok else 'FAIL'}, "
                          f"{_f(z_pde.max())} with PDE K0")


def criterion_10(n_traj=100_000):
    rep = forward_backward_check(FieldParams(1.0, 0.1), n_traj, 2.0, seed=10)
    return _report(10, rep.passed, f"nu=0.1 t=2 8 bins {n_traj} paths/side: max z={_f(rep.max_z)} "
                                   f"over 72 entries (tol 3); bin counts {rep.counts.min()}.."
                                   f"{rep.counts.max()}")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10]


@pytest.mark.parametrize("criterion", CRITERIA, ids=[f"criterion_{i}" for i in range(1, 11)])
def test_criterion(criterion):
    passed, details = criterion()
    assert passed, details


if __name__ == "__main__":
    failed = 0
    for crit in CRITERIA:
        t0 = time.time()
        passed, _ = crit()
        failed += not passed
        print(f"  ({time.time() - t0:.1f} s)", file=sys.stderr)
    sys.exit(1 if failed else 0)
