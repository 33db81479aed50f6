"""Command-line scenario runner.

    tlsrelax fig1 [--config FILE] [--seed N] [--out DIR] [--method mc|pde|theory|all]
                  [--nu 0.1,0.01] [--ntraj N] [--tmax T] [--dt DT]

Subcommands ``fig1``, ``fig2``, ``fig3`` and ``pointer`` write one CSV per
curve and one SVG per scenario; ``validate`` prints one ``CHECK`` line per
check and exits with status 1 if any fails.  Time is in units of 1/omega0.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from typing import Callable, Optional

import numpy as np

from . import montecarlo as mc
from . import special, theory
from .config import ConfigError, RunConfig
from .field import FieldParams, lag_correlation, stream, trajectory
from .output import CurveRecord, format_check, plot_records
from .pde import RadialGrid, RadialSolver, extract_j
from .tls import DensityVector, PointerBasis


def _params(cfg: RunConfig, nu: float) -> FieldParams:
    return FieldParams(cfg.omega0, nu, cfg.delta0)


def _grid(cfg: RunConfig) -> RadialGrid:
    return RadialGrid(cfg.omega_max, cfg.grid_points)


def _tag(nu: float) -> str:
    return f"nu{nu:g}"


def _uses(cfg: RunConfig, method: str) -> bool:
    return cfg.method in (method, "all")


def _need_resonance(cfg: RunConfig):
    if cfg.delta0 != 0.0 and cfg.method != "mc":
        raise ConfigError("pde and theory results need delta0 = 0; use --method mc")


def _pde(cfg, params, times):
    return RadialSolver(params, _grid(cfg), cfg.dt_pde).run(times).scalars


def _mc_channels(cfg, params, t_max, n_out):
    return mc.ensemble_average(params, cfg.resolved("n_traj"), t_max, dt=cfg.dt_mc, seed=cfg.seed,
                               n_out=n_out, workers=cfg.workers)


def _emit(cfg: RunConfig, records, plot_name, **plot_kw):
    paths = [r.write(cfg.out) for r in records]
    if records:
        paths.append(plot_records(records, os.path.join(cfg.out, plot_name), **plot_kw))
    return paths


# --------------------------------------------------------------------------
# figures


def run_fig1(cfg: RunConfig):
    """Population relaxation N(t) for each nu, with the static-limit curve."""
    _need_resonance(cfg)
    t_max, n_out = cfg.resolved("t_max"), cfg.resolved("n_out")
    times = np.linspace(0.0, t_max, n_out + 1)
    recs = [CurveRecord("fig1", "static", "nu0", times, theory.n_static(times), value_name="N")]
    for nu in cfg.nus:
        p = _params(cfg, nu)
        meta = {"nu_over_omega0": nu}
        if _uses(cfg, "pde") and cfg.delta0 == 0:
            s = _pde(cfg, p, times)
            recs.append(CurveRecord("fig1", "pde", _tag(nu), s.times, s.N, value_name="N",
                                    meta=dict(meta, dt=cfg.dt_pde, grid_points=cfg.grid_points)))
        if _uses(cfg, "mc"):
            n, _ = _mc_channels(cfg, p, t_max, min(n_out, 50))
            recs.append(CurveRecord("fig1", "mc", _tag(nu), n.times, n.values, n.stderr,
                                    value_name="N", meta=dict(meta, seed=cfg.seed,
                                                              n_traj=cfg.resolved("n_traj"))))
        if _uses(cfg, "theory") and nu > 0:
            wc = theory.weak_curve(times, p, "N")
            recs.append(CurveRecord("fig1", "theory", _tag(nu), times, wc.values, value_name="N",
                                    meta=dict(meta, regime="weak", in_window=bool(wc.valid.all()))))
    return _emit(cfg, recs, "fig1.svg", ylabel="N(t)", title="population relaxation")


def run_fig2(cfg: RunConfig):
    """J(alpha t) = N(t) / N_st(t) for several strong-coupling nu."""
    _need_resonance(cfg)
    nus = cfg.nus
    if cfg.method == "mc":
        raise ConfigError("fig2 extracts J from the PDE; method mc is not supported")
    if len(nus) < 2:
        raise ConfigError("fig2 needs at least two nu values to show the scaling collapse")
    if any(not 0 < nu <= 0.05 for nu in nus):
        raise ConfigError("fig2 needs strong coupling: 0 < nu/omega0 <= 0.05")
    t_max, n_out = cfg.resolved("t_max"), cfg.resolved("n_out")
    times = np.linspace(0.0, t_max, n_out + 1)
    recs = []
    for nu in nus:
        p = _params(cfg, nu)
        if _uses(cfg, "pde"):
            s = _pde(cfg, p, times)
            j, dropped = extract_j(p, s.curve("N"))
            recs.append(CurveRecord("fig2", "pde", _tag(nu), j.times, j.values, value_name="J",
                                    meta={"nu_over_omega0": nu, "x": "alpha*t",
                                          "dropped_points": len(dropped)}))
    if _uses(cfg, "theory"):
        x = np.linspace(0.0, 1.0, 101)
        recs.append(CurveRecord("fig2", "theory", "short", x, 1.0 - x**3 / 6, value_name="J",
                                meta={"x": "alpha*t", "regime": "short-time"}))
    return _emit(cfg, recs, "fig2.svg", xlabel="alpha t", ylabel="J", title="scaled population")


def _log_times(t_max, n_out, dt):
    t = np.geomspace(0.1, t_max, n_out)
    t = np.unique(np.round(t / dt) * dt)
    return np.concatenate([[0.0], t[t > 0]])


def run_fig3(cfg: RunConfig):
    """Coherence relaxation R(t) on a log time axis: PDE and interpolation."""
    _need_resonance(cfg)
    t_max, n_out = cfg.resolved("t_max"), cfg.resolved("n_out")
    times = _log_times(t_max, n_out, cfg.dt_pde)
    recs = []
    for nu in cfg.nus:
        p = _params(cfg, nu)
        meta = {"nu_over_omega0": nu}
        if _uses(cfg, "pde") and cfg.delta0 == 0:
            s = _pde(cfg, p, times)
            recs.append(CurveRecord("fig3", "pde", _tag(nu), s.times, s.R, value_name="R",
                                    meta=meta))
        if _uses(cfg, "theory"):
            rc = theory.r_interpolated_curve(times, p)
            recs.append(CurveRecord("fig3", "theory", _tag(nu), times, rc.values, value_name="R",
                                    meta=dict(meta, regime=rc.regime,
                                              in_window=bool(rc.valid.all()))))
        if _uses(cfg, "mc"):
            _, r = _mc_channels(cfg, p, t_max, min(n_out, 50))
            recs.append(CurveRecord("fig3", "mc", _tag(nu), r.times, r.values.real, r.stderr,
                                    value_name="R", meta=dict(meta, seed=cfg.seed)))
    return _emit(cfg, recs, "fig3.svg", ylabel="R(t)", logx=True, title="coherence relaxation")


def pointer_initial_state(cfg: RunConfig) -> DensityVector:
    """|psi+> with a small admixture of |1>, normalised."""
    plus, _ = PointerBasis(cfg.phi_prime).states()
    psi = math.sqrt(1.0 - cfg.n_mix) * plus + math.sqrt(cfg.n_mix) * np.array([1.0, 0.0])
    return DensityVector.pure(psi[0], psi[1])


def _pointer_series(rho_p, rho_p0):
    return {"offdiag_abs": np.abs(rho_p[:, 0, 1]),
            "dpp": (rho_p[:, 0, 0] - rho_p0[0, 0]).real,
            "dmm": (rho_p[:, 1, 1] - rho_p0[1, 1]).real}


def run_pointer(cfg: RunConfig):
    """Pointer-basis conditional density matrix versus time."""
    _need_resonance(cfg)
    nus = cfg.nus
    if len(nus) != 1:
        raise ConfigError("pointer runs take exactly one nu value")
    nu = nus[0]
    if not 0 < nu <= 0.05:
        raise ConfigError("pointer runs need strong coupling: 0 < nu/omega0 <= 0.05")
    p = _params(cfg, nu)
    state = pointer_initial_state(cfg)
    rho0 = state.matrix()
    basis = PointerBasis(cfg.phi_prime)
    rho_p0 = basis.to_pointer(rho0)
    t_max, n_out = cfg.resolved("t_max"), cfg.resolved("n_out")
    times = np.linspace(0.0, t_max, n_out + 1)
    meta = {"nu_over_omega0": nu, "phi_prime": cfg.phi_prime, "n_mix": cfg.n_mix,
            "window": "%g..%g" % theory.pointer_window(p)}
    recs = []
    if _uses(cfg, "mc"):
        ca = mc.conditional_average(p, state, cfg.phi_prime, cfg.resolved("n_traj"), t_max,
                                    dt=cfg.dt_mc, seed=cfg.seed, n_out=n_out, workers=cfg.workers)
        rp, ep = mc.pointer_project(ca)
        series = _pointer_series(rp, rho_p0)
        errs = {"offdiag_abs": np.hypot(ep[:, 0, 1].real, ep[:, 0, 1].imag),
                "dpp": ep[:, 0, 0].real, "dmm": ep[:, 1, 1].real}
        for name, vals in series.items():
            recs.append(CurveRecord("pointer", "mc", _tag(nu), ca.times, vals, errs[name],
                                    value_name=name, meta=dict(meta, seed=cfg.seed)))
    sources = []
    if _uses(cfg, "pde"):
        sources.append(("pde", _pde(cfg, p, times)))
    if _uses(cfg, "theory"):
        sources.append(("theory", theory.strong_coupling_scalars(times, p, _grid(cfg))))
    for name, scal in sources:
        rp = np.array([theory.pointer_prediction(t, cfg.phi_prime, rho0, scal) for t in scal.times])
        for key, vals in _pointer_series(rp, rho_p0).items():
            recs.append(CurveRecord("pointer", name, _tag(nu), scal.times, vals, value_name=key,
                                    meta=meta))
    return _emit(cfg, recs, "pointer.svg", ylabel="pointer-basis entries", title="pointer basis")


# --------------------------------------------------------------------------
# validation


def _check_correlation(cfg, nu):
    p = _params(cfg, nu)
    dt = 0.1 / nu
    rng = stream(cfg.seed, 90, 0)
    path = trajectory(p, dt, 400_000, rng)
    worst = 0.0
    for nt in (0.1, 0.5, 1.0, 2.0):
        lag = int(round(nt / (nu * dt)))
        c, err = lag_correlation(path, lag)
        worst = max(worst, abs(c.real / p.omega0**2 - math.exp(-nu * lag * dt)) * p.omega0**2 / err)
    return "field_correlation", worst <= 3.0, worst, 3.0


def _check_forward_backward(cfg, nu):
    rep = mc.forward_backward_check(_params(cfg, nu), cfg.resolved("n_traj") * 4, 2.0,
                                    dt=cfg.dt_mc, seed=cfg.seed)
    return "forward_backward", rep.passed, rep.max_z, 3.0


def _check_mc_vs_pde(cfg, nu):
    p = _params(cfg, nu)
    t_max, n_out = cfg.resolved("t_max"), cfg.resolved("n_out")
    n, r = _mc_channels(cfg, p, t_max, n_out)
    s = _pde(cfg, p, n.times)
    zn = np.abs(n.values - s.N)[1:] / n.stderr[1:]
    zr = np.abs(r.values.real - s.R)[1:] / r.stderr[1:]
    worst = float(max(zn.max(), zr.max()))
    return "mc_vs_pde", worst <= 3.0, worst, 3.0


def _check_special(cfg, nu):
    from scipy import special as sp

    worst = 0.0
    for z in (0.01, 0.5, 0.9241, 2.0, 4.5, 10.0, 50.0):
        worst = max(worst, abs(special.dawson(z) / sp.dawsn(z) - 1))
    for x in (0.3, 0.5, 1.0, 2.5, 7.0):
        worst = max(worst, abs(special.gamma_fn(x) / sp.gamma(x) - 1))
        worst = max(worst, abs(special.digamma(x) - sp.digamma(x)) / max(1, abs(sp.digamma(x))))
    k = special.K
    for z in (0.0, -0.5, -1.0, -10.0, -60.0):
        worst = max(worst, abs(special.kummer_m(k, 2 * k + 1, z) / sp.hyp1f1(k, 2 * k + 1, z) - 1))
    for x in (0.0, 0.2, 0.5, 0.8, 0.99, 1.0):
        worst = max(worst, abs(special.gauss_2f1(k, k, 1 + 2 * k, x) / sp.hyp2f1(k, k, 1 + 2 * k, x) - 1))
    return "special_functions", worst <= 1e-10, worst, 1e-10


def _check_propagator(cfg, nu):
    p = _params(cfg, nu)
    dt = cfg.dt_mc if cfg.dt_mc is not None else mc.default_dt(p)
    rep = mc.propagator_accuracy(p, dt, cfg.resolved("t_max"), n_traj=2000, seed=cfg.seed)
    return "propagator_accuracy", rep.passed, rep.strong, rep.strong_tolerance


VALIDATE_CHECKS: tuple[Callable, ...] = (
    _check_correlation, _check_special, _check_propagator, _check_mc_vs_pde, _check_forward_backward,
)


def run_validate(cfg: RunConfig, stream_out=None) -> bool:
    stream_out = stream_out or sys.stdout
    nu = cfg.nus[0]
    if not nu > 0:
        raise ConfigError("validate needs nu > 0")
    _need_resonance(cfg)
    ok = True
    for check in VALIDATE_CHECKS:
        name, passed, measured, tol = check(cfg, nu)
        ok &= bool(passed)
        print(format_check(name, bool(passed), measured, tol, nu_over_omega0=nu, seed=cfg.seed),
              file=stream_out, flush=True)
    print(f"SUMMARY status={'PASS' if ok else 'FAIL'}", file=stream_out, flush=True)
    return ok


# --------------------------------------------------------------------------
# entry point


RUNNERS = {"fig1": run_fig1, "fig2": run_fig2, "fig3": run_fig3, "pointer": run_pointer}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tlsrelax", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("fig1", "fig2", "fig3", "pointer", "validate"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="INI file with [run], [params], [resolution]")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out")
        sp.add_argument("--method", choices=("mc", "pde", "theory", "all"))
        sp.add_argument("--nu", help="comma-separated nu/omega0 values")
        sp.add_argument("--ntraj", type=int)
        sp.add_argument("--tmax", type=float)
        sp.add_argument("--dt", type=float, help="Monte Carlo time step")
    return ap


def config_from_args(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    changes = {"scenario": args.command}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.out is not None:
        changes["out"] = args.out
    if args.method is not None:
        changes["method"] = args.method
    if args.nu is not None:
        try:
            changes["nu_over_omega0"] = tuple(float(x) for x in args.nu.split(",") if x.strip())
        except ValueError as exc:
            raise ConfigError(f"bad --nu list {args.nu!r}") from exc
    if args.ntraj is not None:
        changes["n_traj"] = args.ntraj
    if args.tmax is not None:
        changes["t_max"] = args.tmax
    if args.dt is not None:
        changes["dt_mc"] = args.dt
    return cfg.replace(**changes)


def main(argv: Optional[list] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        if cfg.scenario == "validate":
            return 0 if run_validate(cfg) else 1
        for path in RUNNERS[cfg.scenario](cfg):
            print(path)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
