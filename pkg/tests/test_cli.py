import io
import os
import subprocess
import sys

import numpy as np
import pytest

from tlsrelax import cli
from tlsrelax.config import ConfigError, RunConfig
from tlsrelax.output import read_csv
from tlsrelax.theory import n_static
from tlsrelax.tls import PointerBasis


def _run(tmp_path, *args):
    return cli.main([*args, "--out", str(tmp_path)])


def _csvs(tmp_path):
    return {f: read_csv(tmp_path / f) for f in sorted(os.listdir(tmp_path)) if f.endswith(".csv")}


def test_fig1_small(tmp_path):
    assert _run(tmp_path, "fig1", "--nu", "0,0.1", "--ntraj", "200", "--tmax", "4") == 0
    files = _csvs(tmp_path)
    assert set(files) == {"fig1_N_static_nu0.csv", "fig1_N_pde_nu0.csv", "fig1_N_mc_nu0.csv",
                          "fig1_N_theory_nu0.1.csv", "fig1_N_pde_nu0.1.csv", "fig1_N_mc_nu0.1.csv"}
    assert (tmp_path / "fig1.svg").exists()
    static = files["fig1_N_pde_nu0.csv"]
    assert np.abs(static.values - n_static(static.times)).max() <= 1e-3
    mc, pde = files["fig1_N_mc_nu0.1.csv"], files["fig1_N_pde_nu0.1.csv"]
    assert mc.stderr is not None and mc.meta["seed"] == "0"
    ref = np.interp(mc.times, pde.times, pde.values)
    assert np.all(np.abs(mc.values - ref)[1:] <= 3 * mc.stderr[1:])


def test_fig1_byte_identical(tmp_path):
    args = ("fig1", "--nu", "0.1", "--ntraj", "100", "--tmax", "2", "--method", "mc", "--seed", "5")
    _run(tmp_path / "a", *args)
    _run(tmp_path / "b", *args)
    for name in os.listdir(tmp_path / "a"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_fig2_small(tmp_path):
    assert _run(tmp_path, "fig2", "--nu", "0.01,0.001", "--tmax", "3") == 0
    files = _csvs(tmp_path)
    for tag in ("nu0.01", "nu0.001"):
        j = files[f"fig2_J_pde_{tag}.csv"]
        assert j.values[0] == pytest.approx(1.0, abs=1e-8)
        assert j.meta["x"] == "alpha*t"
    short = files["fig2_J_theory_short.csv"]
    assert np.allclose(short.values, 1 - short.times**3 / 6)


@pytest.mark.parametrize("args,match", [
    (("fig2", "--method", "mc"), "method mc"),
    (("fig2", "--nu", "0.01"), "two nu"),
    (("fig2", "--nu", "0.01,0.5"), "strong coupling"),
    (("pointer", "--nu", "0.001,0.01"), "exactly one"),
    (("pointer", "--nu", "1"), "strong coupling"),
    (("validate", "--nu", "0"), "nu > 0"),
    (("fig1", "--nu", "x"), "bad --nu"),
])
def test_conflicts_rejected(tmp_path, capsys, args, match):
    assert _run(tmp_path, *args) == 2
    assert match in capsys.readouterr().err


def test_detuning_needs_mc(tmp_path):
    cfg = RunConfig(scenario="fig1", delta0=0.5, out=str(tmp_path))
    with pytest.raises(ConfigError, match="delta0"):
        cli.run_fig1(cfg)
    out = cli.run_fig1(cfg.replace(method="mc", nu_over_omega0=(0.1,), n_traj=50, t_max=1.0))
    assert any(p.endswith("fig1_N_mc_nu0.1.csv") for p in out)


def test_fig3_small(tmp_path):
    assert _run(tmp_path, "fig3", "--nu", "0.01", "--tmax", "20", "--ntraj", "100") == 0
    files = _csvs(tmp_path)
    for name in ("fig3_R_pde_nu0.01.csv", "fig3_R_theory_nu0.01.csv", "fig3_R_mc_nu0.01.csv"):
        assert files[name].values[0] == pytest.approx(1.0, abs=1e-4)
    pde = files["fig3_R_pde_nu0.01.csv"]
    assert pde.times[1] == pytest.approx(0.1) and np.all(np.diff(pde.times) > 0)


def test_pointer_small(tmp_path):
    assert _run(tmp_path, "pointer", "--nu", "0.01", "--tmax", "4", "--ntraj", "200") == 0
    files = _csvs(tmp_path)
    names = {f"pointer_{k}_{m}_nu0.01.csv" for k in ("offdiag_abs", "dpp", "dmm")
             for m in ("mc", "pde", "theory")}
    assert names <= set(files)
    cfg = RunConfig(scenario="pointer")
    rho_p0 = PointerBasis(cfg.phi_prime).to_pointer(cli.pointer_initial_state(cfg).matrix())
    for m in ("mc", "pde"):
        off = files[f"pointer_offdiag_abs_{m}_nu0.01.csv"]
        assert off.values[0] == pytest.approx(abs(rho_p0[0, 1]), abs=1e-12)
        assert files[f"pointer_dpp_{m}_nu0.01.csv"].values[0] == pytest.approx(0.0, abs=1e-12)


def test_pointer_initial_state_normalised():
    cfg = RunConfig(scenario="pointer", n_mix=0.2)
    s = cli.pointer_initial_state(cfg)
    rho = s.matrix()
    assert np.trace(rho).real == pytest.approx(1.0)
    assert np.linalg.eigvalsh(rho).min() > -1e-12


def test_config_file_and_flags(tmp_path):
    ini = tmp_path / "c.ini"
    ini.write_text("[run]\nmethod = pde\nseed = 4\n[params]\nnu_over_omega0 = 0.5\n")
    args = cli.build_parser().parse_args(["fig1", "--config", str(ini), "--seed", "9"])
    cfg = cli.config_from_args(args)
    assert cfg.scenario == "fig1" and cfg.method == "pde" and cfg.seed == 9 and cfg.nus == (0.5,)


def test_validate_passes_by_default():
    buf = io.StringIO()
    ok = cli.run_validate(RunConfig(scenario="validate"), buf)
    lines = buf.getvalue().splitlines()
    assert ok and lines[-1] == "SUMMARY status=PASS"
    checks = [line for line in lines if line.startswith("CHECK ")]
    assert len(checks) == len(cli.VALIDATE_CHECKS)
    assert all("status=PASS" in line and "measured=" in line for line in checks)


def test_validate_negative_control_exit_status():
    proc = subprocess.run([sys.executable, "-m", "tlsrelax", "validate", "--dt", "0.2"],
                          capture_output=True, text=True, timeout=600)
    assert proc.returncode == 1
    line = [x for x in proc.stdout.splitlines() if "name=propagator_accuracy" in x][0]
    assert "status=FAIL" in line
    assert proc.stdout.splitlines()[-1] == "SUMMARY status=FAIL"
