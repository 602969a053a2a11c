import csv
import json
import math
import os
import subprocess

import numpy as np
import pytest

import fmopto


def red(G, xi=0.0, nu=30.0, n_th=0.0):
    return fmopto.ReducedParams(1.0, G, 200e3 / 10.56e6, 32.0 / 10.56e6, xi=xi, nu=nu, n_th=n_th)


def test_version():
    assert fmopto.__version__.count(".") == 2


def test_thermal_occupation():
    n = fmopto.thermal_occupation(2 * math.pi * 10.56e6, 0.5)
    assert 976 <= n <= 996
    assert fmopto.thermal_occupation(1.0, 0.0) == 0.0


def test_bessel_against_numpy_free_series():
    x = 2.2
    series = sum((-1) ** m * (x / 2) ** (2 * m) / math.factorial(m) ** 2 for m in range(40))
    assert fmopto.bessel_j(0, x) == pytest.approx(series, abs=1e-13)


def test_gaussian_measures():
    for r in (0.1, 0.5, 1.0, 2.0):
        V = np.asarray(fmopto.two_mode_squeezed(r))
        assert V.shape == (4, 4)
        assert abs(fmopto.log_negativity(V) - 2 * r) < 1e-10
    assert fmopto.log_negativity(fmopto.initial_covariance(5.0)) == 0.0
    assert fmopto.phonon_number(fmopto.initial_covariance(5.0)) == 5.0


def test_drift_and_lyapunov():
    p = red(0.3, n_th=10.0)
    A = np.asarray(fmopto.build_drift(p))
    assert A[0, 2] == pytest.approx(0.0)
    assert A[1, 2] == pytest.approx(0.6)
    V = np.asarray(fmopto.lyapunov_steady(p))
    D = np.diag(fmopto.build_diffusion(p))
    assert np.abs(A @ V + V @ A.T + D).max() < 1e-9
    assert fmopto.physicality_margin(V) > -1e-12


def test_stability():
    assert fmopto.routh_hurwitz(red(0.4))[0] == "stable"
    assert fmopto.routh_hurwitz(red(0.6))[0] == "unstable"
    verdict, margin, mu = fmopto.floquet(red(1.0, xi=2.2))
    assert verdict == "stable" and margin < 0 and len(mu) == 4
    assert fmopto.classify(red(2.5, xi=1.0))[0] == "unstable"
    with pytest.raises(fmopto.SolverError):
        fmopto.lyapunov_steady(red(0.6))


def test_rwa_and_periodic_state():
    rwa, k0, w = fmopto.rwa_reduce(red(2.5, xi=2.2))
    assert k0 == 0
    assert rwa.G == pytest.approx(2.5 * fmopto.bessel_j(0, 2.2))
    assert rwa.xi == 0.0
    times, covs, radius = fmopto.periodic_steady_state(red(1.0, xi=2.2, n_th=1000.0))
    assert radius < 1
    n = np.mean([fmopto.phonon_number(V) for V in covs[:-1]])
    assert n < 1


def test_run_config_and_cli(tmp_path):
    cfg = {
        "reduced": {"delta_c_prime": 1.0, "G": 0.3, "kappa": 0.2, "gamma": 0.01, "n_th": 10.0},
        "modulation": {"xi": 1.0, "nu": 30.0},
        "simulation": {"t_max_periods": 200},
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    out = tmp_path / "sweep"
    assert fmopto.run_config("sweep", str(path), str(out), ["xi=0:2:3"]) == 0
    with open(out / "summary.csv") as f:
        rows = list(csv.DictReader(line for line in f if not line.startswith("#")))
    assert [r["xi"] for r in rows] == ["0", "1", "2"]
    assert all(float(r["phonon_avg"]) < 10 for r in rows)

    cli = os.environ.get("FMOPTO_CLI")
    if cli:
        res = subprocess.run([cli, "simulate", "--config", str(path), "--out", str(tmp_path / "sim")])
        assert res.returncode == 0
        assert (tmp_path / "sim" / "phonon.csv").exists()
    with pytest.raises(fmopto.ConfigError):
        fmopto.run_config("sweep", str(path), str(out), ["xi"])
