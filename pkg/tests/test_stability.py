import math

import numpy as np
import pytest

from travwave.stability import (
    dispersion,
    growth_rate,
    is_unstable,
    stability_map_csv,
    dispersion_csv,
    uniform_state,
    unstable_band,
)


def test_dispersion_k0_collapse(mp):
    us = uniform_state(mp, 30.0)
    d = dispersion(mp, us, 0.0)
    assert abs(d.lambda_plus) < 1e-14
    assert d.lambda_minus.real == pytest.approx(-1.0 / mp.tau, rel=1e-14)


def test_minus_root_always_damped(mp):
    for rho in (5.0, 20.0, 33.05, 40.0, 60.0):
        us = uniform_state(mp, rho)
        for k in np.logspace(-1, 2, 25):
            assert dispersion(mp, us, k).lambda_minus.real < 0


def test_large_k_limit(mp):
    rho = 33.05
    us = uniform_state(mp, rho)
    kap = float(mp.visc.kappa(rho, mp.tau))
    vp = mp.curve.slope(1.0 / rho)
    limit = -vp / (2.0 * mp.tau * rho**2 * kap)
    assert limit < 0
    assert growth_rate(mp, us, 1e3) == pytest.approx(limit, rel=0.01)


def test_characteristic_residual(mp, rng):
    for _ in range(1000):
        rho = rng.uniform(5.0, 60.0)
        k = rng.uniform(-200.0, 200.0)
        us = uniform_state(mp, rho)
        d = dispersion(mp, us, k)
        assert d.char_residual(mp, us) < 1e-10


def test_growth_curvature_closed_form(mp):
    # lam_r''(0) = -V'(1 - 2 tau V')/rho^2, by central differences
    h = 1e-4
    for rho in (20.0, 33.05, 40.0):
        us = uniform_state(mp, rho)
        lr = lambda k: growth_rate(mp, us, k)
        assert abs(lr(0.0)) < 1e-13
        assert abs((lr(h) - lr(-h)) / (2 * h)) < 1e-6
        fd2 = (lr(h) - 2 * lr(0.0) + lr(-h)) / h**2
        vp = mp.curve.slope(1.0 / rho)
        closed = -vp * (1.0 - 2.0 * mp.tau * vp) / rho**2
        assert fd2 == pytest.approx(closed, rel=1e-3)


def test_instability_flag_matches_threshold(mp):
    # flag flips exactly where 2 tau V'(1/rho) crosses 1
    rhos = np.linspace(5.0, 60.0, 111)
    for rho in rhos:
        crit = 2.0 * mp.tau * mp.curve.slope(1.0 / rho)
        assert is_unstable(mp, float(rho)) == (crit > 1.0)
    flags = [is_unstable(mp, float(r)) for r in rhos]
    assert any(flags) and not all(flags)


def test_instability_flag_matches_spectrum(mp):
    # numerical oracle: positive growth somewhere iff the flag is set
    for rho in (20.0, 28.0, 33.05, 40.0, 55.0):
        us = uniform_state(mp, rho)
        ks = np.linspace(0.05, 300.0, 1200)
        mx = max(growth_rate(mp, us, float(k)) for k in ks)
        if is_unstable(mp, rho):
            assert mx > 1e-6
        else:
            assert mx <= 1e-12


def test_unstable_band(mp):
    band = unstable_band(mp, 33.05)
    assert band is not None
    k1, k2 = band
    assert k1 < 0 < k2
    us = uniform_state(mp, 33.05)
    # positive inside (sampled), negative outside
    for k in np.linspace(0.1 * k2, 0.9 * k2, 12):
        assert growth_rate(mp, us, float(k)) > 0
    assert growth_rate(mp, us, 1.05 * k2) < 0
    assert growth_rate(mp, us, 1.05 * k1) < 0
    # band need not be symmetric, only the signs are pinned
    assert unstable_band(mp, 20.0) is None


def test_neutral_point_slope(mp):
    rho = 33.05
    us = uniform_state(mp, rho)
    _, k2 = unstable_band(mp, rho)
    kap = float(mp.visc.kappa(rho, mp.tau))
    closed = -k2**3 * kap / (k2**2 + rho**2)
    h = 1e-5
    fd = (growth_rate(mp, us, k2 + h) - growth_rate(mp, us, k2 - h)) / (2 * h)
    assert fd == pytest.approx(closed, rel=1e-4)


def test_csv_outputs(tmp_path, mp):
    f1 = tmp_path / "disp.csv"
    dispersion_csv(mp, 33.05, np.linspace(0, 50, 11), f1)
    lines = f1.read_text().splitlines()
    assert lines[0] == "k,re_lambda_plus,im_lambda_plus,re_lambda_minus,im_lambda_minus"
    assert len(lines) == 12
    f2 = tmp_path / "map.csv"
    stability_map_csv(mp, [20.0, 33.05], f2)
    lines = f2.read_text().splitlines()
    assert lines[0] == "rho,unstable,k1,k2"
    assert lines[1].endswith(",0,,")
    assert ",1," in lines[2]
