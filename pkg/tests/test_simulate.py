import numpy as np
import pytest

from travwave.simulate import (
    FieldSnapshot,
    MicroConfig,
    PdeConfig,
    SimulationError,
    count_pulses,
    estimate_K,
    estimate_wave_speed,
    micro_run,
    micro_snapshots_csv,
    pde_run,
    pde_snapshots_csv,
)
from travwave.stability import is_unstable


def test_pde_config_validation():
    with pytest.raises(ValueError):
        PdeConfig(N=128, k_trunc=100)
    with pytest.raises(ValueError):
        PdeConfig(dt=-1.0)


def test_uniform_stable_state_is_fixed_point(mp):
    rho0 = 20.0  # stable density
    assert not is_unstable(mp, rho0)
    cfg = PdeConfig(rho_bar=rho0, perturb_amplitude=0.0, t_end=10.0, snapshot_every=10.0)
    snaps = pde_run(mp, cfg)
    drift = max(np.max(np.abs(s.rho - rho0)) for s in snaps)
    v0 = float(mp.curve.value(1.0 / rho0))
    vdrift = max(np.max(np.abs(s.v - v0)) for s in snaps)
    assert drift < 1e-10 and vdrift < 1e-10


def test_mass_conservation_short_run(mp):
    cfg = PdeConfig(t_end=5.0, snapshot_every=1.0)
    snaps = pde_run(mp, cfg)
    m0 = snaps[0].mass
    assert all(abs(s.mass - m0) / m0 < 1e-10 for s in snaps)


def test_perturbation_growth_matches_stability_flag(mp):
    # amplitude at t=50 grows iff the uniform state is linearly unstable
    for rho in (20.0, 28.0, 33.05, 40.0, 50.0):
        cfg = PdeConfig(rho_bar=rho, perturb_amplitude=1e-4, perturb_mode=5,
                        t_end=50.0, snapshot_every=50.0, dt=2e-3)
        snaps = pde_run(mp, cfg)
        a0 = np.ptp(snaps[0].rho)
        a1 = np.ptp(snaps[-1].rho)
        if is_unstable(mp, rho):
            assert a1 > 1.5 * a0, rho
        else:
            assert a1 < a0, rho


def test_dt_refinement_first_order(mp):
    cfg1 = PdeConfig(t_end=20.0, snapshot_every=20.0)
    cfg2 = PdeConfig(t_end=20.0, snapshot_every=20.0, dt=5e-4)
    s1 = pde_run(mp, cfg1)[-1]
    s2 = pde_run(mp, cfg2)[-1]
    assert np.max(np.abs(s1.rho - s2.rho)) < 1e-4
    assert np.max(np.abs(s1.v - s2.v)) < 1e-4


def test_micro_free_flow_convergence(mp):
    cfg = MicroConfig(n_vehicles=20, L=2.0, t_end=100.0, snapshot_every=100.0,
                      perturb_amplitude=1e-2)
    snaps = micro_run(mp, cfg)
    h = cfg.L / cfg.n_vehicles  # V'(0.1) tiny: stable headway
    v_eq = float(mp.curve.value(h))
    assert np.max(np.abs(snaps[-1].xdot - v_eq)) < 1e-6


def test_micro_headways_telescope(mp):
    cfg = MicroConfig(n_vehicles=31, L=2.33, t_end=5.0, snapshot_every=1.0)
    snaps = micro_run(mp, cfg)
    for s in snaps:
        head = np.diff(np.append(s.x, s.x[0] + cfg.L))
        assert head.sum() == pytest.approx(cfg.L, abs=1e-10)


def test_micro_unstable_oscillations(mp):
    cfg = MicroConfig(n_vehicles=77, L=2.33, t_end=400.0, snapshot_every=50.0)
    snaps = micro_run(mp, cfg)
    head = np.diff(np.append(snaps[-1].x, snaps[-1].x[0] + cfg.L))
    assert head.min() < 0.5 * cfg.L / 77


def test_estimate_wave_speed_synthetic():
    # rigidly translated profile at z = x + c t, c = 0.017
    L, N, c = 2.0, 128, 0.017
    x = np.arange(N) * (L / N)
    snaps = []
    for t in np.linspace(0.0, 40.0, 21):
        z = np.mod(x + c * t, L)
        rho = 30.0 + 12.0 * np.exp(-80.0 * (np.minimum(z, L - z)) ** 2)
        v = 1.0 / rho
        snaps.append(FieldSnapshot(t=float(t), x=x, rho=rho, v=v))
    assert estimate_wave_speed(snaps) == pytest.approx(c, abs=1e-6)
    with pytest.raises(SimulationError):
        estimate_wave_speed(snaps[:2])
    flat = [FieldSnapshot(t=s.t, x=s.x, rho=np.full_like(s.rho, 30.0),
                          v=np.full_like(s.v, 0.02)) for s in snaps]
    with pytest.raises(SimulationError):
        estimate_wave_speed(flat)


def test_estimate_K_paper_arithmetic():
    x = np.linspace(0.0, 2.33, 8, endpoint=False)
    snap = FieldSnapshot(t=0.0, x=x, rho=np.full(8, 26.516), v=np.full(8, 0.029025))
    K = estimate_K(snap, 1.0, 0.0130899)
    assert K == pytest.approx(1.11672, rel=1e-4)


def test_estimate_K_uniform_state(mp):
    rho = 25.0
    v = float(mp.curve.value(1.0 / rho))
    x = np.linspace(0.0, 1.0, 16, endpoint=False)
    snap = FieldSnapshot(t=0.0, x=x, rho=np.full(16, rho), v=np.full(16, v))
    for c in (0.0, 0.01, 0.3):
        assert estimate_K(snap, 0.5, c) == pytest.approx(rho * (v + c), rel=1e-14)


def test_count_pulses():
    x = np.arange(64) / 64 * 2.0
    flat = FieldSnapshot(0.0, x, np.full(64, 30.0), np.full(64, 0.02))
    assert count_pulses(flat) == 0
    z = np.minimum(np.mod(x - 0.5, 2.0), 2.0 - np.mod(x - 0.5, 2.0))
    one = FieldSnapshot(0.0, x, 30.0 + 25.0 * np.exp(-60 * z**2), np.full(64, 0.02))
    assert count_pulses(one) == 1
    two = FieldSnapshot(0.0, x, 30.0 + 25.0 * (np.exp(-60 * z**2) +
                        np.exp(-60 * np.minimum(np.mod(x - 1.5, 2.0), 2.0 - np.mod(x - 1.5, 2.0))**2)),
                        np.full(64, 0.02))
    assert count_pulses(two) == 2


def test_collision_abort(mp):
    x0 = np.array([0.0, 0.01, 1.0, 1.5])
    v0 = np.array([1.0, 0.0, 0.0, 0.0])  # rear car races into the leader
    cfg = MicroConfig(n_vehicles=4, L=2.0, t_end=10.0, x0=x0, v0=v0)
    with pytest.raises(SimulationError):
        micro_run(mp, cfg)


def test_snapshot_csv_schemas(tmp_path, mp):
    pde = pde_run(mp, PdeConfig(t_end=0.1, snapshot_every=0.05, N=206, k_trunc=100))
    f = tmp_path / "p.csv"
    pde_snapshots_csv(pde, f)
    assert f.read_text().splitlines()[0] == "t,x,rho,v"
    micro = micro_run(mp, MicroConfig(n_vehicles=10, t_end=0.1, snapshot_every=0.05))
    f2 = tmp_path / "m.csv"
    micro_snapshots_csv(micro, f2)
    assert f2.read_text().splitlines()[0] == "t,i,x,vdot"
