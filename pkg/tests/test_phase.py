import math

import numpy as np
import pytest

from travwave.model import classify, critical_constants, critical_speeds, make_context
from travwave.phase import (
    Event,
    PhaseError,
    PhaseState,
    flow_identity_residual,
    integrate,
    manifold_shoot,
    reduced_system,
    w_at,
)


def test_vector_field_values(mp):
    ctx = make_context(mp, 1.25, 0.0161, 0.05)
    sysm = reduced_system(ctx)
    # equilibria annihilate the field
    for ueq in (ctx.u1, ctx.u0, ctx.u2):
        du, dw = sysm.rhs(ueq, 0.0)
        assert du == 0.0
        assert abs(dw) < 1e-8
    # first component is the identity in w
    for w in (-0.3, 0.02, 1.1):
        assert sysm.rhs(ctx.u0, w)[0] == w
    # between u1 and u0 the field pushes w upward on the axis
    mid = 0.5 * (ctx.u1 + ctx.u0)
    assert sysm.rhs(mid, 0.0)[1] > 0
    with pytest.raises(PhaseError):
        integrate(ctx, PhaseState(-0.01, 0.0))


def test_integrate_reversibility(mp):
    ctx = make_context(mp, 1.25, 0.0161, 0.05)
    s0 = PhaseState(0.021, 0.15)
    fwd = integrate(ctx, s0, 1, events=(), z_max=0.05)
    end = PhaseState(fwd.u[-1], fwd.w[-1])
    back = integrate(ctx, end, -1, events=(), z_max=0.05)
    assert back.u[-1] == pytest.approx(s0.u, abs=1e-8)
    assert back.w[-1] == pytest.approx(s0.w, abs=1e-8)


def test_near_centre_loop(mp):
    # at the purely-imaginary parameter the small loop nearly closes and
    # matches the harmonic prediction
    ctx0 = make_context(mp, 1.25, 0.0161)
    ctx = ctx0.with_mu(ctx0.hopf_mu)
    r0 = 1e-3
    # forward flow leaves (u0+r, 0) downward; the first axis crossing (left
    # turning point) is upward, the second (back near the start) downward
    s0 = PhaseState(ctx.u0 + r0, 0.0)
    ev = Event.w_zero(direction=+1, name="turn")
    half1 = integrate(ctx, s0, 1, events=[ev], z_max=5.0)
    assert half1.terminal_event == "turn"
    s1 = PhaseState(half1.u[-1], half1.w[-1])
    ev2 = Event.w_zero(direction=-1, name="turn2")
    half2 = integrate(ctx, s1, 1, events=[ev2], z_max=5.0)
    gap = math.hypot(half2.u[-1] - s0.u, half2.w[-1] - s0.w)
    assert gap < 1e-4
    # harmonic prediction up to the finite-amplitude (quadratic) correction
    period = half1.z[-1] + (half2.z[-1] - half2.z[0])
    assert period == pytest.approx(2 * math.pi / ctx.omega0, rel=1e-2)


def test_event_zero_is_sharp(mp, het_pair_d11, ctx_d11):
    rb, _ = het_pair_d11
    ctx = ctx_d11.with_mu(rb.mu)
    half = manifold_shoot(ctx, 1, +1)
    if half.landing_kind == "axis":
        assert abs(half.orbit.w[-1]) < 1e-12
    z_hits = half.orbit.event_hits.get("landing") or half.orbit.event_hits.get("far")
    assert z_hits


def test_manifold_shoot_heteroclinic_landing(mp, het_pair_d11, ctx_d11):
    rb, rf = het_pair_d11
    # at the solved value the increasing branch lands at the far saddle
    half = manifold_shoot(ctx_d11.with_mu(rb.mu), 1, +1)
    assert half.landing_kind in ("axis", "far")
    assert half.landing_u == pytest.approx(ctx_d11.u2, abs=1e-5)
    assert half.slope_at_origin > 0
    # same for the decreasing branch from u2
    half_f = manifold_shoot(ctx_d11.with_mu(rf.mu), 2, -1)
    assert half_f.landing_u == pytest.approx(ctx_d11.u1, abs=1e-5)


def test_manifold_shoot_large_mu_exits_far(ctx_d11):
    half = manifold_shoot(ctx_d11.with_mu(5.0), 1, +1)
    assert half.landing_kind == "far"
    assert half.orbit.w[-1] > 0


def test_manifold_shoot_branch_signs(ctx_d11):
    ctx = ctx_d11.with_mu(0.08)
    for j, sgn in ((1, +1), (1, -1), (2, +1), (2, -1)):
        half = manifold_shoot(ctx, j, sgn)
        interior = half.orbit.w[1:-1]
        assert np.all(sgn * interior > 0), (j, sgn)


def test_manifold_shoot_d2_branch(mp):
    cc = critical_constants(mp)
    cs = critical_speeds(mp, 0.5)
    c = 0.5 * (cs.c_m + cc.c0)
    ctx = make_context(mp, 0.5, c)
    mu0 = -ctx.coeffs.fprime(0.0)
    half = manifold_shoot(ctx.with_mu(mu0), 2, -1)
    assert half.landing_kind == "axis"
    assert half.landing_u > 0
    with pytest.raises(PhaseError):
        manifold_shoot(ctx.with_mu(mu0), 1, +1)  # no u1 in the two-zero region


def test_w_at_origin_and_monotonicity(ctx_d11):
    ctx = ctx_d11.with_mu(0.08)
    # probe point low enough to lie on the graph for every nearby parameter
    a = ctx.u0 + 0.25 * (ctx.u2 - ctx.u0)
    h1 = manifold_shoot(ctx, 1, +1)
    assert w_at(h1, ctx.u1 + 2e-12) == pytest.approx(0.0, abs=1e-6)
    # (w1+)_mu > 0
    w_lo = w_at(manifold_shoot(ctx.with_mu(0.08 - 5e-4), 1, +1), a)
    w_hi = w_at(manifold_shoot(ctx.with_mu(0.08 + 5e-4), 1, +1), a)
    assert w_hi > w_lo
    # (w1+)_c < 0
    ctx2 = make_context(ctx.mp, ctx.K, ctx.c + 1e-4, 0.08)
    w_c = w_at(manifold_shoot(ctx2, 1, +1), a)
    w_0 = w_at(manifold_shoot(ctx, 1, +1), a)
    assert w_c < w_0
    with pytest.raises(PhaseError):
        w_at(h1, ctx.u2 * 3)


def test_flow_identity_residual(ctx_d11):
    ctx = ctx_d11.with_mu(0.09)
    half = manifold_shoot(ctx, 1, +1)
    assert flow_identity_residual(ctx, half) < 1e-6


def test_landing_segments_random_contexts(mp, rng):
    # landings stay inside the segments allowed by the zero pattern
    cc = critical_constants(mp)
    checked = 0
    while checked < 20:
        K = rng.uniform(cc.K0 * 1.5, cc.K_M * 0.98)
        cs = critical_speeds(mp, K)
        c = rng.uniform(cs.c1, cs.c_M)
        if classify(mp, K, c).value != "D1":
            continue
        mu = rng.uniform(-0.2, 0.4)
        ctx = make_context(mp, K, c, mu)
        eig1 = ctx.eigen(ctx.u1)
        eig2 = ctx.eigen(ctx.u2)
        if not (eig1.is_saddle and eig2.is_saddle):
            continue
        tol = 1e-9
        for j, sgn in ((1, +1), (1, -1), (2, +1), (2, -1)):
            half = manifold_shoot(ctx, j, sgn, dense=False)
            if half.landing_kind == "axis":
                if j == 1:
                    assert ctx.u0 - tol <= half.landing_u <= ctx.u2 + tol
                else:
                    assert ctx.u1 - tol <= half.landing_u <= ctx.u0 + tol
            elif half.landing_kind == "far":
                assert half.landing_u == pytest.approx(ctx.u2 if j == 1 else ctx.u1, abs=1e-9)
        checked += 1


def test_epsilon_robustness(ctx_d11):
    ctx = ctx_d11.with_mu(0.09)
    land = {}
    for eps_rel in (1e-6, 1e-10):
        eps = eps_rel * (ctx.u2 - ctx.u1)
        half = manifold_shoot(ctx, 1, +1, eps=eps)
        land[eps_rel] = half.landing_u
    assert abs(land[1e-6] - land[1e-10]) < 1e-6


def test_orbit_csv_roundtrip(tmp_path, ctx_d11):
    half = manifold_shoot(ctx_d11.with_mu(0.09), 1, +1)
    path = tmp_path / "orbit.csv"
    half.orbit.to_csv(path)
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert data.shape[1] == 3
    assert np.allclose(data[:, 1], half.orbit.u, rtol=0, atol=0)
    header = path.read_text().splitlines()[0]
    assert header == "z,u,w"
