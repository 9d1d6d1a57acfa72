import math

import numpy as np
import pytest

from travwave.continuation import (
    Branch,
    acn_exact,
    acn_mu_het,
    homotopy_trace,
    periodic_family,
    rescaled_cubic_mu,
    trace_in_c,
    trace_in_K,
    write_branch_csv,
)
from travwave.model import make_context
from travwave.solve import find_mu_per


def test_acn_exact_values():
    u, w = acn_exact(0.5, 0.0, "het")
    assert u == pytest.approx(0.5, abs=1e-15)
    assert acn_mu_het(0.5) == 0.0
    u, w = acn_exact(0.25, 0.0, "hom")
    assert u == pytest.approx(1.5 / (2.5 + math.sqrt(1.75)), rel=1e-14)
    assert w == pytest.approx(0.0, abs=1e-15)
    # derivative consistency of the closed forms
    for kind, a in (("het", 0.3), ("hom", 0.2)):
        h = 1e-6
        for z in (-1.0, 0.4, 2.0):
            um, _ = acn_exact(a, z - h, kind)
            up, _ = acn_exact(a, z + h, kind)
            _, w = acn_exact(a, z, kind)
            assert (up - um) / (2 * h) == pytest.approx(w, rel=1e-7, abs=1e-10)
    with pytest.raises(ValueError):
        acn_exact(0.7, 0.0, "hom")
    with pytest.raises(ValueError):
        acn_exact(1.2, 0.0, "het")


def test_homotopy_endpoints(mp, ctx_d11, het_pair_d11, pulse1_d11):
    rb, rf = het_pair_d11
    br_back = homotopy_trace(mp, ctx_d11, "back", phi_steps=11)
    assert br_back.points[0].mu == pytest.approx(rescaled_cubic_mu(ctx_d11, "back"), abs=1e-6)
    assert br_back.points[-1].mu == pytest.approx(rb.mu, abs=1e-8)
    br_hom = homotopy_trace(mp, ctx_d11, "hom", phi_steps=11)
    assert br_hom.points[0].mu == pytest.approx(0.0, abs=1e-6)
    assert br_hom.points[-1].mu == pytest.approx(pulse1_d11.mu, abs=1e-8)


def test_homotopy_front_endpoint(mp, ctx_d11, het_pair_d11):
    _, rf = het_pair_d11
    br = homotopy_trace(mp, ctx_d11, "front", phi_steps=11)
    assert br.points[0].mu == pytest.approx(rescaled_cubic_mu(ctx_d11, "front"), abs=1e-6)
    assert br.points[-1].mu == pytest.approx(rf.mu, abs=1e-8)
    assert all(0.0 <= p.phi <= 1.0 for p in br.points)


def test_trace_in_c_back_front(mp, cycle125):
    back = trace_in_c(mp, 1.25, "back", n_steps=41)
    front = trace_in_c(mp, 1.25, "front", n_steps=41)
    assert len(back) == len(front) == 41
    # branch continuity: no jumps
    for br in (back, front):
        dmu = np.abs(np.diff(br.column("mu")))
        assert dmu.max() < 5.0 * np.median(dmu)
    # crossing of the two branches reproduces the cycle speed
    gap = back.column("mu") - front.column("mu")
    cs = back.column("c")
    i = int(np.flatnonzero(np.diff(np.sign(gap)) != 0)[0])
    c_cross = cs[i] - gap[i] * (cs[i + 1] - cs[i]) / (gap[i + 1] - gap[i])
    assert c_cross == pytest.approx(cycle125.c_star, abs=1e-6)


def test_trace_in_c_pulse_and_hopf(mp, cycle125):
    pulse = trace_in_c(mp, 1.25, "pulse1", n_steps=12, c_star=cycle125.c_star)
    assert len(pulse) >= 10
    # endpoint behaviour: mu -> 0 and the orbit shrinks toward c_M
    mus = pulse.column("mu")
    cs = pulse.column("c")
    assert mus[np.argmax(cs)] == min(mus)
    assert min(mus) < 0.02
    diam = pulse.column("diameter")
    assert diam[np.argmax(cs)] == min(diam)
    hopf = trace_in_c(mp, 1.25, "hopf_locus", n_steps=31)
    mu_h = hopf.column("mu")
    c_h = hopf.column("c")
    assert mu_h[np.argmax(c_h)] < 0.05  # tends to zero toward c_M
    assert mu_h[np.argmin(c_h)] < 0.06  # and toward c_m
    assert mu_h.max() > 0.15            # large in the interior


def test_periodic_family_limits(mp, cycle125, ctx_d11, pulse1_d11):
    fam = periodic_family(mp, 1.25, 0.0163, n_steps=16, c_star=cycle125.c_star)
    assert len(fam) >= 12
    qs = fam.column("q")
    mus = fam.column("mu")
    # Hopf end: closest q to u0
    i_h = int(np.argmin(np.abs(qs - ctx_d11.u0)))
    assert mus[i_h] == pytest.approx(ctx_d11.hopf_mu, rel=1e-2)
    # homoclinic end: closest q to u1
    i_p = int(np.argmin(np.abs(qs - ctx_d11.u1)))
    assert mus[i_p] == pytest.approx(pulse1_d11.mu, rel=1e-2)
    # nested loops: max_u grows monotonically as q leaves the centre
    order = np.argsort(np.abs(qs - ctx_d11.u0))
    mx = fam.column("max_u")[order]
    mn = fam.column("q")[order]
    assert np.all(np.diff(mx) > -1e-12)


def test_periodic_family_d12_side(mp, cycle125):
    fam = periodic_family(mp, 1.25, 0.0155, n_steps=10, c_star=cycle125.c_star)
    assert len(fam) >= 8
    ctx = make_context(mp, 1.25, 0.0155, c_star=cycle125.c_star)
    i_h = int(np.argmin(np.abs(fam.column("q") - ctx.u0)))
    assert fam.column("mu")[i_h] == pytest.approx(ctx.hopf_mu, rel=1e-2)


def test_trace_in_K_back(mp):
    br = trace_in_K(mp, "back", (1.12, 1.30), n_steps=4)
    assert len(br) == 4
    from travwave.model import critical_speeds
    for p in br.points:
        cs = critical_speeds(mp, p.K)
        assert cs.c_m < p.c < cs.c_M
        assert p.mu == pytest.approx(2 * mp.tau * p.K - 1.0, abs=1e-12)


def test_branch_csv_schema(tmp_path, mp, cycle125):
    hopf = trace_in_c(mp, 1.25, "hopf_locus", n_steps=5)
    path = tmp_path / "branches.csv"
    write_branch_csv([hopf], path)
    lines = path.read_text().splitlines()
    assert lines[0] == "kind,K,c,mu,u1,u0,u2,diameter,period,max_u"
    assert len(lines) == 6
    # unused fields stay empty
    assert lines[1].split(",")[7] == ""
