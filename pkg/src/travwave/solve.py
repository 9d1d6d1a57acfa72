"""Scalar shooting solvers: heteroclinic values mu_b/mu_f, the cycle locus
c*, pulse values, periodic orbits, and necessary-condition checks."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .model import (
    ModelParams,
    RegionClass,
    WaveContext,
    classify,
    critical_constants,
    critical_speeds,
    make_context,
)
from .phase import (
    Event,
    HalfOrbit,
    Orbit,
    PhaseState,
    PlanarSystem,
    integrate_system,
    manifold_shoot,
    reduced_system,
)

__all__ = [
    "ShootResult",
    "PeriodicResult",
    "CycleResult",
    "NonexistenceReport",
    "RegionError",
    "SolveError",
    "find_mu_b",
    "find_mu_f",
    "find_c_star",
    "find_mu_pul",
    "find_mu_per",
    "periodic_with_period",
    "verify_nonexistence",
    "orbit_flux_integral",
]

MU_BRACKET_TOL = 1e-12
BRACKET_STEP0 = 1e-2
BRACKET_MAX_DOUBLINGS = 40
Z_MAX_SECTION = 400.0


class RegionError(ValueError):
    """Request incompatible with the (K, c) region or the viscosity law."""


class SolveError(RuntimeError):
    pass


@dataclass
class ShootResult:
    kind: str
    mu: float
    orbit: Orbit
    residual: float
    bracket: tuple[float, float]
    matching_point: float | None = None
    halves: tuple[HalfOrbit, HalfOrbit] | None = None
    landing: float | None = None


@dataclass
class PeriodicResult:
    q: float
    mu_per: float
    period: float
    orbit: Orbit | None
    residual: float
    method: str = "section_shooting"
    max_u: float = float("nan")
    min_u: float = float("nan")
    matching_error: float | None = None
    # section offset from the bounding saddle; kept separately because for
    # long periods it drops below the floating-point spacing of q itself
    saddle_offset: float | None = None


@dataclass
class CycleResult:
    c_star: float
    mu_star: float
    mu_b: float
    mu_f: float
    back: ShootResult
    front: ShootResult
    saddle_quantities: tuple[float, float]


@dataclass
class NonexistenceReport:
    K: float
    c: float
    region: str
    claim: str
    verified: bool
    detail: str = ""
    flux_integral: float | None = None
    flux_scale: float | None = None


# ---------------------------------------------------------------------------
# bracketed scalar solving (sign bisection: escape values are +-inf)
# ---------------------------------------------------------------------------

def _bisect_sign(g, lo, hi, glo, ghi, tol):
    if glo == 0:
        return lo, lo, 0.0
    if ghi == 0:
        return hi, hi, 0.0
    if (glo < 0) == (ghi < 0):
        raise SolveError(f"invalid bracket: g({lo})={glo}, g({hi})={ghi}")
    # bisect on sign until both endpoint values are finite, then let Brent
    # finish on the smooth stretch
    while not (math.isfinite(glo) and math.isfinite(ghi)):
        if hi - lo <= tol * max(1.0, abs(lo), abs(hi)):
            return lo, hi, abs(glo) if math.isfinite(glo) else abs(ghi)
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if gm == 0:
            return mid, mid, 0.0
        if (gm < 0) == (glo < 0):
            lo, glo = mid, gm
        else:
            hi, ghi = mid, gm
    xtol = tol * max(1.0, abs(lo), abs(hi))
    try:
        root = brentq(g, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps)
        return root - 0.5 * xtol, root + 0.5 * xtol, abs(g(root))
    except (ValueError, SolveError):
        while hi - lo > tol * max(1.0, abs(lo), abs(hi)):
            mid = 0.5 * (lo + hi)
            gm = g(mid)
            if gm == 0:
                return mid, mid, 0.0
            if (gm < 0) == (glo < 0):
                lo, glo = mid, gm
            else:
                hi, ghi = mid, gm
        return lo, hi, min(abs(glo), abs(ghi))


def _expand_bracket(g, mu0, step0):
    """Walk out from mu0 on both sides until the sign of g changes.

    Direction-agnostic: works whether g increases or decreases through its
    root (the homotopy family flips the orientation)."""
    g0 = g(mu0)
    if g0 == 0:
        return mu0, mu0, 0.0, 0.0
    lo = hi = mu0
    glo = ghi = g0
    step = step0
    for _ in range(BRACKET_MAX_DOUBLINGS):
        cand = hi + step
        gc = g(cand)
        if gc == 0 or (gc < 0) != (ghi < 0):
            return hi, cand, ghi, gc
        hi, ghi = cand, gc
        cand = lo - step
        gc = g(cand)
        if gc == 0 or (gc < 0) != (glo < 0):
            return cand, lo, gc, glo
        lo, glo = cand, gc
        step *= 2.0
    raise SolveError("bracket expansion exhausted (region misclassification?)")


def _solve_scalar(g, mu0, step0=BRACKET_STEP0, tol=MU_BRACKET_TOL, bracket=None):
    """Root of g; returns (mu, final bracket, residual |g| near the root)."""
    if bracket is not None:
        lo, hi = bracket
        glo, ghi = g(lo), g(hi)
        if not (glo == 0 or ghi == 0 or (glo < 0) != (ghi < 0)):
            # warm bracket went stale; re-expand from its midpoint
            lo, hi, glo, ghi = _expand_bracket(g, 0.5 * (lo + hi), step0)
    else:
        lo, hi, glo, ghi = _expand_bracket(g, mu0, step0)
    lo, hi, res = _bisect_sign(g, lo, hi, glo, ghi, tol)
    return 0.5 * (lo + hi), (lo, hi), res


# ---------------------------------------------------------------------------
# heteroclinic matching
# ---------------------------------------------------------------------------

def _branch_w_at(ctx: WaveContext, sysm: PlanarSystem, j: int, sign: int, a: float,
                 rtol=None, atol=None):
    """w of manifold branch (j, sign) at u=a, or None if it lands first."""
    direction = +1 if j == 1 else -1
    ev = Event.u_equals(a, direction=direction, name="match")
    kw = {}
    if rtol is not None:
        kw["rtol"] = rtol
    if atol is not None:
        kw["atol"] = atol
    half = manifold_shoot(ctx, j, sign, extra_events=[ev], system=sysm, dense=False, **kw)
    if half.orbit.terminal_event == "match":
        return half.orbit.event_hits["match"][0][2]
    return None


def _het_functional(ctx: WaveContext, sign: int, a: float, rtol=None, atol=None,
                    system_factory=None):
    make_sys = system_factory or (lambda mu: reduced_system(ctx.with_mu(mu)))

    def phi(mu):
        c = ctx.with_mu(mu)
        s = make_sys(mu)
        w1 = _branch_w_at(c, s, 1, sign, a, rtol, atol)
        if w1 is None:  # branch from u1 fell short of the matching point
            return -math.inf * sign
        w2 = _branch_w_at(c, s, 2, sign, a, rtol, atol)
        if w2 is None:  # branch from u2 fell short
            return math.inf * sign
        return w1 - w2

    return phi


def match_het_mu(ctx: WaveContext, system_factory, sign: int,
                 mu0: float = 0.0, bracket=None, tol=MU_BRACKET_TOL,
                 step0=BRACKET_STEP0):
    """Heteroclinic matching for an arbitrary system family over mu.

    Used by the homotopy continuation; returns (mu, bracket, residual)."""
    a = 0.5 * (ctx.u0 + ctx.u2)
    phi = _het_functional(ctx, sign, a, system_factory=system_factory)
    return _solve_scalar(phi, mu0, step0=step0, tol=tol, bracket=bracket)


def match_pulse_mu(ctx: WaveContext, system_factory, j: int,
                   mu0: float = 0.0, bracket=None, tol=MU_BRACKET_TOL,
                   step0=BRACKET_STEP0):
    """Landing matching of the two (j, ±) branches for an arbitrary system
    family over mu; returns (mu, bracket, residual)."""
    def g(mu):
        c = ctx.with_mu(mu)
        s = system_factory(mu)
        up = _landing_value(c, s, j, +1)
        dn = _landing_value(c, s, j, -1)
        return up - dn

    return _solve_scalar(g, mu0, step0=step0, tol=tol, bracket=bracket)


def _find_het(ctx: WaveContext, sign: int, bracket, tol=MU_BRACKET_TOL,
              rtol=None, atol=None) -> ShootResult:
    if not ctx.region.in_d1:
        raise RegionError("heteroclinic connections need the three-zero region")
    a = 0.5 * (ctx.u0 + ctx.u2)
    phi = _het_functional(ctx, sign, a, rtol, atol)
    mu, brk, res = _solve_scalar(phi, ctx.mu, bracket=bracket, tol=tol)
    # the forward-going branch traces the whole connection
    j = 1 if sign > 0 else 2
    cmu = ctx.with_mu(mu)
    half = manifold_shoot(cmu, j, sign)
    other = manifold_shoot(cmu, 3 - j, sign)
    return ShootResult(
        kind="back" if sign > 0 else "front",
        mu=mu, orbit=half.orbit, residual=res, bracket=brk,
        matching_point=a, halves=(half, other), landing=half.landing_u,
    )


def find_mu_b(ctx: WaveContext, bracket=None, tol=MU_BRACKET_TOL,
              rtol=None, atol=None) -> ShootResult:
    """Control value of the increasing connection (w > 0) from (u1,0) to
    (u2,0), by matching the manifold graphs at the midpoint of (u0, u2)."""
    return _find_het(ctx, +1, bracket, tol, rtol, atol)


def find_mu_f(ctx: WaveContext, bracket=None, tol=MU_BRACKET_TOL,
              rtol=None, atol=None) -> ShootResult:
    """Control value of the decreasing connection (w < 0)."""
    return _find_het(ctx, -1, bracket, tol, rtol, atol)


def find_c_star(mp: ModelParams, K: float, c_tol: float = 1e-10) -> CycleResult:
    """Wave speed at which the two heteroclinic values coincide.

    Requires K in (K1, K_M), or the strongly singular viscosity law together
    with K in (K0, K1].
    """
    cc = critical_constants(mp)
    if not (cc.K1 < K < cc.K_M or (mp.visc.condition_h and cc.K0 < K <= cc.K1)):
        raise RegionError(
            f"cycle solve needs K in (K1={cc.K1:.5g}, K_M={cc.K_M:.5g}); "
            "below K1 only the strongly singular viscosity law qualifies"
        )
    cs = critical_speeds(mp, K)
    span = cs.c_M - cs.c1
    # secant prediction of mu_b(c), mu_f(c) keeps the warm brackets tight
    # across the c-iteration
    history: dict[str, list[tuple[float, float]]] = {"b": [], "f": []}
    miss: dict[str, float] = {"b": 1e-2, "f": 1e-2}

    def predicted(key, c):
        pts = history[key]
        if len(pts) >= 2:
            (c1_, m1), (c2_, m2) = pts[-2], pts[-1]
            if c1_ != c2_:
                return m2 + (m2 - m1) * (c - c2_) / (c2_ - c1_)
            return m2
        if pts:
            return pts[-1][1]
        return None

    def solve_one(fun, key, ctx, tol, rtol=None, atol=None):
        guess = predicted(key, ctx.c)
        bracket = None
        if guess is not None:
            halfw = max(1e-8, 3.0 * miss[key])
            bracket = (guess - halfw, guess + halfw)
        r = fun(ctx, bracket=bracket, tol=tol, rtol=rtol, atol=atol)
        if guess is not None:
            miss[key] = abs(r.mu - guess) + 1e-12
        history[key].append((ctx.c, r.mu))
        return r

    def solve_pair(c, tol, rtol=None, atol=None):
        ctx = make_context(mp, K, c)
        rb = solve_one(find_mu_b, "b", ctx, tol, rtol, atol)
        rf = solve_one(find_mu_f, "f", ctx, tol, rtol, atol)
        return rb, rf

    def gap(c):
        rb, rf = solve_pair(c, tol=1e-10, rtol=1e-8, atol=1e-10)
        return rb.mu - rf.mu

    # the interval ends are nearly degenerate (coalescing equilibria, slow
    # orbits); walk toward the needed end geometrically instead of starting
    # the bracket there
    c_lo_lim = cs.c1 + 1e-6 * span
    c_hi_lim = cs.c_M - 1e-6 * span
    c_mid = 0.5 * (c_lo_lim + c_hi_lim)
    g_mid = gap(c_mid)
    if g_mid == 0:
        c_star = c_mid
    else:
        lo, hi = c_mid, c_mid
        glo = ghi = g_mid
        found = False
        for _ in range(60):
            if g_mid < 0:  # root lies to the right
                nxt = c_hi_lim - (c_hi_lim - hi) / 3.0
                gn = gap(nxt)
                if (gn < 0) != (ghi < 0):
                    lo, glo, hi, ghi = hi, ghi, nxt, gn
                    found = True
                    break
                hi, ghi = nxt, gn
                if c_hi_lim - hi < c_tol:
                    break
            else:
                nxt = c_lo_lim + (lo - c_lo_lim) / 3.0
                gn = gap(nxt)
                if (gn < 0) != (glo < 0):
                    hi, ghi, lo, glo = lo, glo, nxt, gn
                    found = True
                    break
                lo, glo = nxt, gn
                if lo - c_lo_lim < c_tol:
                    break
        if not found:
            raise SolveError("no sign change of mu_b - mu_f inside the speed interval")
        c_star = brentq(gap, lo, hi, xtol=c_tol)
    rb, rf = solve_pair(c_star, tol=MU_BRACKET_TOL)
    mu_star = 0.5 * (rb.mu + rf.mu)
    ctx = make_context(mp, K, c_star, mu_star)
    co = ctx.coeffs
    sq = (float(co.g2(ctx.u1) * co.h(ctx.u1)), float(co.g2(ctx.u2) * co.h(ctx.u2)))
    return CycleResult(
        c_star=c_star, mu_star=mu_star, mu_b=rb.mu, mu_f=rf.mu,
        back=rb, front=rf, saddle_quantities=sq,
    )


# ---------------------------------------------------------------------------
# pulse (landing) matching
# ---------------------------------------------------------------------------

def _landing_value(ctx: WaveContext, sysm: PlanarSystem, j: int, sign: int):
    """Landing headway of branch (j, sign); boundary outcomes keep their
    geometric meaning ('far' is a genuine landing at the far equilibrium,
    a small-u escape maps to a negative sentinel)."""
    half = manifold_shoot(ctx, j, sign, system=sysm, dense=False)
    if half.landing_kind in ("axis", "far"):
        return half.landing_u
    return -1.0


def _pulse_functional(ctx: WaveContext, j: int):
    def g(mu):
        c = ctx.with_mu(mu)
        s = reduced_system(c)
        up = _landing_value(c, s, j, +1)
        dn = _landing_value(c, s, j, -1)
        return up - dn

    return g


def _concat_forward(first: Orbit, second: Orbit, label: str = "loop") -> Orbit:
    """Concatenate two z-increasing orbits, shifting the second in z."""
    z2 = second.z - second.z[0] + first.z[-1]
    return Orbit(
        z=np.concatenate([first.z, z2[1:]]),
        u=np.concatenate([first.u, second.u[1:]]),
        w=np.concatenate([first.w, second.w[1:]]),
        terminal_event=label,
        direction=1,
        dense=None,
    )


def _assemble_loop(fwd: HalfOrbit | Orbit, bwd: HalfOrbit | Orbit) -> Orbit:
    """Join a forward half and a backward-integrated half into one loop of
    increasing z starting at the forward half's start."""
    first = fwd.orbit if isinstance(fwd, HalfOrbit) else fwd
    second = (bwd.orbit if isinstance(bwd, HalfOrbit) else bwd).reversed()
    return _concat_forward(first, second)


def _cycle_as_result(ctx: WaveContext, rb: ShootResult, rf: ShootResult) -> ShootResult:
    # both heteroclinic orbits already run forward in z
    loop = _concat_forward(rb.orbit, rf.orbit, label="cycle")
    return ShootResult(
        kind="cycle", mu=0.5 * (rb.mu + rf.mu), orbit=loop,
        residual=abs(rb.mu - rf.mu), bracket=(min(rb.mu, rf.mu), max(rb.mu, rf.mu)),
        halves=(rb.halves[0], rf.halves[0]),
    )


def find_mu_pul(ctx: WaveContext, which: int, bracket=None) -> ShootResult:
    """Control value of the orbit homoclinic to (u_which, 0).

    which=1 needs the sub-region above the cycle speed, which=2 the one
    below it, or the two-zero region under the strongly singular viscosity.
    On the cycle locus the heteroclinic pair is returned instead of failing.
    """
    if which not in (1, 2):
        raise ValueError("which must be 1 or 2")
    region = ctx.region
    if region is RegionClass.D2:
        if which == 1:
            raise RegionError("no three-zero structure: a homoclinic to u1 is undefined here")
        if not ctx.mp.visc.condition_h:
            raise RegionError(
                "two-zero-region pulse needs the strongly singular viscosity law "
                "(otherwise the connection may leave the positive-headway strip)"
            )
        mu0 = -ctx.coeffs.fprime(0.0)
        mu, brk, res = _solve_scalar(_pulse_functional(ctx, 2), mu0, step0=1e-2,
                                     bracket=bracket)
    else:
        if bracket is None:
            rb = find_mu_b(ctx)
            rf = find_mu_f(ctx)
            if region is RegionClass.D1_3 or abs(rb.mu - rf.mu) < 1e-10:
                return _cycle_as_result(ctx, rb, rf)
            if which == 1 and not rf.mu < rb.mu:
                raise RegionError("homoclinic to u1 exists only above the cycle speed")
            if which == 2 and not rb.mu < rf.mu:
                raise RegionError("homoclinic to u2 exists only below the cycle speed")
            lo, hi = sorted((rb.mu, rf.mu))
            pad = 1e-9 * max(1.0, hi - lo)
            bracket = (lo + pad, hi - pad)
        g = _pulse_functional(ctx, which)
        mu, brk, res = _solve_scalar(g, 0.5 * (bracket[0] + bracket[1]), bracket=bracket)

    cmu = ctx.with_mu(mu)
    sysm = reduced_system(cmu)
    if which == 1:
        fwd = manifold_shoot(cmu, 1, +1, system=sysm)   # upper half
        bwd = manifold_shoot(cmu, 1, -1, system=sysm)   # lower half, backward
    else:
        fwd = manifold_shoot(cmu, 2, -1, system=sysm)   # lower half
        bwd = manifold_shoot(cmu, 2, +1, system=sysm)   # upper half, backward
    orbit = _assemble_loop(fwd, bwd)
    lands = [h.landing_u for h in (fwd, bwd) if h.landing_u is not None]
    resid = abs(lands[0] - lands[1]) if len(lands) == 2 else res
    return ShootResult(
        kind=f"pulse{which}", mu=mu, orbit=orbit, residual=resid, bracket=brk,
        halves=(fwd, bwd), landing=lands[0] if lands else None,
    )


# ---------------------------------------------------------------------------
# periodic orbits from the axis section
# ---------------------------------------------------------------------------

def _q_interval(ctx: WaveContext) -> tuple[float, float]:
    region = ctx.region
    if region in (RegionClass.D1_1, RegionClass.D1_3):
        return ctx.u1, ctx.u0
    if region in (RegionClass.D1_2, RegionClass.D2):
        return ctx.u0, ctx.u2
    return ctx.u_tilde1, ctx.u2  # unsplit: both sides admissible


def _half_from_section(ctx: WaveContext, sysm: PlanarSystem, q: float, sign: int,
                       want_orbit: bool = False):
    """(landing_u, |z| at landing, orbit, escape side) for the half of the
    loop through (q, 0) lying in {sign * w > 0}."""
    fq = sysm.nfun(q)
    tdir = +1 if (fq > 0) == (sign > 0) else -1
    events = [
        Event.w_zero(direction=-sign, name="return"),
        Event.u_floor(sysm.u_floor),
        Event.u_equals(3.0 * sysm.u2, direction=+1, name="u_escape"),
        Event.w_cap(sysm.w_cap),
    ]
    orb = integrate_system(sysm.rhs, PhaseState(q, 0.0), tdir, events,
                           z_max=max(Z_MAX_SECTION, 500.0 * sysm.z_scale),
                           dense=want_orbit)
    if orb.terminal_event == "return":
        return float(orb.u[-1]), abs(float(orb.z[-1])), orb, None
    if orb.terminal_event == "u_escape":
        side = "hi"
    elif orb.terminal_event == "u_floor":
        side = "lo"
    else:  # w blow-up or z_max: classify by where the run ended
        side = "lo" if orb.u[-1] < ctx.u0 else "hi"
    return None, None, orb, side


def find_mu_per(ctx: WaveContext, q: float, bracket=None, mu0=None) -> PeriodicResult:
    """Periodic orbit through (q, 0): match the first returns to the axis of
    the upper and lower halves; the period is the sum of their z-extents."""
    lo_q, hi_q = _q_interval(ctx)
    if not (lo_q < q < hi_q) or q == ctx.u0:
        raise RegionError(
            f"q={q} violates the admissible section interval ({lo_q:.6g}, {hi_q:.6g})")

    def g(mu):
        c = ctx.with_mu(mu)
        s = reduced_system(c)
        up, _, _, esc_u = _half_from_section(c, s, q, +1)
        if esc_u == "lo":
            return -math.inf
        if esc_u == "hi":
            return math.inf
        dn, _, _, esc_d = _half_from_section(c, s, q, -1)
        if esc_d == "lo":
            return math.inf
        if esc_d == "hi":
            return -math.inf
        return up - dn

    start = ctx.hopf_mu if mu0 is None else mu0
    mu, brk, _ = _solve_scalar(g, start, step0=1e-3, bracket=bracket)

    for m in (mu, brk[0], brk[1]):
        c = ctx.with_mu(m)
        s = reduced_system(c)
        up, zp, orb_up, e1 = _half_from_section(c, s, q, +1, want_orbit=True)
        dn, zm, orb_dn, e2 = _half_from_section(c, s, q, -1, want_orbit=True)
        if e1 is None and e2 is None:
            fwd, bwd = (orb_up, orb_dn) if orb_up.direction > 0 else (orb_dn, orb_up)
            loop = _assemble_loop(fwd, bwd)
            return PeriodicResult(
                q=q, mu_per=m, period=zp + zm, orbit=loop, residual=abs(up - dn),
                max_u=float(np.max(loop.u)), min_u=float(np.min(loop.u)),
            )
    raise SolveError("periodic orbit did not close at the converged control value")


def periodic_with_period(ctx: WaveContext, period: float, validate: bool = True) -> PeriodicResult:
    """Long-period orbit near the homoclinic, located by exact linear transit
    times through the saddle neighbourhood glued to the computed pulse.

    Section shooting cannot represent section offsets smaller than the
    floating-point spacing near the saddle; this extends the same family
    analytically in the offset, and cross-checks against direct shooting on
    the overlap range when validate=True.
    """
    region = ctx.region
    if region in (RegionClass.D1_2, RegionClass.D2, RegionClass.D1_UNSPLIT):
        which, side = 2, -1
    elif region is RegionClass.D1_1:
        which, side = 1, +1
    else:
        raise RegionError("period targeting needs a pulse-bearing sub-region")
    pr = find_mu_pul(ctx, which)
    if pr.kind == "cycle":
        raise RegionError("on the cycle locus the period-targeted family is ill-posed")
    cmu = ctx.with_mu(pr.mu)
    sysm = reduced_system(cmu)
    u_sad = sysm.u2 if which == 2 else sysm.u1
    lam_m, lam_p = sysm.eigen(u_sad)
    n_p, n_m = math.hypot(1.0, lam_p), math.hypot(1.0, lam_m)
    eps = sysm.eps
    t_outer = pr.halves[0].z_extent + pr.halves[1].z_extent
    gap = lam_p - lam_m

    def period_of(delta):
        xi0 = delta * n_p * abs(lam_m) / gap     # unstable coordinate of (q, 0)
        eta0 = delta * n_m * lam_p / gap         # stable coordinate
        return t_outer + math.log(eps / xi0) / lam_p + math.log(eps / eta0) / abs(lam_m)

    kappa = 1.0 / lam_p + 1.0 / abs(lam_m)
    delta = math.exp((period_of(1.0) - period) / kappa)
    if delta > 0.05 * (ctx.u2 - ctx.u_tilde1):
        raise SolveError("requested period is too short for the asymptotic regime; "
                         "use find_mu_per directly")
    q = u_sad + side * delta

    match_err = None
    if validate:
        errs = []
        for d in (1e-7, 1e-9, 1e-11):
            dd = d * (ctx.u2 - ctx.u_tilde1)
            direct = find_mu_per(ctx, u_sad + side * dd,
                                 bracket=(pr.mu - 1e-6, pr.mu + 1e-6))
            errs.append(abs(direct.period - period_of(dd)))
        match_err = max(errs)

    return PeriodicResult(
        q=q, mu_per=pr.mu, period=period_of(delta), orbit=pr.orbit,
        residual=pr.residual, method="saddle_asymptotic",
        max_u=float(np.max(pr.orbit.u)), min_u=float(np.min(pr.orbit.u)),
        matching_error=match_err, saddle_offset=side * delta,
    )


# ---------------------------------------------------------------------------
# necessary conditions
# ---------------------------------------------------------------------------

def orbit_flux_integral(ctx: WaveContext, orbit: Orbit) -> tuple[float, float]:
    """(integral of g1 f dz, integral of g1 |f| dz) over the stored orbit."""
    from scipy.integrate import simpson

    co = ctx.coeffs
    vals = np.array([co.g1(u) * co.f(u) for u in orbit.u])
    return float(simpson(vals, x=orbit.z)), float(np.trapezoid(np.abs(vals), orbit.z))


def verify_nonexistence(mp: ModelParams, K: float, c: float,
                        ctx: WaveContext | None = None,
                        orbit: Orbit | None = None,
                        n_samples: int = 2000) -> NonexistenceReport:
    """Confirm by sampling the sign structure of f that rules out bounded
    non-constant orbits outside the admissible regions, or evaluate the
    closed-orbit flux identity on a computed orbit."""
    region = classify(mp, K, c)
    if region is not RegionClass.OUTSIDE:
        rep = NonexistenceReport(K=K, c=c, region=region.value,
                                 claim="orbits may exist; flux identity applies",
                                 verified=True)
        if orbit is not None and ctx is not None:
            total, scale = orbit_flux_integral(ctx, orbit)
            rep.flux_integral, rep.flux_scale = total, scale
            rep.verified = abs(total) < 1e-6 * max(scale, 1e-300)
            rep.detail = f"|flux|/scale = {abs(total) / max(scale, 1e-300):.3e}"
        return rep

    if K == 0:
        return NonexistenceReport(K=K, c=c, region="outside",
                                  claim="K=0 carries no nonconstant profile", verified=True)

    cc = critical_constants(mp)
    us = np.linspace(1e-6, 10 * mp.ov.u_c, n_samples)
    curve = mp.curve
    fvals = (K * us - curve.value(us) - c) / K

    def in_single_sign_piece():
        if K < 0 and c >= cc.c0:
            return True
        if 0 < K <= cc.K1 and c <= critical_speeds(mp, K).c_m:
            return True
        if K > cc.K1 and c <= cc.c0:
            return True
        return False

    if in_single_sign_piece():
        ok = bool(np.all(fvals >= -1e-12))
        return NonexistenceReport(
            K=K, c=c, region="D3",
            claim="f >= 0 on u > 0 (flux identity unsatisfiable)",
            verified=ok, detail=f"min f = {fvals.min():.3e}",
        )
    signs = np.sign(fvals[np.abs(fvals) > 1e-14])
    ok = bool(np.all(np.diff(signs) >= 0))
    return NonexistenceReport(
        K=K, c=c, region="D4",
        claim="f changes sign once, - to + (bounded orbits excluded at an extremum)",
        verified=ok, detail=f"sign pattern monotone: {ok}",
    )
