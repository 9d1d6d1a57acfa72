"""Branch tracing across parameters, the Hopf locus, periodic families, and
validation by homotopy from the cubic system with exact connecting orbits."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import (
    ModelParams,
    RegionClass,
    WaveContext,
    critical_speeds,
    make_context,
    paper_params,
)
from .phase import PlanarSystem, manifold_shoot, reduced_system
from .solve import (
    RegionError,
    ShootResult,
    SolveError,
    find_c_star,
    find_mu_b,
    find_mu_f,
    find_mu_per,
    find_mu_pul,
    match_het_mu,
    match_pulse_mu,
)

__all__ = [
    "Branch",
    "BranchPoint",
    "trace_in_c",
    "trace_in_K",
    "periodic_family",
    "acn_exact",
    "acn_mu_het",
    "homotopy_system",
    "homotopy_trace",
    "write_branch_csv",
]

BRANCH_KINDS = ("back", "front", "pulse1", "pulse2", "hopf_locus", "periodic_family", "homotopy")


@dataclass
class BranchPoint:
    K: float
    c: float
    mu: float
    u1: float | None = None
    u0: float | None = None
    u2: float | None = None
    diameter: float | None = None
    period: float | None = None
    max_u: float | None = None
    q: float | None = None
    phi: float | None = None


@dataclass
class Branch:
    kind: str
    points: list[BranchPoint] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def column(self, name):
        return np.array([getattr(p, name) if getattr(p, name) is not None else np.nan
                         for p in self.points])

    def __len__(self):
        return len(self.points)


def write_branch_csv(branches: list[Branch], path) -> None:
    """Fixed-schema CSV; fields that do not apply stay empty."""
    def fmt(v):
        return "" if v is None else f"{v:.17g}"

    with open(path, "w") as fh:
        fh.write("kind,K,c,mu,u1,u0,u2,diameter,period,max_u\n")
        for br in branches:
            for p in br.points:
                fh.write(",".join([br.kind, fmt(p.K), fmt(p.c), fmt(p.mu), fmt(p.u1),
                                   fmt(p.u0), fmt(p.u2), fmt(p.diameter), fmt(p.period),
                                   fmt(p.max_u)]) + "\n")


def _point_from_result(ctx: WaveContext, r: ShootResult) -> BranchPoint:
    return BranchPoint(
        K=ctx.K, c=ctx.c, mu=r.mu, u1=ctx.u1, u0=ctx.u0, u2=ctx.u2,
        diameter=float(np.max(r.orbit.u) - np.min(r.orbit.u)),
        max_u=float(np.max(r.orbit.u)),
    )


def trace_in_c(mp: ModelParams, K: float, kind: str, c_range=None, n_steps: int = 200,
               c_star: float | None = None, rtol: float = 1e-8) -> Branch:
    """March the requested solution family over c at fixed K, warm-starting
    each control-parameter bracket from the previous point."""
    cs = critical_speeds(mp, K)
    margin = 2e-3 * (cs.c_M - cs.c1)
    branch = Branch(kind=kind)

    if kind == "hopf_locus":
        lo, hi = c_range if c_range else (cs.c1 + margin, cs.c_M - margin)
        for c in np.linspace(lo, hi, n_steps):
            ctx = make_context(mp, K, float(c))
            branch.points.append(BranchPoint(K=K, c=float(c), mu=ctx.hopf_mu,
                                             u1=ctx.u1, u0=ctx.u0, u2=ctx.u2))
        return branch

    if kind in ("pulse1", "pulse2") and c_star is None:
        c_star = find_c_star(mp, K).c_star

    if c_range is None:
        if kind in ("back", "front"):
            c_range = (cs.c1 + margin, cs.c_M - margin)
        elif kind == "pulse1":
            c_range = (c_star + margin, cs.c_M - margin)
        else:
            c_range = (cs.c1 + margin, c_star - margin)
    lo, hi = c_range

    # march pulse branches away from the cycle locus so the warm start is
    # seeded in the best-conditioned corner
    grid = np.linspace(lo, hi, n_steps)
    if kind == "pulse2":
        grid = grid[::-1]

    atol = 1e-2 * rtol
    warm = None
    for c in grid:
        try:
            ctx = make_context(mp, K, float(c), c_star=c_star)
            if kind == "back":
                r = find_mu_b(ctx, bracket=warm, rtol=rtol, atol=atol)
            elif kind == "front":
                r = find_mu_f(ctx, bracket=warm, rtol=rtol, atol=atol)
            elif kind == "pulse1":
                r = find_mu_pul(ctx, 1, bracket=warm)
            elif kind == "pulse2":
                r = find_mu_pul(ctx, 2, bracket=warm)
            else:
                raise ValueError(f"unknown branch kind {kind!r}")
        except (RegionError, SolveError) as exc:
            branch.notes.append(f"truncated at c={c:.8g}: {exc}")
            break
        halfw = max(1e-5, 0.05 * abs(r.mu))
        warm = (r.mu - halfw, r.mu + halfw)
        branch.points.append(_point_from_result(ctx, r))
    branch.points.sort(key=lambda p: p.c)
    return branch


def trace_in_K(mp: ModelParams, kind: str, K_range, n_steps: int = 30,
               rtol: float = 1e-8) -> Branch:
    """Locus in the (K, c) plane where the family's control value equals
    2*tau*K - 1; root-solved in c for each K, warm-started from neighbours."""
    from scipy.optimize import brentq

    branch = Branch(kind=kind)
    atol = 1e-2 * rtol
    want_pulse = kind in ("pulse1", "pulse2")
    for K in np.linspace(K_range[0], K_range[1], n_steps):
        K = float(K)
        target = 2.0 * mp.tau * K - 1.0
        try:
            cs = critical_speeds(mp, K)
            c_star = find_c_star(mp, K).c_star if want_pulse else None
            if kind == "back" or kind == "front":
                lo, hi = cs.c1 + 2e-3 * (cs.c_M - cs.c1), cs.c_M - 2e-3 * (cs.c_M - cs.c1)
            elif kind == "pulse1":
                lo, hi = c_star + 2e-4 * (cs.c_M - c_star), cs.c_M - 2e-3 * (cs.c_M - cs.c1)
            else:
                lo, hi = cs.c1 + 2e-3 * (cs.c_M - cs.c1), c_star - 2e-4 * (c_star - cs.c1)

            warm = {}

            def mu_of(c):
                ctx = make_context(mp, K, float(c), c_star=c_star)
                if kind == "back":
                    r = find_mu_b(ctx, bracket=warm.get("w"), rtol=rtol, atol=atol)
                elif kind == "front":
                    r = find_mu_f(ctx, bracket=warm.get("w"), rtol=rtol, atol=atol)
                else:
                    r = find_mu_pul(ctx, 1 if kind == "pulse1" else 2, bracket=warm.get("w"))
                halfw = max(1e-5, 0.05 * abs(r.mu))
                warm["w"] = (r.mu - halfw, r.mu + halfw)
                return r.mu

            glo, ghi = mu_of(lo) - target, mu_of(hi) - target
            if glo == 0:
                c_sol = lo
            elif ghi == 0:
                c_sol = hi
            elif (glo < 0) == (ghi < 0):
                branch.notes.append(f"K={K:.8g}: no root in the admissible c interval")
                continue
            else:
                c_sol = brentq(lambda c: mu_of(c) - target, lo, hi, xtol=1e-9)
            ctx = make_context(mp, K, c_sol, c_star=c_star)
            branch.points.append(BranchPoint(K=K, c=c_sol, mu=target,
                                             u1=ctx.u1, u0=ctx.u0, u2=ctx.u2))
        except (RegionError, SolveError, ValueError) as exc:
            branch.notes.append(f"K={K:.8g}: {exc}")
            continue
    return branch


def periodic_family(mp: ModelParams, K: float, c: float, q_grid=None,
                    n_steps: int = 30, c_star: float | None = None) -> Branch:
    """Sweep the section point q from the centre equilibrium toward the
    bounding saddle, recording (q, mu_per, period, max u)."""
    ctx = make_context(mp, K, c, c_star=c_star)
    if q_grid is None:
        # offsets from the centre grow logarithmically toward the bounding saddle
        if ctx.region in (RegionClass.D1_1, RegionClass.D1_3):
            span = ctx.u0 - ctx.u1
            q_grid = ctx.u0 - np.logspace(math.log10(1e-3 * span),
                                          math.log10(0.999 * span), n_steps)
        else:
            span = ctx.u2 - ctx.u0
            q_grid = ctx.u0 + np.logspace(math.log10(1e-3 * span),
                                          math.log10(0.999 * span), n_steps)
    branch = Branch(kind="periodic_family")
    warm = None
    for q in q_grid:
        try:
            pr = find_mu_per(ctx, float(q), bracket=warm)
        except (RegionError, SolveError) as exc:
            branch.notes.append(f"stopped at q={q:.8g}: {exc}")
            break
        halfw = max(1e-6, 0.1 * abs(pr.mu_per - ctx.hopf_mu))
        warm = (pr.mu_per - halfw, pr.mu_per + halfw)
        branch.points.append(BranchPoint(
            K=K, c=c, mu=pr.mu_per, u1=ctx.u1, u0=ctx.u0, u2=ctx.u2,
            diameter=pr.max_u - pr.min_u, period=pr.period, max_u=pr.max_u, q=float(q),
        ))
    return branch


# ---------------------------------------------------------------------------
# cubic-system exact solutions and the homotopy to the reduced system
# ---------------------------------------------------------------------------

def acn_exact(a: float, z, kind: str):
    """Exact connecting orbits of u'' = -mu u' + u(u-a)(u-1).

    kind='het': the decreasing connection from 1 to 0 at mu = sqrt(2)(1/2-a),
    for a in (0,1). kind='hom': the orbit homoclinic to 0 at mu = 0, for a in
    (0, 1/2). Returns (u, w) evaluated at z."""
    z = np.asarray(z, dtype=float)
    if kind == "het":
        if not 0 < a < 1:
            raise ValueError("het family needs a in (0, 1)")
        e = np.exp(z / math.sqrt(2.0))
        u = 1.0 / (1.0 + e)
        w = -u * (1.0 - u) / math.sqrt(2.0)
    elif kind == "hom":
        if not 0 < a < 0.5:
            raise ValueError("hom family needs a in (0, 1/2)")
        r = math.sqrt(2.0 * (2.0 - a) * (1.0 - 2.0 * a))
        den = 2.0 * (1.0 + a) + r * np.cosh(math.sqrt(a) * z)
        u = 6.0 * a / den
        w = -6.0 * a * r * math.sqrt(a) * np.sinh(math.sqrt(a) * z) / den**2
    else:
        raise ValueError("kind must be 'het' or 'hom'")
    if z.ndim == 0:
        return float(u), float(w)
    return u, w


def acn_mu_het(a: float) -> float:
    """Drift value of the exact decreasing connection."""
    return math.sqrt(2.0) * (0.5 - a)


def homotopy_system(ctx: WaveContext, phi: float, mu: float) -> PlanarSystem:
    """Convex blend between the cubic system sharing the zeros (u1, u0, u2)
    and the reduced system: w' = (1-phi)(-mu w + f_c(u)) + phi (g1 f + g2 h w)."""
    if ctx.u1 is None:
        raise RegionError("homotopy needs the three-zero region")
    base = reduced_system(ctx.with_mu(mu))
    u1, u0, u2 = ctx.u1, ctx.u0, ctx.u2

    def fc(u):
        return (u - u1) * (u - u0) * (u - u2)

    def fc_prime(u):
        return (u - u0) * (u - u2) + (u - u1) * (u - u2) + (u - u1) * (u - u0)

    base_n, base_d, base_np = base.nfun, base.dfun, base.nprime_eq

    def nfun(u):
        return (1.0 - phi) * fc(u) + phi * base_n(u)

    def dfun(u):
        return -(1.0 - phi) * mu + phi * base_d(u)

    def nprime_eq(u):
        return (1.0 - phi) * fc_prime(u) + phi * base_np(u)

    lam_mags = []
    for ueq in (u1, u2):
        d = dfun(ueq)
        disc = d * d + 4.0 * nprime_eq(ueq)
        if disc > 0:
            lam_mags += [abs(0.5 * (d - math.sqrt(disc))), abs(0.5 * (d + math.sqrt(disc)))]
    return PlanarSystem(
        nfun=nfun, dfun=dfun, nprime_eq=nprime_eq,
        u1=u1, u0=u0, u2=u2, mu=mu,
        u_floor=base.u_floor,
        w_cap=1e3 * (max(lam_mags) if lam_mags else 1.0) * (u2 - u1),
        eps=1e-8 * (u2 - u1),
    )


def rescaled_cubic_mu(ctx: WaveContext, kind: str) -> float:
    """Closed-form control value of the cubic system at the context's zeros.

    The affine map u -> u1 + (u2-u1)*s carries the unit cubic onto f_c, and
    the drift rescales by (u2-u1)."""
    span = ctx.u2 - ctx.u1
    a_tilde = (ctx.u0 - ctx.u1) / span
    if kind == "back":
        return -span * acn_mu_het(a_tilde)
    if kind == "front":
        return span * acn_mu_het(a_tilde)
    if kind == "hom":
        return 0.0
    raise ValueError("kind must be 'back', 'front' or 'hom'")


def acn_validation(a_values=(0.1, 0.25, 0.4)) -> dict:
    """Check the integrator and shooting machinery against the unit cubic
    system's exact connections: decreasing at sqrt(2)(1/2-a), increasing at
    its negative, homoclinic at zero."""
    from .phase import PhaseState, PlanarSystem, integrate_system
    from .solve import match_het_mu, match_pulse_mu

    def unit_cubic(a, mu):
        def nfun(u):
            return u * (u - a) * (u - 1.0)

        def nprime(u):
            return (u - a) * (u - 1.0) + u * (u - 1.0) + u * (u - a)

        return PlanarSystem(nfun=nfun, dfun=lambda u: -mu, nprime_eq=nprime,
                            u1=0.0, u0=a, u2=1.0, mu=mu,
                            u_floor=-0.75, w_cap=10.0, eps=1e-8)

    def carrier(a):
        # only the zero structure matters; model params are a placeholder
        return WaveContext(mp=paper_params(), K=1.0, c=0.0, mu=0.0,
                           u1=0.0, u0=a, u2=1.0, region=RegionClass.D1_UNSPLIT)

    results = []
    worst_int = worst_mu = 0.0
    for a in a_values:
        mu_het = acn_mu_het(a)
        sysf = lambda m, _a=a: unit_cubic(_a, m)
        ctx = carrier(a)
        mu_b, _, _ = match_het_mu(ctx, sysf, +1, mu0=-mu_het, step0=0.05)
        mu_f, _, _ = match_het_mu(ctx, sysf, -1, mu0=mu_het, step0=0.05)
        mu_h, _, _ = match_pulse_mu(ctx, sysf, 1, mu0=0.05, step0=0.05)

        sysm = unit_cubic(a, mu_het)
        u0, w0 = acn_exact(a, -10.0, "het")
        orb = integrate_system(sysm.rhs, PhaseState(u0, w0), 1, events=(),
                               z_max=20.0, rtol=1e-12, atol=1e-14)
        zs = np.linspace(-10.0, 10.0, 801)
        ue, _ = acn_exact(a, zs, "het")
        err = max(abs(orb.state(z + 10.0).u - uu) for z, uu in zip(zs, ue))

        worst_int = max(worst_int, err)
        worst_mu = max(worst_mu, abs(mu_f - mu_het), abs(mu_b + mu_het), abs(mu_h))
        results.append({"a": a, "integration_sup_error": err,
                        "mu_front": mu_f, "mu_front_exact": mu_het,
                        "mu_back": mu_b, "mu_back_exact": -mu_het,
                        "mu_hom": mu_h, "mu_hom_exact": 0.0})
    return {"results": results, "max_integration_error": worst_int,
            "max_mu_error": worst_mu,
            "passed": worst_int < 1e-6 and worst_mu < 1e-6}


def paper_params_cached():
    from .model import paper_params
    return paper_params()


def homotopy_trace(mp: ModelParams, ctx: WaveContext, kind: str,
                   phi_steps: int = 21) -> Branch:
    """March the homotopy parameter from the cubic system (exact seeds) to
    the reduced system, re-solving the shooting problem at every step."""
    if kind not in ("back", "front", "hom"):
        raise ValueError("kind must be 'back', 'front' or 'hom'")
    branch = Branch(kind="homotopy")
    mu = rescaled_cubic_mu(ctx, kind)
    phis = np.linspace(0.0, 1.0, phi_steps)
    i = 0
    bracket = None
    while i < len(phis):
        phi = float(phis[i])

        def sysf(m, _phi=phi):
            return homotopy_system(ctx, _phi, m)

        try:
            if kind == "hom":
                mu_new, brk, res = match_pulse_mu(ctx, sysf, 1, mu0=mu,
                                                  bracket=bracket, step0=1e-3)
            else:
                sign = +1 if kind == "back" else -1
                mu_new, brk, res = match_het_mu(ctx, sysf, sign, mu0=mu,
                                                bracket=bracket, step0=1e-3)
        except SolveError:
            # adaptive refinement of the phi step
            if i == 0:
                raise
            extra = 0.5 * (phis[i - 1] + phis[i])
            if phis[i] - phis[i - 1] < 1e-4:
                branch.notes.append(f"truncated at phi={phi:.6g}")
                break
            phis = np.insert(phis, i, extra)
            continue
        mu = mu_new
        halfw = max(1e-6, 0.1 * abs(mu))
        bracket = (mu - halfw, mu + halfw)
        branch.points.append(BranchPoint(K=ctx.K, c=ctx.c, mu=mu, u1=ctx.u1,
                                         u0=ctx.u0, u2=ctx.u2, phi=phi))
        i += 1
    return branch
