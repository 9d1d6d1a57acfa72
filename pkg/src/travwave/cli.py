"""Command-line front end: solves, branch diagrams, stability maps, direct
simulations, and figure reproduction with machine-readable outputs."""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import continuation as cont
from . import report, simulate, stability
from .model import ModelError, ModelParams, classify, critical_constants, critical_speeds, \
    make_context, paper_params, zeros_of_f
from .phase import PhaseError, RTOL, ATOL
from .simulate import MicroConfig, PdeConfig, SimulationError
from .solve import (
    MU_BRACKET_TOL,
    RegionError,
    SolveError,
    find_c_star,
    find_mu_b,
    find_mu_f,
    find_mu_per,
    find_mu_pul,
    periodic_with_period,
    verify_nonexistence,
)

__all__ = ["main"]


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("TRAVWAVE_THREADS", "1")))
    except ValueError:
        return 1


def _pmap(fn, jobs):
    """Ordered map over independent jobs, parallel when TRAVWAVE_THREADS > 1."""
    n = _threads()
    if n <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=min(n, len(jobs))) as ex:
        return list(ex.map(fn, jobs))


def _fmt(x) -> str:
    return f"{x:.17g}"


def _load_model(args) -> ModelParams:
    if args.config:
        return ModelParams.from_json(args.config)
    return paper_params()


def _write_json(path: Path, payload: dict) -> Path:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _manifest(out: Path, command: str, mp: ModelParams, outputs: list[Path],
              t0: float, extra: dict | None = None) -> Path:
    for p in outputs:
        if not p.exists() or p.stat().st_size == 0:
            raise SolveError(f"declared output {p} is missing or empty")
    payload = {
        "command": command,
        "config_hash": hashlib.sha256(mp.to_json().encode()).hexdigest(),
        "model_params": json.loads(mp.to_json()),
        "outputs": [{"path": str(p), "bytes": p.stat().st_size} for p in outputs],
        "wall_time_s": time.time() - t0,
        "tolerances": {"rtol": RTOL, "atol": ATOL, "mu_bracket_tol": MU_BRACKET_TOL},
        "threads": _threads(),
    }
    if extra:
        payload.update(extra)
    return _write_json(out / f"{command.replace(' ', '_')}_manifest.json", payload)


# ---------------------------------------------------------------------------
# command handlers (each returns (outputs, checks_ok, extra_manifest_fields))
# ---------------------------------------------------------------------------

def cmd_regions(mp, args, out: Path):
    cc = critical_constants(mp)
    payload = {"K0": cc.K0, "K_M": cc.K_M, "K1": cc.K1, "U_M": cc.U_M, "c0": cc.c0}
    if args.K is not None:
        payload["K"] = args.K
        try:
            cs = critical_speeds(mp, args.K)
            payload.update({"u_M": cs.u_M, "u_m": cs.u_m, "c_M": cs.c_M,
                            "c_m": cs.c_m, "c1": cs.c1})
        except ModelError as exc:
            payload["speeds_error"] = str(exc)
        if args.c is not None:
            region = classify(mp, args.K, args.c, args.c_star)
            payload["c"] = args.c
            payload["region"] = region.value
            rep = verify_nonexistence(mp, args.K, args.c)
            payload["nonexistence"] = {"region": rep.region, "claim": rep.claim,
                                       "verified": rep.verified}
            if region.value != "outside":
                u1, u0, u2 = zeros_of_f(mp, args.K, args.c)
                payload["zeros"] = {"u1": u1, "u0": u0, "u2": u2}
    p = _write_json(out / "regions.json", payload)
    return [p], True, {}


def cmd_shoot(mp, args, out: Path):
    if args.kind not in ("back", "front"):
        raise ModelError("--kind must be back or front")
    ctx = make_context(mp, args.K, args.c)
    r = find_mu_b(ctx) if args.kind == "back" else find_mu_f(ctx)
    orbit_file = out / f"orbit_{args.kind}.csv"
    r.orbit.to_csv(orbit_file)
    payload = {"kind": args.kind, "K": args.K, "c": args.c, "mu": r.mu,
               "residual": r.residual, "bracket": list(r.bracket),
               "orbit_file": str(orbit_file)}
    p = _write_json(out / f"shoot_{args.kind}.json", payload)
    return [p, orbit_file], True, {"mu": r.mu}


def cmd_cycle(mp, args, out: Path):
    cyc = find_c_star(mp, args.K)
    fb = out / "cycle_back_orbit.csv"
    ff = out / "cycle_front_orbit.csv"
    cyc.back.orbit.to_csv(fb)
    cyc.front.orbit.to_csv(ff)
    ctx = make_context(mp, args.K, cyc.c_star, cyc.mu_star)
    e1, e2 = ctx.eigen(ctx.u1), ctx.eigen(ctx.u2)
    payload = {
        "kind": "cycle", "K": args.K, "c_star": cyc.c_star, "mu_star": cyc.mu_star,
        "mu_b": cyc.mu_b, "mu_f": cyc.mu_f,
        "u1": ctx.u1, "u0": ctx.u0, "u2": ctx.u2,
        "eigen_u1": [e1.lam_minus.real, e1.lam_plus.real],
        "eigen_u2": [e2.lam_minus.real, e2.lam_plus.real],
        "saddle_quantities": list(cyc.saddle_quantities),
        "orbit_files": [str(fb), str(ff)],
    }
    p = _write_json(out / "cycle.json", payload)
    ok = abs(cyc.mu_b - cyc.mu_f) < 1e-8
    return [p, fb, ff], ok, {"c_star": cyc.c_star, "mu_star": cyc.mu_star}


def cmd_pulse(mp, args, out: Path):
    ctx = make_context(mp, args.K, args.c, c_star=args.c_star)
    r = find_mu_pul(ctx, args.which)
    orbit_file = out / f"orbit_{r.kind}.csv"
    r.orbit.to_csv(orbit_file)
    payload = {"kind": r.kind, "K": args.K, "c": args.c, "mu": r.mu,
               "residual": r.residual, "bracket": list(r.bracket),
               "orbit_file": str(orbit_file)}
    p = _write_json(out / f"pulse{args.which}.json", payload)
    return [p, orbit_file], True, {"mu": r.mu}


def cmd_periodic(mp, args, out: Path):
    ctx = make_context(mp, args.K, args.c, c_star=args.c_star)
    if args.period is not None:
        r = periodic_with_period(ctx, args.period)
    else:
        if args.q is None:
            raise ModelError("periodic needs --q or --period")
        r = find_mu_per(ctx, args.q)
    orbit_file = out / "orbit_periodic.csv"
    r.orbit.to_csv(orbit_file)
    payload = {"kind": "periodic", "K": args.K, "c": args.c, "q": r.q,
               "mu": r.mu_per, "period": r.period, "residual": r.residual,
               "method": r.method, "max_u": r.max_u, "min_u": r.min_u,
               "saddle_offset": r.saddle_offset,
               "orbit_file": str(orbit_file)}
    p = _write_json(out / "periodic.json", payload)
    return [p, orbit_file], True, {"mu": r.mu_per, "period": r.period}


def _branch_job(job):
    mp_json, K, kind, n_steps, c_star = job
    mp = ModelParams.from_dict(json.loads(mp_json))
    return cont.trace_in_c(mp, K, kind, n_steps=n_steps, c_star=c_star)


def cmd_branch(mp, args, out: Path):
    kinds = [args.kind] if args.kind else ["back", "front", "pulse1", "pulse2", "hopf_locus"]
    c_star = None
    if any(k.startswith("pulse") for k in kinds):
        c_star = find_c_star(mp, args.K).c_star
    jobs = [(mp.to_json(), args.K, k, args.n_steps, c_star) for k in kinds]
    branches = _pmap(_branch_job, jobs)
    csv_path = out / f"branches_K{args.K:g}.csv"
    cont.write_branch_csv(branches, csv_path)
    fig_path = report.plot_c_mu_diagram(branches, args.K, out / f"branches_K{args.K:g}",
                                        svg=bool(args.svg))
    ok = all(len(b) > 0 for b in branches)
    return [csv_path, fig_path], ok, {"kinds": kinds, "points": [len(b) for b in branches]}


def cmd_stability(mp, args, out: Path):
    ks = np.linspace(args.k_min, args.k_max, args.n_k)
    f1 = out / "dispersion.csv"
    stability.dispersion_csv(mp, args.rho, ks, f1)
    rhos = np.linspace(args.rho_min, args.rho_max, args.n_rho)
    f2 = out / "stability_map.csv"
    stability.stability_map_csv(mp, rhos, f2)
    return [f1, f2], True, {}


def cmd_simulate_pde(mp, args, out: Path):
    cfg = PdeConfig.from_json(args.sim_config) if args.sim_config else PdeConfig()
    snaps = simulate.pde_run(mp, cfg)
    f = out / "pde_snapshots.csv"
    simulate.pde_snapshots_csv(snaps, f)
    return [f], True, {"snapshots": len(snaps), "t_end": cfg.t_end}


def cmd_simulate_micro(mp, args, out: Path):
    cfg = MicroConfig.from_json(args.sim_config) if args.sim_config else MicroConfig()
    snaps = simulate.micro_run(mp, cfg)
    f = out / "micro_snapshots.csv"
    simulate.micro_snapshots_csv(snaps, f)
    return [f], True, {"snapshots": len(snaps), "t_end": cfg.t_end}


def cmd_validate_acn(mp, args, out: Path):
    """Check the integrator and the shooting pipeline against the cubic
    system's exact connecting orbits."""
    from .phase import integrate_system, PhaseState
    results = []
    worst_int = 0.0
    worst_mu = 0.0
    for a in (0.1, 0.25, 0.4):
        mu_het = cont.acn_mu_het(a)

        def rhs(u, w, _a=a, _mu=mu_het):
            return w, -_mu * w + u * (u - _a) * (u - 1.0)

        u0, w0 = cont.acn_exact(a, -10.0, "het")
        orb = integrate_system(rhs, PhaseState(u0, w0), 1, events=(), z_max=20.0,
                               rtol=1e-12, atol=1e-14)
        zs = np.linspace(-10.0, 10.0, 801)
        ue, we = cont.acn_exact(a, zs, "het")
        err = max(abs(orb.state(z).u - uu) for z, uu in zip(zs + 10.0, ue))
        worst_int = max(worst_int, err)

        mu_front, mu_back, mu_hom = _acn_solved_mus(a)
        results.append({
            "a": a,
            "integration_sup_error": err,
            "mu_front": mu_front, "mu_front_exact": mu_het,
            "mu_back": mu_back, "mu_back_exact": -mu_het,
            "mu_hom": mu_hom, "mu_hom_exact": 0.0,
        })
        worst_mu = max(worst_mu, abs(mu_front - mu_het), abs(mu_back + mu_het),
                       abs(mu_hom))
    ok = worst_int < 1e-6 and worst_mu < 1e-6
    payload = {"results": results, "max_integration_error": worst_int,
               "max_mu_error": worst_mu, "passed": ok}
    p = _write_json(out / "validate_acn.json", payload)
    print(f"validate-acn: max integration error {worst_int:.3e}, "
          f"max mu error {worst_mu:.3e} -> {'PASS' if ok else 'FAIL'}")
    return [p], ok, {"max_mu_error": worst_mu}


def _acn_solved_mus(a: float):
    """Solve the three connecting orbits of the unit cubic by the same
    machinery used for the reduced system."""
    from .phase import PlanarSystem
    from .solve import match_het_mu, match_pulse_mu
    from .model import RegionClass, WaveContext

    ctx = _unit_cubic_context(a)

    def sysf(mu, _a=a):
        return _unit_cubic_system(_a, mu)

    mu_b, _, _ = match_het_mu(ctx, sysf, +1, mu0=-math.sqrt(2) * (0.5 - a), step0=0.05)
    mu_f, _, _ = match_het_mu(ctx, sysf, -1, mu0=math.sqrt(2) * (0.5 - a), step0=0.05)
    mu_h, _, _ = match_pulse_mu(ctx, sysf, 1, mu0=0.05, step0=0.05)
    return mu_f, mu_b, mu_h


def _unit_cubic_system(a: float, mu: float):
    from .phase import PlanarSystem

    def nfun(u):
        return u * (u - a) * (u - 1.0)

    def nprime(u):
        return (u - a) * (u - 1.0) + u * (u - 1.0) + u * (u - a)

    return PlanarSystem(nfun=nfun, dfun=lambda u: -mu, nprime_eq=nprime,
                        u1=0.0, u0=a, u2=1.0, mu=mu,
                        u_floor=-0.75, w_cap=10.0, eps=1e-8)


def _unit_cubic_context(a: float):
    """A stand-in context whose zero structure matches the unit cubic."""
    from .model import RegionClass, WaveContext
    mp = paper_params()
    return WaveContext(mp=mp, K=1.0, c=0.0, mu=0.0, u1=0.0, u0=a, u2=1.0,
                       region=RegionClass.D1_UNSPLIT)


# ---------------------------------------------------------------------------
# figure reproduction
# ---------------------------------------------------------------------------

def cmd_reproduce(mp, args, out: Path):
    target = args.target
    if target == "fig1":
        return _reproduce_fig1(mp, args, out)
    if target == "fig2":
        return _reproduce_fig2(mp, args, out)
    if target == "fig3":
        return _reproduce_fig3(mp, args, out)
    if target == "fig4":
        return _reproduce_fig4(mp, args, out)
    raise ModelError(f"unknown reproduction target {target!r}")


def _reproduce_fig1(mp, args, out: Path):
    from .model import ViscosityKind, ViscosityLaw

    cfg = PdeConfig(t_end=1000.0, snapshot_every=2.0)
    snaps = simulate.pde_run(mp, cfg)
    f_pde = out / "fig1_pde.csv"
    keep = [s for s in snaps if abs(s.t - 20) < 1e-9 or abs(s.t - 880) < 1e-9
            or abs(s.t - 1000) < 1e-9]
    simulate.pde_snapshots_csv(keep, f_pde)

    mp_const = ModelParams(ov=mp.ov, tau=mp.tau,
                           visc=ViscosityKind(ViscosityLaw.CONSTANT, 1.0 / 7500.0))
    snaps_const = simulate.pde_run(mp_const, PdeConfig(t_end=880.0, snapshot_every=20.0))

    micro = simulate.micro_run(mp, MicroConfig(t_end=880.0, snapshot_every=20.0))
    f_micro = out / "fig1_micro.csv"
    simulate.micro_snapshots_csv([m for m in micro if abs(m.t - 20) < 1e-9
                                  or abs(m.t - 880) < 1e-9], f_micro)

    late = [s for s in snaps if s.t >= 800.0]
    c_est = simulate.estimate_wave_speed(late)
    last = snaps[-1]
    x_probe = float(last.x[(np.argmin(last.v) + last.x.size // 2) % last.x.size])
    K_est = simulate.estimate_K(last, x_probe, c_est)
    mass_drift = max(abs(s.mass - snaps[0].mass) for s in snaps) / snaps[0].mass
    n_pulses = simulate.count_pulses(min(snaps, key=lambda s: abs(s.t - 880.0)))

    checks = {
        "single_pulse_at_880": n_pulses == 1,
        "speed_within_5pct": abs(c_est - 0.0131) < 0.05 * 0.0131,
        "K_within_1pct": abs(K_est - 1.11672) < 0.01 * 1.11672,
        "mass_conserved_1e8": mass_drift < 1e-8,
    }
    payload = {"c_estimate": c_est, "K_estimate": K_est, "pulses_at_880": n_pulses,
               "mass_drift": mass_drift, "checks": checks}
    f_sum = _write_json(out / "fig1_summary.json", payload)
    fig = report.plot_snapshots(snaps, (20.0, 880.0), out / "fig1", svg=bool(args.svg),
                                micro_snaps=micro, extra_pde=snaps_const)
    for name, okv in checks.items():
        print(f"fig1 check {name}: {'PASS' if okv else 'FAIL'}")
    return [f_pde, f_micro, f_sum, fig], all(checks.values()), payload


def _reproduce_fig2(mp, args, out: Path):
    K = args.K if args.K is not None else 1.25
    cyc = find_c_star(mp, K)
    jobs = [(mp.to_json(), K, k, args.n_steps, cyc.c_star)
            for k in ("back", "front", "pulse1", "pulse2", "hopf_locus")]
    branches = _pmap(_branch_job, jobs)
    csv_path = out / "fig2_branches.csv"
    cont.write_branch_csv(branches, csv_path)
    orbits = {"cycle (increasing)": (cyc.back.orbit.u, cyc.back.orbit.w),
              "cycle (decreasing)": (cyc.front.orbit.u, cyc.front.orbit.w)}
    fig = report.plot_c_mu_diagram(branches, K, out / "fig2", svg=bool(args.svg),
                                   orbits=orbits)
    checks = {"all_branches_traced": all(len(b) > 0 for b in branches),
              "cycle_inside_speed_window": branches[0].points[0].c < cyc.c_star < branches[0].points[-1].c}
    payload = {"K": K, "c_star": cyc.c_star, "mu_star": cyc.mu_star, "checks": checks}
    f_sum = _write_json(out / "fig2_summary.json", payload)
    return [csv_path, f_sum, fig], all(checks.values()), payload


def _reproduce_fig3(mp, args, out: Path):
    K = args.K if args.K is not None else 1.25
    cyc = find_c_star(mp, K)
    outputs = []
    checks = {}
    for c in (0.0163, 0.0155):
        fam = cont.periodic_family(mp, K, c, n_steps=args.n_steps, c_star=cyc.c_star)
        csv_path = out / f"fig3_family_c{c:g}.csv"
        cont.write_branch_csv([fam], csv_path)
        outputs.append(csv_path)
        ctx = make_context(mp, K, c, c_star=cyc.c_star)
        orbs = {}
        for frac in (0, len(fam.points) // 2, len(fam.points) - 1):
            p = fam.points[frac]
            pr = find_mu_per(ctx, p.q)
            orbs[f"q={p.q:.5f}"] = (pr.orbit.u, pr.orbit.w)
        fig = report.plot_periodic_family(fam, orbs, out / f"fig3_c{c:g}",
                                          svg=bool(args.svg),
                                          title=f"K={K:g}, c={c:g}")
        outputs.append(fig)
        hopf_mu = ctx.hopf_mu
        small = min(fam.points, key=lambda p: abs(p.q - ctx.u0))
        checks[f"hopf_end_c{c:g}"] = abs(small.mu - hopf_mu) < 1e-2 * abs(hopf_mu)
    f_sum = _write_json(out / "fig3_summary.json",
                        {"K": K, "c_star": cyc.c_star, "checks": checks})
    outputs.append(f_sum)
    return outputs, all(checks.values()), {"checks": checks}


def _fig4_job(job):
    mp_json, kind, k_lo, k_hi, n = job
    mp = ModelParams.from_dict(json.loads(mp_json))
    return cont.trace_in_K(mp, kind, (k_lo, k_hi), n_steps=n)


def _reproduce_fig4(mp, args, out: Path):
    k_lo, k_hi = 1.02, 1.42
    jobs = [(mp.to_json(), k, k_lo, k_hi, args.n_steps)
            for k in ("back", "front", "pulse1", "pulse2")]
    branches = _pmap(_fig4_job, jobs)
    csv_path = out / "fig4_branches.csv"
    cont.write_branch_csv(branches, csv_path)
    fig = report.plot_K_c_diagram(branches, out / "fig4", svg=bool(args.svg))

    # the PDE-matched point: the periodic family at K=1.11672 contains
    # mu = 2 tau K - 1 up to the reported gap
    K_ref = 1.11672
    ctx = make_context(mp, K_ref, 0.013089412)
    pw = periodic_with_period(ctx, 2.33022, validate=False)
    gap = abs(pw.mu_per - (2.0 * mp.tau * K_ref - 1.0))
    checks = {"branches_nonempty": all(len(b) > 0 for b in branches),
              "pde_point_gap_below_4e-4": gap < 4e-4}
    payload = {"checks": checks, "pde_point_gap": gap}
    f_sum = _write_json(out / "fig4_summary.json", payload)
    for name, okv in checks.items():
        print(f"fig4 check {name}: {'PASS' if okv else 'FAIL'}")
    return [csv_path, fig, f_sum], all(checks.values()), payload


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="travwave",
                                description=__doc__)
    p.add_argument("--config", help="model parameter JSON (defaults to the reference constants)")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--svg", action="store_true", default=None,
                   help="emit figures as SVG instead of PNG")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, **kw):
        sp = sub.add_parser(name, **kw)
        sp.set_defaults(handler=fn)
        return sp

    sp = add("regions", cmd_regions, help="critical constants and region classification")
    sp.add_argument("--K", type=float)
    sp.add_argument("--c", type=float)
    sp.add_argument("--c-star", type=float, dest="c_star")

    sp = add("shoot", cmd_shoot, help="solve one heteroclinic connection")
    sp.add_argument("--K", type=float, required=True)
    sp.add_argument("--c", type=float, required=True)
    sp.add_argument("--kind", required=True, choices=("back", "front"))

    sp = add("cycle", cmd_cycle, help="solve the heteroclinic cycle locus at K")
    sp.add_argument("--K", type=float, required=True)

    sp = add("pulse", cmd_pulse, help="solve a homoclinic pulse")
    sp.add_argument("--K", type=float, required=True)
    sp.add_argument("--c", type=float, required=True)
    sp.add_argument("--which", type=int, default=1, choices=(1, 2))
    sp.add_argument("--c-star", type=float, dest="c_star")

    sp = add("periodic", cmd_periodic, help="solve a periodic orbit")
    sp.add_argument("--K", type=float, required=True)
    sp.add_argument("--c", type=float, required=True)
    sp.add_argument("--q", type=float)
    sp.add_argument("--period", type=float)
    sp.add_argument("--c-star", type=float, dest="c_star")

    sp = add("branch", cmd_branch, help="trace solution branches over c")
    sp.add_argument("--K", type=float, required=True)
    sp.add_argument("--kind", choices=("back", "front", "pulse1", "pulse2", "hopf_locus"))
    sp.add_argument("--n-steps", type=int, default=200)

    sp = add("stability", cmd_stability, help="dispersion relation and stability map")
    sp.add_argument("--rho", type=float, default=33.05)
    sp.add_argument("--k-min", type=float, default=0.0)
    sp.add_argument("--k-max", type=float, default=120.0)
    sp.add_argument("--n-k", type=int, default=481)
    sp.add_argument("--rho-min", type=float, default=5.0)
    sp.add_argument("--rho-max", type=float, default=60.0)
    sp.add_argument("--n-rho", type=int, default=56)

    sp = add("simulate-pde", cmd_simulate_pde, help="run the spectral PDE solver")
    sp.add_argument("--sim-config", help="PDE run configuration JSON")

    sp = add("simulate-micro", cmd_simulate_micro, help="run the car-following model")
    sp.add_argument("--sim-config", help="micro run configuration JSON")

    add("validate-acn", cmd_validate_acn,
        help="validate integrator+shooting against exact cubic-system orbits")

    sp = add("reproduce", cmd_reproduce, help="reproduce a report figure end to end")
    sp.add_argument("target", choices=("fig1", "fig2", "fig3", "fig4"))
    sp.add_argument("--K", type=float)
    sp.add_argument("--n-steps", type=int, default=None)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "n_steps", None) is None and args.command == "reproduce":
        args.n_steps = {"fig2": 200, "fig3": 25, "fig4": 13}.get(args.target, 50)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.time()
    try:
        mp = _load_model(args)
    except (ModelError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(json.dumps({"error": str(exc), "type": type(exc).__name__}), file=sys.stderr)
        return 2
    try:
        command = args.command if args.command != "reproduce" else f"reproduce_{args.target}"
        outputs, ok, extra = args.handler(mp, args, out)
        manifest = _manifest(out, command, mp, outputs, t0, {"extra": _jsonable(extra)})
        print(f"{command}: wrote {len(outputs)} file(s) + {manifest.name} "
              f"in {time.time() - t0:.1f}s")
        return 0 if ok else 1
    except (ModelError,) as exc:
        print(json.dumps({"error": str(exc), "type": type(exc).__name__}), file=sys.stderr)
        return 2
    except (RegionError, SolveError, PhaseError, SimulationError, RuntimeError) as exc:
        print(json.dumps({"error": str(exc), "type": type(exc).__name__}), file=sys.stderr)
        return 1


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


if __name__ == "__main__":
    sys.exit(main())
