"""Planar integration of the reduced traveling-wave system with event
detection, and invariant-manifold shooting from the saddle equilibria."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .model import ModelParams, RegionClass, ViscosityLaw, WaveContext

__all__ = [
    "PhaseState",
    "Event",
    "Orbit",
    "HalfOrbit",
    "PlanarSystem",
    "reduced_system",
    "integrate",
    "integrate_system",
    "manifold_shoot",
    "w_at",
    "flow_identity_residual",
]

RTOL = 1e-10
ATOL = 1e-12
Z_MAX_DEFAULT = 400.0
EVENT_TOL = 1e-12
ARC_SPACING = 1e-2


class PhaseError(RuntimeError):
    """Integration or shooting failure."""


class PhaseState(NamedTuple):
    u: float
    w: float


@dataclass
class Event:
    """State-based stopping/recording condition g(u, w) = 0.

    direction: +1 fires on -- -> ++ crossings, -1 on ++ -> --, 0 on both,
    measured along the integrated (internal) time.
    """

    fn: Callable[[float, float], float]
    name: str
    direction: int = 0
    terminal: bool = True

    @staticmethod
    def w_zero(direction: int = 0, name: str = "w_zero") -> "Event":
        return Event(fn=lambda u, w: w, name=name, direction=direction)

    @staticmethod
    def u_equals(value: float, direction: int = 0, name: str | None = None) -> "Event":
        return Event(fn=lambda u, w: u - value, name=name or f"u={value:.6g}", direction=direction)

    @staticmethod
    def u_floor(value: float) -> "Event":
        return Event(fn=lambda u, w: u - value, name="u_floor", direction=-1)

    @staticmethod
    def w_cap(value: float) -> "Event":
        return Event(fn=lambda u, w: abs(w) - value, name="w_cap", direction=+1)


@dataclass
class Orbit:
    """A solved trajectory sampled densely enough for interpolation.

    z runs in the direction of integration (decreasing for backward runs);
    `dense(z)` evaluates the continuous solution inside the covered range.
    """

    z: np.ndarray
    u: np.ndarray
    w: np.ndarray
    terminal_event: str | None
    direction: int
    dense: Callable[[float], tuple[float, float]] | None = None
    event_hits: dict = field(default_factory=dict)

    @property
    def z_end(self) -> float:
        return float(self.z[-1])

    def state(self, z: float) -> PhaseState:
        if self.dense is not None:
            u, w = self.dense(z)
            return PhaseState(float(u), float(w))
        return PhaseState(float(np.interp(z, self.z[:: self.direction], self.u[:: self.direction])),
                          float(np.interp(z, self.z[:: self.direction], self.w[:: self.direction])))

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("z,u,w\n")
            for z, u, w in zip(self.z, self.u, self.w):
                fh.write(f"{z:.17g},{u:.17g},{w:.17g}\n")

    def reversed(self) -> "Orbit":
        return Orbit(
            z=self.z[::-1].copy(), u=self.u[::-1].copy(), w=self.w[::-1].copy(),
            terminal_event=self.terminal_event, direction=-self.direction,
            dense=self.dense, event_hits=self.event_hits,
        )


@dataclass
class PlanarSystem:
    """u' = w, w' = N(u) + D(u) w, with the zero structure of N attached.

    `nprime_eq` needs to be exact only at the equilibria (zeros of N).
    """

    nfun: Callable[[float], float]
    dfun: Callable[[float], float]
    nprime_eq: Callable[[float], float]
    u1: float | None
    u0: float
    u2: float
    mu: float
    u_floor: float
    w_cap: float
    eps: float

    def rhs(self, u: float, w: float) -> tuple[float, float]:
        return w, self.nfun(u) + self.dfun(u) * w

    @property
    def u_tilde1(self) -> float:
        return 0.0 if self.u1 is None else self.u1

    def eigen(self, u_eq: float) -> tuple[float, float]:
        """Real eigenvalue pair (lam_minus, lam_plus) at (u_eq, 0)."""
        d = self.dfun(u_eq)
        disc = d * d + 4.0 * self.nprime_eq(u_eq)
        if disc < 0:
            raise PhaseError(f"complex spectrum at u={u_eq}: not a saddle")
        s = math.sqrt(disc)
        return 0.5 * (d - s), 0.5 * (d + s)

    @property
    def z_scale(self) -> float:
        """Slowest linear time scale over the equilibria (sets z budgets)."""
        rates = []
        for ueq in (self.u1, self.u0, self.u2):
            if ueq is None:
                continue
            d = self.dfun(ueq)
            disc = d * d + 4.0 * self.nprime_eq(ueq)
            if disc >= 0:
                s = math.sqrt(disc)
                rates += [abs(0.5 * (d - s)), abs(0.5 * (d + s))]
            else:
                rates.append(0.5 * math.sqrt(-disc))  # centre frequency
        rates = [r for r in rates if r > 0]
        return 1.0 / min(rates) if rates else 1.0


def _fast_curve(mp: ModelParams):
    p = mp.ov
    V0, beta, uc, Mv = p.V0, p.beta, p.u_c, p.M

    def value(u):
        return V0 * (math.tanh(beta * (u - uc)) + Mv)

    def slope(u):
        x = beta * (u - uc)
        if abs(x) > 350.0:
            return 0.0
        ch = math.cosh(x)
        return V0 * beta / (ch * ch)

    return value, slope


def reduced_system(ctx: WaveContext) -> PlanarSystem:
    """Bind the reduced system's coefficient functions into a fast system."""
    mp, K, c, mu = ctx.mp, ctx.K, ctx.c, ctx.mu
    value, slope = _fast_curve(mp)
    tau = mp.tau
    law = mp.visc.law
    k0 = mp.visc.kappa0

    if law is ViscosityLaw.LEE:
        def g1(u): return 6.0 / (u * u)
        def g2(u): return 3.0 / u
    elif law is ViscosityLaw.CONSTANT:
        c1, c2 = 1.0 / (tau * k0), 1.0 / (2.0 * tau * k0)
        def g1(u): return c1
        def g2(u): return c2 * u
    else:  # kappa = k0 / rho = k0 * u
        c1, c2 = 1.0 / (tau * k0), 1.0 / (2.0 * tau * k0)
        def g1(u): return c1 / u
        def g2(u): return c2

    def nfun(u):
        return g1(u) * (K * u - value(u) - c) / K

    def dfun(u):
        return g2(u) * (1.0 - slope(u) / K + mu)

    def nprime_eq(u):
        return g1(u) * (1.0 - slope(u) / K)

    lam = []
    for ueq in (ctx.u1, ctx.u2):
        if ueq is not None:
            d = dfun(ueq)
            disc = d * d + 4.0 * nprime_eq(ueq)
            if disc > 0:
                s = math.sqrt(disc)
                lam += [abs(0.5 * (d - s)), abs(0.5 * (d + s))]
    span = ctx.u2 - ctx.u_tilde1
    return PlanarSystem(
        nfun=nfun,
        dfun=dfun,
        nprime_eq=nprime_eq,
        u1=ctx.u1,
        u0=ctx.u0,
        u2=ctx.u2,
        mu=mu,
        u_floor=1e-6 * ctx.u1 if ctx.u1 is not None else 1e-8,
        w_cap=1e3 * (max(lam) if lam else 1.0) * span,
        eps=1e-8 * span,
    )


def _scipy_events(events: Sequence[Event]):
    wrapped = []
    for ev in events:
        def g(s, y, _fn=ev.fn):
            return _fn(y[0], y[1])
        g.terminal = ev.terminal
        g.direction = float(ev.direction)
        wrapped.append(g)
    return wrapped


def _polish_event(dense, s_ev: float, fn, s_lo: float, s_hi: float) -> float:
    """Refine the event time on the dense output until |fn| <= EVENT_TOL."""
    s = s_ev
    for _ in range(8):
        y = dense(s)
        g = fn(y[0], y[1])
        if abs(g) <= 0.1 * EVENT_TOL:
            return s
        h = 1e-9 * max(1.0, abs(s))
        ylo, yhi = dense(s - h), dense(s + h)
        dg = (fn(yhi[0], yhi[1]) - fn(ylo[0], ylo[1])) / (2 * h)
        if dg == 0:
            break
        step = g / dg
        s_new = min(max(s - step, s_lo), s_hi)
        if s_new == s:
            break
        s = s_new
    return s


def integrate_system(
    system_rhs: Callable[[float, float], tuple[float, float]],
    s0: PhaseState,
    direction: int = 1,
    events: Sequence[Event] = (),
    z_max: float = Z_MAX_DEFAULT,
    rtol: float = RTOL,
    atol: float = ATOL,
    dense: bool = True,
    max_step: float = np.inf,
) -> Orbit:
    """Adaptive RK45 run in |z| up to z_max, stopping at the first terminal
    event; event times are refined on the dense output to |g| <= 1e-12."""
    if s0.u <= 0:
        raise PhaseError("initial headway must be positive")
    sgn = 1 if direction >= 0 else -1

    if sgn > 0:
        def F(s, y):
            du, dw = system_rhs(y[0], y[1])
            return (du, dw)
    else:
        def F(s, y):
            du, dw = system_rhs(y[0], y[1])
            return (-du, -dw)

    sol = solve_ivp(
        F, (0.0, float(z_max)), [s0.u, s0.w],
        method="RK45", rtol=rtol, atol=atol,
        dense_output=dense, events=_scipy_events(events), max_step=max_step,
    )
    if sol.status == -1:
        raise PhaseError(f"integration failed: {sol.message}")

    term_name = None
    hits: dict = {}
    s_arr, y_arr = sol.t, sol.y
    for iev, ev in enumerate(events):
        times = sol.t_events[iev]
        if times.size:
            hits[ev.name] = [(sgn * float(t),) + tuple(map(float, ys)) for t, ys in
                             zip(times, sol.y_events[iev])]
    if sol.status == 1:
        # first terminal event that fired last in time order
        s_term, term_name = None, None
        for iev, ev in enumerate(events):
            if ev.terminal and sol.t_events[iev].size:
                t = float(sol.t_events[iev][0])
                if s_term is None or t < s_term:
                    s_term, term_name = t, ev.name
        if s_term is not None and dense and sol.sol is not None:
            ev = next(e for e in events if e.name == term_name)
            lo = float(sol.t[-2]) if sol.t.size > 1 else 0.0
            s_pol = _polish_event(sol.sol, s_term, ev.fn, lo, float(z_max))
            y_pol = sol.sol(s_pol)
            if s_pol <= s_arr[-1]:
                keep = s_arr < s_pol
                s_arr = np.append(s_arr[keep], s_pol)
                y_arr = np.column_stack([y_arr[:, keep], y_pol])
            hits[term_name] = [(sgn * s_pol, float(y_pol[0]), float(y_pol[1]))] + hits.get(term_name, [])[1:]

    dense_fn = None
    if dense and sol.sol is not None:
        smin, smax = float(sol.sol.t_min), float(sol.sol.t_max)

        def dense_fn(z, _sol=sol.sol, _sgn=sgn, _lo=smin, _hi=smax):
            s = min(max(_sgn * z, _lo), _hi)
            y = _sol(s)
            return float(y[0]), float(y[1])

        s_arr, y_arr = _resample_arc(sol.sol, s_arr, y_arr)

    z = sgn * s_arr
    return Orbit(
        z=z, u=y_arr[0].copy(), w=y_arr[1].copy(),
        terminal_event=term_name, direction=sgn, dense=dense_fn, event_hits=hits,
    )


def _resample_arc(dense_sol, s_arr, y_arr, spacing: float = ARC_SPACING):
    """Insert dense-output samples so consecutive points sit within the
    target normalized arc-length spacing (solver nodes are kept)."""
    if s_arr.size < 2:
        return s_arr, y_arr
    u_scale = max(float(np.ptp(y_arr[0])), 1e-12)
    w_scale = max(float(np.max(np.abs(y_arr[1]))), 1e-12)
    seg = np.hypot(np.diff(y_arr[0]) / u_scale, np.diff(y_arr[1]) / w_scale)
    n_sub = np.minimum(np.ceil(seg / spacing).astype(int), 64)
    if np.all(n_sub <= 1):
        return s_arr, y_arr
    ss = [s_arr[:1]]
    for i, n in enumerate(n_sub):
        if n <= 1:
            ss.append(s_arr[i + 1 : i + 2])
        else:
            ss.append(np.linspace(s_arr[i], s_arr[i + 1], n + 1)[1:])
    s_new = np.concatenate(ss)
    y_new = dense_sol(s_new)
    # keep endpoint states exact (the terminal point may be polished)
    y_new[:, 0] = y_arr[:, 0]
    y_new[:, -1] = y_arr[:, -1]
    return s_new, y_new


def integrate(
    ctx: WaveContext,
    s0: PhaseState,
    direction: int = 1,
    events: Sequence[Event] = (),
    z_max: float = Z_MAX_DEFAULT,
    rtol: float = RTOL,
    atol: float = ATOL,
) -> Orbit:
    """Integrate the reduced system for the given context."""
    sys = reduced_system(ctx)
    return integrate_system(sys.rhs, s0, direction, events, z_max, rtol, atol)


# branch table: (origin j, sign) -> (use unstable eig, integration direction, offset sign)
_BRANCHES = {
    (1, +1): (True, +1, +1),
    (1, -1): (False, -1, +1),
    (2, +1): (False, -1, -1),
    (2, -1): (True, +1, -1),
}


@dataclass
class HalfOrbit:
    """One invariant-manifold branch shot from a saddle to its first return
    to the axis (or to a boundary)."""

    origin: int
    branch: int
    orbit: Orbit
    landing_u: float | None
    landing_kind: str  # 'axis' | 'far' | 'floor' | 'cap' | 'none'
    origin_u: float
    slope_at_origin: float
    _w_spline: CubicSpline | None = None

    @property
    def u_range(self) -> tuple[float, float]:
        return float(np.min(self.orbit.u)), float(np.max(self.orbit.u))

    @property
    def z_extent(self) -> float:
        return abs(self.orbit.z[-1] - self.orbit.z[0])

    def w_at(self, a: float) -> float:
        return w_at(self, a)

    @property
    def w_interpolator(self) -> CubicSpline:
        if self._w_spline is None:
            u, w = self.orbit.u, self.orbit.w
            order = np.argsort(u)
            uu, ww = u[order], w[order]
            keep = np.concatenate([[True], np.diff(uu) > 0])
            self._w_spline = CubicSpline(uu[keep], ww[keep])
        return self._w_spline


def manifold_shoot(
    ctx: WaveContext,
    j: int,
    branch: int,
    eps: float | None = None,
    extra_events: Sequence[Event] = (),
    rtol: float = RTOL,
    atol: float = ATOL,
    z_max: float | None = None,
    system: PlanarSystem | None = None,
    dense: bool = True,
) -> HalfOrbit:
    """Shoot the (j, branch) manifold graph from (u_j, 0).

    j=1 needs the three-zero region; j=2 works in both regions. The start is
    offset by eps along the unit eigenvector so that w carries the branch
    sign; unstable branches run forward, stable ones backward.
    """
    if j == 1 and not ctx.region.in_d1:
        raise PhaseError("branch (1, ±) needs the three-zero region")
    sys = system if system is not None else reduced_system(ctx)
    uj = sys.u1 if j == 1 else sys.u2
    if uj is None:
        raise PhaseError("origin equilibrium missing in this region")
    lam_minus, lam_plus = sys.eigen(uj)
    if not lam_minus < 0 < lam_plus:
        raise PhaseError(f"(u{j}, 0) is not a saddle: eigenvalues {lam_minus:.4g}, {lam_plus:.4g}")
    use_unstable, tdir, off = _BRANCHES[(j, branch)]
    lam = lam_plus if use_unstable else lam_minus
    e = sys.eps if eps is None else eps
    n = math.hypot(1.0, lam)
    y0 = PhaseState(uj + off * e / n, off * e * lam / n)

    far = sys.u2 if j == 1 else sys.u1
    events = [Event.w_zero(direction=-branch, name="landing")]
    if far is not None:
        events.append(Event.u_equals(far, direction=(+1 if j == 1 else -1), name="far"))
    events.append(Event.u_floor(sys.u_floor))
    events.append(Event.w_cap(sys.w_cap))
    events.extend(extra_events)

    if z_max is None:
        # landing takes ~ln(span/eps) linear time scales; leave wide margin
        z_max = 500.0 * sys.z_scale
    orbit = integrate_system(sys.rhs, y0, tdir, events, z_max, rtol, atol, dense=dense)
    kind_map = {"landing": "axis", "far": "far", "u_floor": "floor", "w_cap": "cap"}
    kind = kind_map.get(orbit.terminal_event, "none")
    landing = float(orbit.u[-1]) if kind in ("axis", "far") else None
    return HalfOrbit(
        origin=j, branch=branch, orbit=orbit,
        landing_u=landing, landing_kind=kind,
        origin_u=uj, slope_at_origin=lam,
    )


def w_at(half: HalfOrbit, a: float) -> float:
    """w of the manifold graph at headway a inside the traversed interval."""
    lo, hi = half.u_range
    if not (lo - 1e-12 <= a <= hi + 1e-12):
        raise PhaseError(f"u={a} outside traversed interval [{lo:.8g}, {hi:.8g}]")
    orb = half.orbit
    if orb.dense is not None:
        za, zb = float(orb.z[0]), float(orb.z[-1])
        ua, ub = orb.state(za).u, orb.state(zb).u
        if (ua - a) * (ub - a) <= 0:
            z_hit = brentq(lambda z: orb.state(z).u - a, min(za, zb), max(za, zb), xtol=1e-14)
            return orb.state(z_hit).w
    return float(half.w_interpolator(a))


def flow_identity_residual(ctx: WaveContext, half: HalfOrbit, n_probe: int = 50) -> float:
    """Max residual of the u-parametrized flow identity
    d(w^2/2)/du = g1 f + g2 h w along the half-orbit interior."""
    co = ctx.coeffs
    lo, hi = half.u_range
    span = hi - lo
    h = 1e-6 * span
    worst = 0.0
    for a in np.linspace(lo + 200 * h, hi - 200 * h, n_probe):
        wp = w_at(half, a + h)
        wm = w_at(half, a - h)
        wc = w_at(half, a)
        if abs(wc) < 1e-9:
            continue
        lhs = (wp * wp - wm * wm) / (4.0 * h)
        rhs = co.g1(a) * co.f(a) + co.g2(a) * co.h(a) * wc
        worst = max(worst, abs(lhs - rhs))
    return worst
