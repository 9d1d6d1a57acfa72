"""Optimal-velocity function, viscosity laws, reduced-system coefficients,
critical constants, zero-finding, and parameter-region classification."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

__all__ = [
    "OVParams",
    "TanhVelocity",
    "ViscosityLaw",
    "ViscosityKind",
    "ModelParams",
    "RegionClass",
    "CriticalConstants",
    "CriticalSpeeds",
    "Coefficients",
    "EigenPair",
    "WaveContext",
    "ov_eval",
    "coefficients",
    "critical_constants",
    "critical_speeds",
    "zeros_of_f",
    "classify",
    "equilibrium_eigen",
    "make_context",
    "paper_params",
]

# Root tolerance in u for every bracketed solve in this module.
U_TOL = 1e-13

# |c - c*| band that counts as sitting on the cycle locus.
C_STAR_TOL = 1e-8

# cosh overflows past ~710; the sigmoid slope is exactly 0 in double
# precision long before that.
_ARG_CAP = 350.0


class ModelError(ValueError):
    """Invalid model parameters or out-of-domain request."""


@dataclass(frozen=True)
class OVParams:
    """Constants of the sigmoidal equilibrium-speed curve
    V(u) = V0*(tanh(beta*(u - u_c)) + M)."""

    V0: float
    beta: float
    u_c: float
    M: float

    def __post_init__(self):
        for name in ("V0", "beta", "u_c", "M"):
            if getattr(self, name) <= 0:
                raise ModelError(f"OVParams.{name} must be positive")
        # V(0) may be slightly negative (it is with the reference constants,
        # giving c0 = -V(0) > 0); only boundedness of the offset is enforced.
        if self.M >= 1.0 + math.tanh(self.beta * self.u_c):
            raise ModelError("OVParams: offset M places the curve outside the sigmoid range")


class TanhVelocity:
    """Shipped equilibrium-speed curve.

    Any strictly increasing curve whose slope has a single interior maximum
    (slope vanishing at infinity, curvature with one sign change) can replace
    this class; solvers only use value/slope/curvature/slope_peak.
    """

    def __init__(self, p: OVParams):
        self.p = p

    def value(self, u):
        p = self.p
        return p.V0 * (np.tanh(p.beta * (u - p.u_c)) + p.M)

    def slope(self, u):
        p = self.p
        x = np.clip(p.beta * (np.asarray(u, dtype=float) - p.u_c), -_ARG_CAP, _ARG_CAP)
        sech2 = 1.0 / np.cosh(x) ** 2
        out = p.V0 * p.beta * sech2
        return float(out) if np.isscalar(u) or np.ndim(u) == 0 else out

    def curvature(self, u):
        p = self.p
        x = np.clip(p.beta * (np.asarray(u, dtype=float) - p.u_c), -_ARG_CAP, _ARG_CAP)
        out = -2.0 * p.V0 * p.beta**2 * np.tanh(x) / np.cosh(x) ** 2
        return float(out) if np.isscalar(u) or np.ndim(u) == 0 else out

    @property
    def slope_peak(self) -> float:
        """Headway at which the slope is maximal (curvature zero)."""
        return self.p.u_c


def ov_eval(params: OVParams, u: float, order: int = 0) -> float:
    """Evaluate V, V', or V'' at headway u >= 0."""
    if u < 0:
        raise ModelError("headway must be nonnegative")
    curve = TanhVelocity(params)
    if order == 0:
        return float(curve.value(u))
    if order == 1:
        return curve.slope(u)
    if order == 2:
        return curve.curvature(u)
    raise ModelError("order must be 0, 1 or 2")


class ViscosityLaw(Enum):
    CONSTANT = "constant"
    INVERSE_DENSITY = "inverse_density"
    LEE = "lee"


@dataclass(frozen=True)
class ViscosityKind:
    law: ViscosityLaw
    kappa0: float | None = None

    def __post_init__(self):
        if self.law in (ViscosityLaw.CONSTANT, ViscosityLaw.INVERSE_DENSITY):
            if self.kappa0 is None or self.kappa0 <= 0:
                raise ModelError(f"{self.law.value} viscosity needs kappa0 > 0")

    def kappa(self, rho, tau: float):
        """Viscosity coefficient at density rho > 0."""
        if self.law is ViscosityLaw.CONSTANT:
            return self.kappa0 if np.isscalar(rho) else np.full_like(np.asarray(rho, float), self.kappa0)
        if self.law is ViscosityLaw.INVERSE_DENSITY:
            return self.kappa0 / rho
        return 1.0 / (6.0 * tau * rho * rho)

    @property
    def condition_h(self) -> bool:
        """Whether the viscosity is singular enough at rho=0 for the
        strong-singularity integral condition to hold."""
        return self.law is ViscosityLaw.LEE


@dataclass(frozen=True)
class ModelParams:
    ov: OVParams
    visc: ViscosityKind
    tau: float

    def __post_init__(self):
        if self.tau <= 0:
            raise ModelError("tau must be positive")

    @property
    def curve(self) -> TanhVelocity:
        return TanhVelocity(self.ov)

    def to_json(self) -> str:
        d = {
            "V0": self.ov.V0,
            "beta": self.ov.beta,
            "u_c": self.ov.u_c,
            "M": self.ov.M,
            "tau": self.tau,
            "viscosity": {"kind": self.visc.law.value},
        }
        if self.visc.kappa0 is not None:
            d["viscosity"]["kappa0"] = self.visc.kappa0
        return json.dumps(d, indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelParams":
        base = paper_params()
        ov = OVParams(
            V0=float(d.get("V0", base.ov.V0)),
            beta=float(d.get("beta", base.ov.beta)),
            u_c=float(d.get("u_c", base.ov.u_c)),
            M=float(d.get("M", base.ov.M)),
        )
        vd = d.get("viscosity", {})
        law = ViscosityLaw(vd.get("kind", "lee"))
        kappa0 = vd.get("kappa0")
        visc = ViscosityKind(law, None if kappa0 is None else float(kappa0))
        return cls(ov=ov, visc=visc, tau=float(d.get("tau", base.tau)))

    @classmethod
    def from_json(cls, path: str | Path) -> "ModelParams":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def paper_params() -> ModelParams:
    """Default constants used throughout the numerical experiments."""
    return ModelParams(
        ov=OVParams(V0=0.0168, beta=89.7, u_c=0.025, M=0.913),
        visc=ViscosityKind(ViscosityLaw.LEE),
        tau=0.5,
    )


class RegionClass(Enum):
    D1_1 = "D1_1"
    D1_2 = "D1_2"
    D1_3 = "D1_3"
    D1_UNSPLIT = "D1"
    D2 = "D2"
    OUTSIDE = "outside"

    @property
    def in_d1(self) -> bool:
        return self in (RegionClass.D1_1, RegionClass.D1_2, RegionClass.D1_3, RegionClass.D1_UNSPLIT)


@dataclass(frozen=True)
class Coefficients:
    """Evaluable coefficient functions of the reduced planar system
    u' = w, w' = g1(u) f(u) + g2(u) h(u) w."""

    mp: ModelParams
    K: float
    c: float
    mu: float

    def f(self, u):
        curve = self.mp.curve
        return (self.K * u - curve.value(u) - self.c) / self.K

    def fprime(self, u):
        return 1.0 - self.mp.curve.slope(u) / self.K

    def h(self, u):
        return self.fprime(u) + self.mu

    def g1(self, u):
        kap = self.mp.visc.kappa(1.0 / u, self.mp.tau)
        return 1.0 / (self.mp.tau * kap)

    def g2(self, u):
        kap = self.mp.visc.kappa(1.0 / u, self.mp.tau)
        return u / (2.0 * self.mp.tau * kap)


def coefficients(mp: ModelParams, K: float, c: float, mu: float) -> Coefficients:
    """Coefficient functions for given flux constant, wave speed and control
    parameter; evaluable at any u > 0."""
    if K == 0:
        raise ModelError("K must be nonzero")
    return Coefficients(mp, K, c, mu)


@dataclass(frozen=True)
class CriticalConstants:
    K0: float
    K_M: float
    K1: float
    U_M: float
    c0: float


@dataclass(frozen=True)
class CriticalSpeeds:
    u_M: float | None
    u_m: float
    c_M: float | None
    c_m: float
    c1: float


def _u_m(curve: TanhVelocity, K: float) -> float:
    # local minimum of K*u - V(u): slope(u) = K on (U_M, inf)
    lo = curve.slope_peak
    hi = 2.0 * lo
    while curve.slope(hi) >= K:
        hi *= 2.0
        if hi > 1e6:
            raise ModelError("failed to bracket u_m")
    return brentq(lambda u: curve.slope(u) - K, lo, hi, xtol=U_TOL)


def _u_M(curve: TanhVelocity, K: float) -> float:
    # local maximum of K*u - V(u): slope(u) = K on (0, U_M)
    return brentq(lambda u: curve.slope(u) - K, 0.0, curve.slope_peak, xtol=U_TOL)


@lru_cache(maxsize=64)
def _k1_cached(mp: ModelParams) -> float:
    curve = mp.curve
    K0 = curve.slope(0.0)
    K_M = curve.slope(curve.slope_peak)
    c0 = -float(curve.value(0.0))

    def gap(K):
        um = _u_m(curve, K)
        return K * um - float(curve.value(um)) - c0

    lo = K0 * (1.0 + 1e-9)
    hi = K_M * (1.0 - 1e-9)
    if gap(lo) >= 0 or gap(hi) <= 0:
        raise ModelError("c_m(K) - c0 does not bracket a root: inconsistent OV parameters")
    return brentq(gap, lo, hi, xtol=1e-14)


def critical_constants(mp: ModelParams) -> CriticalConstants:
    """K0, K_M, K1, U_M and c0 for the given model."""
    curve = mp.curve
    U_M = curve.slope_peak
    return CriticalConstants(
        K0=curve.slope(0.0),
        K_M=curve.slope(U_M),
        K1=_k1_cached(mp),
        U_M=U_M,
        c0=-float(curve.value(0.0)),
    )


def critical_speeds(mp: ModelParams, K: float) -> CriticalSpeeds:
    """Extremal headways of K*u - V(u) and the induced speed bounds.

    u_m (and c_m) exist for 0 < K < K_M; u_M (and c_M) additionally need
    K > K0.
    """
    curve = mp.curve
    K0 = curve.slope(0.0)
    K_M = curve.slope(curve.slope_peak)
    if not 0 < K < K_M:
        raise ModelError(f"K={K} outside (0, K_M={K_M:.6g})")
    um = _u_m(curve, K)
    c_m = K * um - float(curve.value(um))
    c0 = -float(curve.value(0.0))
    if K > K0:
        uM = _u_M(curve, K)
        c_M = K * uM - float(curve.value(uM))
    else:
        uM, c_M = None, None
    return CriticalSpeeds(u_M=uM, u_m=um, c_M=c_M, c_m=c_m, c1=max(c0, c_m))


def classify(mp: ModelParams, K: float, c: float, c_star: float | None = None) -> RegionClass:
    """Classify (K, c) by the zero structure of f. Total function."""
    cc = critical_constants(mp)
    if 0 < K < cc.K_M:
        cs = critical_speeds(mp, K)
        if cc.K0 < K and cs.c1 < c < cs.c_M:
            if c_star is None:
                return RegionClass.D1_UNSPLIT
            if abs(c - c_star) < C_STAR_TOL:
                return RegionClass.D1_3
            return RegionClass.D1_1 if c > c_star else RegionClass.D1_2
        if cc.K0 < K < cc.K1 and abs(c - cc.c0) <= 1e-10 * max(1.0, abs(cc.c0)):
            return RegionClass.D2
        if 0 < K < cc.K1 and cs.c_m < c < cc.c0:
            return RegionClass.D2
    return RegionClass.OUTSIDE


def zeros_of_f(mp: ModelParams, K: float, c: float) -> tuple[float | None, float, float]:
    """Ordered roots (u1, u0, u2) of f; u1 is None in the two-zero region.

    Signs f'(u1) > 0, f'(u0) < 0, f'(u2) > 0 are verified.
    """
    region = classify(mp, K, c)
    if region is RegionClass.OUTSIDE:
        raise ModelError(f"(K={K}, c={c}) has no admissible zero structure")
    co = coefficients(mp, K, c, 0.0)
    cs = critical_speeds(mp, K)

    def upper_root(lo):
        hi = 2.0 * lo
        while co.f(hi) < 0:
            hi *= 2.0
            if hi > 1e6:
                raise ModelError("failed to bracket u2")
        return brentq(co.f, lo, hi, xtol=U_TOL)

    if region.in_d1:
        u1 = brentq(co.f, 1e-3 * cs.u_M, cs.u_M, xtol=U_TOL)
        u0 = brentq(co.f, cs.u_M, cs.u_m, xtol=U_TOL)
        u2 = upper_root(cs.u_m)
    else:
        u1 = None
        # f > 0 on (0, u0): walk down from u_m until a positive sample brackets u0
        lo = 0.5 * cs.u_m
        while co.f(lo) <= 0 and lo > 1e-12:
            lo *= 0.5
        if co.f(lo) <= 0:
            raise ModelError("failed to bracket u0 in the two-zero region")
        u0 = brentq(co.f, lo, cs.u_m, xtol=U_TOL)
        u2 = upper_root(cs.u_m)
    if co.fprime(u0) >= 0 or co.fprime(u2) <= 0 or (u1 is not None and co.fprime(u1) <= 0):
        raise ModelError("zero slope-pattern check failed")
    return u1, u0, u2


@dataclass(frozen=True)
class EigenPair:
    lam_minus: complex
    lam_plus: complex
    vec_minus: tuple[complex, complex]
    vec_plus: tuple[complex, complex]

    @property
    def is_saddle(self) -> bool:
        return (
            abs(self.lam_minus.imag) == 0
            and abs(self.lam_plus.imag) == 0
            and self.lam_minus.real < 0 < self.lam_plus.real
        )


def equilibrium_eigen(mp: ModelParams, K: float, c: float, mu: float, u_eq: float) -> EigenPair:
    """Eigenvalues/eigenvectors of the linearization at (u_eq, 0).

    u_eq must be an equilibrium, i.e. f(u_eq) = 0 up to root tolerance.
    """
    co = coefficients(mp, K, c, mu)
    if abs(co.f(u_eq)) > 1e-7:
        raise ModelError(f"u_eq={u_eq} is not an equilibrium: f={co.f(u_eq):.3e}")
    a = co.g2(u_eq) * co.h(u_eq)
    disc = a * a + 4.0 * co.g1(u_eq) * co.fprime(u_eq)
    if disc >= 0:
        s = math.sqrt(disc)
        lm, lp = 0.5 * (a - s), 0.5 * (a + s)
    else:
        s = 1j * math.sqrt(-disc)
        lm, lp = 0.5 * (a - s), 0.5 * (a + s)

    def unit(lam):
        n = math.sqrt(1.0 + abs(lam) ** 2)
        return (1.0 / n, lam / n)

    return EigenPair(lam_minus=lm, lam_plus=lp, vec_minus=unit(lm), vec_plus=unit(lp))


@dataclass(frozen=True)
class WaveContext:
    """One (K, c, mu) problem instance with its zero structure.

    mu is the free control parameter; it equals 2*tau*K - 1 only when a
    solution is tied back to the PDE.
    """

    mp: ModelParams
    K: float
    c: float
    mu: float
    u1: float | None
    u0: float
    u2: float
    region: RegionClass

    @property
    def coeffs(self) -> Coefficients:
        return coefficients(self.mp, self.K, self.c, self.mu)

    @property
    def u_tilde1(self) -> float:
        """u1, or 0 in the two-zero region."""
        return 0.0 if self.u1 is None else self.u1

    def with_mu(self, mu: float) -> "WaveContext":
        return WaveContext(self.mp, self.K, self.c, mu, self.u1, self.u0, self.u2, self.region)

    def eigen(self, u_eq: float) -> EigenPair:
        return equilibrium_eigen(self.mp, self.K, self.c, self.mu, u_eq)

    @property
    def hopf_mu(self) -> float:
        """Control value at which (u0, 0) has a purely imaginary pair."""
        return -self.coeffs.fprime(self.u0)

    @property
    def omega0(self) -> float:
        co = self.coeffs
        return math.sqrt(-co.g1(self.u0) * co.fprime(self.u0))


def make_context(
    mp: ModelParams, K: float, c: float, mu: float = 0.0, c_star: float | None = None
) -> WaveContext:
    """Build a WaveContext, computing zeros and region membership."""
    region = classify(mp, K, c, c_star)
    if region is RegionClass.OUTSIDE:
        raise ModelError(f"(K={K}, c={c}) lies outside the admissible regions")
    u1, u0, u2 = zeros_of_f(mp, K, c)
    return WaveContext(mp=mp, K=K, c=c, mu=mu, u1=u1, u0=u0, u2=u2, region=region)
