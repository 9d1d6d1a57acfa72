"""Linear stability of uniform flow: complex dispersion relation, the
instability criterion, and the unstable wavenumber band."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .model import ModelParams

__all__ = [
    "UniformState",
    "DispersionPoint",
    "uniform_state",
    "dispersion",
    "growth_rate",
    "is_unstable",
    "unstable_band",
    "dispersion_csv",
    "stability_map_csv",
]


@dataclass(frozen=True)
class UniformState:
    rho_star: float
    v_star: float

    def __post_init__(self):
        if self.rho_star <= 0:
            raise ValueError("density must be positive")


def uniform_state(mp: ModelParams, rho_star: float) -> UniformState:
    return UniformState(rho_star=rho_star, v_star=float(mp.curve.value(1.0 / rho_star)))


@dataclass(frozen=True)
class DispersionPoint:
    k: float
    lambda_plus: complex
    lambda_minus: complex

    def char_residual(self, mp: ModelParams, us: UniformState) -> float:
        """Max residual of the characteristic polynomial over both roots."""
        tau = mp.tau
        kap = float(mp.visc.kappa(us.rho_star, tau))
        vp = mp.curve.slope(1.0 / us.rho_star)
        k = self.k
        res = 0.0
        for lam in (self.lambda_plus, self.lambda_minus):
            m = lam + 1j * k * us.v_star
            val = m * (m + 1.0 / tau + kap * k * k) - (1j * k / (tau * us.rho_star)) * (
                1j * k / (2.0 * us.rho_star) + 1.0
            ) * vp
            res = max(res, abs(val))
        return res


def dispersion(mp: ModelParams, us: UniformState, k: float) -> DispersionPoint:
    """Both growth rates at wavenumber k; lambda_plus carries the larger
    real part."""
    tau = mp.tau
    kap = float(mp.visc.kappa(us.rho_star, tau))
    vp = mp.curve.slope(1.0 / us.rho_star)
    B = 1.0 / tau + kap * k * k
    z = complex(B * B) + (4j * k / (tau * us.rho_star)) * (1j * k / (2.0 * us.rho_star) + 1.0) * vp
    s = np.sqrt(z)
    base = -1j * k * us.v_star
    lp = base + 0.5 * (-B + s)
    lm = base + 0.5 * (-B - s)
    if lp.real < lm.real:
        lp, lm = lm, lp
    return DispersionPoint(k=k, lambda_plus=complex(lp), lambda_minus=complex(lm))


def growth_rate(mp: ModelParams, us: UniformState, k: float) -> float:
    return dispersion(mp, us, k).lambda_plus.real


def is_unstable(mp: ModelParams, rho_star: float) -> bool:
    """Whether the uniform state at this density has a growing mode band.

    The curvature of the growth rate at k=0 is -V'(1 - 2 tau V')/rho^2, so
    instability sets in exactly where 2 tau V'(1/rho) exceeds 1 (matching
    the car-following criterion).
    """
    vp = mp.curve.slope(1.0 / rho_star)
    return 2.0 * mp.tau * vp > 1.0


def unstable_band(mp: ModelParams, rho_star: float, k_hi0: float = 1.0) -> tuple[float, float] | None:
    """(k1, k2) with k1 < 0 < k2 bounding the growing band, or None when the
    state is stable."""
    if not is_unstable(mp, rho_star):
        return None
    us = uniform_state(mp, rho_star)

    def edge(sign: float) -> float:
        # walk to a strictly positive growth probe first (the k->0 limit
        # underflows to zero), then double until the rate turns negative
        k_lo = k_hi0
        while growth_rate(mp, us, sign * k_lo) <= 0:
            k_lo *= 0.5
            if k_lo < 1e-8:
                raise RuntimeError("no positive growth found despite the flag")
        k_hi = 2.0 * k_lo
        while growth_rate(mp, us, sign * k_hi) > 0:
            k_lo = k_hi
            k_hi *= 2.0
            if k_hi > 1e12:
                raise RuntimeError("no sign change of the growth rate found")
        return brentq(lambda k: growth_rate(mp, us, sign * k), k_lo, k_hi, xtol=1e-12) * sign

    k2 = edge(+1.0)
    k1 = edge(-1.0)
    return (k1, k2)


def dispersion_csv(mp: ModelParams, rho_star: float, ks, path) -> None:
    us = uniform_state(mp, rho_star)
    with open(path, "w") as fh:
        fh.write("k,re_lambda_plus,im_lambda_plus,re_lambda_minus,im_lambda_minus\n")
        for k in ks:
            d = dispersion(mp, us, float(k))
            fh.write(
                f"{k:.17g},{d.lambda_plus.real:.17g},{d.lambda_plus.imag:.17g},"
                f"{d.lambda_minus.real:.17g},{d.lambda_minus.imag:.17g}\n"
            )


def stability_map_csv(mp: ModelParams, rhos, path) -> None:
    with open(path, "w") as fh:
        fh.write("rho,unstable,k1,k2\n")
        for rho in rhos:
            band = unstable_band(mp, float(rho))
            if band is None:
                fh.write(f"{rho:.17g},0,,\n")
            else:
                fh.write(f"{rho:.17g},1,{band[0]:.17g},{band[1]:.17g}\n")
