"""Traveling-wave analysis toolkit for a viscous optimal-velocity traffic
model: phase-plane shooting, branch continuation, linear stability of uniform
flow, and direct PDE / car-following simulation."""

from .model import (
    Coefficients,
    CriticalConstants,
    CriticalSpeeds,
    EigenPair,
    ModelParams,
    OVParams,
    RegionClass,
    ViscosityKind,
    ViscosityLaw,
    WaveContext,
    classify,
    coefficients,
    critical_constants,
    critical_speeds,
    equilibrium_eigen,
    make_context,
    ov_eval,
    paper_params,
    zeros_of_f,
)
from .phase import Event, HalfOrbit, Orbit, PhaseState, integrate, manifold_shoot, w_at
from .solve import (
    CycleResult,
    PeriodicResult,
    RegionError,
    ShootResult,
    find_c_star,
    find_mu_b,
    find_mu_f,
    find_mu_per,
    find_mu_pul,
    periodic_with_period,
    verify_nonexistence,
)

__version__ = "0.1.0"
