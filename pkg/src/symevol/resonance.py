"""Resonance-manifold location and normal-mode/periodic-orbit stability.

Amplitude-ratio conditions are linear in (r1^2, r2^2), so manifolds have
closed-form ratios; integer or Fraction coefficients are propagated exactly.
The 1:1 classification follows the parameter a1/(3*a2); a numerical
verifier integrates the averaged 1:1 flow to cross-check each verdict.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .averaged import avg11_rhs
from .integrate import IntegratorConfig, integrate
from .model import ModelParams
from .transforms import wrap_angle

__all__ = [
    "ResonanceManifold",
    "StabilityReport",
    "locate_12_first",
    "locate_12_second",
    "locate_13",
    "classify_11",
    "verify_stability_numerically",
]


@dataclass(frozen=True)
class ResonanceManifold:
    """Location and asymptotic size/timescale of a resonance manifold.

    ``amplitude_ratio`` is r1^2/r2^2 (exact Fraction when the inputs were
    exact), or None when no manifold exists. ``size_order`` and
    ``timescale_order`` are the exponents k, m in width O(eps^k) and
    interaction time 1/eps^m.
    """

    resonance: str
    exists: bool
    amplitude_ratio: object | None
    angles: tuple
    size_order: int
    timescale_order: int
    angle_stability: dict | None = None
    degenerate: bool = False
    r1_sq: float | None = None
    r2_sq: float | None = None


@dataclass(frozen=True)
class StabilityReport:
    """Existence/stability of a 1:1 normal mode or periodic solution.

    ``stable`` is True, False, ``"boundary"`` at an interval endpoint, or
    None when the solution does not exist. ``parameter`` is a1/(3*a2).
    """

    mode: str
    exists: bool
    stable: object
    parameter: float
    a1: float
    a2: float


def _is_exact(x) -> bool:
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


def locate_12_first(E0) -> ResonanceManifold:
    """First-order 1:2 manifold: chi in {0, pi} with r1^2 = 8*r2^2.

    On the surface r1^2/2 + 2*r2^2 = E0 this fixes r2^2 = E0/6. The
    manifold is a family of constant-amplitude solutions (width exponent 0)
    interacting on times of order 1/eps.
    """
    if E0 < 0:
        raise ValueError("E0 must be non-negative")
    if E0 == 0:
        return ResonanceManifold("1:2 first order", False, None, (0.0, math.pi), 0, 1,
                                 r1_sq=0.0, r2_sq=0.0)
    ratio = Fraction(8) if _is_exact(E0) else 8.0
    r2_sq = E0 / 6
    return ResonanceManifold("1:2 first order", True, ratio, (0.0, math.pi), 0, 1,
                             r1_sq=8 * r2_sq, r2_sq=r2_sq)


def _chi2_coeffs(a1, a2):
    if _is_exact(a1) and _is_exact(a2):
        a1, a2 = Fraction(a1), Fraction(a2)
        c_u = -Fraction(1, 6) * a1 * a1 + Fraction(1, 2) * a1 * a2 + Fraction(1, 15) * a2 * a2
        c_w = -2 * a1 * a2 + Fraction(29, 60) * a2 * a2
    else:
        c_u = -a1 * a1 / 6.0 + 0.5 * a1 * a2 + a2 * a2 / 15.0
        c_w = -2.0 * a1 * a2 + 29.0 * a2 * a2 / 60.0
    return c_u, c_w


def locate_12_second(a1, a2) -> ResonanceManifold:
    """Second-order 1:2 manifold from the zero of the chi2 drift.

    The drift is c_u*r1^2 + c_w*r2^2, so a manifold needs coefficients of
    opposite sign; chi2 = 0 hosts stable resonant periodic orbits, chi2 = pi
    unstable ones. Width O(eps), interaction time 1/eps^3.
    """
    c_u, c_w = _chi2_coeffs(a1, a2)
    stability = {0.0: "stable", math.pi: "unstable"}
    if c_u == 0 and c_w == 0:
        return ResonanceManifold("1:2 second order", False, None, (0.0, math.pi), 1, 3,
                                 angle_stability=stability, degenerate=True)
    if c_u != 0 and c_w != 0 and (c_u > 0) != (c_w > 0):
        ratio = -c_w / c_u
        return ResonanceManifold("1:2 second order", True, ratio, (0.0, math.pi), 1, 3,
                                 angle_stability=stability)
    return ResonanceManifold("1:2 second order", False, None, (0.0, math.pi), 1, 3,
                             angle_stability=stability)


def _chi3_coeffs(a1, a2, literal_47_140=False):
    if _is_exact(a1) and _is_exact(a2) and not literal_47_140:
        a1, a2 = Fraction(a1), Fraction(a2)
        c_u = Fraction(5, 2) * a1 * a1 - Fraction(1, 6) * a1 * a2 - Fraction(1, 105) * a2 * a2
        c_w = 3 * a1 * a2 + Fraction(47, 140) * a2 * a2
    else:
        c_u = 2.5 * a1 * a1 - a1 * a2 / 6.0 - a2 * a2 / 105.0
        c_w = 3.0 * a1 * a2 + (47.0 / 140.0) * (1.0 if literal_47_140 else a2 * a2)
    return c_u, c_w


def locate_13(a1, a2, literal_47_140=False) -> ResonanceManifold:
    """1:3 manifold from the zero of the chi3 drift, chi3 in {0, pi}.

    The drift is -(c_u*r1^2 - c_w*r2^2); a positive ratio needs both
    coefficients non-zero with equal sign. Width O(eps^2), interaction
    time 1/eps^4.
    """
    c_u, c_w = _chi3_coeffs(a1, a2, literal_47_140)
    if c_u == 0 and c_w == 0:
        return ResonanceManifold("1:3", False, None, (0.0, math.pi), 2, 4, degenerate=True)
    if c_u != 0 and c_w != 0 and (c_u > 0) == (c_w > 0):
        ratio = c_w / c_u
        return ResonanceManifold("1:3", True, ratio, (0.0, math.pi), 2, 4)
    return ResonanceManifold("1:3", False, None, (0.0, math.pi), 2, 4)


# Open intervals of the parameter p = a1/(3*a2) quoted from the 1:1
# classification; endpoints are flagged "boundary".
_Q1_UNSTABLE = ((Fraction(-1, 3), Fraction(2, 15)), (Fraction(1, 3), Fraction(2, 3)))
_Q2_UNSTABLE = ((Fraction(-1, 3), Fraction(1, 3)),)
_INPHASE_EXISTS_BELOW = Fraction(2, 3)
_INPHASE_STABLE = ((Fraction(-1, 3), Fraction(2, 3)),)
_OUTPHASE_EXISTS_BELOW = Fraction(2, 15)

_BOUNDARY_TOL = 1e-9


def _near(p, value) -> bool:
    if isinstance(p, Fraction):
        return p == value
    return abs(p - float(value)) <= _BOUNDARY_TOL


def _interval_state(p, intervals):
    """'inside', 'outside' or 'boundary' for open intervals of p."""
    for lo, hi in intervals:
        if _near(p, lo) or _near(p, hi):
            return "boundary"
    for lo, hi in intervals:
        if float(lo) < float(p) < float(hi):
            return "inside"
    return "outside"


def classify_11(a1, a2) -> list[StabilityReport]:
    """Stability table of the symmetric 1:1 system at parameter p = a1/(3*a2).

    Follows the classification of the averaged 1:1 flow: the q1 and q2
    normal modes always exist; in-phase (chi = 0, pi) and out-of-phase
    (chi = +-pi/2) periodic solutions exist only below parameter thresholds.
    """
    if a2 == 0:
        raise ValueError("classification undefined for a2 = 0 (parameter a1/(3*a2))")
    if _is_exact(a1) and _is_exact(a2):
        p = Fraction(a1, 3) / Fraction(a2)
    else:
        p = a1 / (3.0 * a2)
    a1f, a2f = float(a1), float(a2)
    pf = float(p)
    reports = []

    state = _interval_state(p, _Q1_UNSTABLE)
    reports.append(StabilityReport("q1-normal-mode", True,
                                   "boundary" if state == "boundary" else state == "outside",
                                   pf, a1f, a2f))

    state = _interval_state(p, _Q2_UNSTABLE)
    reports.append(StabilityReport("q2-normal-mode", True,
                                   "boundary" if state == "boundary" else state == "outside",
                                   pf, a1f, a2f))

    if _near(p, _INPHASE_EXISTS_BELOW):
        reports.append(StabilityReport("in-phase", True, "boundary", pf, a1f, a2f))
    elif float(p) < float(_INPHASE_EXISTS_BELOW):
        state = _interval_state(p, _INPHASE_STABLE)
        reports.append(StabilityReport("in-phase", True,
                                       "boundary" if state == "boundary" else state == "inside",
                                       pf, a1f, a2f))
    else:
        reports.append(StabilityReport("in-phase", False, None, pf, a1f, a2f))

    if _near(p, _OUTPHASE_EXISTS_BELOW):
        reports.append(StabilityReport("out-of-phase", True, "boundary", pf, a1f, a2f))
    elif float(p) < float(_OUTPHASE_EXISTS_BELOW):
        reports.append(StabilityReport("out-of-phase", True, True, pf, a1f, a2f))
    else:
        reports.append(StabilityReport("out-of-phase", False, None, pf, a1f, a2f))
    return reports


def _sym_coeffs(a1, a2):
    """Phase-drift building blocks of the symmetric averaged 1:1 system."""
    A = 5.0 * a1 * a1 / 12.0
    B = 0.5 * a1 * a2 + a2 * a2 / 3.0
    C = 5.0 * a2 * a2 / 12.0
    K = a1 * a2 / 12.0 - 0.5 * a2 * a2
    return A, B, C, K


def _orbit_ratio(a1, a2, cos2chi):
    """r1^2/r2^2 of the constant-amplitude 1:1 solutions at cos(2*chi) = +-1."""
    A, B, C, K = _sym_coeffs(a1, a2)
    den = A - B + cos2chi * K
    num = C - B + cos2chi * K
    if den == 0.0:
        return None
    return num / den


def _integrate_avg11(y0, params, horizon):
    cfg = IntegratorConfig(t_end=horizon, sample_dt=horizon / 2000.0,
                           method="rk45", rtol=1e-8, atol=1e-10)
    return integrate(lambda t, y: avg11_rhs(t, y, params), y0, cfg)


_GROWN = 30.0
_BOUNDED = 10.0


def _growth_verdict(growth, claim_stable):
    if claim_stable == "boundary" or claim_stable is None:
        return "indeterminate"
    if claim_stable:
        if growth < _BOUNDED:
            return "consistent"
        if growth > _GROWN:
            return "inconsistent"
    else:
        if growth > _GROWN:
            return "consistent"
        if growth < _BOUNDED:
            return "inconsistent"
    return "indeterminate"


def verify_stability_numerically(report: StabilityReport, E0: float, epsilon: float,
                                 perturbation: float = 1e-3,
                                 horizon_factor: float = 50.0) -> str:
    """Cross-check a 1:1 stability claim by integrating the averaged flow.

    Seeds the mode/orbit with a relative perturbation and follows the
    symmetric averaged system over horizon_factor/(epsilon^2 * E0) time
    units; returns "consistent", "inconsistent" or "indeterminate" (the
    latter also for zero perturbation or boundary claims).
    """
    if perturbation == 0.0:
        return "indeterminate"
    if perturbation < 0.0 or E0 <= 0.0:
        raise ValueError("need E0 > 0 and perturbation >= 0")
    params = ModelParams(report.a1, report.a2, 0.0, 0.0, omega=1.0,
                         epsilon=epsilon, n=2)
    radius = math.sqrt(2.0 * E0)
    horizon = horizon_factor / (epsilon**2 * E0)
    chi0 = 0.7  # generic angle, away from the sin(2*chi) zeros

    if report.mode in ("q1-normal-mode", "q2-normal-mode"):
        seed = perturbation * radius
        big = math.sqrt(2.0 * E0 - seed * seed)
        if report.mode == "q1-normal-mode":
            y0 = np.array([big, chi0, seed, 0.0, 0.0])
            small_col = 2
        else:
            y0 = np.array([seed, chi0, big, 0.0, 0.0])
            small_col = 0
        traj = _integrate_avg11(y0, params, horizon)
        growth = float(np.max(traj.states[:, small_col])) / seed
        return _growth_verdict(growth, report.stable)

    cos2chi = 1.0 if report.mode == "in-phase" else -1.0
    chi_star = 0.0 if report.mode == "in-phase" else 0.5 * math.pi
    ratio = _orbit_ratio(report.a1, report.a2, cos2chi)
    found = ratio is not None and ratio > 0.0
    if not report.exists:
        return "consistent" if not found else "inconsistent"
    if not found:
        return "inconsistent"
    r2_star = math.sqrt(2.0 * E0 / (1.0 + ratio))
    r1_star = math.sqrt(2.0 * E0 * ratio / (1.0 + ratio))
    r1 = r1_star * (1.0 + perturbation)
    r2 = math.sqrt(max(2.0 * E0 - r1 * r1, 1e-12 * E0))
    y0 = np.array([r1, chi_star + perturbation, r2, 0.0, 0.0])
    traj = _integrate_avg11(y0, params, horizon)
    dr = (traj.states[:, 0] - r1_star) / radius
    dchi = wrap_angle((traj.states[:, 1] - traj.states[:, 3]) - chi_star)
    dev = np.hypot(dr, dchi)
    growth = float(np.max(dev) / max(dev[0], 1e-300))
    return _growth_verdict(growth, report.stable)
