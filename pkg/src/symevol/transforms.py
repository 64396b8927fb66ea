"""Amplitude/phase coordinates, actions, combination angles, averaging helpers.

The co-rotating polar chart used throughout is

    q1 = r1*cos(t + psi1),        v1 = -r1*sin(t + psi1),
    q2 = r2*cos(omega*t + psi2),  v2 = -omega*r2*sin(omega*t + psi2),

so that (r1, psi1, r2, psi2) drift slowly when the cubic coupling is weak.
Phases are wrapped to (-pi, pi] at reporting; along trajectories a
continuous lift should be used (see :func:`unwrap_phase_series`) so that
combination angles are differentiable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import CartesianState, ModelParams

__all__ = [
    "TWO_PI",
    "COMBINATION_COEFFS",
    "PhaseUndefinedError",
    "PolarState",
    "ActionPair",
    "wrap_angle",
    "cart_to_polar",
    "polar_to_cart",
    "actions",
    "actions_from_polar",
    "combination_angle",
    "slow_rhs",
    "near_identity_u",
    "transformed_rhs",
    "unwrap_phase_series",
]

TWO_PI = 2.0 * math.pi

# psi1/psi2 multipliers of the slow angles used at the 1:2, 1:2 second
# order, 1:3 and 1:1 resonances.
COMBINATION_COEFFS = {
    "chi12": (2, -1),
    "chi2": (4, -2),
    "chi3": (6, -2),
    "chi11": (1, -1),
}


class PhaseUndefinedError(ValueError):
    """Raised when a mode amplitude vanishes and its phase is meaningless."""


@dataclass(frozen=True)
class PolarState:
    """Amplitudes and slow phases (r1, psi1, r2, psi2) plus slow time tau."""

    r1: float
    psi1: float
    r2: float
    psi2: float
    tau: float = 0.0

    def __post_init__(self):
        if self.r1 < 0.0 or self.r2 < 0.0:
            raise ValueError("amplitudes must be non-negative")

    def as_array(self) -> np.ndarray:
        return np.array([self.r1, self.psi1, self.r2, self.psi2, self.tau])

    @classmethod
    def from_array(cls, y) -> "PolarState":
        return cls(*(float(v) for v in y[:5]))


@dataclass(frozen=True)
class ActionPair:
    """Per-mode actions E1 = (v1^2 + q1^2)/2 and E2 = (v2^2 + omega^2*q2^2)/2."""

    E1: float
    E2: float


def wrap_angle(x):
    """Wrap angle(s) to the interval (-pi, pi]."""
    arr = np.asarray(x, dtype=float)
    wrapped = math.pi - np.remainder(math.pi - arr, TWO_PI)
    return float(wrapped) if arr.ndim == 0 else wrapped


def cart_to_polar(state: CartesianState, omega: float, delta: float = 0.0) -> PolarState:
    """Invert the co-rotating polar chart at the state's own time.

    Raises :class:`PhaseUndefinedError` on a normal mode (zero amplitude in
    either degree of freedom); callers near normal modes must work with the
    Cartesian variables instead.
    """
    r1 = math.hypot(state.q1, state.v1)
    r2 = math.hypot(state.q2, state.v2 / omega)
    if r1 == 0.0:
        raise PhaseUndefinedError("mode 1 amplitude is zero, psi1 undefined")
    if r2 == 0.0:
        raise PhaseUndefinedError("mode 2 amplitude is zero, psi2 undefined")
    theta1 = math.atan2(-state.v1, state.q1)
    theta2 = math.atan2(-state.v2 / omega, state.q2)
    psi1 = wrap_angle(theta1 - state.t)
    psi2 = wrap_angle(theta2 - omega * state.t)
    return PolarState(r1, psi1, r2, psi2, tau=delta * state.t)


def polar_to_cart(polar: PolarState, omega: float, t: float) -> CartesianState:
    """Evaluate the polar chart at time t."""
    th1 = t + polar.psi1
    th2 = omega * t + polar.psi2
    return CartesianState(
        t,
        polar.r1 * math.cos(th1),
        -polar.r1 * math.sin(th1),
        polar.r2 * math.cos(th2),
        -omega * polar.r2 * math.sin(th2),
    )


def actions(state: CartesianState, omega: float) -> ActionPair:
    """Actions of the two modes from Cartesian data."""
    e1 = 0.5 * (state.v1**2 + state.q1**2)
    e2 = 0.5 * (state.v2**2 + omega**2 * state.q2**2)
    return ActionPair(e1, e2)


def actions_from_polar(polar: PolarState, omega: float) -> ActionPair:
    """Actions expressed through the amplitudes: E1 = r1^2/2, E2 = omega^2*r2^2/2."""
    return ActionPair(0.5 * polar.r1**2, 0.5 * omega**2 * polar.r2**2)


def combination_angle(kind: str, psi1, psi2):
    """Resonant combination of the slow phases, wrapped to (-pi, pi]."""
    try:
        m1, m2 = COMBINATION_COEFFS[kind]
    except KeyError:
        raise ValueError(f"unknown combination angle kind {kind!r}") from None
    return wrap_angle(m1 * np.asarray(psi1) + m2 * np.asarray(psi2))


def slow_rhs(t, y, p: ModelParams) -> np.ndarray:
    """Equations of motion in the polar chart, with tau as fifth variable.

    Obtained by variation of constants from the Cartesian equations; exactly
    equivalent to the full system away from the normal modes. Works on
    scalar or array t (amplitudes and phases frozen), and on complex input
    for derivative checks.
    """
    r1, psi1, r2, psi2, tau = y[0], y[1], y[2], y[3], y[4]
    if p.alpha_kind == "exponential":
        al = np.exp(-tau)
    else:
        al = 1.0 / (1.0 + tau)
    w = p.omega
    e = p.epsilon
    th1 = t + psi1
    th2 = w * t + psi2
    c1, s1 = np.cos(th1), np.sin(th1)
    c2, s2 = np.cos(th2), np.sin(th2)
    g1 = p.a1 * r1 * r1 * c1 * c1 + p.a2 * r2 * r2 * c2 * c2 + al * 2.0 * p.a4 * r1 * c1 * r2 * c2
    g2 = 2.0 * p.a2 * r1 * c1 * r2 * c2 + al * (p.a3 * r2 * r2 * c2 * c2 + p.a4 * r1 * r1 * c1 * c1)
    dr1 = -e * s1 * g1
    dpsi1 = -e * c1 * g1 / r1
    dr2 = -(e / w) * s2 * g2
    dpsi2 = -(e / w) * c2 * g2 / r2
    dtau = np.zeros_like(dr1) + p.delta
    return np.stack([np.broadcast_to(dr1, dtau.shape), np.broadcast_to(dpsi1, dtau.shape),
                     np.broadcast_to(dr2, dtau.shape), np.broadcast_to(dpsi2, dtau.shape),
                     dtau])


_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gauss_nodes(n: int):
    if n not in _GL_CACHE:
        _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _GL_CACHE[n]


def gauss_integral(f, a: float, b: float, panels: int = 8, nodes: int = 10):
    """Composite Gauss-Legendre integral of a vector-valued f over [a, b]."""
    x, wts = _gauss_nodes(nodes)
    edges = np.linspace(a, b, panels + 1)
    total = None
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        for xi, wi in zip(x, wts):
            val = wi * np.asarray(f(mid + half * xi))
            contrib = half * val
            total = contrib if total is None else total + contrib
    return total


def near_identity_u(f1, t: float, y, period: float = TWO_PI, mean_tol: float = 1e-9,
                    panels_per_period: int = 8, nodes: int = 10) -> np.ndarray:
    """Oscillatory correction u(t, y) = integral of f1(s, y) ds from 0 to t.

    f1 must be ``period``-periodic in its first argument with zero t-average
    at frozen y, so that u stays bounded; a non-zero mean is detected and
    rejected. The integral is computed by composite Gauss-Legendre
    quadrature with y held fixed.
    """
    y = np.asarray(y, dtype=float)
    mean = gauss_integral(lambda s: f1(s, y), 0.0, period,
                          panels=panels_per_period, nodes=nodes) / period
    if np.max(np.abs(mean)) > mean_tol:
        raise ValueError(
            f"f1 has non-zero t-average (max |mean| = {np.max(np.abs(mean)):.3e}); "
            "the correction would grow unboundedly"
        )
    if t == 0.0:
        return np.zeros_like(np.asarray(f1(0.0, y), dtype=float))
    panels = max(1, math.ceil(abs(t) / period * panels_per_period))
    return gauss_integral(lambda s: f1(s, y), 0.0, t, panels=panels, nodes=nodes)


def transformed_rhs(f2, t, y, epsilon: float) -> np.ndarray:
    """Leading vector field after removing a zero-mean f1: y' = eps*f2(t, y)."""
    return epsilon * np.asarray(f2(t, y))


def unwrap_phase_series(theta_wrapped: np.ndarray) -> np.ndarray:
    """Continuous lift of a sampled angle series (samples closer than pi apart)."""
    return np.unwrap(np.asarray(theta_wrapped, dtype=float))
