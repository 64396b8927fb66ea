"""Two degrees-of-freedom cubic oscillator with slowly decaying asymmetry.

A unit-frequency mode q1 is coupled to a mode q2 of frequency omega through
cubic terms. The coefficients a1, a2 multiply terms that are even in q2
(mirror symmetric); a3, a4 multiply the symmetry-breaking terms, which are
damped by a monotone factor alpha(delta*t) so the dynamics drifts toward
the symmetric system as t grows.

First-order equations of motion for y = [q1, v1, q2, v2]:

    q1' = v1
    v1' = -q1          + eps*(a1*q1^2 + a2*q2^2) + eps*alpha(delta*t)*2*a4*q1*q2
    q2' = v2
    v2' = -omega^2*q2  + eps*2*a2*q1*q2          + eps*alpha(delta*t)*(a3*q2^2 + a4*q1^2)

The cubic terms carry the explicit small factor eps; eps = 1 recovers the
unscaled potential. The decay rate defaults to delta = eps**n; delta = 0
freezes alpha at 1 and makes the system conservative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ALPHA_KINDS",
    "ModelParams",
    "CartesianState",
    "alpha",
    "eval_hamiltonian",
    "full_rhs",
    "intermediate_rhs",
    "dissipative_rhs",
    "dissipative_to_cartesian",
    "cartesian_to_dissipative",
]

ALPHA_KINDS = ("exponential", "polynomial")


def alpha(tau, kind="exponential"):
    """Decay factor of the symmetry-breaking terms at slow time tau >= 0.

    Monotone from alpha(0) = 1 toward 0. "exponential" is exp(-tau);
    "polynomial" is 1/(1 + tau) and is accepted for the full equations of
    motion only (the averaged systems and the dissipative transform assume
    the exponential law).
    """
    arr = np.asarray(tau, dtype=float)
    if np.any(arr < 0.0):
        raise ValueError("slow time tau must be >= 0")
    if kind == "exponential":
        out = np.exp(-arr)
    elif kind == "polynomial":
        out = 1.0 / (1.0 + arr)
    else:
        raise ValueError(f"unknown alpha kind {kind!r}")
    return float(out) if arr.ndim == 0 else out


@dataclass(frozen=True)
class ModelParams:
    """Coefficients of the cubic model and of its slow decay.

    The interesting asymmetric regime has a4 != 0. ``delta`` defaults to
    ``epsilon**n``; pass ``delta=0`` for the frozen (conservative) system.
    """

    a1: float
    a2: float
    a3: float
    a4: float
    omega: float
    epsilon: float
    n: int = 2
    alpha_kind: str = "exponential"
    delta: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        if self.omega <= 0.0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        if self.n < 1 or int(self.n) != self.n:
            raise ValueError(f"decay exponent n must be a positive integer, got {self.n}")
        if self.alpha_kind not in ALPHA_KINDS:
            raise ValueError(f"unknown alpha kind {self.alpha_kind!r}")
        if self.delta is None:
            object.__setattr__(self, "delta", float(self.epsilon) ** int(self.n))
        elif self.delta < 0.0:
            raise ValueError(f"delta must be >= 0, got {self.delta}")

    def alpha(self, tau):
        """Evaluate the decay factor of these parameters at slow time tau."""
        return alpha(tau, self.alpha_kind)

    def replace(self, **changes) -> "ModelParams":
        from dataclasses import replace as _replace

        return _replace(self, **changes)


@dataclass(frozen=True)
class CartesianState:
    """Time-stamped phase-space point (q1, v1, q2, v2)."""

    t: float
    q1: float
    v1: float
    q2: float
    v2: float

    def __post_init__(self):
        for name in ("t", "q1", "v1", "q2", "v2"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"non-finite state component {name}")

    def as_array(self) -> np.ndarray:
        return np.array([self.q1, self.v1, self.q2, self.v2])

    @classmethod
    def from_array(cls, t, y) -> "CartesianState":
        return cls(float(t), float(y[0]), float(y[1]), float(y[2]), float(y[3]))


def _alpha_at(t, p: ModelParams) -> float:
    d = p.delta * t
    if d < 0.0:
        raise ValueError("alpha undefined for negative slow time")
    if p.alpha_kind == "exponential":
        return math.exp(-d)
    return 1.0 / (1.0 + d)


def eval_hamiltonian(t, y, p: ModelParams) -> float:
    """Energy at time t: quadratic part plus the eps-scaled cubic potential."""
    q1, v1, q2, v2 = (float(y[0]), float(y[1]), float(y[2]), float(y[3]))
    al = _alpha_at(t, p)
    h2 = 0.5 * (v1 * v1 + q1 * q1) + 0.5 * (v2 * v2 + p.omega**2 * q2 * q2)
    h3 = p.a1 * q1**3 / 3.0 + p.a2 * q1 * q2 * q2
    h3t = p.a3 * q2**3 / 3.0 + p.a4 * q1 * q1 * q2
    return h2 - p.epsilon * (h3 + al * h3t)


def full_rhs(t, y, p: ModelParams) -> np.ndarray:
    """Right-hand side of the full equations of motion."""
    q1, v1, q2, v2 = (float(y[0]), float(y[1]), float(y[2]), float(y[3]))
    al = _alpha_at(t, p)
    e = p.epsilon
    dv1 = -q1 + e * (p.a1 * q1 * q1 + p.a2 * q2 * q2) + e * al * 2.0 * p.a4 * q1 * q2
    dv2 = -p.omega**2 * q2 + e * 2.0 * p.a2 * q1 * q2 + e * al * (p.a3 * q2 * q2 + p.a4 * q1 * q1)
    return np.array([v1, dv1, v2, dv2])


def intermediate_rhs(t, y, p: ModelParams) -> np.ndarray:
    """Full right-hand side with the symmetric (a1, a2) cubic terms removed.

    The plane q1 = v1 = 0 is exactly invariant: the q2 mode survives as a
    normal mode of this system.
    """
    q1, v1, q2, v2 = (float(y[0]), float(y[1]), float(y[2]), float(y[3]))
    al = _alpha_at(t, p)
    e = p.epsilon
    dv1 = -q1 + e * al * 2.0 * p.a4 * q1 * q2
    dv2 = -p.omega**2 * q2 + e * al * (p.a3 * q2 * q2 + p.a4 * q1 * q1)
    return np.array([v1, dv1, v2, dv2])


def dissipative_rhs(t, y, p: ModelParams) -> np.ndarray:
    """Autonomous damped form of the intermediate system, z = exp(-delta*t)*q.

    Valid for the exponential decay law only; the homogeneity of the cubic
    terms turns the explicit time dependence into linear friction 2*delta:

        z1'' + z1         = -2*delta*z1' - delta^2*z1 + eps*2*a4*z1*z2
        z2'' + omega^2*z2 = -2*delta*z2' - delta^2*z2 + eps*(a3*z2^2 + a4*z1^2)
    """
    if p.alpha_kind != "exponential":
        raise ValueError("dissipative form only exists for the exponential decay law")
    z1, w1, z2, w2 = (float(y[0]), float(y[1]), float(y[2]), float(y[3]))
    d = p.delta
    e = p.epsilon
    dw1 = -z1 - 2.0 * d * w1 - d * d * z1 + e * 2.0 * p.a4 * z1 * z2
    dw2 = -p.omega**2 * z2 - 2.0 * d * w2 - d * d * z2 + e * (p.a3 * z2 * z2 + p.a4 * z1 * z1)
    return np.array([w1, dw1, w2, dw2])


def dissipative_to_cartesian(t, z, delta):
    """Map damped coordinates back to the intermediate system: q = exp(delta*t)*z.

    Accepts a single state (shape (4,)) or a stack of states (shape (m, 4))
    with matching t.
    """
    z = np.asarray(z, dtype=float)
    s = np.exp(np.asarray(delta * np.asarray(t, dtype=float)))
    z1, w1, z2, w2 = np.moveaxis(z, -1, 0)
    q1 = s * z1
    v1 = s * (w1 + delta * z1)
    q2 = s * z2
    v2 = s * (w2 + delta * z2)
    return np.stack([q1, v1, q2, v2], axis=-1)


def cartesian_to_dissipative(t, y, delta):
    """Inverse of :func:`dissipative_to_cartesian`: z = exp(-delta*t)*q."""
    y = np.asarray(y, dtype=float)
    s = np.exp(-np.asarray(delta * np.asarray(t, dtype=float)))
    q1, v1, q2, v2 = np.moveaxis(y, -1, 0)
    z1 = s * q1
    w1 = s * (v1 - delta * q1)
    z2 = s * q2
    w2 = s * (v2 - delta * q2)
    return np.stack([z1, w1, z2, w2], axis=-1)
