"""Averaged (normal form) vector fields for the 1:2, 1:3 and 1:1 resonances.

All fields act on the polar state y = [r1, psi1, r2, psi2, tau] used by
:func:`symevol.transforms.slow_rhs`; the slow time obeys tau' = delta and
the decay factor enters as exp(-tau). A Gauss-Legendre quadrature oracle
(:func:`average_slow_field`, :func:`second_order_average_11`) recomputes
the averages numerically so the closed forms can be validated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import CartesianState, ModelParams
from .transforms import PolarState, slow_rhs, _gauss_nodes

__all__ = [
    "ZeroAmplitudeError",
    "INVARIANT_NAMES",
    "avg12_first_rhs",
    "chi12_rhs",
    "avg12_second_rhs",
    "chi2_rhs",
    "avg13_rhs",
    "chi3_rhs",
    "avg11_rhs",
    "avg12_first_cart",
    "avg12_second_cart",
    "polar_to_slow_cart",
    "slow_cart_amplitudes",
    "invariant",
    "average_slow_field",
    "second_order_average_11",
    "fit_I3_11",
    "I3FitResult",
]

INVARIANT_NAMES = ("E0_12", "I3_12", "E0_11", "I3_11")


class ZeroAmplitudeError(ValueError):
    """Polar averaged equations are singular on the normal modes."""


def _check_amplitudes(r1, r2):
    if r1 <= 0.0 or r2 <= 0.0:
        raise ZeroAmplitudeError("averaged polar fields need r1 > 0 and r2 > 0")


def _require_omega(p: ModelParams, omega: float, what: str):
    if p.omega != omega:
        raise ValueError(f"{what} applies to omega = {omega:g}, params have omega = {p.omega:g}")


def _require_exponential(p: ModelParams):
    if p.alpha_kind != "exponential":
        raise ValueError("averaged systems support the exponential decay law only")


def avg12_first_rhs(t, y, p: ModelParams) -> np.ndarray:
    """First-order averaged 1:2 field; chi = 2*psi1 - psi2 is the slow angle.

    Conserves E0 = r1^2/2 + 2*r2^2 and I3 = a4*r1^2*r2*cos(chi) exactly.
    """
    _require_omega(p, 2.0, "the first-order averaged 1:2 system")
    _require_exponential(p)
    r1, psi1, r2, psi2, tau = (float(v) for v in y[:5])
    _check_amplitudes(r1, r2)
    chi = 2.0 * psi1 - psi2
    k = p.epsilon * math.exp(-tau) * p.a4
    s, c = math.sin(chi), math.cos(chi)
    return np.array([
        -0.5 * k * r1 * r2 * s,
        -0.5 * k * r2 * c,
        0.125 * k * r1 * r1 * s,
        -0.125 * k * (r1 * r1 / r2) * c,
        p.delta,
    ])


def chi12_rhs(y, p: ModelParams) -> float:
    """Drift of chi = 2*psi1 - psi2 under the first-order averaged 1:2 flow.

    Vanishes on the resonance manifold r1^2 = 8*r2^2 (any chi) and for
    chi = +-pi/2 (any amplitudes).
    """
    _require_omega(p, 2.0, "the first-order averaged 1:2 system")
    _require_exponential(p)
    r1, psi1, r2, psi2, tau = (float(v) for v in y[:5])
    if r2 <= 0.0:
        raise ZeroAmplitudeError("chi drift is singular at r2 = 0")
    chi = 2.0 * psi1 - psi2
    return p.epsilon * p.a4 * math.exp(-tau) * (-r2 + 0.125 * r1 * r1 / r2) * math.cos(chi)


def avg12_second_rhs(t, y, p: ModelParams) -> np.ndarray:
    """Second-order averaged 1:2 field.

    The amplitude equations are unchanged from first order; the phases gain
    epsilon^2 drifts, with the decayed contributions carrying exp(-2*tau).
    Passing tau = inf gives the autonomous symmetric limit.
    """
    _require_omega(p, 2.0, "the second-order averaged 1:2 system")
    _require_exponential(p)
    r1, psi1, r2, psi2, tau = (float(v) for v in y[:5])
    _check_amplitudes(r1, r2)
    a1, a2, a3, a4 = p.a1, p.a2, p.a3, p.a4
    e = p.epsilon
    e2 = e * e
    em = math.exp(-tau)
    em2 = em * em
    chi = 2.0 * psi1 - psi2
    s, c = math.sin(chi), math.cos(chi)
    u = r1 * r1
    w = r2 * r2
    dr1 = -0.5 * e * em * a4 * r1 * r2 * s
    dr2 = 0.125 * e * em * a4 * u * s
    dpsi1 = (-0.5 * e * em * a4 * r2 * c
             - e2 * (a1 * a1 * u / 24.0 + 0.5 * a1 * a2 * w
                     + em2 * (a3 * a4 * w / 8.0 + a4 * a4 * (9.0 * u + 4.0 * w) / 64.0)))
    dpsi2 = (-0.125 * e * em * a4 * (u / r2) * c
             - e2 * (0.25 * a1 * a2 * u + a2 * a2 * u / 30.0 + 29.0 * a2 * a2 * w / 120.0
                     + em2 * (a3 * a4 * u / 16.0 + a4 * a4 * u / 32.0 + 5.0 * a3 * a3 * w / 96.0)))
    return np.array([dr1, dpsi1, dr2, dpsi2, p.delta])


def chi2_rhs(r1, r2, p: ModelParams) -> float:
    """Drift of chi2 = 4*psi1 - 2*psi2 in the late (symmetric) 1:2 regime.

    Equals 4*psi1' - 2*psi2' of the second-order field at tau = inf; a zero
    at positive amplitudes marks a second-order resonance manifold.
    """
    a1, a2 = p.a1, p.a2
    c_u = -a1 * a1 / 6.0 + 0.5 * a1 * a2 + a2 * a2 / 15.0
    c_w = -2.0 * a1 * a2 + 29.0 * a2 * a2 / 60.0
    return p.epsilon**2 * (c_u * r1 * r1 + c_w * r2 * r2)


def avg13_rhs(t, y, p: ModelParams) -> np.ndarray:
    """Second-order averaged 1:3 field: amplitudes are frozen at this order,
    only the phases drift."""
    _require_omega(p, 3.0, "the averaged 1:3 system")
    _require_exponential(p)
    r1, psi1, r2, psi2, tau = (float(v) for v in y[:5])
    a1, a2 = p.a1, p.a2
    e2 = p.epsilon**2
    u = r1 * r1
    w = r2 * r2
    dpsi1 = -e2 * (5.0 * a1 * a1 * u / 12.0 + (0.5 * a1 * a2 - a2 * a2 / 35.0) * w)
    dpsi2 = -e2 * ((a1 * a2 / 6.0 + a2 * a2 / 105.0) * u + 23.0 * a2 * a2 * w / 140.0)
    return np.array([0.0, dpsi1, 0.0, dpsi2, p.delta])


def chi3_rhs(r1, r2, p: ModelParams, literal_47_140: bool = False) -> float:
    """Drift of chi3 = 6*psi1 - 2*psi2 at the 1:3 resonance.

    The 47/140 coefficient is paired with a2^2 for dimensional consistency
    with its sibling terms; ``literal_47_140=True`` keeps it as a bare
    constant for comparison.
    """
    a1, a2 = p.a1, p.a2
    c_u = 2.5 * a1 * a1 - a1 * a2 / 6.0 - a2 * a2 / 105.0
    c_w = 3.0 * a1 * a2 + (47.0 / 140.0) * (1.0 if literal_47_140 else a2 * a2)
    return -p.epsilon**2 * (c_u * r1 * r1 - c_w * r2 * r2)


def avg11_rhs(t, y, p: ModelParams) -> np.ndarray:
    """Second-order averaged 1:1 field; chi = psi1 - psi2 is the slow angle.

    Conserves E0 = (r1^2 + r2^2)/2 exactly, decayed terms included. With
    a3 = a4 = 0 (or tau = inf) this is the symmetric system, which carries
    a second conserved combination fitted by :func:`fit_I3_11`.
    """
    _require_omega(p, 1.0, "the averaged 1:1 system")
    _require_exponential(p)
    r1, psi1, r2, psi2, tau = (float(v) for v in y[:5])
    _check_amplitudes(r1, r2)
    a1, a2, a3, a4 = p.a1, p.a2, p.a3, p.a4
    e2 = p.epsilon**2
    al = math.exp(-tau)
    chi = psi1 - psi2
    s2c = math.sin(2.0 * chi)
    c2c = math.cos(2.0 * chi)
    u = r1 * r1
    w = r2 * r2
    k_sym = a1 * a2 / 12.0 - 0.5 * a2 * a2
    k_asym = a3 * a4 / 12.0 - 0.5 * a4 * a4
    k_tot = k_sym + al * k_asym
    dr1 = e2 * k_tot * r1 * w * s2c
    dr2 = -e2 * k_tot * u * r2 * s2c
    dpsi1 = (-e2 * (5.0 * a1 * a1 * u / 12.0 + (0.5 * a1 * a2 + a2 * a2 / 3.0) * w
                    - k_sym * w * c2c)
             - e2 * al * ((0.5 * a3 * a4 + a4 * a4 / 3.0) * w + 5.0 * a4 * a4 * u / 12.0
                          - k_asym * w * c2c))
    dpsi2 = (-e2 * ((0.5 * a1 * a2 + a2 * a2 / 3.0) * u + 5.0 * a2 * a2 * w / 12.0
                    - k_sym * u * c2c)
             - e2 * al * (5.0 * a3 * a3 * w / 12.0 + (0.5 * a3 * a4 + a4 * a4 / 3.0) * u
                          - k_asym * u * c2c))
    return np.array([dr1, dpsi1, dr2, dpsi2, p.delta])


def avg12_first_cart(t, y, p: ModelParams) -> np.ndarray:
    """First-order averaged 1:2 field in regular slow-Cartesian coordinates.

    With A1 = x1 + i*y1 = r1*exp(i*psi1) and A2 = x2 + i*y2 the field is
    polynomial (A1' = -i*kappa*conj(A1)*A2, A2' = -i*kappa/4*A1^2 with
    kappa = eps*exp(-tau)*a4/2), so trajectories pass smoothly through
    normal-mode crossings where the polar chart degenerates.
    """
    _require_omega(p, 2.0, "the first-order averaged 1:2 system")
    _require_exponential(p)
    x1, y1, x2, y2, tau = (float(v) for v in y[:5])
    kappa = 0.5 * p.epsilon * math.exp(-tau) * p.a4
    dx1 = kappa * (x1 * y2 - y1 * x2)
    dy1 = -kappa * (x1 * x2 + y1 * y2)
    dx2 = 0.5 * kappa * x1 * y1
    dy2 = -0.25 * kappa * (x1 * x1 - y1 * y1)
    return np.array([dx1, dy1, dx2, dy2, p.delta])


def avg12_second_cart(t, y, p: ModelParams) -> np.ndarray:
    """Second-order averaged 1:2 field in regular slow-Cartesian coordinates.

    The epsilon^2 phase drifts act as amplitude-dependent rotations
    A_k' += i*phi_k*A_k, which keeps the field polynomial.
    """
    _require_omega(p, 2.0, "the second-order averaged 1:2 system")
    _require_exponential(p)
    x1, y1, x2, y2, tau = (float(v) for v in y[:5])
    a1, a2, a3, a4 = p.a1, p.a2, p.a3, p.a4
    e2 = p.epsilon**2
    em2 = math.exp(-2.0 * tau)
    u = x1 * x1 + y1 * y1
    w = x2 * x2 + y2 * y2
    base = avg12_first_cart(t, y, p)
    phi1 = -e2 * (a1 * a1 * u / 24.0 + 0.5 * a1 * a2 * w
                  + em2 * (a3 * a4 * w / 8.0 + a4 * a4 * (9.0 * u + 4.0 * w) / 64.0))
    phi2 = -e2 * (0.25 * a1 * a2 * u + a2 * a2 * u / 30.0 + 29.0 * a2 * a2 * w / 120.0
                  + em2 * (a3 * a4 * u / 16.0 + a4 * a4 * u / 32.0 + 5.0 * a3 * a3 * w / 96.0))
    base[0] += -phi1 * y1
    base[1] += phi1 * x1
    base[2] += -phi2 * y2
    base[3] += phi2 * x2
    return base


def polar_to_slow_cart(y) -> np.ndarray:
    """Map [r1, psi1, r2, psi2, tau] to the regular chart [x1, y1, x2, y2, tau]."""
    r1, psi1, r2, psi2, tau = (float(v) for v in y[:5])
    return np.array([r1 * math.cos(psi1), r1 * math.sin(psi1),
                     r2 * math.cos(psi2), r2 * math.sin(psi2), tau])


def slow_cart_amplitudes(states: np.ndarray):
    """Amplitudes (r1, r2) along a regular-chart trajectory."""
    states = np.asarray(states, dtype=float)
    return (np.hypot(states[..., 0], states[..., 1]),
            np.hypot(states[..., 2], states[..., 3]))


def _polar_components(state):
    if isinstance(state, PolarState):
        return state.r1, state.psi1, state.r2, state.psi2
    arr = np.asarray(state, dtype=float)
    return float(arr[0]), float(arr[1]), float(arr[2]), float(arr[3])


def invariant(name: str, state, p: ModelParams, i3_coeffs=None) -> float:
    """Evaluate a conserved quantity of the averaged flows.

    Polar states (PolarState or [r1, psi1, r2, psi2, ...]) use the
    amplitude/phase forms; CartesianState uses the equivalent expressions in
    the original variables. ``I3_11`` additionally needs the fitted
    coefficients (alpha, beta) from :func:`fit_I3_11`.
    """
    if name not in INVARIANT_NAMES:
        raise ValueError(f"unknown invariant {name!r}; know {INVARIANT_NAMES}")
    cartesian = isinstance(state, CartesianState)
    if name == "E0_12":
        _require_omega(p, 2.0, "E0_12")
        if cartesian:
            return (0.5 * (state.v1**2 + state.q1**2)
                    + 0.5 * (state.v2**2 + 4.0 * state.q2**2))
        r1, _, r2, _ = _polar_components(state)
        return 0.5 * r1 * r1 + 2.0 * r2 * r2
    if name == "I3_12":
        _require_omega(p, 2.0, "I3_12")
        if cartesian:
            q1, v1, q2, v2 = state.q1, state.v1, state.q2, state.v2
            return p.a4 * ((q1 * q1 - v1 * v1) * q2 + q1 * v1 * v2)
        r1, psi1, r2, psi2 = _polar_components(state)
        return p.a4 * r1 * r1 * r2 * math.cos(2.0 * psi1 - psi2)
    if name == "E0_11":
        _require_omega(p, 1.0, "E0_11")
        if cartesian:
            return 0.5 * (state.q1**2 + state.v1**2 + state.q2**2 + state.v2**2)
        r1, _, r2, _ = _polar_components(state)
        return 0.5 * (r1 * r1 + r2 * r2)
    # I3_11
    _require_omega(p, 1.0, "I3_11")
    if i3_coeffs is None:
        raise ValueError("I3_11 needs the fitted (alpha, beta) coefficients")
    ca, cb = (float(c) for c in i3_coeffs)
    if cartesian:
        q1, v1, q2, v2 = state.q1, state.v1, state.q2, state.v2
        u = q1 * q1 + v1 * v1
        return ((q1 * q2 + v1 * v2) ** 2 - (q1 * v2 - v1 * q2) ** 2
                + ca * u * u + cb * u)
    r1, psi1, r2, psi2 = _polar_components(state)
    u = r1 * r1
    w = r2 * r2
    return u * w * math.cos(2.0 * (psi1 - psi2)) + ca * u * u + cb * u


def average_slow_field(y, p: ModelParams, nodes: int = 64) -> np.ndarray:
    """Numerical t-average of the polar equations of motion at frozen y.

    Gauss-Legendre quadrature over one common period (2*pi for integer
    omega); the oracle against which the first-order averaged fields are
    checked.
    """
    x, wts = _gauss_nodes(nodes)
    tq = math.pi * (x + 1.0)
    y = np.asarray(y, dtype=float)
    vals = slow_rhs(tq, y, p)
    return (vals @ wts) * 0.5


def _slow_unit_field_11(t, x, p: ModelParams, al: float):
    """Polar field for omega = 1 with eps scaled out and alpha frozen at al.

    Complex-safe in x so the oracle can differentiate it by complex step.
    """
    r1, psi1, r2, psi2 = x[0], x[1], x[2], x[3]
    th1 = t + psi1
    th2 = t + psi2
    c1, s1 = np.cos(th1), np.sin(th1)
    c2, s2 = np.cos(th2), np.sin(th2)
    g1 = p.a1 * r1 * r1 * c1 * c1 + p.a2 * r2 * r2 * c2 * c2 + al * 2.0 * p.a4 * r1 * c1 * r2 * c2
    g2 = 2.0 * p.a2 * r1 * c1 * r2 * c2 + al * (p.a3 * r2 * r2 * c2 * c2 + p.a4 * r1 * r1 * c1 * c1)
    return np.stack([
        -s1 * g1,
        -c1 * g1 / r1,
        -s2 * g2,
        -c2 * g2 / r2,
    ])


def second_order_average_11(y, p: ModelParams, al: float = 0.0,
                            nodes: int = 48, inner_nodes: int = 10) -> np.ndarray:
    """Numerical second-order average of the 1:1 polar system at frozen alpha.

    The first-order average vanishes identically at omega = 1, so the
    epsilon^2 field is the t-average of Df(t,y).u(t,y) with
    u(t,y) = int_0^t f(s,y) ds, independent of the antiderivative's
    integration constant. Jacobians are computed by complex step; returns
    the epsilon^2-scaled 4-component field for direct comparison with
    :func:`avg11_rhs`.
    """
    _require_omega(p, 1.0, "the averaged 1:1 oracle")
    y4 = np.asarray(y, dtype=float)[:4]
    xg, wg = _gauss_nodes(nodes)
    tq = math.pi * (xg + 1.0)

    def f(t, x):
        return _slow_unit_field_11(t, x, p, al)

    # u at the outer nodes, built up segment by segment.
    xs, ws = _gauss_nodes(inner_nodes)
    u_nodes = np.empty((nodes, 4))
    acc = np.zeros(4)
    prev = 0.0
    for i, tk in enumerate(tq):
        half = 0.5 * (tk - prev)
        mid = 0.5 * (tk + prev)
        svals = f(mid + half * xs, y4[:, None])
        acc = acc + half * (svals @ ws)
        u_nodes[i] = acc
        prev = tk

    # Jacobian columns at all outer nodes via complex step.
    h = 1e-100
    jac = np.empty((nodes, 4, 4))
    for j in range(4):
        xc = y4.astype(complex)[:, None]
        xc[j] += 1j * h
        jac[:, :, j] = (f(tq, xc).imag / h).T

    dfu = np.einsum("kij,kj->ki", jac, u_nodes)
    avg = (wg @ dfu) * 0.5
    return p.epsilon**2 * avg


@dataclass(frozen=True)
class I3FitResult:
    """Least-squares coefficients of the symmetric 1:1 invariant."""

    alpha: float
    beta: float
    residual: float


def fit_I3_11(samples, min_samples: int = 200) -> I3FitResult:
    """Fit (alpha, beta) so r1^2*r2^2*cos(2*chi) + alpha*r1^4 + beta*r1^2 is
    constant along a symmetric 1:1 averaged trajectory.

    ``samples`` is the (m, >=4) polar state history. The residual is the
    standard deviation of the fitted combination normalized by the standard
    deviation of the cos(2*chi) term. Degenerate (normal mode) trajectories
    are rejected.
    """
    s = np.asarray(samples, dtype=float)
    if s.ndim != 2 or s.shape[0] < min_samples:
        raise ValueError(f"need at least {min_samples} polar samples")
    r1 = s[:, 0]
    r2 = s[:, 2]
    if np.min(r1) < 1e-8 or np.min(r2) < 1e-8:
        raise ValueError("degenerate trajectory (normal mode); no two-parameter fit")
    chi = s[:, 1] - s[:, 3]
    yv = r1**2 * r2**2 * np.cos(2.0 * chi)
    x1 = r1**4
    x2 = r1**2
    yc = yv - yv.mean()
    design = np.column_stack([x1 - x1.mean(), x2 - x2.mean()])
    sv = np.linalg.svd(design, compute_uv=False)
    if sv[-1] < 1e-9 * max(sv[0], 1e-30):
        raise ValueError("degenerate trajectory: amplitude variation too small to fit")
    coeffs, *_ = np.linalg.lstsq(design, -yc, rcond=None)
    ca, cb = float(coeffs[0]), float(coeffs[1])
    combo = yv + ca * x1 + cb * x2
    scale = max(float(np.std(yv)), 1e-300)
    return I3FitResult(ca, cb, float(np.std(combo)) / scale)
