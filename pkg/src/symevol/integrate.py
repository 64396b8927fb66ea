"""Time steppers: adaptive Dormand-Prince 5(4) and fixed-step classical RK4.

Both methods deliver dense output by cubic Hermite interpolation on the
accepted steps, so the returned sample times are exactly the requested grid
and never constrain the step-size control. Integrations are deterministic:
identical inputs produce bit-identical trajectories on one platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["IntegratorConfig", "Trajectory", "IntegrationError", "integrate",
           "order_check", "OrderEstimate"]

# Dormand-Prince 5(4) tableau. The fifth-order solution is propagated; the
# difference to the embedded fourth-order one estimates the local error.
_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_DP_E = np.array([35 / 384 - 5179 / 57600, 0.0, 500 / 1113 - 7571 / 16695,
                  125 / 192 - 393 / 640, -2187 / 6784 + 92097 / 339200,
                  11 / 84 - 187 / 2100, -1 / 40])

_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0
_SAFETY = 0.9


class IntegrationError(RuntimeError):
    """Integration aborted; carries the last successfully reached state."""

    def __init__(self, message: str, t_last: float, y_last: np.ndarray, reason: str):
        super().__init__(f"{message} (last good time t = {t_last:.6g})")
        self.t_last = t_last
        self.y_last = y_last
        self.reason = reason


@dataclass(frozen=True)
class IntegratorConfig:
    """Stepper selection, tolerances and output grid.

    ``t_end`` is the absolute end time; samples are produced every
    ``sample_dt`` starting from the initial time (the end time is always
    included). ``step`` applies to the fixed-step method, ``rtol``/``atol``
    to the adaptive one.
    """

    t_end: float
    sample_dt: float
    method: str = "rk45"
    rtol: float = 1e-10
    atol: float = 1e-12
    step: float | None = None
    max_step: float | None = None

    def __post_init__(self):
        if self.method not in ("rk45", "rk4"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.sample_dt <= 0.0:
            raise ValueError("sample_dt must be positive")
        if self.rtol <= 0.0 or self.atol <= 0.0:
            raise ValueError("tolerances must be positive")
        if self.step is not None and self.step <= 0.0:
            raise ValueError("step must be positive")
        if self.max_step is not None and self.max_step <= 0.0:
            raise ValueError("max_step must be positive")
        if self.method == "rk4" and self.step is None:
            raise ValueError("fixed-step method needs a step size")


@dataclass
class Trajectory:
    """Sampled solution: strictly increasing times, states row per sample."""

    times: np.ndarray
    states: np.ndarray
    params: object | None = None
    stats: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.times)

    def column(self, index: int) -> np.ndarray:
        return self.states[:, index]


def _sample_grid(t0: float, t_end: float, dt: float) -> np.ndarray:
    span = t_end - t0
    n = int(math.floor(span / dt + 1e-9))
    ts = t0 + dt * np.arange(n + 1)
    ts[0] = t0
    if ts[-1] < t_end - 1e-12 * max(1.0, abs(t_end)):
        ts = np.append(ts, t_end)
    else:
        ts[-1] = min(ts[-1], t_end)
    return ts


def _hermite_fill(out, ts, idx, t0, h, y0, y1, f0, f1, t1):
    """Fill samples with the cubic Hermite interpolant on (t0, t1]."""
    while idx < len(ts) and ts[idx] <= t1 + 1e-14 * max(1.0, abs(t1)):
        th = (ts[idx] - t0) / h
        th2 = th * th
        th3 = th2 * th
        out[idx] = ((2 * th3 - 3 * th2 + 1) * y0 + (th3 - 2 * th2 + th) * h * f0
                    + (-2 * th3 + 3 * th2) * y1 + (th3 - th2) * h * f1)
        idx += 1
    return idx


def _initial_step(rhs, t0, y0, f0, rtol, atol, span):
    scale = atol + rtol * np.abs(y0)
    d0 = math.sqrt(float(np.mean((y0 / scale) ** 2)))
    d1 = math.sqrt(float(np.mean((f0 / scale) ** 2)))
    h0 = 1e-6 * span if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    return min(h0, span)


def integrate(rhs, y0, config: IntegratorConfig, t0: float = 0.0, params=None) -> Trajectory:
    """Integrate y' = rhs(t, y) from t0 to config.t_end with dense sampling.

    Raises :class:`IntegrationError` on step-size underflow or persistent
    non-finite values; the exception carries the last good (t, y).
    """
    y0 = np.asarray(y0, dtype=float)
    if config.t_end <= t0:
        raise ValueError("t_end must exceed the initial time")
    ts = _sample_grid(t0, config.t_end, config.sample_dt)
    out = np.empty((len(ts), len(y0)))
    out[0] = y0
    if config.method == "rk4":
        stats = _run_rk4(rhs, y0, t0, config, ts, out)
    else:
        stats = _run_rk45(rhs, y0, t0, config, ts, out)
    return Trajectory(times=ts, states=out, params=params, stats=stats)


def _run_rk45(rhs, y0, t0, config, ts, out):
    t_end = config.t_end
    rtol, atol = config.rtol, config.atol
    hmax = config.max_step if config.max_step is not None else t_end - t0
    t = t0
    y = y0.copy()
    f = np.asarray(rhs(t, y), dtype=float)
    evals = 1
    accepted = rejected = 0
    idx = 1
    h = min(_initial_step(rhs, t0, y0, f, rtol, atol, t_end - t0), hmax)
    k = np.empty((7, len(y0)))
    nonfinite_streak = 0

    while t < t_end:
        clamped = h >= t_end - t
        if clamped:
            h = t_end - t
        k[0] = f
        broke = False
        for s in range(1, 7):
            ys = y + h * (_DP_A[s] @ k[:s])
            if not np.all(np.isfinite(ys)):
                broke = True
                break
            k[s] = rhs(t + _DP_C[s] * h, ys)
            evals += 1
        if broke or not np.all(np.isfinite(k)):
            nonfinite_streak += 1
            rejected += 1
            h *= 0.25
            if nonfinite_streak > 40 or h < 1e-14 * max(1.0, abs(t)):
                raise IntegrationError("non-finite values in right-hand side", t, y, "nonfinite")
            continue
        nonfinite_streak = 0
        y_new = ys  # stage 7 input equals the fifth-order solution (FSAL)
        err = h * (_DP_E @ k)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err_norm = math.sqrt(float(np.mean((err / scale) ** 2)))
        if err_norm <= 1.0:
            t_new = t_end if clamped else t + h
            idx = _hermite_fill(out, ts, idx, t, h, y, y_new, k[0], k[6], t_new)
            t = t_new
            y = y_new
            f = k[6].copy()
            accepted += 1
            factor = _MAX_FACTOR if err_norm == 0.0 else min(
                _MAX_FACTOR, max(_MIN_FACTOR, _SAFETY * err_norm**-0.2))
            h = min(h * factor, hmax)
        else:
            rejected += 1
            h *= max(_MIN_FACTOR, _SAFETY * err_norm**-0.2)
        if h < 1e-14 * max(1.0, abs(t)):
            raise IntegrationError("step size underflow", t, y, "underflow")
    return {"accepted": accepted, "rejected": rejected, "rhs_evals": evals}


def _run_rk4(rhs, y0, t0, config, ts, out):
    t_end = config.t_end
    span = t_end - t0
    n_steps = max(1, round(span / config.step))
    h = span / n_steps
    t = t0
    y = y0.copy()
    f = np.asarray(rhs(t, y), dtype=float)
    evals = 1
    idx = 1
    for i in range(n_steps):
        k1 = f
        k2 = np.asarray(rhs(t + 0.5 * h, y + 0.5 * h * k1), dtype=float)
        k3 = np.asarray(rhs(t + 0.5 * h, y + 0.5 * h * k2), dtype=float)
        k4 = np.asarray(rhs(t + h, y + h * k3), dtype=float)
        y_new = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        evals += 3
        if not np.all(np.isfinite(y_new)):
            raise IntegrationError("non-finite values in fixed-step solution", t, y, "nonfinite")
        t_new = t_end if i == n_steps - 1 else t0 + (i + 1) * h
        f_new = np.asarray(rhs(t_new, y_new), dtype=float)
        evals += 1
        idx = _hermite_fill(out, ts, idx, t, h, y, y_new, k1, f_new, t_new)
        t = t_new
        y = y_new
        f = f_new
    return {"accepted": n_steps, "rejected": 0, "rhs_evals": evals}


@dataclass(frozen=True)
class OrderEstimate:
    """Least-squares convergence order, or a saturation flag at the error floor."""

    order: float | None
    saturated: bool
    step_sizes: tuple
    errors: tuple


def order_check(rhs, y0, t0: float, t_end: float, steps, reference=None,
                ref_rtol: float = 1e-13, ref_atol: float = 1e-15) -> OrderEstimate:
    """Measure the fixed-step RK4 convergence order on [t0, t_end].

    ``steps`` must contain at least three step sizes (geometric progressions
    work best). The reference is an adaptive solution at tight tolerance
    unless an exact endpoint solution ``reference`` is supplied.
    """
    steps = [float(h) for h in steps]
    if len(steps) < 3:
        raise ValueError("need at least three step sizes")
    span = t_end - t0
    if reference is not None:
        y_ref = np.asarray(reference, dtype=float)
    else:
        cfg = IntegratorConfig(t_end=t_end, sample_dt=span, method="rk45",
                               rtol=ref_rtol, atol=ref_atol)
        y_ref = integrate(rhs, y0, cfg, t0=t0).states[-1]
    errors = []
    for h in steps:
        cfg = IntegratorConfig(t_end=t_end, sample_dt=span, method="rk4",
                               rtol=1e-12, atol=1e-12, step=h)
        y_h = integrate(rhs, y0, cfg, t0=t0).states[-1]
        errors.append(float(np.max(np.abs(y_h - y_ref))))
    floor = 5e-13 * (1.0 + float(np.max(np.abs(y_ref))))
    if min(errors) < floor:
        return OrderEstimate(None, True, tuple(steps), tuple(errors))
    slope = float(np.polyfit(np.log(steps), np.log(errors), 1)[0])
    return OrderEstimate(slope, False, tuple(steps), tuple(errors))
