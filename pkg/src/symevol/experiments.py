"""Scenario drivers: full-vs-averaged comparison, invariant drift, figure
reproduction and ensemble statistics.

All drivers are deterministic: ensembles draw initial conditions from a
counter-based generator keyed by (seed, particle index), so reports do not
depend on execution order or worker count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .averaged import (avg11_rhs, avg12_first_cart, avg12_second_cart, avg13_rhs,
                       polar_to_slow_cart, slow_cart_amplitudes)
from .integrate import IntegrationError, IntegratorConfig, Trajectory, integrate
from .model import CartesianState, ModelParams, full_rhs
from .transforms import (COMBINATION_COEFFS, PhaseUndefinedError, cart_to_polar,
                         unwrap_phase_series)

__all__ = [
    "ScenarioConfig",
    "ScenarioResult",
    "EnsembleSpec",
    "DistributionReport",
    "InvariantReport",
    "ComparisonResult",
    "FigureBundle",
    "OBSERVABLE_NAMES",
    "fig_params",
    "fig_initial_state",
    "run_scenario",
    "polar_amplitude_series",
    "phase_series",
    "invariant_series",
    "invariant_drift",
    "compare_full_vs_averaged",
    "run_ensemble",
    "reproduce_figure",
    "stabilization_time",
]

OBSERVABLE_NAMES = ("actions", "invariants", "angles", "velocities")

# Averaged system per resonance label: (required omega, field, chart).
# The 1:2 fields run in the regular slow-Cartesian chart so trajectories can
# cross normal modes; the 1:3/1:1 fields stay polar (their amplitudes cannot
# reach zero from non-degenerate data).
AVERAGED_SYSTEMS = {
    "12-first": (2.0, avg12_first_cart, "cart"),
    "12-second": (2.0, avg12_second_cart, "cart"),
    "13": (3.0, avg13_rhs, "polar"),
    "11": (1.0, avg11_rhs, "polar"),
}

_DEFAULT_RESONANCE = {1.0: "11", 2.0: "12-first", 3.0: "13"}


@dataclass(frozen=True)
class ScenarioConfig:
    """A single run: model, initial state, horizon and requested observables."""

    params: ModelParams
    initial: CartesianState
    horizon: float
    observables: tuple = ("actions",)
    label: str = ""
    rtol: float = 1e-10
    atol: float = 1e-12
    sample_dt: float = 0.25

    def __post_init__(self):
        if self.horizon <= 0.0:
            raise ValueError("horizon must be positive")
        if not self.observables:
            raise ValueError("at least one observable must be requested")
        for name in self.observables:
            if name not in OBSERVABLE_NAMES:
                raise ValueError(f"unknown observable {name!r}")


@dataclass
class ScenarioResult:
    trajectory: Trajectory
    observables: dict


def fig_params(n: int, epsilon: float = 0.1) -> ModelParams:
    """Canonical 1:2 scenario coefficients (a = 1, 1, 0.75, 1.5) at decay
    exponent n."""
    return ModelParams(a1=1.0, a2=1.0, a3=0.75, a4=1.5, omega=2.0,
                       epsilon=epsilon, n=n)


def fig_initial_state() -> CartesianState:
    """Canonical initial data: at the origin with velocities (0.5, 0.5)."""
    return CartesianState(t=0.0, q1=0.0, v1=0.5, q2=0.0, v2=0.5)


def _integrator_config(sc: ScenarioConfig) -> IntegratorConfig:
    return IntegratorConfig(t_end=sc.initial.t + sc.horizon, sample_dt=sc.sample_dt,
                            method="rk45", rtol=sc.rtol, atol=sc.atol)


def polar_amplitude_series(traj: Trajectory, omega: float):
    """Mode amplitudes along a Cartesian trajectory (phase-free, safe at
    normal modes)."""
    q1, v1, q2, v2 = (traj.states[:, i] for i in range(4))
    return np.hypot(q1, v1), np.hypot(q2, v2 / omega)


def phase_series(traj: Trajectory, omega: float, min_amplitude: float = 1e-8):
    """Continuously lifted slow phases (psi1, psi2) along a trajectory.

    Requires both amplitudes to stay above ``min_amplitude``; near a normal
    mode the phase is meaningless and polar analyses are disabled.
    """
    r1, r2 = polar_amplitude_series(traj, omega)
    if np.min(r1) < min_amplitude or np.min(r2) < min_amplitude:
        raise ValueError("amplitude too close to a normal mode for phase extraction")
    q1, v1, q2, v2 = (traj.states[:, i] for i in range(4))
    theta1 = unwrap_phase_series(np.arctan2(-v1, q1))
    theta2 = unwrap_phase_series(np.arctan2(-v2 / omega, q2))
    return theta1 - traj.times, theta2 - omega * traj.times


def _chi_kind(omega: float) -> str:
    return {1.0: "chi11", 2.0: "chi12", 3.0: "chi3"}.get(omega, "chi12")


def invariant_series(traj: Trajectory, name: str, params: ModelParams) -> np.ndarray:
    """Vectorized Cartesian invariant evaluation along a trajectory."""
    q1, v1, q2, v2 = (traj.states[:, i] for i in range(4))
    if name == "E0_12":
        return 0.5 * (v1**2 + q1**2) + 0.5 * (v2**2 + 4.0 * q2**2)
    if name == "I3_12":
        return params.a4 * ((q1 * q1 - v1 * v1) * q2 + q1 * v1 * v2)
    if name == "E0_11":
        return 0.5 * (q1**2 + v1**2 + q2**2 + v2**2)
    raise ValueError(f"unknown invariant {name!r} for trajectory evaluation")


def run_scenario(sc: ScenarioConfig) -> ScenarioResult:
    """Integrate the full system and attach the requested derived series."""
    p = sc.params
    traj = integrate(lambda t, y: full_rhs(t, y, p), sc.initial.as_array(),
                     _integrator_config(sc), t0=sc.initial.t, params=p)
    obs: dict = {"t": traj.times}
    q1, v1, q2, v2 = (traj.states[:, i] for i in range(4))
    if "actions" in sc.observables:
        obs["E1"] = 0.5 * (v1**2 + q1**2)
        obs["E2"] = 0.5 * (v2**2 + p.omega**2 * q2**2)
    if "velocities" in sc.observables:
        obs["v1"] = v1
        obs["v2"] = v2
    if "invariants" in sc.observables:
        if p.omega == 2.0:
            obs["E0_12"] = invariant_series(traj, "E0_12", p)
            obs["I3_12"] = invariant_series(traj, "I3_12", p)
        elif p.omega == 1.0:
            obs["E0_11"] = invariant_series(traj, "E0_11", p)
    if "angles" in sc.observables:
        # near a normal mode the phases are meaningless; fall back to the
        # Cartesian observables and say so instead of failing the run
        try:
            psi1, psi2 = phase_series(traj, p.omega)
        except ValueError as exc:
            obs["angles_disabled"] = str(exc)
        else:
            m1, m2 = COMBINATION_COEFFS[_chi_kind(p.omega)]
            obs["psi1"] = psi1
            obs["psi2"] = psi2
            obs["chi"] = m1 * psi1 + m2 * psi2  # continuous lift; wrap at reporting
    return ScenarioResult(trajectory=traj, observables=obs)


@dataclass(frozen=True)
class InvariantReport:
    """Initial value, extrema and drift of a conserved-quantity series."""

    name: str
    initial: float
    minimum: float
    maximum: float
    max_drift: float
    normalized_drift: float


def invariant_drift(traj: Trajectory, names, params: ModelParams) -> list[InvariantReport]:
    """Drift statistics of the named invariants along a full-system trajectory.

    The drift is normalized by the trajectory's energy scale (its initial
    E0 value) so reports are comparable across invariants.
    """
    e0_name = "E0_12" if params.omega == 2.0 else "E0_11"
    scale = abs(float(invariant_series(traj, e0_name, params)[0]))
    reports = []
    for name in names:
        series = invariant_series(traj, name, params)
        drift = float(np.max(np.abs(series - series[0])))
        reports.append(InvariantReport(
            name=name,
            initial=float(series[0]),
            minimum=float(np.min(series)),
            maximum=float(np.max(series)),
            max_drift=drift,
            normalized_drift=drift / max(scale, 1e-300),
        ))
    return reports


@dataclass(frozen=True)
class ComparisonResult:
    """Sup-norm discrepancies between the full and averaged descriptions."""

    resonance: str
    horizon: float
    sup_r1: float
    sup_r2: float
    sup_E1: float
    sup_E2: float

    @property
    def sup_amplitude(self) -> float:
        return max(self.sup_r1, self.sup_r2)


def compare_full_vs_averaged(params: ModelParams, initial: CartesianState,
                             L: float = 1.0, resonance: str | None = None,
                             horizon: float | None = None,
                             rtol: float = 1e-10, atol: float = 1e-12,
                             sample_dt: float = 0.1) -> ComparisonResult:
    """Integrate full and averaged systems from the same polar data and
    compare amplitudes and actions over [0, L/epsilon].

    Initial data too close to a normal mode is rejected (the polar
    comparison is undefined there). With epsilon = 0 a fixed default window
    is used and both systems coincide.
    """
    if resonance is None:
        resonance = _DEFAULT_RESONANCE.get(params.omega)
        if resonance is None:
            raise ValueError(f"no averaged system for omega = {params.omega:g}")
    omega_needed, avg_rhs, chart = AVERAGED_SYSTEMS[resonance]
    if params.omega != omega_needed:
        raise ValueError(f"resonance {resonance!r} needs omega = {omega_needed:g}")
    if horizon is None:
        horizon = L / params.epsilon if params.epsilon > 0 else 50.0
    try:
        polar = cart_to_polar(initial, params.omega, delta=params.delta)
    except PhaseUndefinedError:
        polar = None
    if polar is None or polar.r1 < 1e-8 or polar.r2 < 1e-8:
        raise ValueError("normal-mode initial data: polar comparison undefined")

    cfg = IntegratorConfig(t_end=initial.t + horizon, sample_dt=sample_dt,
                           method="rk45", rtol=rtol, atol=atol)
    full = integrate(lambda t, y: full_rhs(t, y, params), initial.as_array(),
                     cfg, t0=initial.t)
    r1_full, r2_full = polar_amplitude_series(full, params.omega)

    y0_avg = polar_to_slow_cart(polar.as_array()) if chart == "cart" else polar.as_array()
    avg = integrate(lambda t, y: avg_rhs(t, y, params), y0_avg, cfg, t0=initial.t)
    if chart == "cart":
        r1_avg, r2_avg = slow_cart_amplitudes(avg.states)
    else:
        r1_avg = avg.states[:, 0]
        r2_avg = avg.states[:, 2]

    w2 = params.omega**2
    return ComparisonResult(
        resonance=resonance,
        horizon=horizon,
        sup_r1=float(np.max(np.abs(r1_full - r1_avg))),
        sup_r2=float(np.max(np.abs(r2_full - r2_avg))),
        sup_E1=float(np.max(np.abs(0.5 * r1_full**2 - 0.5 * r1_avg**2))),
        sup_E2=float(np.max(np.abs(0.5 * w2 * r2_full**2 - 0.5 * w2 * r2_avg**2))),
    )


# --------------------------------------------------------------------------
# Ensembles
# --------------------------------------------------------------------------

_SAMPLER_KINDS = ("fixed", "uniform", "normal")


@dataclass(frozen=True)
class EnsembleSpec:
    """Ensemble of independently integrated particles.

    ``samplers`` maps each coordinate (q1, v1, q2, v2) to a distribution
    tuple: ("fixed", value), ("uniform", lo, hi) or ("normal", mean, sigma).
    Sampling uses a counter-based generator keyed by (seed, particle index),
    so the draw for particle i never depends on the other particles.
    """

    scenario: ScenarioConfig
    samplers: dict
    count: int
    seed: int
    workers: int = 1

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("count must be >= 1")
        for coord in ("q1", "v1", "q2", "v2"):
            kind = self.samplers.get(coord, ("fixed", 0.0))[0]
            if kind not in _SAMPLER_KINDS:
                raise ValueError(f"unknown sampler kind {kind!r} for {coord}")


@dataclass
class DistributionReport:
    """Per-time velocity statistics and histograms of an ensemble."""

    times: np.ndarray
    mean_v1: np.ndarray
    mean_v2: np.ndarray
    disp_v1: np.ndarray
    disp_v2: np.ndarray
    mean_E1: np.ndarray
    mean_E2: np.ndarray
    hist_edges_v1: np.ndarray
    hist_edges_v2: np.ndarray
    hist_v1: np.ndarray
    hist_v2: np.ndarray
    count: int
    failures: list = field(default_factory=list)


def _draw_initial(samplers: dict, seed: int, index: int) -> np.ndarray:
    rng = np.random.Generator(np.random.Philox(key=np.array([seed, index],
                                                            dtype=np.uint64)))
    out = np.empty(4)
    for k, coord in enumerate(("q1", "v1", "q2", "v2")):
        spec = samplers.get(coord, ("fixed", 0.0))
        kind = spec[0]
        if kind == "fixed":
            out[k] = spec[1]
        elif kind == "uniform":
            out[k] = rng.uniform(spec[1], spec[2])
        else:
            out[k] = rng.normal(spec[1], spec[2])
    return out


def _sampler_sigma(spec) -> float:
    kind = spec[0]
    if kind == "fixed":
        return 0.0
    if kind == "uniform":
        return abs(spec[2] - spec[1]) / math.sqrt(12.0)
    return abs(spec[2])


def _particle_worker(args):
    spec, index = args
    sc = spec.scenario
    y0 = _draw_initial(spec.samplers, spec.seed, index)
    cfg = _integrator_config(sc)
    try:
        traj = integrate(lambda t, y: full_rhs(t, y, sc.params), y0,
                         cfg, t0=sc.initial.t)
        return index, traj.states, None
    except IntegrationError as exc:
        return index, None, str(exc)


def _resolve_workers(requested: int) -> int:
    cap = os.environ.get("SYMEVOL_THREADS")
    if cap:
        return max(1, min(requested, int(cap)))
    return max(1, requested)


def run_ensemble(spec: EnsembleSpec) -> DistributionReport:
    """Integrate every particle independently and reduce to per-time stats.

    Histogram bins are fixed: 64 uniform bins spanning three times the
    ensemble's initial rms velocity (per component, about zero, falling back
    to the sampler's offset scale); out-of-range values accumulate in the
    edge bins so the histogram mass always equals the particle count.
    Failed particles are recorded and excluded from the statistics.
    """
    sc = spec.scenario
    times = _sample_grid_times(sc)
    workers = _resolve_workers(spec.workers)
    jobs = [(spec, i) for i in range(spec.count)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_particle_worker, jobs, chunksize=16))
    else:
        results = [_particle_worker(job) for job in jobs]

    states = np.empty((spec.count, len(times), 4))
    ok = np.zeros(spec.count, dtype=bool)
    failures = []
    for index, data, err in results:
        if err is None:
            states[index] = data
            ok[index] = True
        else:
            failures.append((index, err))
    failures.sort()
    good = states[ok]
    if good.shape[0] == 0:
        raise RuntimeError("every particle integration failed")

    v1 = good[:, :, 1]
    v2 = good[:, :, 3]
    q1 = good[:, :, 0]
    q2 = good[:, :, 2]
    w2 = sc.params.omega**2
    edges_v1 = _velocity_edges(v1[:, 0], spec.samplers.get("v1", ("fixed", 0.0)))
    edges_v2 = _velocity_edges(v2[:, 0], spec.samplers.get("v2", ("fixed", 0.0)))
    return DistributionReport(
        times=times,
        mean_v1=v1.mean(axis=0),
        mean_v2=v2.mean(axis=0),
        # shifted variance: exact zero for identical particles, neutral otherwise
        disp_v1=(v1 - v1[:1]).std(axis=0),
        disp_v2=(v2 - v2[:1]).std(axis=0),
        mean_E1=(0.5 * (v1**2 + q1**2)).mean(axis=0),
        mean_E2=(0.5 * (v2**2 + w2 * q2**2)).mean(axis=0),
        hist_edges_v1=edges_v1,
        hist_edges_v2=edges_v2,
        hist_v1=_histogram_series(v1, edges_v1),
        hist_v2=_histogram_series(v2, edges_v2),
        count=int(good.shape[0]),
        failures=failures,
    )


def _sample_grid_times(sc: ScenarioConfig) -> np.ndarray:
    cfg = _integrator_config(sc)
    from .integrate import _sample_grid

    return _sample_grid(sc.initial.t, cfg.t_end, cfg.sample_dt)


def _velocity_edges(v0: np.ndarray, sampler, bins: int = 64) -> np.ndarray:
    rms = float(np.sqrt(np.mean(v0**2)))
    if rms == 0.0:
        rms = max(_sampler_sigma(sampler), 1.0)
    return np.linspace(-3.0 * rms, 3.0 * rms, bins + 1)


def _histogram_series(values: np.ndarray, edges: np.ndarray) -> np.ndarray:
    lo = edges[0] + 1e-12 * (edges[1] - edges[0])
    hi = edges[-1] - 1e-12 * (edges[1] - edges[0])
    clipped = np.clip(values, lo, hi)
    out = np.empty((values.shape[1], len(edges) - 1), dtype=np.int64)
    for k in range(values.shape[1]):
        out[k], _ = np.histogram(clipped[:, k], bins=edges)
    return out


# --------------------------------------------------------------------------
# Figure scenarios
# --------------------------------------------------------------------------

FIGURE_HORIZONS = {"fig1": 1000.0, "fig2": 8000.0}


@dataclass
class FigureBundle:
    """Plot-ready time series for one captioned scenario."""

    label: str
    params: ModelParams
    times: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    E1: np.ndarray
    E2: np.ndarray

    @property
    def E0(self) -> float:
        return float(self.E1[0] + self.E2[0])


def reproduce_figure(which: str, horizon: float | None = None,
                     sample_dt: float = 0.25, rtol: float = 1e-10) -> FigureBundle:
    """Recompute the captioned scenario time series on a uniform grid.

    fig1 uses decay exponent n = 2, fig2 uses n = 3 (slower decay, longer
    stabilization); both start from the canonical initial state.
    """
    if which not in FIGURE_HORIZONS:
        raise ValueError(f"unknown figure {which!r}; know {tuple(FIGURE_HORIZONS)}")
    n = 2 if which == "fig1" else 3
    params = fig_params(n)
    sc = ScenarioConfig(params=params, initial=fig_initial_state(),
                        horizon=horizon if horizon is not None else FIGURE_HORIZONS[which],
                        observables=("actions", "velocities"), label=which,
                        rtol=rtol, sample_dt=sample_dt)
    res = run_scenario(sc)
    o = res.observables
    return FigureBundle(label=which, params=params, times=o["t"],
                        v1=o["v1"], v2=o["v2"], E1=o["E1"], E2=o["E2"])


def stabilization_time(bundle: FigureBundle, fraction: float = 0.10) -> float:
    """First time after which both actions stay within fraction*E0 of their
    remaining range; inf if the run never settles."""
    spreads = []
    for series in (bundle.E1, bundle.E2):
        suffix_max = np.maximum.accumulate(series[::-1])[::-1]
        suffix_min = np.minimum.accumulate(series[::-1])[::-1]
        spreads.append(suffix_max - suffix_min)
    both = np.maximum(spreads[0], spreads[1])
    idx = np.nonzero(both < fraction * bundle.E0)[0]
    return float(bundle.times[idx[0]]) if len(idx) else math.inf
