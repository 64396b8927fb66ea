"""Command-line surface: simulate, compare, resonance, ensemble,
reproduce-figure, order-check.

Time series go to CSV (17 significant digits, round-trip exact for
doubles), structured results to JSON, and every run writes a manifest with
the canonical config digest so reruns can be checked byte for byte.
Exit codes: 0 ok, 2 usage/config error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .config import (ConfigError, build_ensemble, build_scenario, config_digest,
                     load_config, resolve_config_path)
from .experiments import (compare_full_vs_averaged, fig_params, reproduce_figure,
                          run_ensemble, run_scenario, stabilization_time)
from .integrate import IntegrationError, order_check
from .model import full_rhs
from .resonance import classify_11, locate_12_first, locate_12_second, locate_13

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _fmt(x) -> str:
    return f"{float(x):.17g}"


def _write_csv(path: Path, header, columns):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in zip(*columns):
            writer.writerow([_fmt(v) for v in row])


def _write_manifest(outdir: Path, command: str, digest: str, outputs, seed=None,
                    wall_time=0.0, extra=None):
    manifest = {
        "command": command,
        "config_digest": digest,
        "seed": seed,
        "tool_version": __version__,
        "wall_time_s": round(wall_time, 3),
        "outputs": sorted(str(o) for o in outputs),
    }
    if extra:
        manifest.update(extra)
    path = outdir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def _integrator_overrides(args) -> dict:
    return {k: getattr(args, k, None) for k in ("rtol", "atol", "sample_dt", "horizon")}


def _cmd_simulate(args) -> int:
    cfg = load_config(resolve_config_path(args.config))
    scenario = build_scenario(cfg, _integrator_overrides(args))
    digest = config_digest(cfg)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    result = run_scenario(scenario)
    traj = result.trajectory
    obs = result.observables
    p = scenario.params
    q1, v1, q2, v2 = (traj.states[:, i] for i in range(4))
    e1 = obs.get("E1", 0.5 * (v1**2 + q1**2))
    e2 = obs.get("E2", 0.5 * (v2**2 + p.omega**2 * q2**2))
    csv_path = outdir / "trajectory.csv"
    _write_csv(csv_path, ["t", "q1", "v1", "q2", "v2", "E1", "E2"],
               [traj.times, q1, v1, q2, v2, e1, e2])
    _write_manifest(outdir, "simulate", digest, [csv_path.name],
                    wall_time=time.perf_counter() - start,
                    extra={"label": scenario.label, "samples": len(traj.times),
                           "integrator_stats": traj.stats})
    return EXIT_OK


def _cmd_compare(args) -> int:
    cfg = load_config(resolve_config_path(args.config))
    scenario = build_scenario(cfg, _integrator_overrides(args))
    if scenario.params.omega not in (1.0, 2.0, 3.0):
        raise ConfigError(f"no averaged system for omega = {scenario.params.omega:g}")
    eps_list = [float(s) for s in args.eps_list.split(",") if s.strip()]
    if not eps_list or any(e <= 0 or e > 1 for e in eps_list):
        raise ConfigError(f"bad --eps-list {args.eps_list!r}")
    digest = config_digest(cfg)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    rows = []
    for eps in eps_list:
        params = scenario.params.replace(epsilon=eps, delta=None)
        res = compare_full_vs_averaged(params, scenario.initial, L=args.window,
                                       resonance=args.resonance,
                                       rtol=scenario.rtol, atol=scenario.atol)
        rows.append((eps, res.sup_r1, res.sup_r2, res.sup_E1, res.sup_E2))
    csv_path = outdir / "compare.csv"
    _write_csv(csv_path, ["epsilon", "sup_r1", "sup_r2", "sup_E1", "sup_E2"],
               list(zip(*rows)))
    if len(rows) >= 2:
        errs = [max(r[1], r[2]) for r in rows]
        exponent = float(np.polyfit(np.log([r[0] for r in rows]), np.log(errs), 1)[0])
    else:
        exponent = None
    summary = {"scaling_exponent": exponent if exponent is not None else "n/a",
               "resonance": args.resonance or "auto", "window_L": args.window}
    summary_path = outdir / "compare_summary.json"
    summary_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    _write_manifest(outdir, "compare", digest, [csv_path.name, summary_path.name],
                    wall_time=time.perf_counter() - start, extra=summary)
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK


def _ratio_json(manifold):
    if not manifold.exists:
        return "none"
    ratio = manifold.amplitude_ratio
    out = {"value": float(ratio)}
    if isinstance(ratio, Fraction):
        out["exact"] = f"{ratio.numerator}/{ratio.denominator}"
    return out


def _cmd_resonance(args) -> int:
    try:
        a1, a2 = Fraction(args.a1), Fraction(args.a2)
    except ValueError as exc:
        raise ConfigError(f"bad coefficient: {exc}") from exc
    omega = float(args.omega)
    report: dict = {"omega": omega, "a1": str(a1), "a2": str(a2)}
    if omega == 2.0:
        first = locate_12_first(Fraction(args.e0) if args.e0 else Fraction(1, 4))
        second = locate_12_second(a1, a2)
        report["first_order"] = {
            "ratio": _ratio_json(first),
            "angles": list(first.angles),
            "r1_sq": float(first.r1_sq),
            "r2_sq": float(first.r2_sq),
            "size_order": first.size_order,
            "timescale_order": first.timescale_order,
        }
        report["second_order"] = {
            "ratio": _ratio_json(second),
            "angles": list(second.angles),
            "angle_stability": {f"{k:g}": v for k, v in (second.angle_stability or {}).items()},
            "size_order": second.size_order,
            "timescale_order": second.timescale_order,
        }
    elif omega == 3.0:
        m = locate_13(a1, a2)
        report["resonance_13"] = {
            "ratio": _ratio_json(m),
            "angles": list(m.angles),
            "size_order": m.size_order,
            "timescale_order": m.timescale_order,
        }
    elif omega == 1.0:
        if a2 == 0:
            raise ConfigError("classification undefined for a2 = 0")
        reports = classify_11(a1, a2)
        report["classification"] = [
            {"mode": r.mode, "exists": r.exists,
             "stable": r.stable if isinstance(r.stable, (bool, str, type(None))) else str(r.stable),
             "parameter": r.parameter}
            for r in reports
        ]
    else:
        raise ConfigError(f"no resonance analysis for omega = {omega:g}")
    print(json.dumps(report, indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_ensemble(args) -> int:
    cfg = load_config(resolve_config_path(args.config))
    overrides = _integrator_overrides(args)
    overrides["seed"] = args.seed
    spec = build_ensemble(cfg, overrides)
    digest = config_digest(cfg)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    report = run_ensemble(spec)
    moments_path = outdir / "moments.csv"
    _write_csv(moments_path,
               ["t", "mean_v1", "disp_v1", "mean_v2", "disp_v2", "mean_E1", "mean_E2"],
               [report.times, report.mean_v1, report.disp_v1, report.mean_v2,
                report.disp_v2, report.mean_E1, report.mean_E2])
    hist_path = outdir / "histograms.json"
    hist_path.write_text(json.dumps({
        "times": [float(t) for t in report.times],
        "v1_edges": [float(x) for x in report.hist_edges_v1],
        "v2_edges": [float(x) for x in report.hist_edges_v2],
        "v1_counts": report.hist_v1.tolist(),
        "v2_counts": report.hist_v2.tolist(),
    }, sort_keys=True) + "\n")
    _write_manifest(outdir, "ensemble", digest,
                    [moments_path.name, hist_path.name], seed=spec.seed,
                    wall_time=time.perf_counter() - start,
                    extra={"count": spec.count, "failures": len(report.failures)})
    print(f"ensemble done: {report.count}/{spec.count} particles, "
          f"{len(report.failures)} failures")
    return EXIT_OK


def _cmd_reproduce_figure(args) -> int:
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    bundle = reproduce_figure(args.which, horizon=args.horizon,
                              sample_dt=args.sample_dt or 0.25,
                              rtol=args.rtol or 1e-10)
    csv_path = outdir / f"{args.which}.csv"
    _write_csv(csv_path, ["t", "v1", "v2", "E1", "E2"],
               [bundle.times, bundle.v1, bundle.v2, bundle.E1, bundle.E2])
    stab = stabilization_time(bundle)
    summary = {"figure": args.which, "E0": bundle.E0,
               "stabilization_time": stab if math.isfinite(stab) else "never"}
    digest = config_digest({"figure": {"which": args.which,
                                       "horizon": str(bundle.times[-1]),
                                       "sample_dt": str(args.sample_dt or 0.25)}})
    _write_manifest(outdir, "reproduce-figure", digest, [csv_path.name],
                    wall_time=time.perf_counter() - start, extra=summary)
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK


def _cmd_order_check(args) -> int:
    steps = [float(s) for s in args.steps.split(",") if s.strip()]
    if len(steps) < 3:
        raise ConfigError("--steps needs at least three step sizes")
    params = fig_params(n=2)
    y0 = np.array([0.0, 0.5, 0.0, 0.5])
    est = order_check(lambda t, y: full_rhs(t, y, params), y0, 0.0,
                      args.horizon, steps)
    out = {"order": est.order, "saturated": est.saturated,
           "steps": list(est.step_sizes), "errors": list(est.errors)}
    print(json.dumps(out, sort_keys=True))
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="symevol",
        description="Simulation laboratory for a two degrees-of-freedom cubic "
                    "oscillator whose symmetry-breaking terms decay slowly.",
        epilog="CSV columns are fixed per command (see each subcommand's help); "
               "numbers carry 17 significant digits. SYMEVOL_THREADS caps "
               "ensemble workers.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--rtol", type=float, default=None)
        p.add_argument("--atol", type=float, default=None)
        p.add_argument("--sample-dt", dest="sample_dt", type=float, default=None)
        p.add_argument("--horizon", type=float, default=None)

    p = sub.add_parser("simulate", help="integrate a scenario config; writes "
                                        "trajectory.csv (t,q1,v1,q2,v2,E1,E2) + manifest")
    p.add_argument("config", help="config file or preset name (fig1, fig2)")
    p.add_argument("--out", required=True)
    add_common(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("compare", help="full vs averaged error table over an "
                                       "epsilon ladder; writes compare.csv + summary")
    p.add_argument("config")
    p.add_argument("--out", required=True)
    p.add_argument("--resonance", choices=("12-first", "12-second", "13", "11"),
                   default=None)
    p.add_argument("--eps-list", dest="eps_list", default="0.1")
    p.add_argument("--window", type=float, default=1.0,
                   help="compare over [0, window/epsilon]")
    add_common(p)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("resonance", help="print manifold ratios/angles/exponents "
                                         "and the 1:1 classification as JSON")
    p.add_argument("--omega", required=True)
    p.add_argument("--a1", default="1")
    p.add_argument("--a2", default="1")
    p.add_argument("--a3", default="0")
    p.add_argument("--a4", default="1")
    p.add_argument("--e0", default=None, help="energy level for the first-order "
                                              "1:2 manifold (default 1/4)")
    p.set_defaults(func=_cmd_resonance)

    p = sub.add_parser("ensemble", help="integrate an ensemble; writes moments.csv "
                                        "+ histograms.json + manifest")
    p.add_argument("config")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None)
    add_common(p)
    p.set_defaults(func=_cmd_ensemble)

    p = sub.add_parser("reproduce-figure", help="emit the captioned scenario "
                                                "series (t,v1,v2,E1,E2)")
    p.add_argument("--which", choices=("fig1", "fig2"), required=True)
    p.add_argument("--out", required=True)
    add_common(p)
    p.set_defaults(func=_cmd_reproduce_figure)

    p = sub.add_parser("order-check", help="measure the fixed-step RK4 order "
                                           "on the canonical scenario")
    p.add_argument("--steps", default="0.2,0.1,0.05,0.025")
    p.add_argument("--horizon", type=float, default=10.0)
    p.set_defaults(func=_cmd_order_check)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IntegrationError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
