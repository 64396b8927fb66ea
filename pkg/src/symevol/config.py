"""Flat INI-style run configuration: parsing, validation and digesting.

A config has one section per concern ([model], [initial], [integrator],
[scenario], [ensemble]); values are plain typed scalars. The manifest
digest is the SHA-256 of the canonicalized text (sections and keys sorted,
whitespace normalized), so semantically identical configs hash identically.
"""

from __future__ import annotations

import configparser
import hashlib
from importlib import resources
from pathlib import Path

from .experiments import EnsembleSpec, ScenarioConfig
from .model import CartesianState, ModelParams

__all__ = ["ConfigError", "load_config", "resolve_config_path", "canonical_text",
           "config_digest", "build_params", "build_initial", "build_scenario",
           "build_ensemble"]

PRESETS = ("fig1", "fig2")


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


def resolve_config_path(name_or_path: str) -> Path:
    """Resolve a user-supplied config argument: a real file wins, otherwise
    a bundled preset name (fig1, fig2)."""
    p = Path(name_or_path)
    if p.is_file():
        return p
    if name_or_path in PRESETS:
        return Path(str(resources.files("symevol").joinpath(f"presets/{name_or_path}.ini")))
    raise ConfigError(f"config file not found: {name_or_path}")


def load_config(path) -> dict:
    """Read an INI config into {section: {key: string}}."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    return {section: dict(parser[section]) for section in parser.sections()}


def canonical_text(cfg: dict) -> str:
    lines = []
    for section in sorted(cfg):
        for key in sorted(cfg[section]):
            value = " ".join(str(cfg[section][key]).split())
            lines.append(f"{section}.{key}={value}")
    return "\n".join(lines) + "\n"


def config_digest(cfg: dict) -> str:
    return hashlib.sha256(canonical_text(cfg).encode("utf-8")).hexdigest()


def _get(cfg: dict, section: str, key: str, cast, default=None):
    try:
        raw = cfg[section][key]
    except KeyError:
        if default is not None:
            return default
        raise ConfigError(f"missing required key [{section}] {key}") from None
    try:
        return cast(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for [{section}] {key}: {raw!r}") from exc


def build_params(cfg: dict) -> ModelParams:
    try:
        return ModelParams(
            a1=_get(cfg, "model", "a1", float),
            a2=_get(cfg, "model", "a2", float),
            a3=_get(cfg, "model", "a3", float),
            a4=_get(cfg, "model", "a4", float),
            omega=_get(cfg, "model", "omega", float),
            epsilon=_get(cfg, "model", "epsilon", float),
            n=_get(cfg, "model", "n", int, default=2),
            alpha_kind=_get(cfg, "model", "alpha_kind", str, default="exponential"),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def build_initial(cfg: dict) -> CartesianState:
    try:
        return CartesianState(
            t=_get(cfg, "initial", "t0", float, default=0.0),
            q1=_get(cfg, "initial", "q1", float),
            v1=_get(cfg, "initial", "v1", float),
            q2=_get(cfg, "initial", "q2", float),
            v2=_get(cfg, "initial", "v2", float),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def build_scenario(cfg: dict, overrides: dict | None = None) -> ScenarioConfig:
    overrides = overrides or {}
    obs_raw = _get(cfg, "scenario", "observables", str, default="actions")
    observables = tuple(s.strip() for s in obs_raw.split(",") if s.strip())
    try:
        return ScenarioConfig(
            params=build_params(cfg),
            initial=build_initial(cfg),
            horizon=overrides.get("horizon") or _get(cfg, "scenario", "horizon", float),
            observables=observables,
            label=_get(cfg, "scenario", "label", str, default=""),
            rtol=overrides.get("rtol") or _get(cfg, "integrator", "rtol", float, default=1e-10),
            atol=overrides.get("atol") or _get(cfg, "integrator", "atol", float, default=1e-12),
            sample_dt=overrides.get("sample_dt")
            or _get(cfg, "integrator", "sample_dt", float, default=0.25),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _parse_sampler(raw: str):
    parts = raw.split()
    kind = parts[0].lower()
    try:
        if kind == "fixed" and len(parts) == 2:
            return ("fixed", float(parts[1]))
        if kind == "uniform" and len(parts) == 3:
            return ("uniform", float(parts[1]), float(parts[2]))
        if kind == "normal" and len(parts) == 3:
            return ("normal", float(parts[1]), float(parts[2]))
    except ValueError:
        pass
    raise ConfigError(f"bad sampler spec {raw!r} (want 'fixed V' | 'uniform LO HI' "
                      "| 'normal MEAN SIGMA')")


def build_ensemble(cfg: dict, overrides: dict | None = None) -> EnsembleSpec:
    overrides = overrides or {}
    if "ensemble" not in cfg:
        raise ConfigError("missing [ensemble] section")
    samplers = {}
    for coord in ("q1", "v1", "q2", "v2"):
        raw = cfg["ensemble"].get(coord)
        if raw is None:
            init = build_initial(cfg)
            samplers[coord] = ("fixed", getattr(init, coord))
        else:
            samplers[coord] = _parse_sampler(raw)
    try:
        return EnsembleSpec(
            scenario=build_scenario(cfg, overrides),
            samplers=samplers,
            count=_get(cfg, "ensemble", "count", int),
            seed=int(overrides.get("seed") if overrides.get("seed") is not None
                     else _get(cfg, "ensemble", "seed", int, default=0)),
            workers=_get(cfg, "ensemble", "workers", int, default=1),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
