"""Configuration loading.

Experiment configs arrive as JSON files or named presets and are merged
with command-line overrides and the ``GRAPHLIM_PARALLELISM`` environment
variable (flags beat the environment, which beats the file).
"""

from __future__ import annotations

import copy
import json
import os
from collections.abc import Mapping

import numpy as np

from .harness import ExperimentConfig, ExperimentDesign
from .kernels import HalfGraphKernel, Kernel, ScaleSequence, StepKernel
from .outcomes import PROFILE_PRESETS, OutcomeProfile

__all__ = [
    "ConfigError",
    "PRESETS",
    "preset_config",
    "load_config_file",
    "experiment_config",
    "kernel_from_config",
    "scale_from_config",
    "profile_from_config",
    "design_from_config",
]

PARALLELISM_ENV_VAR = "GRAPHLIM_PARALLELISM"

_KNOWN_KEYS = frozenset(
    {"n", "pi", "scale", "kernel", "profile", "design", "replications", "master_seed", "parallelism"}
)

_DEFAULTS: dict = {
    "n": 1000,
    "pi": 0.5,
    "scale": {"kind": "dense"},
    "kernel": {"kind": "half_graph"},
    "profile": {"preset": "paper_sec4"},
    "design": "deterministic",
    "replications": 1000,
    "master_seed": 0,
    "parallelism": 1,
}

PRESETS: dict[str, dict] = {
    "paper_sec4_dense": {
        "n": 1000,
        "pi": 0.5,
        "scale": {"kind": "dense"},
        "kernel": {"kind": "half_graph"},
        "profile": {"preset": "paper_sec4"},
        "design": "deterministic",
        "replications": 10000,
        "master_seed": 1729,
        "parallelism": 1,
    },
    "paper_sec4_sparse": {
        "n": 1000,
        "pi": 0.5,
        "scale": {"kind": "power_law", "beta": 0.3},
        "kernel": {"kind": "half_graph"},
        "profile": {"preset": "paper_sec4"},
        "design": "deterministic",
        "replications": 10000,
        "master_seed": 1729,
        "parallelism": 1,
    },
}


class ConfigError(ValueError):
    """Raised when a config file, preset, or override is malformed."""


def preset_config(name: str) -> dict:
    """A deep copy of the named preset's config dictionary."""
    try:
        return copy.deepcopy(PRESETS[name])
    except KeyError:
        raise ConfigError(
            f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}"
        ) from None


def load_config_file(path) -> dict:
    """Parse a JSON config file, reporting the position of syntax errors."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return data


def _as_int(value, field: str, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"config field '{field}' must be an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(f"config field '{field}' must be >= {minimum}, got {value!r}")
    return value


def _as_number(value, field: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"config field '{field}' must be a number, got {value!r}")
    return float(value)


def _as_object(value, field: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(f"config field '{field}' must be an object, got {value!r}")
    return value


def scale_from_config(value) -> ScaleSequence:
    """Build a scale sequence from {"kind": "dense"} or
    {"kind": "power_law", "beta": b}."""
    if isinstance(value, ScaleSequence):
        return value
    obj = _as_object(value, "scale")
    kind = obj.get("kind")
    if kind == "dense":
        extra = set(obj) - {"kind"}
        if extra:
            raise ConfigError(f"config field 'scale' has unexpected keys: {sorted(extra)}")
        return ScaleSequence.dense()
    if kind == "power_law":
        extra = set(obj) - {"kind", "beta"}
        if extra:
            raise ConfigError(f"config field 'scale' has unexpected keys: {sorted(extra)}")
        if "beta" not in obj:
            raise ConfigError("config field 'scale' of kind 'power_law' requires 'beta'")
        beta = _as_number(obj["beta"], "scale.beta")
        try:
            return ScaleSequence.power_law(beta)
        except ValueError as exc:
            raise ConfigError(f"config field 'scale.beta': {exc}") from exc
    raise ConfigError(f"config field 'scale.kind' must be 'dense' or 'power_law', got {kind!r}")


def kernel_from_config(value) -> Kernel:
    """Build a kernel from {"kind": "half_graph"} or
    {"kind": "step", "values": [[...], ...]}."""
    if isinstance(value, Kernel):
        return value
    obj = _as_object(value, "kernel")
    kind = obj.get("kind")
    if kind == "half_graph":
        extra = set(obj) - {"kind"}
        if extra:
            raise ConfigError(f"config field 'kernel' has unexpected keys: {sorted(extra)}")
        return HalfGraphKernel()
    if kind == "step":
        extra = set(obj) - {"kind", "values"}
        if extra:
            raise ConfigError(f"config field 'kernel' has unexpected keys: {sorted(extra)}")
        if "values" not in obj:
            raise ConfigError("config field 'kernel' of kind 'step' requires 'values'")
        try:
            return StepKernel(np.asarray(obj["values"], dtype=float))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"config field 'kernel.values': {exc}") from exc
    raise ConfigError(f"config field 'kernel.kind' must be 'half_graph' or 'step', got {kind!r}")


def profile_from_config(value) -> OutcomeProfile:
    """Build an outcome profile from {"preset": name} or
    {"terms": [[coef, t_pow, w_pow, x_pow], ...]}."""
    if isinstance(value, OutcomeProfile):
        return value
    obj = _as_object(value, "profile")
    if set(obj) == {"preset"}:
        name = obj["preset"]
        if name not in PROFILE_PRESETS:
            raise ConfigError(
                f"config field 'profile.preset': unknown preset {name!r}; "
                f"available: {', '.join(sorted(PROFILE_PRESETS))}"
            )
        return PROFILE_PRESETS[name]
    if set(obj) == {"terms"}:
        terms = obj["terms"]
        if not isinstance(terms, list) or not terms:
            raise ConfigError("config field 'profile.terms' must be a non-empty list")
        parsed = []
        for i, term in enumerate(terms):
            if not isinstance(term, list) or len(term) != 4:
                raise ConfigError(
                    f"config field 'profile.terms[{i}]' must be [coef, t_pow, w_pow, x_pow]"
                )
            coef = _as_number(term[0], f"profile.terms[{i}][0]")
            powers = [_as_int(p, f"profile.terms[{i}][{k}]", minimum=0) for k, p in enumerate(term[1:], start=1)]
            parsed.append((coef, *powers))
        try:
            return OutcomeProfile.from_terms(parsed)
        except ValueError as exc:
            raise ConfigError(f"config field 'profile.terms': {exc}") from exc
    raise ConfigError("config field 'profile' must have exactly one of 'preset' or 'terms'")


def design_from_config(value) -> ExperimentDesign:
    """Map a design name onto the experiment-design enum."""
    if isinstance(value, ExperimentDesign):
        return value
    if isinstance(value, str):
        for design in ExperimentDesign:
            if value == design.value:
                return design
    names = ", ".join(d.value for d in ExperimentDesign)
    raise ConfigError(f"config field 'design' must be one of {names}, got {value!r}")


def _resolve_parallelism(data: dict, overrides: Mapping, env: Mapping) -> int:
    if overrides.get("parallelism") is not None:
        return _as_int(overrides["parallelism"], "parallelism", minimum=1)
    raw = env.get(PARALLELISM_ENV_VAR)
    if raw is not None:
        try:
            value = int(raw)
        except ValueError:
            raise ConfigError(
                f"environment variable {PARALLELISM_ENV_VAR} must be an integer, got {raw!r}"
            ) from None
        return _as_int(value, PARALLELISM_ENV_VAR, minimum=1)
    return _as_int(data["parallelism"], "parallelism", minimum=1)


def experiment_config(
    data: Mapping | None = None,
    overrides: Mapping | None = None,
    env: Mapping | None = None,
) -> ExperimentConfig:
    """Merge file/preset data, overrides, and the environment into a config.

    Missing fields take the documented defaults; unknown fields are
    rejected by name.  Override keys (n, pi, replications, master_seed,
    parallelism) win over the environment, which wins over ``data``.
    """
    merged = copy.deepcopy(_DEFAULTS)
    if data is not None:
        unknown = set(data) - _KNOWN_KEYS
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")
        merged.update(copy.deepcopy(dict(data)))
    overrides = overrides or {}
    env = os.environ if env is None else env
    for field in ("n", "replications", "master_seed"):
        if overrides.get(field) is not None:
            merged[field] = _as_int(overrides[field], field)
    if overrides.get("pi") is not None:
        merged["pi"] = _as_number(overrides["pi"], "pi")

    n = _as_int(merged["n"], "n", minimum=1)
    pi = _as_number(merged["pi"], "pi")
    if not 0.0 < pi < 1.0:
        raise ConfigError(f"config field 'pi' must lie strictly inside (0, 1), got {pi!r}")
    replications = _as_int(merged["replications"], "replications", minimum=1)
    master_seed = _as_int(merged["master_seed"], "master_seed", minimum=0)
    parallelism = _resolve_parallelism(merged, overrides, env)
    try:
        return ExperimentConfig(
            n=n,
            pi=pi,
            scale=scale_from_config(merged["scale"]),
            kernel=kernel_from_config(merged["kernel"]),
            profile=profile_from_config(merged["profile"]),
            design=design_from_config(merged["design"]),
            replications=replications,
            master_seed=master_seed,
            parallelism=parallelism,
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
