"""Flat key-value experiment configuration.

The file format is one ``key = value`` pair per line with dotted section
prefixes and ``#`` comments. Unknown keys are errors, as are duplicates.
The schema is versioned through a mandatory ``schema_version`` key.

Example::

    schema_version = 1
    objective.id = sphere
    objective.dimension = 5
    swarm.size = 20
    run.iterations = 500
    run.runs = 100
    run.seed = 42
    run.checkpoint_stride = 10
    output.dir = out/sphere
    algorithms = qpso-fc, qpso-vc
    algorithm.qpso-fc.alpha = 0.75
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .variants import VARIANTS, allowed_params

__all__ = ["ConfigError", "ObjectiveSpec", "ExperimentConfig", "parse_config", "load_config"]

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


@dataclass
class ObjectiveSpec:
    id: str
    dimension: int
    shift: str = "none"      # "none" | "random" | path to a data file
    rotation: str = "none"   # "none" | "random" | path to a data file
    bias: float = 0.0
    transform_seed: int | None = None
    lower: float | None = None
    upper: float | None = None


@dataclass
class ExperimentConfig:
    objective: ObjectiveSpec
    iterations: int
    runs: int
    seed: int
    algorithms: list[str]
    algorithm_params: dict[str, dict] = field(default_factory=dict)
    swarm_size: int = 20
    boundary: str = "clamp"
    checkpoint_stride: int = 10
    out_dir: str | None = None
    schema_version: int = SCHEMA_VERSION


def _parse_int(key, raw):
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {raw!r}") from None


def _parse_float(key, raw):
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {raw!r}") from None


def _parse_bool(key, raw):
    low = raw.lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise ConfigError(f"{key}: expected true/false, got {raw!r}")


# converters for per-algorithm parameters; "auto" is kept verbatim where allowed
_PARAM_CONVERTERS = {
    "alpha": _parse_float,
    "alpha_start": _parse_float,
    "alpha_end": _parse_float,
    "d_lower": _parse_float,
    "d_upper": _parse_float,
    "n_phase1": _parse_int,
    "alpha1": _parse_float,
    "alpha2": _parse_float,
    "alpha3": _parse_float,
    "exponent": _parse_float,
    "dd_initial": _parse_float,
    "dd_final": _parse_float,
    "du_initial": _parse_float,
    "du_final": _parse_float,
    "reevaluate_after_collapse": _parse_bool,
    "c1": _parse_float,
    "c2": _parse_float,
    "chi": _parse_float,
    "w_start": _parse_float,
    "w_end": _parse_float,
    "v_max": _parse_float,
}
_AUTO_OK = {"dd_initial", "du_initial"}

_SIMPLE_KEYS = {
    "schema_version", "objective.id", "objective.dimension", "objective.shift",
    "objective.rotation", "objective.bias", "objective.transform_seed",
    "objective.lower", "objective.upper", "swarm.size", "swarm.boundary",
    "run.iterations", "run.runs", "run.seed", "run.checkpoint_stride",
    "output.dir", "algorithms",
}


def _read_pairs(text: str, source: str) -> dict[str, str]:
    pairs: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line.strip()!r}")
        key, raw = body.split("=", 1)
        key = key.strip()
        raw = raw.strip()
        if not key or not raw:
            raise ConfigError(f"{source}:{lineno}: empty key or value")
        if key in pairs:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        pairs[key] = raw
    return pairs


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    """Parse and validate configuration text. Unknown keys are errors."""
    pairs = _read_pairs(text, source)

    for key in pairs:
        if key in _SIMPLE_KEYS or key.startswith("algorithm."):
            continue
        raise ConfigError(f"{source}: unknown key {key!r}")

    if "schema_version" not in pairs:
        raise ConfigError(f"{source}: missing schema_version")
    version = _parse_int("schema_version", pairs["schema_version"])
    if version != SCHEMA_VERSION:
        raise ConfigError(f"{source}: unsupported schema_version {version}, expected {SCHEMA_VERSION}")

    for required in ("objective.id", "objective.dimension", "run.iterations",
                     "run.runs", "run.seed", "algorithms"):
        if required not in pairs:
            raise ConfigError(f"{source}: missing required key {required!r}")

    objective = ObjectiveSpec(
        id=pairs["objective.id"],
        dimension=_parse_int("objective.dimension", pairs["objective.dimension"]),
        shift=pairs.get("objective.shift", "none"),
        rotation=pairs.get("objective.rotation", "none"),
        bias=_parse_float("objective.bias", pairs.get("objective.bias", "0")),
        transform_seed=(_parse_int("objective.transform_seed", pairs["objective.transform_seed"])
                        if "objective.transform_seed" in pairs else None),
        lower=(_parse_float("objective.lower", pairs["objective.lower"])
               if "objective.lower" in pairs else None),
        upper=(_parse_float("objective.upper", pairs["objective.upper"])
               if "objective.upper" in pairs else None),
    )
    if objective.dimension < 1:
        raise ConfigError(f"{source}: objective.dimension must be >= 1")
    if (objective.lower is None) != (objective.upper is None):
        raise ConfigError(f"{source}: set both objective.lower and objective.upper or neither")

    tags = [t.strip() for t in pairs["algorithms"].split(",") if t.strip()]
    if not tags:
        raise ConfigError(f"{source}: algorithms list is empty")
    seen = set()
    for tag in tags:
        if tag not in VARIANTS:
            raise ConfigError(
                f"{source}: unknown algorithm {tag!r}; known: {', '.join(sorted(VARIANTS))}"
            )
        if tag in seen:
            raise ConfigError(f"{source}: algorithm {tag!r} listed twice")
        seen.add(tag)

    params: dict[str, dict] = {tag: {} for tag in tags}
    for key, raw in pairs.items():
        if not key.startswith("algorithm."):
            continue
        parts = key.split(".")
        if len(parts) != 3:
            raise ConfigError(f"{source}: malformed key {key!r}, expected algorithm.<tag>.<param>")
        _, tag, name = parts
        if tag not in params:
            raise ConfigError(f"{source}: {key!r} references an algorithm not in the algorithms list")
        legal = allowed_params(VARIANTS[tag])
        if name not in legal:
            raise ConfigError(
                f"{source}: {key!r} is not a parameter of {tag}; allowed: {', '.join(sorted(legal))}"
            )
        if raw == "auto" and name in _AUTO_OK:
            params[tag][name] = "auto"
        else:
            params[tag][name] = _PARAM_CONVERTERS[name](key, raw)

    config = ExperimentConfig(
        objective=objective,
        iterations=_parse_int("run.iterations", pairs["run.iterations"]),
        runs=_parse_int("run.runs", pairs["run.runs"]),
        seed=_parse_int("run.seed", pairs["run.seed"]),
        algorithms=tags,
        algorithm_params=params,
        swarm_size=_parse_int("swarm.size", pairs.get("swarm.size", "20")),
        boundary=pairs.get("swarm.boundary", "clamp"),
        checkpoint_stride=_parse_int("run.checkpoint_stride",
                                     pairs.get("run.checkpoint_stride", "10")),
        out_dir=pairs.get("output.dir"),
        schema_version=version,
    )
    if config.iterations < 1:
        raise ConfigError(f"{source}: run.iterations must be >= 1")
    if config.runs < 1:
        raise ConfigError(f"{source}: run.runs must be >= 1")
    if config.seed < 0:
        raise ConfigError(f"{source}: run.seed must be >= 0")
    if config.swarm_size < 2:
        raise ConfigError(f"{source}: swarm.size must be >= 2")
    if config.checkpoint_stride < 1:
        raise ConfigError(f"{source}: run.checkpoint_stride must be >= 1")
    if config.boundary not in ("clamp", "none"):
        raise ConfigError(f"{source}: swarm.boundary must be clamp or none")
    return config


def load_config(path) -> ExperimentConfig:
    """Read and parse a configuration file."""
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from None
    return parse_config(text, source=str(p))
