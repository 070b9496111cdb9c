"""Flat key=value config files.

One file describes a whole experiment: scene geometry, trajectory plan,
split and training settings. Keys match the dataclass field names of the
objects they configure; values are whitespace-separated scalars. Lines
starting with '#' and blank lines are ignored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

from .channel import SceneConfig, TrajectoryPlan
from .neuralnet import TrainConfig


class ConfigError(ValueError):
    """Invalid configuration file or option combination."""


_SCENE_KEYS = {f.name for f in fields(SceneConfig)}
_PLAN_KEYS = {f.name for f in fields(TrajectoryPlan)}
_TRAIN_KEYS = {f.name for f in fields(TrainConfig)}
_RUN_KEYS = {"dataset", "out", "train_fraction", "strategy", "l_bins",
             "literal_cov", "standardize", "kinds", "seed"}
KNOWN_KEYS = _SCENE_KEYS | _PLAN_KEYS | _TRAIN_KEYS | _RUN_KEYS


def parse_kv(text: str) -> dict[str, str]:
    """Parse key = value lines into a string map, rejecting duplicates."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {line!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not key or not value:
            raise ConfigError(f"line {lineno}: empty key or value")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def _as_float(key, value):
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {value!r}") from None


def _as_int(key, value):
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {value!r}") from None


def _as_bool(key, value):
    low = value.lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"{key}: expected true/false, got {value!r}")


def _as_pair(key, value):
    parts = value.split()
    if len(parts) != 2:
        raise ConfigError(f"{key}: expected two numbers, got {value!r}")
    return (_as_float(key, parts[0]), _as_float(key, parts[1]))


@dataclass(frozen=True)
class RunSettings:
    """Everything cmd_run needs beyond the scene itself."""

    dataset: str | None = None
    out: str | None = None
    train_fraction: float = 0.1
    strategy: str = "stride"
    l_bins: int = 10
    literal_cov: bool = False
    standardize: bool = False
    kinds: tuple[str, ...] = ("cov", "cir", "raw")
    seed: int = 0


@dataclass(frozen=True)
class ExperimentConfig:
    scene: SceneConfig
    plan: TrajectoryPlan
    train: TrainConfig
    run: RunSettings
    raw: dict[str, str]     # parsed key=value pairs, for hashing


def derive_seeds(seed: int) -> dict[str, int]:
    """Component seeds from one master seed.

    Fixed offsets keep the streams distinct while staying reproducible from
    a single number; explicit per-component keys in the config win over these.
    """
    return {
        "rf_chain_seed": seed + 1,
        "noise_seed": seed + 2,
        "shuffle_seed": seed + 3,
        "split_seed": seed + 4,
    }


def config_from_pairs(pairs: dict[str, str],
                      seed_override: int | None = None) -> ExperimentConfig:
    """Build the typed config objects from parsed pairs.

    seed_override (the CLI --seed flag) replaces the master seed and
    re-derives every component seed not pinned explicitly in the file.
    """
    unknown = set(pairs) - KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown keys: {', '.join(sorted(unknown))}")

    seed = seed_override if seed_override is not None else (
        _as_int("seed", pairs["seed"]) if "seed" in pairs else 0)
    derived = derive_seeds(seed)

    scene_kwargs = {}
    for key in _SCENE_KEYS & set(pairs):
        value = pairs[key]
        if key in ("room", "bs_position"):
            scene_kwargs[key] = _as_pair(key, value)
        elif key in ("array_rows", "array_cols", "n_subcarriers",
                     "max_reflection_order", "rf_chain_seed", "noise_seed"):
            scene_kwargs[key] = _as_int(key, value)
        elif key == "element_spacing":
            scene_kwargs[key] = None if value.lower() in ("auto", "none") \
                else _as_float(key, value)
        elif key == "snr_db":
            scene_kwargs[key] = math.inf if value.lower() in ("inf", "infinity") \
                else _as_float(key, value)
        else:
            scene_kwargs[key] = _as_float(key, value)
    scene_kwargs.setdefault("rf_chain_seed", derived["rf_chain_seed"])
    scene_kwargs.setdefault("noise_seed", derived["noise_seed"])

    plan_kwargs = {}
    for key in _PLAN_KEYS & set(pairs):
        value = pairs[key]
        if key == "start":
            plan_kwargs[key] = _as_pair(key, value)
        elif key == "n_lines":
            plan_kwargs[key] = _as_int(key, value)
        else:
            plan_kwargs[key] = _as_float(key, value)

    train_kwargs = {}
    for key in _TRAIN_KEYS & set(pairs):
        value = pairs[key]
        if key in ("batch_size", "epochs", "lr_decay_every", "shuffle_seed"):
            train_kwargs[key] = _as_int(key, value)
        elif key == "optimizer":
            train_kwargs[key] = value
        else:
            train_kwargs[key] = _as_float(key, value)
    train_kwargs.setdefault("shuffle_seed", derived["shuffle_seed"])

    run_kwargs = {"seed": seed}
    for key in _RUN_KEYS & set(pairs):
        value = pairs[key]
        if key in ("dataset", "out", "strategy"):
            run_kwargs[key] = value
        elif key == "train_fraction":
            run_kwargs[key] = _as_float(key, value)
        elif key == "l_bins":
            run_kwargs[key] = _as_int(key, value)
        elif key in ("literal_cov", "standardize"):
            run_kwargs[key] = _as_bool(key, value)
        elif key == "kinds":
            kinds = tuple(value.split())
            bad = set(kinds) - {"cov", "cir", "raw"}
            if bad:
                raise ConfigError(f"kinds: unknown {', '.join(sorted(bad))}")
            run_kwargs[key] = kinds
        elif key == "seed":
            pass    # handled above

    try:
        scene = SceneConfig(**scene_kwargs)
        plan = TrajectoryPlan(**plan_kwargs)
        train = TrainConfig(**train_kwargs)
        run = RunSettings(**run_kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return ExperimentConfig(scene=scene, plan=plan, train=train, run=run,
                            raw=dict(pairs))


def load_config(path: str, seed_override: int | None = None) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return config_from_pairs(parse_kv(text), seed_override=seed_override)


def _fmt_value(v) -> str:
    if v is None:
        return "auto"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, tuple):
        return " ".join(str(x) for x in v)
    return str(v)


def canonical_pairs(cfg: ExperimentConfig) -> dict[str, str]:
    """All resolved settings as strings, including CLI overrides.

    This is what gets hashed into the report, so two runs agree on the hash
    iff every effective knob agrees.
    """
    pairs = {}
    for obj in (cfg.scene, cfg.plan, cfg.train, cfg.run):
        for f in fields(obj):
            if f.name == "out":
                continue    # destination dir does not affect results
            pairs[f.name] = _fmt_value(getattr(obj, f.name))
    return pairs


def with_overrides(cfg: ExperimentConfig, fraction=None, strategy=None,
                   literal_cov=None, out=None) -> ExperimentConfig:
    """Apply CLI flag overrides on top of a loaded config."""
    run = cfg.run
    if fraction is not None:
        run = replace(run, train_fraction=fraction)
    if strategy is not None:
        run = replace(run, strategy=strategy)
    if literal_cov is not None:
        run = replace(run, literal_cov=literal_cov)
    if out is not None:
        run = replace(run, out=out)
    return replace(cfg, run=run)
