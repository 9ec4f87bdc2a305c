"""Line-oriented experiment config files: ``key = value``, ``#`` comments.

The key set is closed: an unknown key is an error naming the key and line
number, and commands report missing required keys by name. The
DDFL_ROOT environment variable supplies a default root_path when the
file does not set one.
"""

from __future__ import annotations

import os
from pathlib import Path

from .backends import BackendConfig, BackendKind
from .crypto import FernetKey, generate_key
from .errors import ConfigError, ValidationError
from .orchestrator import Aggregation, ExperimentConfig, IdxSpec, SyntheticSpec
from .training import TrainConfig

KNOWN_KEYS = frozenset(
    {
        "n_clients",
        "rounds",
        "learning_rate",
        "epochs",
        "batch_size",
        "seed",
        "backend",
        "root_path",
        "fsync",
        "aggregation",
        "dataset",
        "idx_images",
        "idx_labels",
        "group_key",
        "namespace",
        "barrier_timeout_ms",
    }
)

_DEFAULTS = {
    "learning_rate": "0.1",
    "epochs": "1",
    "batch_size": "32",
    "seed": "0",
    "fsync": "false",
    "aggregation": "sample_weighted",
    "namespace": "default",
    "barrier_timeout_ms": "30000",
}


def parse_config_file(path) -> dict[str, str]:
    """Parse a config file into a raw key/value map (defaults applied)."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    values = dict(_DEFAULTS)
    for line_number, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{line_number}: expected 'key = value', got {raw_line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in KNOWN_KEYS:
            raise ConfigError(f"{path}:{line_number}: unknown key {key!r}")
        if not value:
            raise ConfigError(f"{path}:{line_number}: key {key!r} has an empty value")
        values[key] = value
    return values


def _require(values: dict[str, str], key: str) -> str:
    if key not in values:
        raise ConfigError(f"missing required key {key!r}")
    return values[key]


def _parse_int(values: dict[str, str], key: str, minimum: int) -> int:
    raw = _require(values, key)
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"key {key!r} must be an integer, got {raw!r}") from None
    if value < minimum:
        raise ConfigError(f"key {key!r} must be >= {minimum}, got {value}")
    return value


def _parse_float(values: dict[str, str], key: str) -> float:
    raw = _require(values, key)
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"key {key!r} must be a number, got {raw!r}") from None


def _parse_bool(values: dict[str, str], key: str) -> bool:
    raw = _require(values, key).lower()
    if raw in ("true", "yes", "1", "on"):
        return True
    if raw in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"key {key!r} must be a boolean, got {raw!r}")


def parse_dataset_spec(value: str, values: dict[str, str]) -> SyntheticSpec | IdxSpec:
    if value == "idx":
        return IdxSpec(
            images=Path(_require(values, "idx_images")),
            labels=Path(_require(values, "idx_labels")),
        )
    if value == "synthetic":
        return SyntheticSpec(n=2000, d=8, k=4)
    if value.startswith("synthetic:"):
        dims = value.removeprefix("synthetic:").split("x")
        if len(dims) != 3:
            raise ConfigError(
                f"dataset {value!r} must look like synthetic:<n>x<d>x<k>"
            )
        try:
            n, d, k = (int(part) for part in dims)
        except ValueError:
            raise ConfigError(f"dataset {value!r} has non-integer dimensions") from None
        return SyntheticSpec(n=n, d=d, k=k)
    raise ConfigError(f"key 'dataset' must be 'synthetic', 'synthetic:<n>x<d>x<k>', or 'idx', got {value!r}")


def backend_kinds(values: dict[str, str]) -> list[BackendKind]:
    """The backend selection: one kind, a comma list, or 'all'."""
    raw = _require(values, "backend")
    if raw.strip().lower() == "all":
        return list(BackendKind)
    try:
        return [BackendKind.parse(part) for part in raw.split(",")]
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc


def backend_config(values: dict[str, str], kind: BackendKind) -> BackendConfig:
    root = values.get("root_path") or os.environ.get("DDFL_ROOT")
    try:
        return BackendConfig(
            kind=kind,
            root_path=Path(root) if root else None,
            namespace=values["namespace"],
            fsync=_parse_bool(values, "fsync"),
        )
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc


def group_key_from(values: dict[str, str]) -> FernetKey:
    # Without an explicit key, derive one from the seed so repeated runs
    # of the same config can decrypt each other's stores.
    if "group_key" in values:
        try:
            return FernetKey.from_encoded(values["group_key"])
        except ValidationError as exc:
            raise ConfigError(f"key 'group_key': {exc}") from exc
    return generate_key(rng_seed=_parse_int(values, "seed", 0))


def experiment_config(values: dict[str, str]) -> ExperimentConfig:
    """Build a full ExperimentConfig; raises ConfigError naming any bad key."""
    kinds = backend_kinds(values)
    if len(kinds) != 1:
        raise ConfigError("key 'backend' must name exactly one backend for this command")
    dataset = parse_dataset_spec(_require(values, "dataset"), values)
    try:
        train = TrainConfig(
            learning_rate=_parse_float(values, "learning_rate"),
            epochs=_parse_int(values, "epochs", 0),
            batch_size=_parse_int(values, "batch_size", 1),
            seed=_parse_int(values, "seed", 0),
        )
        return ExperimentConfig(
            n_clients=_parse_int(values, "n_clients", 1),
            rounds=_parse_int(values, "rounds", 1),
            train=train,
            backend=backend_config(values, kinds[0]),
            group_key=group_key_from(values),
            dataset=dataset,
            seed=_parse_int(values, "seed", 0),
            aggregation=_parse_aggregation(values),
            barrier_timeout_ms=_parse_int(values, "barrier_timeout_ms", 1),
        )
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc


def _parse_aggregation(values: dict[str, str]) -> Aggregation:
    raw = _require(values, "aggregation").lower()
    try:
        return Aggregation(raw)
    except ValueError:
        valid = ", ".join(a.value for a in Aggregation)
        raise ConfigError(f"key 'aggregation' must be one of {valid}, got {raw!r}") from None
