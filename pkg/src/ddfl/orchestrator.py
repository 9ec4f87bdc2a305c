"""The round protocol: N client workers and a master, talking only through a store.

Each round, every client fetches the previous global model, decrypts it,
trains on its own shard, and stores its encrypted local model. The master
polls until all N client records exist (the barrier), decrypts and
aggregates them, evaluates the new global on the test set, and stores it
encrypted with accuracy and elapsed time filled in. Model values are
fully deterministic for fixed seeds; only timings vary.
"""

from __future__ import annotations

import enum
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .backends import BackendConfig, open_backend
from .crypto import FernetKey, decrypt, encrypt
from .data import Dataset, generate_synthetic, load_idx, partition
from .errors import BarrierTimeoutError, ValidationError
from .params import ParameterVector, deserialize_params, init_model, serialize_params
from .store import ModelRecord, ModelStore, StoreKey, now_ms
from .training import TrainConfig, evaluate, local_train

log = logging.getLogger(__name__)


class Aggregation(enum.Enum):
    UNIFORM = "uniform"
    SAMPLE_WEIGHTED = "sample_weighted"


@dataclass(frozen=True)
class SyntheticSpec:
    """Gaussian-blob dataset: n training samples, plus a held-out test set."""

    n: int
    d: int
    k: int
    test_n: int = 0

    def resolved_test_n(self) -> int:
        return self.test_n if self.test_n > 0 else max(self.k, self.n // 4)


@dataclass(frozen=True)
class IdxSpec:
    """IDX file pair; a seeded holdout fraction becomes the test set."""

    images: Path
    labels: Path
    test_fraction: float = 0.2


@dataclass(frozen=True)
class ExperimentConfig:
    n_clients: int
    rounds: int
    train: TrainConfig
    backend: BackendConfig
    group_key: FernetKey
    dataset: SyntheticSpec | IdxSpec
    seed: int = 0
    aggregation: Aggregation = Aggregation.SAMPLE_WEIGHTED
    barrier_timeout_ms: int = 30_000
    poll_interval_ms: float = 5.0

    def __post_init__(self):
        if self.n_clients < 1:
            raise ValidationError("n_clients must be at least 1")
        if self.rounds < 1:
            raise ValidationError("rounds must be at least 1")
        if self.barrier_timeout_ms <= 0:
            raise ValidationError("barrier_timeout_ms must be positive")


@dataclass(frozen=True)
class RoundOutcome:
    """Per-round metrics. Byte counters follow the store traffic exactly:

    bytes_written = sum of the N client token lengths + the new global token;
    bytes_read    = N downloads of the previous global token + the master's
                    reads of the N client tokens. Barrier polls are not counted.
    """

    round: int
    global_accuracy: float
    round_wall_ms: float
    per_client_train_ms: tuple[float, ...]
    bytes_written: int
    bytes_read: int


def client_seed(base_seed: int, round_number: int, client_id: int) -> int:
    """Stable per-(round, client) training seed derived from the experiment seed."""
    ss = np.random.SeedSequence([base_seed, round_number, client_id])
    return int(ss.generate_state(1, np.uint64)[0])


def aggregate(models: list[ParameterVector], weights: list[float]) -> ParameterVector:
    """Weighted mean of parameter vectors: (sum w_i * M_i) / (sum w_i).

    Accumulates in float64 over a canonical input ordering, then rounds to
    float32, so jointly permuting (models, weights) cannot change a bit of
    the output.
    """
    if not models:
        raise ValidationError("cannot aggregate an empty model list")
    if len(models) != len(weights):
        raise ValidationError(f"{len(models)} models but {len(weights)} weights")
    shapes = models[0].shapes
    for m in models[1:]:
        if m.shapes != shapes:
            raise ValidationError(f"shape mismatch: {m.shapes} vs {shapes}")
    weights = [float(w) for w in weights]
    for w in weights:
        if not (w > 0 and np.isfinite(w)):
            raise ValidationError(f"weights must be positive and finite, got {w}")

    order = sorted(range(len(models)), key=lambda i: (weights[i], models[i].values.tobytes()))
    acc = np.zeros(models[0].param_count, dtype=np.float64)
    total = 0.0
    for i in order:
        acc += weights[i] * models[i].values.astype(np.float64)
        total += weights[i]
    return ParameterVector((acc / total).astype(np.float32), shapes)


def run_client_round(
    client_id: int,
    round_number: int,
    store: ModelStore,
    key: FernetKey,
    shard: Dataset,
    cfg: TrainConfig,
) -> float:
    """One client's work for one round; returns the training time in ms.

    Fetches and decrypts the previous global, trains on the shard, then
    encrypts and stores the local model at (client_id, round, 0).
    """
    previous = store.fetch_global(round_number - 1)
    model = deserialize_params(decrypt(key, previous.payload))
    start = time.perf_counter()
    trained = local_train(model, shard, cfg)
    elapsed_ms = (time.perf_counter() - start) * 1000.0
    token = encrypt(key, serialize_params(trained))
    store.put(
        ModelRecord(
            key=StoreKey(client_id, round_number, 0),
            payload=token,
            elapsed_ms=elapsed_ms,
            stored_at=now_ms(),
        )
    )
    return elapsed_ms


def _await_round(
    store: ModelStore,
    round_number: int,
    expected: int,
    timeout_ms: float,
    poll_interval_ms: float,
) -> list[ModelRecord]:
    deadline = time.monotonic() + timeout_ms / 1000.0
    while True:
        records = store.fetch_round(round_number, expected)
        if len(records) >= expected:
            return records
        if time.monotonic() >= deadline:
            present = {rec.key.client_id for rec in records}
            missing = sorted(set(range(expected)) - present)
            raise BarrierTimeoutError(round_number, missing)
        time.sleep(poll_interval_ms / 1000.0)


def run_round(
    round_number: int,
    store: ModelStore,
    cfg: ExperimentConfig,
    test_set: Dataset,
    shard_sizes: list[int] | None = None,
) -> RoundOutcome:
    """Master's side of one round: barrier, aggregate, evaluate, publish."""
    start = time.perf_counter()
    records = _await_round(
        store, round_number, cfg.n_clients, cfg.barrier_timeout_ms, cfg.poll_interval_ms
    )
    previous = store.fetch_global(round_number - 1)
    models = [deserialize_params(decrypt(cfg.group_key, rec.payload)) for rec in records]
    if cfg.aggregation is Aggregation.SAMPLE_WEIGHTED:
        if shard_sizes is None:
            shard_sizes = _derived_shard_sizes(cfg)
        weights = [float(s) for s in shard_sizes]
    else:
        weights = [1.0] * len(models)
    new_global = aggregate(models, weights)
    result = evaluate(new_global, test_set)
    token = encrypt(cfg.group_key, serialize_params(new_global))
    round_wall_ms = (time.perf_counter() - start) * 1000.0
    store.store_global(
        round_number,
        ModelRecord(
            key=StoreKey(-1, round_number, 0),
            payload=token,
            accuracy=result.accuracy,
            elapsed_ms=round_wall_ms,
            stored_at=now_ms(),
        ),
    )
    client_bytes = sum(len(rec.payload) for rec in records)
    return RoundOutcome(
        round=round_number,
        global_accuracy=result.accuracy,
        round_wall_ms=round_wall_ms,
        per_client_train_ms=tuple(rec.elapsed_ms or 0.0 for rec in records),
        bytes_written=client_bytes + len(token),
        bytes_read=cfg.n_clients * len(previous.payload) + client_bytes,
    )


def _derived_shard_sizes(cfg: ExperimentConfig) -> list[int]:
    if isinstance(cfg.dataset, SyntheticSpec):
        n = cfg.dataset.n
    else:
        raise ValidationError(
            "shard sizes cannot be derived for IDX datasets; pass shard_sizes explicitly"
        )
    k = cfg.n_clients
    return [n // k + (1 if i < n % k else 0) for i in range(k)]


def build_datasets(cfg: ExperimentConfig) -> tuple[Dataset, Dataset]:
    """Materialize the (train, test) pair described by the experiment config."""
    spec = cfg.dataset
    if isinstance(spec, SyntheticSpec):
        test_n = spec.resolved_test_n()
        full = generate_synthetic(spec.n + test_n, spec.d, spec.k, cfg.seed)
        train = Dataset(full.features[: spec.n], full.labels[: spec.n], full.num_classes)
        test = Dataset(full.features[spec.n :], full.labels[spec.n :], full.num_classes)
        return train, test
    full = load_idx(spec.images, spec.labels)
    n = len(full)
    holdout = max(1, int(n * spec.test_fraction))
    order = np.random.default_rng(cfg.seed).permutation(n)
    test_idx, train_idx = order[:holdout], order[holdout:]
    train = Dataset(full.features[train_idx], full.labels[train_idx], full.num_classes)
    test = Dataset(full.features[test_idx], full.labels[test_idx], full.num_classes)
    return train, test


def run_experiment(cfg: ExperimentConfig) -> list[RoundOutcome]:
    """Run the full protocol: round-0 global, then R rounds of train/aggregate/evaluate."""
    train, test = build_datasets(cfg)
    shards = partition(train, cfg.n_clients, cfg.seed)
    shard_sizes = [len(s) for s in shards]

    store = open_backend(cfg.backend)
    try:
        initial = init_model([(train.dim, train.num_classes)], cfg.seed)
        baseline = evaluate(initial, test)
        store.store_global(
            0,
            ModelRecord(
                key=StoreKey(-1, 0, 0),
                payload=encrypt(cfg.group_key, serialize_params(initial)),
                accuracy=baseline.accuracy,
                stored_at=now_ms(),
            ),
        )
        log.info("round 0: initial accuracy %.4f", baseline.accuracy)

        outcomes = []
        with ThreadPoolExecutor(max_workers=cfg.n_clients) as pool:
            for round_number in range(1, cfg.rounds + 1):
                futures = [
                    pool.submit(
                        run_client_round,
                        client_id,
                        round_number,
                        store,
                        cfg.group_key,
                        shards[client_id],
                        TrainConfig(
                            learning_rate=cfg.train.learning_rate,
                            epochs=cfg.train.epochs,
                            batch_size=min(cfg.train.batch_size, len(shards[client_id])),
                            seed=client_seed(cfg.train.seed, round_number, client_id),
                        ),
                    )
                    for client_id in range(cfg.n_clients)
                ]
                try:
                    outcome = run_round(round_number, store, cfg, test, shard_sizes)
                except BarrierTimeoutError:
                    # A dead client is more informative than the timeout itself.
                    for future in futures:
                        if future.done() and future.exception() is not None:
                            raise future.exception()
                    raise
                for future in futures:
                    future.result()
                outcomes.append(outcome)
                log.info(
                    "round %d: accuracy %.4f (%.1f ms)",
                    round_number,
                    outcome.global_accuracy,
                    outcome.round_wall_ms,
                )
        return outcomes
    finally:
        store.close()
