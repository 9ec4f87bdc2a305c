"""Embedded storage backends implementing the ModelStore contract.

Each backend models one database family by its dominant latency
characteristic: RAM (memory), disk files (filesystem), broker queues
(queue), and an indexed SQL table (relational).
"""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import BackendUnavailableError, ValidationError
from ..store import ModelStore


class BackendKind(enum.Enum):
    MEMORY = "memory"
    FILESYSTEM = "filesystem"
    QUEUE = "queue"
    RELATIONAL = "relational"

    @classmethod
    def parse(cls, name: str) -> "BackendKind":
        try:
            return cls(name.strip().lower())
        except ValueError:
            valid = ", ".join(k.value for k in cls)
            raise ValidationError(f"unknown backend {name!r}; valid kinds: {valid}") from None


# Backends that keep state on disk and therefore need a root_path.
DISK_BACKENDS = frozenset({BackendKind.FILESYSTEM, BackendKind.RELATIONAL})


@dataclass(frozen=True)
class BackendConfig:
    kind: BackendKind
    root_path: Path | None = None
    namespace: str = "default"
    fsync: bool = False

    def __post_init__(self):
        if not self.namespace:
            raise ValidationError("namespace must be a non-empty string")
        if self.root_path is not None:
            object.__setattr__(self, "root_path", Path(self.root_path))
        if self.kind in DISK_BACKENDS and self.root_path is None:
            raise ValidationError(f"backend {self.kind.value} requires a root_path")


def open_backend(cfg: BackendConfig) -> ModelStore:
    """Construct a ModelStore for the configured backend.

    Disk backends require ``root_path`` to already exist and be writable;
    they create their own files underneath it but never the root itself.
    """
    if cfg.kind in DISK_BACKENDS:
        root = cfg.root_path
        if not root.is_dir():
            raise BackendUnavailableError(f"root_path {root} is not an existing directory")
        if not os.access(root, os.W_OK):
            raise BackendUnavailableError(f"root_path {root} is not writable")

    if cfg.kind is BackendKind.MEMORY:
        from .memory import MemoryStore

        return MemoryStore(cfg.namespace)
    if cfg.kind is BackendKind.FILESYSTEM:
        from .filesystem import FilesystemStore

        return FilesystemStore(cfg.root_path, cfg.namespace, fsync=cfg.fsync)
    if cfg.kind is BackendKind.QUEUE:
        from .queue import QueueStore

        return QueueStore(cfg.namespace)
    if cfg.kind is BackendKind.RELATIONAL:
        from .relational import RelationalStore

        return RelationalStore(cfg.root_path, cfg.namespace, fsync=cfg.fsync)
    raise ValidationError(f"unhandled backend kind {cfg.kind}")


__all__ = [
    "BackendConfig",
    "BackendKind",
    "DISK_BACKENDS",
    "open_backend",
]
