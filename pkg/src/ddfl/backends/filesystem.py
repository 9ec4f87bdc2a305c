"""Filesystem backend: one file per record, published by atomic link.

Record files live at <root>/<namespace>/<client>/<round>/<iteration>.rec
and contain:

    header  (16 bytes): magic "DDR1" | payload length u64 LE | flags u32 LE
    payload (length as above)
    footer  (24 bytes): accuracy f64 LE | elapsed_ms f64 LE | stored_at u64 LE

Flag bit 0 marks a present accuracy, bit 1 a present elapsed_ms; absent
fields are written as zero. Writes go to a temp file in the same
directory and are published with os.link, which is atomic and fails on an
existing target, giving crash safety and duplicate detection in one step.
"""

from __future__ import annotations

import os
import struct
import uuid
from pathlib import Path

from ..errors import CorruptRecordError, DuplicateKeyError, NotFoundError
from ..store import ModelRecord, ModelStore, StoreKey, check_fetch_round_args

RECORD_MAGIC = b"DDR1"
_HEADER = struct.Struct("<4sQI")
_FOOTER = struct.Struct("<ddQ")
_HAS_ACCURACY = 0x1
_HAS_ELAPSED = 0x2


def encode_record(record: ModelRecord) -> bytes:
    flags = 0
    accuracy = 0.0
    elapsed = 0.0
    if record.accuracy is not None:
        flags |= _HAS_ACCURACY
        accuracy = record.accuracy
    if record.elapsed_ms is not None:
        flags |= _HAS_ELAPSED
        elapsed = record.elapsed_ms
    return (
        _HEADER.pack(RECORD_MAGIC, len(record.payload), flags)
        + record.payload
        + _FOOTER.pack(accuracy, elapsed, record.stored_at)
    )


def decode_record(blob: bytes, key: StoreKey, source: str) -> ModelRecord:
    if len(blob) < _HEADER.size + _FOOTER.size:
        raise CorruptRecordError(f"{source}: {len(blob)} bytes is too short for a record")
    magic, payload_len, flags = _HEADER.unpack_from(blob, 0)
    if magic != RECORD_MAGIC:
        raise CorruptRecordError(f"{source}: bad record magic {magic!r}")
    expected = _HEADER.size + payload_len + _FOOTER.size
    if len(blob) != expected:
        raise CorruptRecordError(f"{source}: expected {expected} bytes, found {len(blob)}")
    payload = blob[_HEADER.size : _HEADER.size + payload_len]
    accuracy, elapsed, stored_at = _FOOTER.unpack_from(blob, _HEADER.size + payload_len)
    return ModelRecord(
        key=key,
        payload=payload,
        accuracy=accuracy if flags & _HAS_ACCURACY else None,
        elapsed_ms=elapsed if flags & _HAS_ELAPSED else None,
        stored_at=stored_at,
    )


class FilesystemStore(ModelStore):
    def __init__(self, root: Path, namespace: str, fsync: bool = False):
        super().__init__(namespace)
        self.root = Path(root)
        self.fsync = fsync
        self._ns_dir = self.root / namespace
        self._ns_dir.mkdir(parents=True, exist_ok=True)

    def _record_path(self, key: StoreKey) -> Path:
        return self._ns_dir / key.client_label / str(key.round) / f"{key.iteration}.rec"

    def put(self, record: ModelRecord) -> None:
        final = self._record_path(record.key)
        final.parent.mkdir(parents=True, exist_ok=True)
        tmp = final.parent / f".{final.name}.tmp-{uuid.uuid4().hex}"
        blob = encode_record(record)
        try:
            with open(tmp, "wb") as fh:
                fh.write(blob)
                if self.fsync:
                    fh.flush()
                    os.fsync(fh.fileno())
            try:
                os.link(tmp, final)
            except FileExistsError:
                raise DuplicateKeyError(
                    f"{record.key} already stored in {self.namespace!r}"
                ) from None
            if self.fsync:
                dir_fd = os.open(final.parent, os.O_RDONLY)
                try:
                    os.fsync(dir_fd)
                finally:
                    os.close(dir_fd)
        finally:
            tmp.unlink(missing_ok=True)

    def get(self, key: StoreKey) -> ModelRecord:
        path = self._record_path(key)
        try:
            blob = path.read_bytes()
        except FileNotFoundError:
            raise NotFoundError(f"{key} not in {self.namespace!r}") from None
        return decode_record(blob, key, str(path))

    def fetch_round(self, round_number: int, expected_clients: int) -> list[ModelRecord]:
        check_fetch_round_args(round_number)
        records = []
        if self._ns_dir.is_dir():
            for client_dir in self._ns_dir.iterdir():
                if not client_dir.name.isdigit():
                    continue
                round_dir = client_dir / str(round_number)
                if not round_dir.is_dir():
                    continue
                for rec_file in round_dir.glob("*.rec"):
                    key = StoreKey(int(client_dir.name), round_number, int(rec_file.stem))
                    records.append(self.get(key))
        records.sort(key=lambda rec: (rec.key.client_id, rec.key.iteration))
        return records

    def latest_round(self) -> int:
        global_dir = self._ns_dir / "global"
        if not global_dir.is_dir():
            return 0
        rounds = [
            int(round_dir.name)
            for round_dir in global_dir.iterdir()
            if round_dir.name.isdigit() and any(round_dir.glob("*.rec"))
        ]
        return max(rounds, default=0)
