import struct

import numpy as np
import pytest

from ddfl.data import Dataset, generate_synthetic, load_idx, normalize, partition
from ddfl.errors import FormatError, ValidationError


def test_synthetic_counts_balanced():
    data = generate_synthetic(100, 5, 4, seed=0)
    counts = np.bincount(data.labels, minlength=4)
    assert counts.tolist() == [25, 25, 25, 25]


def test_synthetic_counts_uneven():
    data = generate_synthetic(10, 2, 3, seed=0)
    counts = sorted(np.bincount(data.labels, minlength=3).tolist(), reverse=True)
    assert counts == [4, 3, 3]


def test_synthetic_deterministic():
    a = generate_synthetic(50, 3, 2, seed=11)
    b = generate_synthetic(50, 3, 2, seed=11)
    assert a == b
    assert a != generate_synthetic(50, 3, 2, seed=12)


@pytest.mark.parametrize("n,d,k", [(1, 3, 2), (5, 0, 2), (5, 3, 1)])
def test_synthetic_invalid_sizes(n, d, k):
    with pytest.raises(ValidationError):
        generate_synthetic(n, d, k, seed=0)


def test_dataset_validation():
    x = np.zeros((3, 2), dtype=np.float32)
    with pytest.raises(ValidationError):
        Dataset(x, np.array([0, 1]), 2)  # label count mismatch
    with pytest.raises(ValidationError):
        Dataset(x, np.array([0, 1, 2]), 2)  # label out of range
    with pytest.raises(ValidationError):
        Dataset(x, np.array([0, 1, 0]), 1)  # too few classes


def test_normalize_columns():
    rng = np.random.default_rng(0)
    x = rng.normal(5.0, 3.0, size=(500, 4)).astype(np.float32)
    x[:, 2] = 7.5  # constant column
    data = Dataset(x, rng.integers(0, 3, 500), 3)
    normed = normalize(data)
    cols = normed.features.astype(np.float64)
    assert np.all(np.abs(cols.mean(axis=0)) <= 1e-5)
    for j in (0, 1, 3):
        assert 0.99 <= cols[:, j].std() <= 1.01
    assert np.all(cols[:, 2] == 0.0)


def test_partition_sizes():
    data = generate_synthetic(10, 2, 2, seed=0)
    assert [len(s) for s in partition(data, 2, seed=0)] == [5, 5]
    assert [len(s) for s in partition(data, 3, seed=0)] == [4, 3, 3]


def test_partition_conserves_samples():
    data = generate_synthetic(101, 3, 4, seed=5)
    shards = partition(data, 7, seed=9)
    rows = np.concatenate([s.features for s in shards])
    labels = np.concatenate([s.labels for s in shards])
    original = np.concatenate([data.features, data.labels[:, None].astype(np.float32)], axis=1)
    recombined = np.concatenate([rows, labels[:, None].astype(np.float32)], axis=1)
    order_a = np.lexsort(original.T)
    order_b = np.lexsort(recombined.T)
    assert np.array_equal(original[order_a], recombined[order_b])


def test_partition_too_many_clients():
    data = generate_synthetic(5, 2, 2, seed=0)
    with pytest.raises(ValidationError):
        partition(data, 6, seed=0)


# --- IDX fixtures ----------------------------------------------------------

def write_idx_pair(tmp_path, pixels, labels, rows, cols):
    """Independent IDX writer: big-endian magics and dims, raw u8 payload."""
    n = len(labels)
    images = tmp_path / "images.idx"
    labels_file = tmp_path / "labels.idx"
    images.write_bytes(
        struct.pack(">IIII", 0x00000803, n, rows, cols) + bytes(pixels)
    )
    labels_file.write_bytes(struct.pack(">II", 0x00000801, n) + bytes(labels))
    return images, labels_file


def test_idx_scaling_rule(tmp_path):
    images, labels = write_idx_pair(tmp_path, [0, 255, 128, 64], [1, 0], rows=1, cols=2)
    data = load_idx(images, labels)
    expected = np.array([0, 255, 128, 64], dtype=np.float32) / np.float32(255.0)
    assert np.array_equal(data.features.reshape(-1), expected)
    assert data.labels.tolist() == [1, 0]
    assert data.features.shape == (2, 2)


def test_idx_count_mismatch(tmp_path):
    images, _ = write_idx_pair(tmp_path, list(range(10)), [0] * 10, rows=1, cols=1)
    bad_labels = tmp_path / "bad_labels.idx"
    bad_labels.write_bytes(struct.pack(">II", 0x00000801, 9) + bytes(9))
    with pytest.raises(FormatError, match="count"):
        load_idx(images, bad_labels)


def test_idx_bad_magic(tmp_path):
    images, labels = write_idx_pair(tmp_path, [0], [0], rows=1, cols=1)
    corrupted = tmp_path / "corrupt.idx"
    corrupted.write_bytes(b"\xde\xad\xbe\xef" + images.read_bytes()[4:])
    with pytest.raises(FormatError, match="magic"):
        load_idx(corrupted, labels)


def test_idx_truncated(tmp_path):
    images, labels = write_idx_pair(tmp_path, [7] * 4, [0, 1], rows=2, cols=1)
    truncated = tmp_path / "short.idx"
    truncated.write_bytes(images.read_bytes()[:-2])
    with pytest.raises(FormatError, match="byte"):
        load_idx(truncated, labels)


def test_idx_header_shape(tmp_path):
    # 3 images of 4x2 pixels -> (3, 8) matrix
    images, labels = write_idx_pair(tmp_path, list(range(24)), [0, 1, 1], rows=4, cols=2)
    data = load_idx(images, labels)
    assert data.features.shape == (3, 8)
    # row-major flattening: first image is pixels 0..7 in order
    assert np.array_equal(
        data.features[0], np.arange(8, dtype=np.float32) / np.float32(255.0)
    )
