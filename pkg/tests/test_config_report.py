import pytest

from ddfl.backends import BackendKind
from ddfl.config import (
    backend_kinds,
    experiment_config,
    group_key_from,
    parse_config_file,
    parse_dataset_spec,
)
from ddfl.crypto import generate_key
from ddfl.errors import ConfigError
from ddfl.orchestrator import Aggregation, IdxSpec, SyntheticSpec
from ddfl.report import CSV_HEADER, MetricsReport


def write_config(tmp_path, text):
    path = tmp_path / "exp.cfg"
    path.write_text(text, encoding="utf-8")
    return path


GOOD = """
# a comment line
n_clients = 2
rounds = 3
learning_rate = 0.1
epochs = 1
batch_size = 16
seed = 7
backend = memory
dataset = synthetic:200x4x2
"""


def test_parse_good_config(tmp_path):
    values = parse_config_file(write_config(tmp_path, GOOD))
    cfg = experiment_config(values)
    assert cfg.n_clients == 2
    assert cfg.rounds == 3
    assert cfg.train.seed == 7
    assert cfg.dataset == SyntheticSpec(n=200, d=4, k=2)
    assert cfg.aggregation is Aggregation.SAMPLE_WEIGHTED  # default


def test_unknown_key_names_key_and_line(tmp_path):
    path = write_config(tmp_path, "backend = memory\nmystery = 1\n")
    with pytest.raises(ConfigError, match=r"mystery"):
        parse_config_file(path)
    with pytest.raises(ConfigError, match=r":2"):
        parse_config_file(path)


def test_missing_required_key_named(tmp_path):
    values = parse_config_file(write_config(tmp_path, "backend = memory\n"))
    with pytest.raises(ConfigError, match="dataset"):
        experiment_config(values)


def test_rounds_zero_rejected_by_name(tmp_path):
    values = parse_config_file(
        write_config(tmp_path, GOOD.replace("rounds = 3", "rounds = 0"))
    )
    with pytest.raises(ConfigError, match="rounds"):
        experiment_config(values)


def test_backend_selection():
    assert backend_kinds({"backend": "all"}) == list(BackendKind)
    assert backend_kinds({"backend": "memory,queue"}) == [
        BackendKind.MEMORY,
        BackendKind.QUEUE,
    ]
    with pytest.raises(ConfigError):
        backend_kinds({"backend": "oracle-db"})


def test_dataset_spec_grammar():
    assert parse_dataset_spec("synthetic", {}) == SyntheticSpec(n=2000, d=8, k=4)
    assert parse_dataset_spec("synthetic:10x3x2", {}) == SyntheticSpec(n=10, d=3, k=2)
    spec = parse_dataset_spec(
        "idx", {"idx_images": "img.idx", "idx_labels": "lbl.idx"}
    )
    assert isinstance(spec, IdxSpec)
    with pytest.raises(ConfigError):
        parse_dataset_spec("synthetic:10x3", {})
    with pytest.raises(ConfigError):
        parse_dataset_spec("csv", {})
    with pytest.raises(ConfigError, match="idx_images"):
        parse_dataset_spec("idx", {})


def test_group_key_parsing():
    key = generate_key(rng_seed=5)
    assert group_key_from({"group_key": key.encoded()}) == key
    # Absent key: derived from the seed, stable across runs.
    assert group_key_from({"seed": "3"}) == group_key_from({"seed": "3"})
    with pytest.raises(ConfigError, match="group_key"):
        group_key_from({"group_key": "tooshort"})


def test_bad_line_shape(tmp_path):
    with pytest.raises(ConfigError, match=":1"):
        parse_config_file(write_config(tmp_path, "just some words\n"))


def test_ddfl_root_env_supplies_root_path(tmp_path, monkeypatch):
    monkeypatch.setenv("DDFL_ROOT", str(tmp_path))
    values = parse_config_file(
        write_config(tmp_path, GOOD.replace("backend = memory", "backend = filesystem"))
    )
    cfg = experiment_config(values)
    assert cfg.backend.root_path == tmp_path


def test_explicit_root_path_beats_env(tmp_path, monkeypatch):
    monkeypatch.setenv("DDFL_ROOT", "/somewhere/else")
    explicit = tmp_path / "store"
    explicit.mkdir()
    values = parse_config_file(
        write_config(
            tmp_path,
            GOOD.replace("backend = memory", "backend = filesystem")
            + f"root_path = {explicit}\n",
        )
    )
    cfg = experiment_config(values)
    assert cfg.backend.root_path == explicit


def test_missing_file():
    with pytest.raises(ConfigError):
        parse_config_file("/nonexistent/exp.cfg")


# --- metrics report ------------------------------------------------------------

def test_csv_header_exact():
    report = MetricsReport()
    assert report.to_csv().splitlines()[0] == "metric,backend,dataset,param,value,unit"
    assert CSV_HEADER == ["metric", "backend", "dataset", "param", "value", "unit"]


def test_csv_roundtrip():
    report = MetricsReport()
    report.add("query_get_median", "memory", "synthetic", "records=10", 0.0123, "ms")
    report.add("param_count", "-", "synthetic", "d=784;k=10", 7850, "values")
    report.add("query_get_median", "filesystem", "synthetic", "records=10", "unavailable", "ms")
    again = MetricsReport.from_csv(report.to_csv())
    assert sorted(map(repr, again.rows)) == sorted(map(repr, report.rows))
    # Value types survive: float stays float, int stays int, str stays str.
    assert isinstance(again.rows[0].value, float)
    assert isinstance(again.rows[1].value, int)
    assert isinstance(again.rows[2].value, str)


def test_markdown_table_shape():
    report = MetricsReport()
    report.add("m", "memory", "d", "p", 1.5, "ms")
    lines = report.to_markdown().splitlines()
    assert lines[0].startswith("| metric")
    assert set(lines[1]) <= {"|", "-"}
    assert "memory" in lines[2]


def test_timing_rows_have_units():
    report = MetricsReport()
    report.add("scale_total_time", "memory", "synthetic", "clients=2", 1.25, "s")
    for row in report.rows:
        assert row.unit in ("ms", "s", "bytes", "values")
