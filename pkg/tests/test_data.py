import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from certopt.data import Dataset, generate_dataset, read_csv, split_indices, write_csv
from certopt.problems import registry_lookup


@pytest.mark.parametrize("name, header", [
    ("binh_korn", ["x1", "x2", "f1", "f2", "g1", "g2"]),
    ("zdt3", ["x1", "x2", "x3", "f1", "f2"]),
])
def test_generated_columns(name, header):
    ds = generate_dataset(registry_lookup(name), 50, 7)
    assert ds.columns == header and len(ds) == 50


def test_csv_round_trip_is_exact(tmp_path):
    ds = generate_dataset(registry_lookup("zdt3"), 40, 3)
    ds.to_csv(tmp_path / "d.csv")
    back = Dataset.from_csv(tmp_path / "d.csv")
    assert back.x.tobytes() == ds.x.tobytes() and back.y.tobytes() == ds.y.tobytes()
    assert back.columns == ds.columns


def test_same_seed_same_bytes(tmp_path):
    p = registry_lookup("binh_korn")
    generate_dataset(p, 100, 7).to_csv(tmp_path / "a.csv")
    generate_dataset(p, 100, 7).to_csv(tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_missing_target_lists_columns():
    ds = generate_dataset(registry_lookup("zdt3"), 20, 0)
    with pytest.raises(KeyError, match="f1, f2"):
        ds.target("g1")


def test_integer_columns(tmp_path):
    write_csv(tmp_path / "t.csv", ["i", "v"], np.array([[3.0, 0.1]]), n_int=1)
    assert (tmp_path / "t.csv").read_text().splitlines()[1] == "3,0.1"
    header, table = read_csv(tmp_path / "t.csv")
    assert header == ["i", "v"] and table.tolist() == [[3.0, 0.1]]


@given(st.integers(10, 500), st.integers(0, 99))
def test_split_partitions(n, seed):
    s = split_indices(n, 0.15, 0.15, seed)
    together = np.concatenate([s.train, s.val, s.test])
    assert sorted(together.tolist()) == list(range(n))
    assert len(s.val) >= 1 and len(s.test) >= 1


def test_split_rejects_bad_fractions():
    with pytest.raises(ValueError):
        split_indices(100, 0.6, 0.5, 0)
