import json
import struct

import numpy as np
import pytest

from sesel import io
from sesel.errors import (
    DuplicateIndex,
    EmptyDataset,
    FormatError,
    MissingIndex,
)
from sesel.sampler import SelectionResult


def test_binary_round_trip(tmp_path):
    path = tmp_path / "emb.sesm"
    data = np.array([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])
    io.write_embeddings(path, data)
    back = io.read_embeddings(path)
    assert back.shape == (3, 2)
    assert back.dtype == np.float64
    np.testing.assert_array_equal(back, data)


def test_binary_header_layout(tmp_path):
    path = tmp_path / "emb.sesm"
    io.write_embeddings(path, np.array([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]))
    raw = path.read_bytes()
    magic, version, n, d = struct.unpack_from("<4sIQI", raw)
    assert (magic, version, n, d) == (b"SESM", 1, 3, 2)
    assert len(raw) == 20 + 4 * n * d


def test_csv_embeddings():
    import tempfile

    with tempfile.TemporaryDirectory() as td:
        path = f"{td}/e.csv"
        with open(path, "w") as fh:
            fh.write("1.0,0.0\n0.0,1.0\n")
        data = io.read_embeddings(path, format="csv")
        np.testing.assert_array_equal(data, np.eye(2))


def test_csv_and_binary_agree(tmp_path):
    data = np.round(np.random.default_rng(0).standard_normal((5, 3)), 3)
    data = data.astype(np.float32).astype(np.float64)  # binary stores f32
    bpath = tmp_path / "e.sesm"
    cpath = tmp_path / "e.csv"
    io.write_embeddings(bpath, data)
    io.write_embeddings(cpath, data, format="csv")
    np.testing.assert_array_equal(io.read_embeddings(bpath), io.read_embeddings(cpath))


def test_nan_rejected(tmp_path):
    path = tmp_path / "e.csv"
    path.write_text("1.0,nan\n2.0,3.0\n")
    with pytest.raises(FormatError):
        io.read_embeddings(path, format="csv")


def test_empty_rejected(tmp_path):
    path = tmp_path / "e.csv"
    path.write_text("")
    with pytest.raises(EmptyDataset):
        io.read_embeddings(path, format="csv")


def test_bad_magic(tmp_path):
    path = tmp_path / "e.sesm"
    path.write_bytes(b"NOPE" + b"\x00" * 20)
    with pytest.raises(FormatError):
        io.read_embeddings(path)


def test_scalar_csv_basic(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("index,value\n0,0.5\n1,-1.2\n")
    np.testing.assert_array_equal(io.read_scalar_csv(path, 2), [0.5, -1.2])


def test_scalar_csv_unordered(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("index,value\n1,2.0\n0,1.0\n")
    np.testing.assert_array_equal(io.read_scalar_csv(path, 2), [1.0, 2.0])


def test_scalar_csv_duplicate(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("index,value\n0,0.5\n0,1.0\n")
    with pytest.raises(DuplicateIndex):
        io.read_scalar_csv(path, 2)


def test_scalar_csv_missing(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("index,value\n0,0.5\n1,1.0\n")
    with pytest.raises(MissingIndex):
        io.read_scalar_csv(path, 3)


def test_scalar_csv_labels(tmp_path):
    path = tmp_path / "l.csv"
    path.write_text("index,value\n0,1\n1,0\n2,3\n")
    labels = io.read_scalar_csv(path, 3, as_labels=True)
    assert labels.dtype == np.int64
    np.testing.assert_array_equal(labels, [1, 0, 3])
    path.write_text("index,value\n0,1.5\n1,0\n2,3\n")
    with pytest.raises(FormatError):
        io.read_scalar_csv(path, 3, as_labels=True)


def test_scalar_round_trip(tmp_path):
    values = np.random.default_rng(3).standard_normal(17)
    path = tmp_path / "v.csv"
    io.write_scalar_csv(path, values)
    np.testing.assert_array_equal(io.read_scalar_csv(path, 17), values)


def _result(indices, m, warnings=()):
    return SelectionResult(
        indices=np.asarray(indices, dtype=np.int64),
        theta_final=0.52,
        per_class_counts={0: 1, 2: 1},
        warnings=list(warnings),
        n=5,
        m=m,
        k=3,
        beta=0.25,
        gamma=1.5,
        graph_entropy=2.25,
        seed=11,
    )


def test_write_selection_sorted(tmp_path):
    res = _result([0, 2], 2)
    io.write_selection(res, tmp_path / "sel.txt", tmp_path / "rep.json")
    assert (tmp_path / "sel.txt").read_text() == "0\n2\n"


def test_write_selection_empty(tmp_path):
    res = _result([], 0)
    io.write_selection(res, tmp_path / "sel.txt", tmp_path / "rep.json")
    assert (tmp_path / "sel.txt").read_text() == ""
    report = json.loads((tmp_path / "rep.json").read_text())
    assert report["m"] == 0


def test_report_round_trip(tmp_path):
    res = _result([0, 2], 2, warnings=["caps_relaxed:1"])
    io.write_selection(res, tmp_path / "sel.txt", tmp_path / "rep.json")
    report = io.read_report(tmp_path / "rep.json")
    assert report == io.selection_report_dict(res) | {"per_class_counts": {0: 1, 2: 1}}
    np.testing.assert_array_equal(
        io.read_selection_indices(tmp_path / "sel.txt"), res.indices
    )


def test_unsorted_indices_rejected(tmp_path):
    res = _result([2, 0], 2)
    with pytest.raises(FormatError):
        io.write_selection(res, tmp_path / "sel.txt", tmp_path / "rep.json")
