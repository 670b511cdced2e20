import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from soilobs.errors import ConfigError
from soilobs.matrixio import HEADER, dump_matrices, format_value, load_matrices, read_report, write_report

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@given(arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(1, 6)), elements=finite))
def test_round_trip_is_exact(tmp_path_factory, M):
    path = tmp_path_factory.mktemp("io") / "m.mtx"
    dump_matrices(path, {"M": M, "I": np.eye(2)})
    back = load_matrices(path)
    assert np.array_equal(back["M"], M)
    assert np.array_equal(back["I"], np.eye(2))


def test_coordinate_layout(tmp_path):
    path = tmp_path / "m.mtx"
    dump_matrices(path, {"A": np.array([[0.0, 0.1], [3.0, 0.0]]), "g": np.array([[2.5]])})
    lines = path.read_text().splitlines()
    assert lines[0] == HEADER
    assert lines[1] == "%matrix A 2 2 2"
    assert lines[2] == "1 2 0.10000000000000001"
    assert lines[3] == "2 1 3"
    assert lines[4] == "%matrix g 1 1 1"


def test_all_zero_matrix_keeps_shape(tmp_path):
    path = tmp_path / "z.mtx"
    dump_matrices(path, {"Z": np.zeros((3, 4))})
    assert load_matrices(path)["Z"].shape == (3, 4)


def test_bad_inputs(tmp_path):
    with pytest.raises(ValueError):
        dump_matrices(tmp_path / "x.mtx", {"a b": np.eye(1)})
    bad = tmp_path / "bad.mtx"
    bad.write_text("hello\n")
    with pytest.raises(ConfigError):
        load_matrices(bad)
    bad.write_text(HEADER + "\n1 1 1.0\n")
    with pytest.raises(ConfigError):
        load_matrices(bad)


@pytest.mark.parametrize(
    "v,text",
    [(None, "none"), (True, "true"), (np.bool_(False), "false"), (3, "3"), (0.1, "0.1"),
     (1.484006e-4, "0.0001484006"), ((1.0, 2), "1.0, 2"), ("thau", "thau")],
)
def test_format_value(v, text):
    assert format_value(v) == text


def test_report_round_trip(tmp_path):
    path = tmp_path / "report.txt"
    write_report(path, {"a": {"x": 1.5, "ok": True}, "b": {"t_cross": None}})
    assert read_report(path) == {"a": {"x": "1.5", "ok": "true"}, "b": {"t_cross": "none"}}
    assert float(read_report(path)["a"]["x"]) == 1.5
