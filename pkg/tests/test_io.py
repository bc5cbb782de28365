import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from dmc.exceptions import ParseError, ValidationError
from dmc.io import load_matrix, matrix_to_bytes, matrix_to_csv, parse_matrix, save_matrix


def test_csv_example():
    X = parse_matrix(b"0,1\n2,3\n")
    np.testing.assert_array_equal(X, [[0.0, 1.0], [2.0, 3.0]])


def test_csv_header_skipped():
    X = parse_matrix(b"a,b\n0,1\n2,3\n", header=True)
    assert X.shape == (2, 2)


def test_csv_ragged_row_line_number():
    with pytest.raises(ParseError, match="line 2") as info:
        parse_matrix(b"0,1\n2\n")
    assert info.value.line == 2


def test_csv_non_numeric():
    with pytest.raises(ParseError, match="line 3") as info:
        parse_matrix(b"0,1\n2,3\n4,x\n")
    assert info.value.line == 3


def test_binary_layout():
    data = matrix_to_bytes(np.array([[1.5, -2.0, 0.25]]))
    assert data[:4] == b"DMC1"
    assert struct.unpack("<II", data[4:12]) == (1, 3)
    assert struct.unpack("<3d", data[12:]) == (1.5, -2.0, 0.25)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(1, 6)),
              elements=st.floats(allow_nan=False, allow_infinity=False)))
def test_binary_round_trip_is_bit_identical(X):
    assert parse_matrix(matrix_to_bytes(X)).tobytes() == X.tobytes()


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 5), st.integers(1, 5)),
              elements=st.floats(allow_nan=False, allow_infinity=False)))
def test_csv_round_trip_is_exact(X):
    assert parse_matrix(matrix_to_csv(X).encode()).tobytes() == X.tobytes()


def test_binary_truncated():
    data = matrix_to_bytes(np.ones((2, 3)))
    with pytest.raises(ParseError) as info:
        parse_matrix(data[:-5])
    assert info.value.offset == len(data) - 5
    with pytest.raises(ParseError):
        parse_matrix(b"DMC1\x01")


def test_binary_trailing_bytes():
    with pytest.raises(ParseError, match="trailing"):
        parse_matrix(matrix_to_bytes(np.ones((2, 2))) + b"\0")


def test_load_rejects_single_row_and_nan(tmp_path):
    path = tmp_path / "one.csv"
    path.write_text("1,2,3\n")
    with pytest.raises(ValidationError):
        load_matrix(path)
    path.write_text("1,2\nnan,3\n")
    with pytest.raises(ValidationError):
        load_matrix(path)


def test_save_picks_format_by_suffix(tmp_path, rng):
    X = rng.normal(size=(3, 4))
    save_matrix(tmp_path / "m.csv", X)
    save_matrix(tmp_path / "m.bin", X)
    assert (tmp_path / "m.csv").read_bytes().count(b"\n") == 3
    assert (tmp_path / "m.bin").read_bytes()[:4] == b"DMC1"
    for name in ("m.csv", "m.bin"):
        assert load_matrix(tmp_path / name).tobytes() == X.tobytes()
    assert not load_matrix(tmp_path / "m.bin").flags.writeable
