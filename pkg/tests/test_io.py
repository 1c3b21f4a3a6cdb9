import numpy as np
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from cosparse_lp.io import (atomic_write_text, csv_text, dumps_cosupport, dumps_matrix,
                            dumps_signal, loads_cosupport, loads_matrix, loads_signal, read_matrix,
                            write_matrix)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 5), st.integers(1, 5)),
              elements=st.floats(allow_nan=False, allow_infinity=False)))
def test_matrix_roundtrip_is_exact(mat):
    np.testing.assert_array_equal(loads_matrix(dumps_matrix(mat)), mat)


def test_matrix_file_roundtrip(tmp_path):
    mat = np.array([[1.0, 1 / 3], [np.pi, -0.0]])
    write_matrix(tmp_path / "m.txt", mat)
    np.testing.assert_array_equal(read_matrix(tmp_path / "m.txt"), mat)
    assert (tmp_path / "m.txt").read_text().startswith("2 2\n")


def test_signal_and_cosupport_roundtrip():
    x = np.array([0.1, -2.5, 1e-300])
    np.testing.assert_array_equal(loads_signal(dumps_signal(x)), x)
    assert loads_cosupport(dumps_cosupport([0, 3, 4])) == (0, 3, 4)


def test_csv_cells():
    text = csv_text(("a", "b", "c"), [(True, None, 0.5)])
    assert text == "a,b,c\ntrue,,0.5\n"


def test_atomic_write_leaves_no_temp(tmp_path):
    atomic_write_text(tmp_path / "sub" / "f.txt", "x")
    assert [p.name for p in (tmp_path / "sub").iterdir()] == ["f.txt"]
