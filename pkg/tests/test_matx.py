import numpy as np
import pytest

from crbkit import InvalidInput, dump_matrix, load_matrix, parse_matrix, save_matrix


def test_header_then_rows():
    text = dump_matrix(np.array([[1.5, -2.0], [0.25, 1e-3]]))
    lines = text.splitlines()
    assert lines[0] == "2 2"
    assert len(lines) == 3


def test_roundtrip_is_exact():
    rng = np.random.default_rng(3)
    a = rng.standard_normal((4, 7)) * np.logspace(-12, 12, 7)
    assert np.array_equal(parse_matrix(dump_matrix(a)), a)


def test_vector_becomes_single_row():
    assert parse_matrix(dump_matrix(np.array([1.0, 2.0]))).shape == (1, 2)


def test_special_values_roundtrip(tmp_path):
    path = tmp_path / "m.matx"
    a = np.array([[1.0 / 3.0, 2.0 / 7.0], [-1e-300, 6.02214076e23]])
    save_matrix(path, a)
    assert np.array_equal(load_matrix(path), a)


def test_zero_row_block_is_legal():
    assert parse_matrix("0 2\n").shape == (0, 2)


@pytest.mark.parametrize(
    "text",
    [
        "",
        "2\n1 2",
        "1 2\n1",
        "2 2\n1 2\n3 x",
        "1 1\n5\nextra",
        "2 2\n1 2\n",
        "-1 2\n",
    ],
)
def test_malformed_text_rejected(text):
    with pytest.raises(InvalidInput):
        parse_matrix(text)


def test_missing_file_rejected(tmp_path):
    with pytest.raises(InvalidInput):
        load_matrix(tmp_path / "absent.matx")
