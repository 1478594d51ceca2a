import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wflift.errors import ParseError
from wflift.io import (
    format_float,
    parse_ensemble,
    parse_signal,
    read_config,
    write_csv,
    write_ensemble,
    write_signal,
)
from wflift.lifted_model import SamplingEnsemble, generate_gaussian_ensemble


def test_ensemble_round_trip_bit_exact(tmp_path):
    ens = generate_gaussian_ensemble(5, 7, 11)
    path = tmp_path / "e.txt"
    write_ensemble(ens, path)
    back = parse_ensemble(path)
    assert back.model_tag == "file"
    assert np.array_equal(back.vectors, ens.vectors)
    # and at the 12-digit CSV precision
    a = np.char.mod("%.12g", np.concatenate([ens.vectors.real, ens.vectors.imag]))
    b = np.char.mod("%.12g", np.concatenate([back.vectors.real, back.vectors.imag]))
    assert (a == b).all()


finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(finite, finite), min_size=1, max_size=6))
def test_signal_round_trip_property(tmp_path_factory, pairs):
    z = np.array([complex(a, b) for a, b in pairs])
    path = tmp_path_factory.mktemp("sig") / "z.txt"
    write_signal(z, path)
    assert np.array_equal(parse_signal(path), z)


def test_file_layout(tmp_path):
    path = tmp_path / "z.txt"
    write_signal(np.array([1 + 2j, -0.5j]), path)
    assert path.read_text() == "2 1\n1 2 -0 -0.5\n"


def _write(tmp_path, text):
    p = tmp_path / "f.txt"
    p.write_text(text)
    return p


def test_row_count_mismatch_names_line(tmp_path):
    p = _write(tmp_path, "1 3\n1 0\n0 1\n")
    with pytest.raises(ParseError) as info:
        parse_ensemble(p)
    assert info.value.lineno == 4
    assert ":4:" in str(info.value)


def test_extra_rows_name_first_extra_line(tmp_path):
    p = _write(tmp_path, "1 1\n1 0\n0 1\n")
    with pytest.raises(ParseError) as info:
        parse_ensemble(p)
    assert info.value.lineno == 3


@pytest.mark.parametrize(
    "text, line",
    [
        ("", 1),
        ("2\n", 1),
        ("a b\n", 1),
        ("0 1\n\n", 1),
        ("2 1\n1 2 3\n", 2),
        ("1 2\n1 0\n1 x\n", 3),
        ("1 1\nnan 0\n", 2),
        ("1 1\n1 inf\n", 2),
    ],
)
def test_malformed_inputs(tmp_path, text, line):
    p = _write(tmp_path, text)
    with pytest.raises(ParseError) as info:
        parse_ensemble(p)
    assert info.value.lineno == line


def test_signal_needs_single_row(tmp_path):
    p = _write(tmp_path, "1 2\n1 0\n0 1\n")
    with pytest.raises(ParseError):
        parse_signal(p)


def test_parsing_ignores_locale(tmp_path, monkeypatch):
    import locale

    try:
        locale.setlocale(locale.LC_NUMERIC, "de_DE.UTF-8")
    except locale.Error:
        pass
    p = _write(tmp_path, "1 1\n0.5 1e-3\n")
    try:
        assert parse_signal(p)[0] == 0.5 + 0.001j
    finally:
        locale.setlocale(locale.LC_NUMERIC, "C")


def test_csv_header_and_format(tmp_path):
    p = tmp_path / "t.csv"
    write_csv(("a", "b", "c", "d"), [(1, 0.1 + 0.2, True, float("inf")), (2, 1 / 3, False, float("nan"))], p)
    assert p.read_bytes() == b"a,b,c,d\n1,0.3,true,inf\n2,0.333333333333,false,nan\n"


def test_csv_rejects_ragged_rows(tmp_path):
    with pytest.raises(ValueError):
        write_csv(("a", "b"), [(1,)], tmp_path / "x.csv")


def test_format_float_twelve_digits():
    assert format_float(np.pi) == "3.14159265359"
    assert format_float(np.float64(2.0)) == "2"
    assert format_float(-np.inf) == "-inf"


def test_read_config(tmp_path):
    p = _write(tmp_path, "# comment\nn = 8\ndelta-grid=0,0.1,3  # trailing\n\nmodel = file:/tmp/x\n")
    assert read_config(p) == {"n": "8", "delta_grid": "0,0.1,3", "model": "file:/tmp/x"}


def test_read_config_bad_line(tmp_path):
    p = _write(tmp_path, "n = 8\njunk\n")
    with pytest.raises(ParseError) as info:
        read_config(p)
    assert info.value.lineno == 2


def test_file_ensemble_is_read_only(tmp_path):
    ens = SamplingEnsemble(np.eye(2))
    with pytest.raises(ValueError):
        ens.vectors[0, 0] = 3
