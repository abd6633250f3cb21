import numpy as np
import pytest

from nehari.exceptions import InvalidInputError
from nehari.grid import Grid1D
from nehari.weights import named_weight, resolve_weight

G = Grid1D(9)


@pytest.mark.parametrize(
    "spec, expected",
    [
        (2.5, np.full(9, 2.5)),
        ("constant 3", np.full(9, 3.0)),
        ("constant(0.5)", np.full(9, 0.5)),
        ({"constant": -1}, np.full(9, -1.0)),
        ("1.25", np.full(9, 1.25)),
        ("sin", np.sin(np.pi * G.x)),
    ],
)
def test_simple_specs(spec, expected):
    np.testing.assert_allclose(resolve_weight(spec, G), expected)


def test_sign_change_values():
    w = resolve_weight("sign_change(0.5)", G)
    assert np.all(w[G.x < 0.5] == 1) and np.all(w[G.x > 0.5] == -1)
    assert w[4] == 0.0


def test_bump_support_and_named_dict():
    a = resolve_weight("bump(0.5, 0.2)", G)
    b = resolve_weight({"name": "bump", "w": 0.2, "x0": 0.5}, G)
    np.testing.assert_array_equal(a, b)
    assert a[4] == pytest.approx(1.0)
    assert np.all(a[np.abs(G.x - 0.5) >= 0.2] == 0)


def test_array_spec_is_copied():
    src = np.linspace(0, 1, 9)
    w = resolve_weight(src, G)
    w[0] = 7
    assert src[0] == 0


@pytest.mark.parametrize("suffix, sep", [(".txt", " "), (".csv", ",")])
def test_file_spec(tmp_path, suffix, sep):
    vals = np.arange(9.0)
    path = tmp_path / f"w{suffix}"
    path.write_text("\n".join(f"{x}{sep}{v}" for x, v in zip(G.x, vals)) + "\n")
    np.testing.assert_allclose(resolve_weight({"file": str(path)}, G), vals)


def test_file_wrong_length_names_n(tmp_path):
    path = tmp_path / "w.txt"
    np.savetxt(path, np.ones(5))
    with pytest.raises(InvalidInputError, match="n = 9"):
        resolve_weight({"file": str(path)}, G)


@pytest.mark.parametrize(
    "spec",
    ["cosh", {"name": "bump", "width": 1}, {"what": 1}, np.ones(4), "sin(", [np.nan] * 9],
)
def test_bad_specs(spec):
    with pytest.raises(InvalidInputError):
        resolve_weight(spec, G)


def test_unknown_name():
    with pytest.raises(InvalidInputError, match="unknown weight"):
        named_weight("gauss", G.x)
