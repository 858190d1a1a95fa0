import json

import numpy as np
import pytest

from wdwkit import clifford as cl

from conftest import assert_check, module_checks


@pytest.mark.parametrize("n,n1", [(1, 2), (2, 4), (3, 4), (4, 8), (5, 8)])
def test_spinor_dimension(n, n1):
    assert cl.build_gamma(n).n1 == n1
    assert cl.spinor_dimension(n) == n1


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_gamma0_squares_to_minus_one(n):
    g0 = cl.build_gamma(n)[0]
    assert np.array_equal(g0 @ g0, -np.eye(g0.shape[0]))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_build_gamma_valid_and_deterministic(n):
    a, b = cl.build_gamma(n), cl.build_gamma(n)
    assert cl.check_clifford(a) == []
    assert np.array_equal(a.re, b.re) and np.array_equal(a.im, b.im)
    assert a.re.dtype.kind == "i" and a.im.dtype.kind == "i"


def test_doubled_generator_reported():
    rep = cl.build_gamma(2)
    re, im = rep.exact(1)
    issues = cl.check_clifford(rep.replace(1, 2 * re, 2 * im))
    assert any("(1,1)" in s for s in issues)


def test_hermitian_part_of_gamma0_reported():
    rep = cl.build_gamma(3)
    g0 = rep[0]
    herm = (g0 + g0.conj().T) / 2
    assert np.allclose(herm, 0)  # antihermitian: the Hermitian part vanishes
    broken = rep.replace(0, herm.real.astype(int), herm.imag.astype(int))
    assert any("(0,0)" in s for s in cl.check_clifford(broken))
    # a Hermitian replacement with the right square is caught by the hermiticity test
    re, im = rep.exact(0)
    issues = cl.check_clifford(rep.replace(0, -im, re))
    assert any("antihermitian" in s for s in issues)


def test_lower_index():
    rep = cl.build_gamma(3)
    assert np.array_equal(cl.lower_index(rep, 0), -rep[0])
    assert np.array_equal(cl.lower_index(rep, 1), rep[1])
    for a in range(4):
        assert np.array_equal(cl.raise_index(rep, cl.lower_index(rep, a), a), rep[a])
    with pytest.raises(IndexError):
        cl.lower_index(rep, 4)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_mixed_products(n):
    rep = cl.build_gamma(n)
    g0l = cl.lower_index(rep, 0)
    for a in range(1, n + 1):
        assert np.array_equal(g0l @ rep[a], -rep[a] @ g0l)
        m = rep[0] @ rep[a]
        assert np.array_equal(m, m.conj().T)


def test_size_cap():
    with pytest.raises(ValueError):
        cl.build_gamma(20)
    with pytest.raises(ValueError):
        cl.build_gamma(0)


def test_dump_roundtrip(tmp_path):
    rep = cl.build_gamma(2)
    cl.dump(rep, tmp_path / "g.json")
    data = json.loads((tmp_path / "g.json").read_text())
    assert data["n1"] == 4 and data["eta"] == [-1, 1, 1]
    re = np.array([[[int(e[0]) for e in row] for row in m] for m in data["gammas"]])
    assert np.array_equal(re, rep.re)


@pytest.mark.parametrize("check_id", module_checks("clifford"))
def test_registered(check_id):
    assert_check(check_id)
