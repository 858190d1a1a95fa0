import numpy as np
import pytest
import sympy

from wdwkit import grassmann as gr

from conftest import assert_check, module_checks


@pytest.fixture
def two():
    gens = gr.GeneratorSet(range(2))
    return gens, gr.GrassmannPoly.generator(gens, 0), gr.GrassmannPoly.generator(gens, 1)


def test_anticommuting_product(two):
    gens, c1, c2 = two
    mono = gr.GrassmannPoly.monomial(gens, [0, 1])
    assert gr.multiply(c1, c2) == mono
    assert gr.multiply(c2, c1) == -mono
    assert gr.multiply(c1, c1) == gr.GrassmannPoly.zero(gens)
    u = 3 * c1 + sympy.I * mono
    assert gr.multiply(gr.GrassmannPoly.one(gens), u) == u


def test_mismatched_sets():
    a = gr.GrassmannPoly.one(gr.GeneratorSet(range(2)))
    b = gr.GrassmannPoly.one(gr.GeneratorSet(range(3)))
    with pytest.raises(ValueError):
        gr.multiply(a, b)
    with pytest.raises(ValueError):
        gr.inner_product(a, b)


def test_left_derivative(two):
    gens, c1, c2 = two
    mono = c1 * c2
    assert gr.left_derivative(0, mono) == c2
    assert gr.left_derivative(1, mono) == -c1
    assert gr.left_derivative(0, gr.GrassmannPoly.one(gens)) == gr.GrassmannPoly.zero(gens)


def test_inner_product(two):
    gens, c1, c2 = two
    one = gr.GrassmannPoly.one(gens)
    assert gr.inner_product(one, one) == 1
    assert gr.inner_product(c1, c2) == 0
    assert gr.inner_product(sympy.I * c1, c1) == -sympy.I


def test_operator_matrix_single_generator():
    gens = gr.GeneratorSet(range(1))
    assert np.array_equal(gr.operator_matrix(gr.GrassmannOp.identity(gens)), np.eye(2))
    assert np.array_equal(gr.operator_matrix(gr.GrassmannOp.mul(gens, 0)), [[0, 0], [1, 0]])
    assert np.array_equal(gr.operator_matrix(gr.GrassmannOp.der(gens, 0)), [[0, 1], [0, 0]])


def test_operator_matrix_exact_matches_float():
    gens = gr.GeneratorSet(range(3))
    op = gr.GrassmannOp.der(gens, 1) @ gr.GrassmannOp.mul(gens, 2) + 2 * gr.GrassmannOp.mul(gens, 0)
    exact = np.array(gr.operator_matrix(op, exact=True).tolist(), dtype=complex)
    assert np.array_equal(exact, gr.operator_matrix(op))


@pytest.mark.parametrize("n", [1, 2, 4])
def test_car(n):
    rep = gr.car_check(n)
    assert len(rep) == 4
    assert all(r["status"] == "pass" and r["max_violation"] == 0 for r in rep)


def test_car_individual_relations():
    gens = gr.GeneratorSet(range(2))
    mul = [gr.operator_matrix(gr.GrassmannOp.mul(gens, g)) for g in range(2)]
    der = [gr.operator_matrix(gr.GrassmannOp.der(gens, g)) for g in range(2)]
    assert np.array_equal(mul[0] @ mul[1] + mul[1] @ mul[0], np.zeros((4, 4)))
    assert np.array_equal(der[0], mul[0].conj().T)
    assert np.array_equal(der[0] @ mul[0] + mul[0] @ der[0], np.eye(4))


def test_generator_cap():
    with pytest.raises(ValueError):
        gr.GeneratorSet.spinor(4, 2, sites=2)
    assert len(gr.GeneratorSet.spinor(2, 3, sites=2)) == 12


def test_real_imag_identity_single():
    rep = gr.real_imag_identity_check(1, 1)
    assert rep["status"] == "pass"


def test_real_imag_hand_expansion():
    # n1 = n2 = 1, written out by hand: with chi = (xi + i eta)/sqrt2,
    # chibar chidot = (xi xid + eta etad + i xi etad - i eta xid)/2 and
    # chidotbar chi = (xid xi + etad eta + i xid eta - i etad xi)/2.
    # Anticommuting, the difference is xi xid + eta etad, so
    # i/2 (chibar chidot - chidotbar chi) = i/2 (xi xid + eta etad).
    gens = gr.GeneratorSet(["xi", "eta", "xid", "etad"], cap=None)
    xi, eta, xid, etad = (gr.GrassmannPoly.generator(gens, s) for s in ["xi", "eta", "xid", "etad"])
    I = sympy.I
    a = (xi * xid + eta * etad + I * xi * etad - I * eta * xid) * sympy.Rational(1, 2)
    b = (xid * xi + etad * eta + I * xid * eta - I * etad * xi) * sympy.Rational(1, 2)
    assert a - b == xi * xid + eta * etad


@pytest.mark.parametrize("check_id", module_checks("grassmann"))
def test_registered(check_id):
    assert_check(check_id)
