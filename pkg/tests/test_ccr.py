import numpy as np
import pytest
import scipy.sparse as sp

from wdwkit import ccr
from wdwkit import hyperbolic as hyp

from conftest import assert_check, module_checks


@pytest.fixture(scope="module")
def fock():
    return ccr.FockSpace(3, N_max=5)


def test_fock_dimension(fock):
    # number of occupation vectors of 3 modes with total <= 5 is C(8, 3)
    assert fock.dim == 56
    assert ccr.FockSpace(0, 4).dim == 1


def test_segal_vacuum_moments(fock):
    c = np.array([0.3 + 0.4j, -1.0, 0.5j])
    T = fock.segal(c)
    vac = fock.vacuum()
    assert np.vdot(vac, T @ (T @ vac)) == pytest.approx(0.5 * np.vdot(c, c).real)
    one = T @ vac
    assert np.allclose(one[fock.number != 1], 0)
    T3 = T @ (T @ (T @ vac))
    assert np.vdot(vac, T3) == 0


def test_segal_commutator_on_vacuum(fock):
    f = np.array([1.0, 0.5j, -0.2])
    g = np.array([0.3j, 1.0, 0.7 - 0.1j])
    A, B = fock.segal(f), fock.segal(g)
    vac = fock.vacuum()
    lhs = A @ (B @ vac) - B @ (A @ vac)
    assert np.allclose(lhs, 1j * np.vdot(f, g).imag * vac, atol=1e-14)


def test_segal_symmetric(fock):
    T = fock.segal([0.2, 1.0 - 1j, 0.0]).toarray()
    assert np.allclose(T, T.conj().T)


@pytest.fixture(scope="module")
def setup():
    lat = hyp.LatticeFiber.flat(1 / 32)
    row = (lat.Nt - 1) // 2
    space = ccr.OneParticleSpace.trig(lat, row, kmax=3)
    return lat, row, space, ccr.FockSpace(space.dim, 4)


def test_one_particle_orthonormal(setup):
    lat, row, space, _ = setup
    assert space.dim == 6
    assert np.abs(space.gram() - np.eye(6)).max() <= 1e-12
    with pytest.raises(ValueError):
        space.coords(np.cos(2 * np.pi * 5 * lat.x / lat.length))


def test_field_linearity_and_range(setup):
    lat, row, space, fock = setup
    u = hyp.trig_field(lat, 1.0, 0.4, 2, "sin")
    A = ccr.quantum_field(lat, space, fock, u)
    B = ccr.quantum_field(lat, space, fock, 2 * u)
    assert abs(B - 2 * A).max() <= 1e-12
    # H of a compact field lies in the null space of G
    v = hyp.trig_field(lat, 1.0, 0.4, 1, "cos")
    Z = ccr.quantum_field(lat, space, fock, hyp.apply_H(lat, v))
    assert abs(Z).max() <= 1e-9 * max(abs(A).max(), 1.0)


def test_commutator_self_pair(setup):
    lat, row, space, fock = setup
    u = hyp.trig_field(lat, 1.0, 0.4, 1, "cos")
    r = ccr.ccr_commutator_check(lat, space, fock, u, u)
    assert abs(r["omega"]) <= 1e-10 and r["residual"] <= 1e-10


def test_commutator_matches_omega(setup):
    lat, row, space, fock = setup
    u = hyp.trig_field(lat, 0.9, 0.4, 1, "cos")
    v = hyp.trig_field(lat, 1.1, 0.3, 1, "cos")
    r = ccr.ccr_commutator_check(lat, space, fock, u, v)
    assert abs(r["omega"]) > 1e-4
    assert r["residual"] <= 1e-10


def test_weyl_identity_and_unitarity(setup):
    lat, row, space, fock = setup
    W0 = ccr.weyl(sp.csr_matrix((fock.dim, fock.dim), dtype=complex), fock)
    assert np.allclose(W0.matrix(), np.eye(fock.dim))
    u = hyp.trig_field(lat, 1.0, 0.3, 2, "cos", amplitude=0.5)
    W = ccr.weyl(ccr.quantum_field(lat, space, fock, u), fock)
    assert W.unitarity_defect() <= 1e-9


def test_surface_rows_agree(setup):
    lat, row, _, _ = setup
    u = hyp.trig_field(lat, 1.0, 0.3, 1, "cos")
    v = hyp.trig_field(lat, 0.8, 0.4, 1, "cos") + hyp.trig_field(lat, 1.0, 0.3, 2, "sin")
    Gu, Gv = hyp.green_apply(lat, u), hyp.green_apply(lat, v)
    a = hyp.surface_pairing(lat, Gu, Gv, 8)
    b = hyp.surface_pairing(lat, Gu, Gv, lat.Nt - 9)
    assert abs(a) > 1e-3
    assert a == pytest.approx(b, rel=1e-10)


@pytest.mark.parametrize("check_id", module_checks("ccr"))
def test_registered(check_id):
    assert_check(check_id)
