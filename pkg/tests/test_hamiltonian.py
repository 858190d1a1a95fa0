import numpy as np
import pytest

from wdwkit import clifford as cl
from wdwkit import geometry as geo
from wdwkit import hamiltonian as ham
from wdwkit import hyperbolic as hyp

from conftest import assert_check, module_checks


def point(n=2, ym=None, **kw):
    ym = geo.su2() if ym is None else ym
    g = np.array([[1.5, 0.2], [0.2, 0.8]]) if n == 2 else np.eye(n)
    base = dict(n=n, xi=geo.sym_to_pair(g), pi=np.zeros(n * (n + 1) // 2), ym=ym)
    base.update(kw)
    return ham.FiberPoint(**base)


def test_gravity_trivial_values():
    p = point(Lambda=0.7, R=1.4)
    assert ham.h_gravity(p) == pytest.approx(0.0, abs=1e-14)
    p = point(R=0.9)
    assert ham.h_gravity(p, alphaN=2.0) == pytest.approx(-0.9 * p.phi / 2.0)


def test_yangmills_trivial_values():
    assert ham.h_yangmills(point()) == 0.0
    rng = np.random.default_rng(5)
    F = rng.normal(size=(3, 2, 2))
    F = F - np.swapaxes(F, 1, 2)
    p = point(F=F)
    val = ham.h_yangmills(p)
    assert val > 0
    assert val == pytest.approx(0.25 * ham.field_strength_squared(p) * p.phi)


def test_higgs_trivial_values():
    zero_V = lambda theta, g2: 0.0
    assert ham.h_higgs(point(V=zero_V)) == 0.0
    pt = np.arange(1.0, 7.0)
    p = point(V=zero_V, p_theta=pt)
    expected = 0.5 / p.phi * pt @ np.linalg.inv(p.gamma2) @ pt
    assert ham.h_higgs(p) == pytest.approx(expected)


def test_quadratic_toy_legendre():
    res, mom = ham.legendre_roundtrip(lambda v: 0.5 * v @ v, lambda q: 0.5 * q @ q, np.array([0.3, -1.2]))
    assert res <= 1e-10
    assert np.allclose(mom, [0.3, -1.2])
    with pytest.raises(ValueError):
        ham.legendre_roundtrip(lambda v: 0.0, lambda q: 0.0, np.zeros(1), step=1e-12)


@pytest.mark.parametrize("sector,dim", [("gravity", lambda n, n0: n * (n + 1) // 2),
                                        ("ym", lambda n, n0: n0 * n),
                                        ("higgs", lambda n, n0: 2 * n0)])
@pytest.mark.parametrize("n", [2, 3])
def test_sector_roundtrip(sector, dim, n):
    rng = np.random.default_rng(100 + n)
    ym = geo.su2()
    for _ in range(10):
        p = ham.random_point(rng, n, ym)
        assert ham.sector_roundtrip(sector, p, rng.normal(size=dim(n, ym.n0))) <= 1e-7


def test_singular_dewitt_rejected():
    p = point()
    G = geo.dewitt(p.g)
    bad = geo.DeWittTensor(tensor=G.tensor, flat=np.zeros_like(G.flat), pairs=G.pairs)
    with pytest.raises(ValueError):
        ham.h_gravity(p, G=bad)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_mass_spectrum(n):
    rep = cl.build_gamma(n)
    m = 0.8
    ev = np.sort(ham.mass_spectrum(rep, m))
    half = rep.n1 // 2
    assert np.allclose(ev, [-m] * half + [m] * half)


def test_single_site_massless_is_zero():
    d = ham.h_dirac(1, 0.5, cl.build_gamma(1), None, geo.trivial_gauge(1), 0.0, build_fock=False)
    assert np.abs(d.one_particle).max() == 0.0


def test_fock_operator_self_adjoint():
    rng = np.random.default_rng(2)
    ym = geo.su2().with_connection(rng.normal(size=(3, 3, 1)))
    d = ham.h_dirac(3, 0.3, cl.build_gamma(1), None, ym, 0.5, periodic=False, cap=None)
    assert np.allclose(d.one_particle, d.one_particle.conj().T, atol=1e-12)
    assert d.self_adjoint_residual() <= 1e-10


def test_rep_independence():
    rng = np.random.default_rng(8)
    rep = cl.build_gamma(2)
    q, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
    ym = geo.trivial_gauge(1)
    a = ham.h_dirac(4, 0.25, rep, None, ym, 0.6, build_fock=False)
    b = ham.h_dirac(4, 0.25, cl.conjugate_rep(rep, q), None, ym, 0.6, build_fock=False)
    assert np.abs(np.linalg.eigvalsh(a.one_particle) - np.linalg.eigvalsh(b.one_particle)).max() <= 1e-9


def test_constraint_toy_state():
    rng = np.random.default_rng(4)
    p = ham.solve_constraint(ham.random_point(rng, 2, geo.su2()))
    assert abs(ham.total_constraint(p)["total"]) <= 1e-6


def test_wdw_constant_field():
    lat = hyp.LatticeFiber.flat(1 / 16)
    u = np.ones((lat.Nt, lat.Nx))
    assert np.abs(ham.wdw_operator(lat)(u)[1:-1]).max() <= 1e-12


@pytest.mark.parametrize("check_id", module_checks("hamiltonian"))
def test_registered(check_id):
    assert_check(check_id)
