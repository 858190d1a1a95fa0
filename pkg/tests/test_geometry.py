import numpy as np
import pytest

from wdwkit import clifford as cl
from wdwkit import geometry as geo

from conftest import assert_check, module_checks


def u1():
    return geo.YangMillsData(f=np.zeros((1, 1, 1)), gamma=np.eye(1), t=np.full((1, 1, 1), -0.5j))


def test_dewitt_identity_components():
    G = geo.dewitt(np.eye(2))
    t = G.tensor
    assert t[0, 1, 0, 1] == pytest.approx(0.5)
    assert t[0, 0, 1, 1] == pytest.approx(-1.0)
    assert t[0, 0, 0, 0] == pytest.approx(0.0)
    # hand assembly on the pair basis (11, 12, 22)
    assert np.allclose(G.flat, [[0, 0, -1], [0, 2, 0], [-1, 0, 0]])
    assert G.signature() == (1, 0, 2)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_trace_direction(n):
    assert geo.trace_direction_value(geo.dewitt(np.eye(n))) == pytest.approx(n - n * n)


def test_dewitt_symmetries_and_signature():
    rng = np.random.default_rng(3)
    for n in (2, 3, 4):
        a = rng.normal(size=(n, n))
        g = a @ a.T + n * np.eye(n)
        G = geo.dewitt(g)
        t = G.tensor
        assert np.allclose(t, t.transpose(1, 0, 2, 3))
        assert np.allclose(t, t.transpose(2, 3, 0, 1))
        assert np.allclose(G.flat, G.flat.T)
        assert G.signature() == (1, 0, n * (n + 1) // 2 - 1)
        gdot = rng.normal(size=(n, n))
        gdot = gdot + gdot.T
        x = geo.sym_to_pair(gdot)
        assert x @ G.flat @ x == pytest.approx(np.einsum("ijkl,ij,kl->", t, gdot, gdot))


def test_dewitt_rejects_indefinite():
    with pytest.raises(ValueError):
        geo.dewitt(np.diag([1.0, -1.0]))


def test_phi():
    rho = np.array([[2.0, 0.3], [0.3, 1.0]])
    assert geo.phi(rho, rho) == pytest.approx(1.0)
    assert geo.phi(4 * rho, rho) == pytest.approx(4.0)
    assert geo.phi(4 * np.eye(3), np.eye(3)) == pytest.approx(8.0)
    g, s = np.diag([3.0, 2.0]), np.diag([0.5, 1.5])
    assert geo.phi(g, rho) * geo.phi(rho, s) == pytest.approx(geo.phi(g, s))
    with pytest.raises(ValueError):
        geo.phi(np.eye(2), np.eye(3))


def test_fiber_metric_eigenvalues():
    fm = geo.fiber_metric(np.eye(2), np.eye(2), u1(), alphaN=1.0)
    # gravity block eigenvalues of the pair matrix are -1, 1, 2; Yang-Mills block is 2 I_2
    # and the two Higgs blocks are 2 each
    expected = sorted([-1.0, 1.0, 2.0, 2.0, 2.0, 2.0, 2.0])
    assert np.allclose(np.sort(np.linalg.eigvalsh(fm.matrix)), expected)
    assert fm.signature() == (1, 0, 6)


def test_fiber_metric_scaling_and_reduction():
    rho = np.eye(3)
    c = 1.7
    base = geo.fiber_metric(rho, rho, geo.su2())
    scaled = geo.fiber_metric(c * c * rho, rho, geo.su2())
    assert scaled.phi == pytest.approx(c ** 3 * base.phi)
    g = np.diag([1.0, 2.0, 3.0])
    fm = geo.fiber_metric(g, rho, geo.trivial_gauge(), alphaN=0.5)
    assert np.allclose(fm.matrix, fm.phi * geo.dewitt(g).flat / 0.5)


def test_vielbein():
    assert np.allclose(geo.vielbein(np.eye(2)).e, np.eye(2))
    fr = geo.vielbein(np.diag([4.0, 9.0]), w=2.0)
    assert np.allclose(fr.e, np.diag([2.0, 3.0]))
    assert np.allclose(fr.spacetime, np.diag([2.0, 2.0, 3.0]))
    rng = np.random.default_rng(11)
    for _ in range(20):
        a = rng.normal(size=(3, 3))
        g = a @ a.T + 0.5 * np.eye(3)
        fr = geo.vielbein(g)
        assert np.abs(fr.reconstruct() - g).max() <= 1e-12
        assert np.allclose(fr.E @ fr.e, np.eye(3))
    with pytest.raises(ValueError):
        geo.vielbein(np.eye(2), w=0.0)


@pytest.mark.parametrize("g", [np.eye(2), np.array([[2.0, 0.4], [0.4, 1.0]])])
def test_constant_metric_has_no_connection(g):
    metric = geo.SpatialMetric(np.broadcast_to(g, (12, 2, 2)).copy(), h=0.1)
    sc = geo.spin_connection(metric, cl.build_gamma(2))
    assert np.abs(sc.gamma_tilde).max() == 0.0


def test_spin_connection_antihermitian():
    x = np.linspace(0, 1, 33)
    g = np.zeros((33, 2, 2))
    g[:, 0, 0] = (1 + 0.3 * x) ** 2
    g[:, 1, 1] = np.exp(0.6 * x)
    sc = geo.spin_connection(geo.SpatialMetric(g, h=x[1]), cl.build_gamma(2))
    gt = sc.gamma_tilde
    assert np.allclose(gt, -np.conj(np.swapaxes(gt, -1, -2)))


def test_dirac_derivative_flat():
    n1, h = 4, 0.1
    metric = geo.SpatialMetric(np.broadcast_to(np.eye(2), (10, 2, 2)).copy(), h=h)
    sc = geo.spin_connection(metric, cl.build_gamma(2))
    const = np.ones((10, n1, 1))
    assert np.abs(geo.covariant_dirac_derivative(const, sc, None, 0, h)).max() == 0.0
    slope = np.arange(n1 * 1, dtype=float).reshape(n1, 1) + 1
    lin = np.arange(10)[:, None, None] * h * slope
    d = geo.covariant_dirac_derivative(lin, sc, None, 0, h)
    assert np.allclose(d, np.broadcast_to(slope, d.shape))
    with pytest.raises(ValueError):
        geo.covariant_dirac_derivative(np.ones((9, n1, 1)), sc, None, 0, h)


def test_su2_data_valid():
    assert geo.su2().validate() == []


def test_metric_json(tmp_path):
    p = tmp_path / "m.json"
    p.write_text('{"n": 2, "h": 0.5, "points": [[1, 0, 0, 1], [2, 0.1, 0.1, 1]]}')
    m = geo.SpatialMetric.from_json(p)
    assert m.g.shape == (2, 2, 2) and m.h == 0.5
    p.write_text('{"n": 2, "points": [[1, 0, 0, -1]]}')
    with pytest.raises(ValueError):
        geo.SpatialMetric.from_json(p)


@pytest.mark.parametrize("check_id", module_checks("geometry"))
def test_registered(check_id):
    assert_check(check_id)
