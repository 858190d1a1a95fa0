import numpy as np
import pytest

from wdwkit import hyperbolic as hyp

from conftest import assert_check, module_checks


@pytest.fixture(scope="module")
def lat():
    return hyp.LatticeFiber.flat(1 / 32)


def test_zero_data_zero_solution(lat):
    z = np.zeros(lat.Nx)
    assert not np.any(hyp.solve_cauchy(lat, z, z))


def test_cauchy_linearity(lat):
    rng = np.random.default_rng(0)
    u0, v0, u1 = (np.sin(2 * np.pi * k * lat.x / lat.length + rng.normal()) for k in (1, 2, 3))
    a = hyp.solve_cauchy(lat, u0 + v0, u1)
    b = hyp.solve_cauchy(lat, u0, u1) + hyp.solve_cauchy(lat, v0, 0 * u1)
    assert np.abs(a - b).max() <= 1e-12


def test_cauchy_data_reproduced(lat):
    u0 = np.cos(2 * np.pi * lat.x / lat.length)
    u1 = np.sin(4 * np.pi * lat.x / lat.length)
    row = lat.cauchy_rows[len(lat.cauchy_rows) // 2]
    u = hyp.solve_cauchy(lat, u0, u1, row=row)
    assert np.array_equal(u[row, :, 0], u0)
    assert np.allclose(hyp.normal_derivative(lat, u, row)[:, 0], u1, atol=1e-12)


def test_lattice_validation():
    with pytest.raises(ValueError):
        hyp.LatticeFiber(Nt=20, Nx=16, ht=0.2, hx=0.1, a=1.0, b=1.0, c=0.0)
    with pytest.raises(ValueError):
        hyp.LatticeFiber(Nt=20, Nx=16, ht=0.05, hx=0.1, a=-1.0, b=1.0, c=0.0)
    lat = hyp.LatticeFiber.flat(1 / 16)
    with pytest.raises(ValueError):
        hyp.solve_cauchy(lat, np.zeros(lat.Nx), np.zeros(lat.Nx), row=0)


def test_delta_source_retarded_support(lat):
    n0, j0 = lat.Nt // 2, lat.Nx // 2
    u = np.zeros((lat.Nt, lat.Nx))
    u[n0, j0] = 1.0
    Gu = hyp.green_apply(lat, u, "retarded")[:, :, 0]
    h = lat.hx
    T, X = np.meshgrid(lat.t - lat.t[n0], lat.x - lat.x[j0], indexing="ij")
    cone = (np.abs(X) <= T + 2 * h + 1e-12) & (T >= -2 * h - 1e-12)
    assert np.abs(Gu[~cone]).max() <= 1e-12
    assert np.abs(Gu[cone]).max() > 0


def test_green_inverse_discrete(lat):
    u = hyp.bump(lat, 1.0, 1.0, 0.4, 0.4)
    for mode in ("retarded", "advanced"):
        r = hyp.apply_H(lat, hyp.green_apply(lat, u, mode)) - hyp.as_field(lat, u)
        assert np.abs(r[1:-1]).max() <= 1e-10


def test_margin_violation(lat):
    u = np.zeros((lat.Nt, lat.Nx))
    u[0, 3] = 1.0
    with pytest.raises(ValueError):
        hyp.green_apply(lat, u)


def test_symplectic_diagonal(lat):
    u = hyp.bump(lat, 0.9, 0.7, 0.3, 0.3)
    assert abs(hyp.symplectic_form(lat, u, u)) <= 1e-12


def test_symplectic_skew(lat):
    u = hyp.bump(lat, 0.9, 0.7, 0.3, 0.3)
    v = hyp.bump(lat, 1.1, 1.2, 0.4, 0.2)
    a, b = hyp.symplectic_form(lat, u, v), hyp.symplectic_form(lat, v, u)
    assert abs(a) > 1e-6
    assert abs(a + b) <= 1e-10 * abs(a)


def test_causal_sets_single_cell():
    lat = hyp.LatticeFiber.flat(1 / 16)
    n0, j0 = 10, 16
    jp, jm = hyp.causal_sets(lat, (n0, n0, j0, j0), halo=0)
    for n in range(lat.Nt):
        cols = np.flatnonzero(jp[n])
        if n < n0:
            assert cols.size == 0
        else:
            assert set(cols) == {(j0 + s) % lat.Nx for s in range(-(n - n0), n - n0 + 1)}
    assert jm[n0 - 3].sum() == 7 and not jm[n0 + 1].any()


def test_spacelike_boxes_disjoint_cones():
    lat = hyp.LatticeFiber.flat(1 / 32)
    left, right = (30, 34, 10, 14), (30, 34, 40, 44)
    jp, jm = hyp.causal_sets(lat, left)
    other = np.zeros((lat.Nt, lat.Nx), dtype=bool)
    other[30:35, 40:45] = True
    assert not ((jp | jm) & other).any()
    assert hyp.causal_sets(lat, right)[0][30:35, 40:45].all()


def test_pairing_identity(lat):
    u = hyp.bump(lat, 0.6, 0.7, 0.3, 0.3)
    v = hyp.bump(lat, 0.7, 1.3, 0.3, 0.3)
    r = hyp.pairing_identity_check(lat, u, v, lat.Nt - 10)
    assert r["residual"] <= 1e-10 * max(abs(r["lhs"]), 1e-300)


def test_convergence_order():
    hs = np.array([0.1, 0.05, 0.025])
    assert hyp.convergence_order(3 * hs ** 2, hs) == pytest.approx(2.0)
    assert hyp.convergence_order([1e-18, 2e-18, 0.0], hs, floor=1e-15) == float("inf")


@pytest.mark.parametrize("check_id", module_checks("hyperbolic"))
def test_registered(check_id):
    assert_check(check_id)
