import numpy as np
import pytest
from scipy.linalg import block_diag

from wdwkit import hyperbolic as hyp
from wdwkit import localnets as ln

from conftest import assert_check, module_checks


@pytest.fixture(scope="module")
def lat():
    return hyp.LatticeFiber.flat(1 / 32)


def test_spacelike_predicates(lat):
    a = ln.Region.box(30, 34, 10, 14)
    b = ln.Region.box(30, 34, 30, 34)
    assert ln.spacelike_separated(lat, a, b)
    assert not ln.spacelike_separated(lat, a, ln.Region.box(31, 33, 11, 13))
    # corner joined by a light ray from (34, 14) to (40, 20)
    assert not ln.spacelike_separated(lat, a, ln.Region.box(40, 42, 20, 22))


def test_region_validation(lat):
    with pytest.raises(ValueError):
        ln.Region.box(5, 4, 0, 1)
    with pytest.raises(ValueError):
        ln.Region.box(0, 200, 0, 1).mask(lat)
    r = ln.Region.physical(lat, 0.5, 0.75, 0.25, 0.5)
    assert r.boxes == ((16, 24, 8, 16),)
    assert ln.Region.from_spec([1, 2, 3, 4]).boxes == ((1, 2, 3, 4),)


@pytest.fixture(scope="module")
def dictionary(lat):
    big = ln.Region.box(20, 44, 8, 40)
    small = ln.Region.box(28, 36, 16, 28)
    d = ln.Dictionary.bumps(lat, big, per_axis=(3, 3), prefix="big.", target_norm=None)
    d = d + ln.Dictionary.bumps(lat, small, per_axis=(2, 2), prefix="small.", target_norm=None)
    return big, small, d


def test_isotony(lat, dictionary):
    big, small, d = dictionary
    same = ln.axiom1_isotony_check(lat, big, big, d)
    assert same["pass"] and not same["strict"] and same["n_small"] == same["n_large"]
    strict = ln.axiom1_isotony_check(lat, small, big, d)
    assert strict["pass"] and strict["strict"]
    with pytest.raises(ValueError):
        ln.axiom1_isotony_check(lat, big, ln.Region.box(50, 52, 50, 52), d)


def test_causality_pair(lat):
    left, right = ln.Region.box(28, 36, 4, 12), ln.Region.box(28, 36, 36, 44)
    d = ln.Dictionary.bumps(lat, left, per_axis=(2, 2), prefix="l.")
    d = d + ln.Dictionary.bumps(lat, right, per_axis=(2, 2), prefix="r.")
    r = ln.axiom3_causality_check(lat, left, right, d, tol=1e-6)
    assert r["pass"] and r["pairs"] == 16
    s = ln.axiom3_causality_check(lat, right, left, d, tol=1e-6)
    assert s["max_abs_omega"] == pytest.approx(r["max_abs_omega"], abs=1e-15)
    with pytest.raises(ValueError):
        ln.axiom3_causality_check(lat, left, ln.Region.box(40, 44, 8, 12), d)


def test_second_causality_precondition(lat):
    row = (lat.Nt - 1) // 2
    dep = ln.Region.box(44, 52, 28, 36)
    u = hyp.bump(lat, lat.t[48], lat.x[32], 3 * lat.ht, 3 * lat.hx)
    narrow = ln.Region.box(row - 4, row + 4, 28, 36)
    with pytest.raises(ValueError):
        ln.axiom4_second_causality_check(lat, dep, narrow, row, u)
    wide = ln.Region.box(row - 4, row + 4, 0, lat.Nx - 1)
    r = ln.axiom4_second_causality_check(lat, dep, wide, row, u)
    assert r["support_ok"] and r["residual_future"] <= 1e-3


def test_second_causality_range(lat):
    row = (lat.Nt - 1) // 2
    dep = ln.Region.box(44, 52, 28, 36)
    w = hyp.bump(lat, lat.t[48], lat.x[32], 2 * lat.ht, 2 * lat.hx)
    u = hyp.apply_H(lat, w) * dep.mask(lat)[..., None]
    r = ln.axiom4_second_causality_check(lat, dep, ln.Region.box(row - 4, row + 4, 0, 63), row, u)
    assert r["gu_norm"] <= 1e-12


def test_commutant_block_oracle():
    rng = np.random.default_rng(0)

    def herm(n):
        a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        return a + a.conj().T

    full = [herm(4) for _ in range(3)]
    assert ln.commutant_dimension(full)["commutant_dimension"] == 1
    assert ln.commutant_dimension_linear(full) == 1
    blocks = [block_diag(herm(2), herm(3)) for _ in range(3)]
    assert ln.commutant_dimension(blocks)["commutant_dimension"] == 2
    assert ln.commutant_dimension_linear(blocks) == 2
    assert ln.commutant_dimension([], dim=5)["commutant_dimension"] == 25


@pytest.mark.parametrize("check_id", module_checks("localnets"))
def test_registered(check_id):
    assert_check(check_id)
