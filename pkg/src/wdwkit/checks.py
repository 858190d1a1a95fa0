"""Registry of named verification checks shared by the scenario runner and the tests.

A check receives its own seeded generator plus keyword parameters and returns
an :class:`Outcome`. It passes when the measured value is within tolerance,
the observed convergence order (when one is required) is high enough and
every structural condition it reports holds.

Refinement studies report errors below ``ROUNDOFF`` (relative) as exact; the
order estimate is then +inf, meaning the relation holds identically on the
lattice rather than only in the limit.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import zlib
from dataclasses import dataclass, field
from fractions import Fraction
from types import SimpleNamespace
from typing import Callable

import numpy as np
import sympy
from scipy.stats import unitary_group

from . import ccr
from . import clifford as cl
from . import geometry as geo
from . import grassmann as gr
from . import hamiltonian as ham
from . import hyperbolic as hyp
from . import localnets as ln

ROUNDOFF = 1e-13
REFINE = (1 / 64, 1 / 128, 1 / 256)


@dataclass
class Outcome:
    measured: float
    order: float | None = None
    ok: bool = True
    details: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Check:
    id: str
    relation: str
    module: str
    func: Callable
    tolerance: float
    min_order: float | None
    defaults: dict


REGISTRY: dict[str, Check] = {}


def register(check_id: str, relation: str, tolerance: float, min_order: float | None = None, **defaults):
    def deco(func):
        if check_id in REGISTRY:
            raise ValueError(f"duplicate check id {check_id!r}")
        REGISTRY[check_id] = Check(check_id, relation, check_id.split(".")[0], func,
                                   float(tolerance), min_order, defaults)
        return func
    return deco


def catalog() -> list[dict]:
    return [{"id": c.id, "relation": c.relation, "module": c.module, "tolerance": c.tolerance,
             "min_order": c.min_order} for c in sorted(REGISTRY.values(), key=lambda c: c.id)]


def check_seed(check_id: str, seed: int) -> int:
    return (zlib.crc32(check_id.encode()) + int(seed)) % 2 ** 32


def jsonable(x):
    """Plain JSON types; non-finite floats become strings, complex numbers [re, im]."""
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return jsonable(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [jsonable(float(x.real)), jsonable(float(x.imag))]
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if x is None or isinstance(x, str):
        return x
    return str(x)


def run_check(check_id: str, seed: int = 0, params: dict | None = None, tolerance: float | None = None,
              min_order: float | None = None) -> dict:
    """Execute one check and return its report record."""
    if check_id not in REGISTRY:
        raise KeyError(f"unknown check {check_id!r}")
    c = REGISTRY[check_id]
    params = dict(params or {})
    unknown = set(params) - set(c.defaults)
    if unknown:
        raise ValueError(f"{check_id}: unknown parameters {sorted(unknown)}")
    p = {**c.defaults, **params}
    s = check_seed(check_id, seed)
    tol = c.tolerance if tolerance is None else float(tolerance)
    mo = c.min_order if min_order is None else float(min_order)
    out = c.func(np.random.default_rng(s), **p)
    measured = float(out.measured)
    order_ok = mo is None or (out.order is not None and out.order >= mo)
    passed = bool(out.ok and measured <= tol and order_ok)
    digest = hashlib.sha256(json.dumps(jsonable({"id": check_id, "params": p, "seed": s}),
                                       sort_keys=True).encode()).hexdigest()
    return {"id": check_id, "relation": c.relation, "module": c.module, "inputs_digest": digest,
            "seed": s, "parameters": jsonable(p), "measured": jsonable(measured), "tolerance": tol,
            "order_estimate": jsonable(out.order), "min_order": mo, "structural_ok": bool(out.ok),
            "pass": passed, "details": jsonable(out.details)}


def _order(errors, hs, scale: float = 1.0) -> float:
    return hyp.convergence_order(errors, hs, floor=ROUNDOFF * scale)


# ==========================================================================
# clifford


@register("clifford.anticommutator.relations",
          "{gamma^a, gamma^b} = 2 eta^ab I with gamma^0 antihermitian and spatial gammas Hermitian, exact",
          0, ns=[1, 2, 3, 4])
def _clifford_relations(rng, ns):
    issues = {int(n): cl.check_clifford(cl.build_gamma(n)) for n in ns}
    dims = {int(n): cl.spinor_dimension(n) for n in ns}
    return Outcome(sum(len(v) for v in issues.values()), details={"issues": issues, "spinor_dims": dims})


@register("clifford.hermiticity.products",
          "i gamma^0 and gamma^0 gamma^a are Hermitian, (i gamma^0)^2 = I, exact",
          0, ns=[1, 2, 3, 4])
def _clifford_products(rng, ns):
    worst = 0.0
    for n in ns:
        g = cl.build_gamma(n).gammas
        ig0 = 1j * g[0]
        worst = max(worst, np.abs(ig0 - ig0.conj().T).max(), np.abs(ig0 @ ig0 - np.eye(g.shape[1])).max())
        for a in range(1, n + 1):
            p = g[0] @ g[a]
            worst = max(worst, np.abs(p - p.conj().T).max())
    return Outcome(float(worst))


@register("clifford.index.lowering", "gamma_a = eta_ab gamma^b and raising inverts lowering, exact",
          0, ns=[1, 2, 3, 4])
def _clifford_lowering(rng, ns):
    worst = 0.0
    for n in ns:
        rep = cl.build_gamma(n)
        g = rep.gammas
        for a in range(n + 1):
            low = cl.lower_index(rep, a)
            worst = max(worst, np.abs(low - rep.eta[a] * g[a]).max(),
                        np.abs(cl.raise_index(rep, low, a) - g[a]).max())
    return Outcome(float(worst))


@register("clifford.negative.controls",
          "scaled or Hermitian-projected generators are reported as violations", 0, n=2)
def _clifford_controls(rng, n):
    rep = cl.build_gamma(n)
    re, im = rep.exact(1)
    scaled = cl.check_clifford(rep.replace(1, 2 * re, 2 * im))
    re0, im0 = rep.exact(0)
    # Hermitian part of gamma^0 = re0 + i im0 with gamma^0 antihermitian is zero;
    # use the Hermitian matrix i gamma^0 instead, which keeps integer entries
    herm = cl.check_clifford(rep.replace(0, -im0, re0))
    missed = int(not any("(1,1)" in s or "1, 1" in s for s in scaled)) + int(not any("antiherm" in s for s in herm))
    return Outcome(missed, details={"scaled_report": scaled, "hermitian_report": herm,
                                    "valid_report": cl.check_clifford(rep)}, ok=not cl.check_clifford(rep))


@register("clifford.spinor.dimension",
          "spinor dimension 2^((n+1)/2) for odd n and 2 * 2^(n/2) for even n (direct sum)",
          0, ns=[1, 2, 3, 4, 5, 6])
def _clifford_dims(rng, ns):
    def expected(n):
        return 2 ** ((n + 1) // 2) if n % 2 else 2 * 2 ** (n // 2)
    bad = [n for n in ns if cl.spinor_dimension(n) != expected(n)
           or (n <= 4 and cl.build_gamma(n).gammas.shape[1] != expected(n))]
    return Outcome(len(bad), details={"mismatch": bad})


# ==========================================================================
# grassmann


@register("grassmann.car.relations",
          "{d_g, chi_h} = delta_gh, {chi_g, chi_h} = 0, {d_g, d_h} = 0 and d_g = chi_g^* as integer matrices",
          0, max_generators=8)
def _car(rng, max_generators):
    worst = 0
    rows = {}
    for N in range(1, max_generators + 1):
        rep = gr.car_check(N)
        rows[N] = {r["identity"]: r["max_violation"] for r in rep}
        worst = max(worst, max(r["max_violation"] for r in rep))
    return Outcome(worst, details={"violations": rows})


def _random_op(rng, gens, depth: int):
    N = len(gens)
    if depth == 0:
        kind = rng.integers(3)
        if kind == 0:
            return gr.GrassmannOp.mul(gens, int(rng.integers(N)))
        if kind == 1:
            return gr.GrassmannOp.der(gens, int(rng.integers(N)))
        c = sympy.Integer(int(rng.integers(-3, 4))) + sympy.I * int(rng.integers(-3, 4))
        return gr.GrassmannOp.scalar(gens, c)
    a, b = _random_op(rng, gens, depth - 1), _random_op(rng, gens, depth - 1)
    return a @ b if rng.integers(2) else a + b


@register("grassmann.adjoint.operators",
          "adjoint of composite operators matches the conjugate transpose of their matrices, exact",
          0, generators=4, samples=20, depth=3)
def _adjoint_ops(rng, generators, samples, depth):
    gens = gr.GeneratorSet(range(generators))
    bad = 0
    for _ in range(samples):
        op = _random_op(rng, gens, depth)
        A = gr.operator_matrix(op, exact=True)
        B = gr.operator_matrix(op.adjoint(), exact=True)
        bad += int(not (B - A.H).is_zero_matrix)
    return Outcome(bad, details={"samples": samples})


@register("grassmann.real_imag.identity",
          "kinetic term in complex generators equals its real/imaginary form, exact polynomials",
          0, sizes=[[1, 1], [2, 1], [1, 2], [2, 2]])
def _real_imag(rng, sizes):
    res = {f"{a}x{b}": gr.real_imag_identity_check(a, b)["status"] for a, b in sizes}
    return Outcome(sum(v != "pass" for v in res.values()), details=res)


def _random_poly(rng, gens, degree=None, terms=3):
    N = len(gens)
    out = {}
    for _ in range(terms):
        if degree is None:
            mask = int(rng.integers(2 ** N))
        else:
            idx = rng.choice(N, size=degree, replace=False)
            mask = int(sum(1 << int(i) for i in idx))
        out[mask] = out.get(mask, 0) + int(rng.integers(-4, 5))
    return gr.GrassmannPoly(gens, out)


@register("grassmann.product.axioms",
          "associativity, anticommuting generators, nilpotency and unit of the Grassmann product, exact",
          0, generators=5, samples=20)
def _product_axioms(rng, generators, samples):
    gens = gr.GeneratorSet(range(generators))
    one = gr.GrassmannPoly.one(gens)
    fails = 0
    for _ in range(samples):
        u, v, w = (_random_poly(rng, gens) for _ in range(3))
        fails += int((u * v) * w != u * (v * w)) + int(one * u != u) + int(u * one != u)
    for g in range(generators):
        cg = gr.GrassmannPoly.generator(gens, g)
        fails += int(cg * cg != gr.GrassmannPoly.zero(gens))
        for h in range(generators):
            ch = gr.GrassmannPoly.generator(gens, h)
            fails += int(cg * ch + ch * cg != gr.GrassmannPoly.zero(gens))
    return Outcome(fails)


@register("grassmann.derivative.antiderivation",
          "d(uv) = (du) v + (-1)^deg(u) u (dv) for homogeneous u, exact", 0, generators=5, samples=30)
def _antiderivation(rng, generators, samples):
    gens = gr.GeneratorSet(range(generators))
    fails = 0
    for _ in range(samples):
        k = int(rng.integers(0, generators))
        u = _random_poly(rng, gens, degree=k)
        v = _random_poly(rng, gens)
        g = int(rng.integers(generators))
        lhs = gr.left_derivative(g, u * v)
        rhs = gr.left_derivative(g, u) * v + (-1) ** k * (u * gr.left_derivative(g, v))
        fails += int(lhs != rhs)
    return Outcome(fails)


@register("grassmann.inner_product.orthonormal",
          "monomials are orthonormal, also after a unitary change of generators, exact",
          0, generators=3)
def _orthonormal(rng, generators):
    gens = gr.GeneratorSet(range(generators))
    n = generators
    # exact unitary: a 3-4-5 rotation in the first two generators times a phase i
    U = [[0] * n for _ in range(n)]
    for i in range(n):
        U[i][i] = 1
    U[0][0], U[0][1], U[1][0], U[1][1] = Fraction(3, 5), Fraction(-4, 5), Fraction(4, 5), Fraction(3, 5)
    U[n - 1][n - 1] = sympy.I
    bad = 0
    for basis in (gr.monomial_basis(gens), gr.monomial_basis(gens, gr.rotate_generators(gens, U))):
        for i, p in enumerate(basis):
            for j, q in enumerate(basis):
                bad += int(sympy.simplify(gr.inner_product(p, q) - (1 if i == j else 0)) != 0)
    return Outcome(bad)


@register("grassmann.bilinear.normal_order",
          "sum M_gh d_g chi_h = tr(M) - sum M_gh chi_h d_g and is self-adjoint for Hermitian M, exact",
          0, generators=3)
def _bilinear(rng, generators):
    gens = gr.GeneratorSet(range(generators))
    A = rng.integers(-3, 4, size=(generators, generators)) + 1j * rng.integers(-3, 4, size=(generators, generators))
    M = A + A.conj().T
    op = gr.bilinear_operator(gens, M, exact=True)
    E = gr.operator_matrix(op, exact=True)
    tr = sum(gr._to_exact(complex(M[g, g])) for g in range(generators))
    ref = gr.GrassmannOp.scalar(gens, tr)
    for g in range(generators):
        for h in range(generators):
            if M[g, h]:
                ref = ref - gr.GrassmannOp.scalar(gens, gr._to_exact(complex(M[g, h]))) @ (
                    gr.GrassmannOp.mul(gens, h) @ gr.GrassmannOp.der(gens, g))
    R = gr.operator_matrix(ref, exact=True)
    bad = int(not (E - R).is_zero_matrix) + int(not (E - E.H).is_zero_matrix)
    return Outcome(bad)


# ==========================================================================
# geometry


def _random_metrics(rng, ns, count):
    return [(n, ham.random_spd(rng, n)) for n in ns for _ in range(count)]


@register("geometry.dewitt.signature",
          "flattened DeWitt matrix has one negative and m - 1 positive eigenvalues",
          0, ns=[2, 3], count=20)
def _dewitt_sig(rng, ns, count):
    bad = []
    for n, g in _random_metrics(rng, ns, count):
        m = n * (n + 1) // 2
        s = geo.dewitt(g).signature()
        if s != (1, 0, m - 1):
            bad.append([n, list(s)])
    return Outcome(len(bad), details={"bad": bad, "tested": len(ns) * count})


@register("geometry.dewitt.trace_direction",
          "G^{ij,kl} delta_ij delta_kl = n - n^2 at g = I, exact", 0, ns=[1, 2, 3, 4, 5])
def _dewitt_trace(rng, ns):
    worst = max(abs(geo.trace_direction_value(geo.dewitt(np.eye(n))) - (n - n * n)) for n in ns)
    return Outcome(float(worst))


@register("geometry.dewitt.components",
          "G^{12,12} = 1/2, G^{11,22} = -1, G^{11,11} = 0 at g = I (n = 2), exact", 0)
def _dewitt_components(rng):
    G = geo.dewitt(np.eye(2))
    t = G.tensor
    dev = [t[0, 1, 0, 1] - 0.5, t[0, 0, 1, 1] + 1, t[0, 0, 0, 0]]
    flat = np.array([[0, 0, -1], [0, 2, 0], [-1, 0, 0]], dtype=float)
    dev.append(np.abs(G.flat - flat).max())
    return Outcome(float(np.max(np.abs(dev))))


@register("geometry.fiber.lorentzian",
          "fiber metric has exactly one negative eigenvalue; without gauge sector it reduces to phi G / alphaN",
          0, ns=[2, 3], count=20)
def _fiber(rng, ns, count):
    ym = geo.su2()
    bad = 0
    for n, g in _random_metrics(rng, ns, count):
        rho = ham.random_spd(rng, n)
        alpha = float(rng.uniform(0.5, 2.0))
        fm = geo.fiber_metric(g, rho, ym, alphaN=alpha)
        bad += int(fm.signature()[0] != 1)
        bare = geo.fiber_metric(g, rho, geo.YangMillsData(np.zeros((0, 0, 0)), np.zeros((0, 0)),
                                                            np.zeros((0, 1, 1))), alphaN=alpha, check=False)
        ref = geo.phi(g, rho) * geo.dewitt(g).flat / alpha
        bad += int(not np.allclose(bare.matrix, ref, rtol=1e-13, atol=1e-13))
    return Outcome(bad)


@register("geometry.phi.scaling", "phi(c^2 g, rho) = c^n phi(g, rho)", 1e-12, ns=[2, 3, 4], count=10)
def _phi_scaling(rng, ns, count):
    worst = 0.0
    for n, g in _random_metrics(rng, ns, count):
        rho = ham.random_spd(rng, n)
        c = float(rng.uniform(0.5, 3.0))
        worst = max(worst, abs(geo.phi(c * c * g, rho) / (c ** n * geo.phi(g, rho)) - 1))
    return Outcome(worst)


@register("geometry.vielbein.reconstruction", "e^T e = g for the Cholesky frame", 1e-12, ns=[2, 3, 4], count=20)
def _vielbein(rng, ns, count):
    worst = 0.0
    for n, g in _random_metrics(rng, ns, count):
        e = geo.vielbein(g)
        worst = max(worst, np.abs(e.reconstruct() - g).max() / np.abs(g).max(),
                    np.abs(e.E @ e.e - np.eye(n)).max())
    worst = max(worst, np.abs(geo.vielbein(np.diag([4.0, 9.0])).e - np.diag([2.0, 3.0])).max())
    return Outcome(float(worst))


@register("geometry.spin_connection.constant", "constant metric gives a vanishing spin connection, exact",
          0, ns=[2, 3], points=9)
def _spin_const(rng, ns, points):
    worst = 0.0
    for n in ns:
        rep = cl.build_gamma(n)
        g = ham.random_spd(rng, n)
        for shape in ((points,), (points, points)):
            grid = np.broadcast_to(g, shape + (n, n)).copy()
            sc = geo.spin_connection(geo.SpatialMetric(grid, h=0.1), rep)
            worst = max(worst, np.abs(sc.gamma_tilde).max(), np.abs(sc.omega).max())
    return Outcome(float(worst))


def _symbolic_frame_connection(eps: float):
    """Exact omega[k][a, b] = E^j_a e^b_{j;k} for g = diag((1 + eps x)^2, exp(2 eps x)) on a 1D chart."""
    x = sympy.symbols("x", real=True)
    coords = [x, sympy.Symbol("y", real=True)]
    g = sympy.diag((1 + eps * x) ** 2, sympy.exp(2 * eps * x))
    gi = g.inv()
    e = sympy.diag(1 + eps * x, sympy.exp(eps * x))
    E = e.inv()
    n = 2

    def d(expr, k):
        return sympy.diff(expr, coords[k]) if k == 0 else 0

    chris = [[[sum(gi[l, m] * (d(g[m, j], k) + d(g[m, k], j) - d(g[j, k], m)) for m in range(n)) / 2
               for k in range(n)] for j in range(n)] for l in range(n)]
    omega = []
    for k in range(n):
        om = sympy.zeros(n, n)
        for a in range(n):
            for b in range(n):
                om[a, b] = sympy.simplify(sum(E[j, a] * (d(e[b, j], k) - sum(chris[l][j][k] * e[b, l]
                                                                            for l in range(n)))
                                              for j in range(n)))
        omega.append(sympy.lambdify(x, om, "numpy"))
    return omega


@register("geometry.spin_connection.symbolic_family",
          "spin connection on a one-parameter metric family matches symbolic differentiation at second order",
          1e-3, min_order=1.9, eps=0.3, resolutions=[16, 32, 64])
def _spin_symbolic(rng, eps, resolutions):
    rep = cl.build_gamma(2)
    gs = rep.gammas[1:]
    prod = np.einsum("bij,ajk->abik", gs, gs)
    exact = _symbolic_frame_connection(eps)
    errs, hs, flat_resid = [], [], 0.0
    for N in resolutions:
        h = 1.0 / N
        xs = np.arange(N + 1) * h
        g = np.zeros((N + 1, 2, 2))
        g[:, 0, 0] = (1 + eps * xs) ** 2
        g[:, 1, 1] = np.exp(2 * eps * xs)
        sc = geo.spin_connection(geo.SpatialMetric(g, h=h), rep)
        err = 0.0
        for k in range(2):
            om = np.array([np.asarray(exact[k](xi), dtype=float) for xi in xs])
            gt = -0.25 * np.einsum("...ab,abij->...ij", om, prod)
            gt = 0.5 * (gt - np.conj(np.swapaxes(gt, -1, -2)))
            err = max(err, np.abs(sc.gamma_tilde[k][1:-1] - gt[1:-1]).max())
        errs.append(err)
        hs.append(h)
        # the family diag((1 + eps x)^2, 1) is flat: its connection must vanish to roundoff
        g[:, 1, 1] = 1.0
        flat_resid = max(flat_resid, np.abs(geo.spin_connection(geo.SpatialMetric(g, h=h), rep).gamma_tilde).max())
    return Outcome(errs[-1], order=_order(errs, hs), ok=flat_resid <= 1e-12,
                   details={"errors": errs, "hs": hs, "flat_family_residual": flat_resid})


@register("geometry.curvature.sphere", "scalar curvature of the round sphere metric is 2",
          1e-3, min_order=1.8, resolutions=[32, 64, 128])
def _sphere(rng, resolutions):
    errs, hs = [], []
    for N in resolutions:
        h = 2.0 / N
        xs = 0.5 + np.arange(N + 1) * h
        g = np.zeros((N + 1, 2, 2))
        g[:, 0, 0] = 1.0
        g[:, 1, 1] = np.sin(xs) ** 2
        R = geo.scalar_curvature_2d(geo.SpatialMetric(g, h=h))
        errs.append(float(np.abs(R[2:-2] - 2).max()))
        hs.append(h)
    return Outcome(errs[-1], order=_order(errs, hs), details={"errors": errs, "hs": hs})


@register("geometry.dirac_derivative.gauge_covariance",
          "rotating the spinor by a constant group element and conjugating A rotates the covariant derivative",
          1e-10, points=8)
def _gauge_cov(rng, points):
    n = 2
    rep = cl.build_gamma(n)
    h = 0.2
    xs = np.arange(points) * h
    g = np.zeros((points, n, n))
    g[:, 0, 0] = 1 + 0.3 * np.sin(xs)
    g[:, 1, 1] = 1 + 0.2 * np.cos(xs)
    g[:, 0, 1] = g[:, 1, 0] = 0.1 * np.sin(2 * xs)
    sc = geo.spin_connection(geo.SpatialMetric(g, h=h), rep)
    ym = geo.su2().with_connection(rng.normal(size=(points, 3, n)))
    chi = rng.normal(size=(points, rep.gammas.shape[1], 2)) + 1j * rng.normal(size=(points, rep.gammas.shape[1], 2))
    U = unitary_group.rvs(2, random_state=rng)
    U = U / np.sqrt(np.linalg.det(U))
    ym2 = ym.gauge_rotate(U)
    worst = 0.0
    for k in range(n):
        D1 = geo.covariant_dirac_derivative(chi, sc, ym, k, h)
        D2 = geo.covariant_dirac_derivative(np.einsum("IJ,...AJ->...AI", U, chi), sc, ym2, k, h)
        worst = max(worst, np.abs(D2 - np.einsum("IJ,...AJ->...AI", U, D1)).max())
    # linear spinor on flat data: constant slope
    flat = geo.spin_connection(geo.SpatialMetric(np.broadcast_to(np.eye(n), (points, n, n)).copy(), h=h), rep)
    lin = (xs[:, None, None] * np.ones((1, rep.gammas.shape[1], 1))).astype(complex)
    slope = geo.covariant_dirac_derivative(lin, flat, None, 0, h)
    slope_err = float(np.abs(slope - 1).max())
    return Outcome(float(worst), ok=slope_err <= 1e-12, details={"linear_slope_error": slope_err})


# ==========================================================================
# hamiltonian


def _legendre(rng, sector, ns, states):
    ym = geo.su2()
    worst = 0.0
    for n in ns:
        for _ in range(states):
            p = ham.random_point(rng, n, ym)
            dim = {"gravity": n * (n + 1) // 2, "ym": ym.n0 * n, "higgs": 2 * ym.n0}[sector]
            worst = max(worst, ham.sector_roundtrip(sector, p, rng.normal(size=dim)))
    return Outcome(float(worst), details={"states": states * len(ns)})


@register("hamiltonian.legendre.gravity",
          "gravitational Hamiltonian equals the Legendre transform of its Lagrangian",
          1e-7, ns=[2, 3], states=25)
def _leg_grav(rng, ns, states):
    return _legendre(rng, "gravity", ns, states)


@register("hamiltonian.legendre.yang_mills",
          "Yang-Mills Hamiltonian equals the Legendre transform of its Lagrangian",
          1e-7, ns=[2, 3], states=25)
def _leg_ym(rng, ns, states):
    return _legendre(rng, "ym", ns, states)


@register("hamiltonian.legendre.higgs",
          "Higgs Hamiltonian equals the Legendre transform of its Lagrangian",
          1e-7, ns=[2, 3], states=25)
def _leg_higgs(rng, ns, states):
    return _legendre(rng, "higgs", ns, states)


@register("hamiltonian.legendre.quadratic_toy", "L = qdot^2 / 2 transforms to H = p^2 / 2", 1e-10, samples=10)
def _leg_toy(rng, samples):
    worst = 0.0
    for _ in range(samples):
        q = rng.normal(size=3)
        r, p = ham.legendre_roundtrip(lambda v: 0.5 * v @ v, lambda m: 0.5 * m @ m, q)
        worst = max(worst, r, np.abs(p - q).max())
    return Outcome(float(worst))


@register("hamiltonian.sector.limits",
          "closed forms vanish or reduce to potential terms at zero momenta", 1e-12, samples=5)
def _limits(rng, samples):
    ym = geo.su2()
    worst = 0.0
    for _ in range(samples):
        p = ham.random_point(rng, 2, ym)
        zero = dataclasses.replace(p, pi=np.zeros_like(p.pi), R=2 * p.Lambda)
        worst = max(worst, abs(ham.h_gravity(zero)))
        alpha = 1.7
        q = dataclasses.replace(p, pi=np.zeros_like(p.pi), Lambda=0.0)
        worst = max(worst, abs(ham.h_gravity(q, alphaN=alpha) + q.R * q.phi / alpha))
        q = dataclasses.replace(p, pi_zeta=np.zeros_like(p.pi_zeta), F=np.zeros_like(p.F))
        worst = max(worst, abs(ham.h_yangmills(q)))
        q = dataclasses.replace(p, pi_zeta=np.zeros_like(p.pi_zeta))
        mag = ham.h_yangmills(q)
        worst = max(worst, abs(mag - 0.25 * ham.field_strength_squared(q) * q.phi), max(0.0, -mag))
        q = dataclasses.replace(p, p_theta=np.zeros_like(p.p_theta), gradPhi=np.zeros_like(p.gradPhi),
                                V=lambda th, g2: 0.0)
        worst = max(worst, abs(ham.h_higgs(q)))
        q = dataclasses.replace(p, gradPhi=np.zeros_like(p.gradPhi), V=lambda th, g2: 0.0)
        kin = 0.5 / q.phi * q.p_theta @ np.linalg.inv(q.gamma2) @ q.p_theta
        worst = max(worst, abs(ham.h_higgs(q) - kin) / max(1.0, abs(kin)))
    return Outcome(float(worst))


def _dirac_setup(rng, n=2, sites=3, m=0.5):
    rep = cl.build_gamma(n)
    h = 0.3
    xs = np.arange(sites) * h
    g = np.zeros((sites, n, n))
    g[:, 0, 0] = (1 + 0.3 * xs) ** 2
    for i in range(1, n):
        g[:, i, i] = np.exp(0.6 * xs)
    metric = geo.SpatialMetric(g, h=h, periodic=True)
    ym = geo.su2().with_connection(rng.normal(size=(sites, 3, n)))
    return rep, metric, ym, h, m


@register("hamiltonian.dirac.hermitian", "one-particle Dirac matrix is Hermitian", 1e-10, n=2, sites=3)
def _dirac_herm(rng, n, sites):
    rep, metric, ym, h, m = _dirac_setup(rng, n, sites)
    sc = geo.spin_connection(metric, rep)
    # before symmetrization the raw operator is not Hermitian; the assembled M is
    d = ham.h_dirac(sites, h, rep, sc, ym, m, E=geo.vielbein(metric.g).E, build_fock=False)
    M = d.one_particle
    return Outcome(float(np.abs(M - M.conj().T).max()), details={"size": M.shape[0]})


@register("hamiltonian.dirac.fock_self_adjoint",
          "quantized Dirac operator on the Grassmann algebra is self-adjoint (float and exact)",
          1e-10, sites=2)
def _dirac_fock(rng, sites):
    ym = geo.su2().with_connection(rng.normal(size=(sites, 3, 1)))
    d = ham.h_dirac(sites, 0.4, cl.build_gamma(1), None, ym, 0.7, periodic=False)
    exact = d.exact_self_adjoint()
    return Outcome(d.self_adjoint_residual(), ok=exact,
                   details={"generators": len(d.gens), "fock_dim": d.gens.dim, "exact": exact})


@register("hamiltonian.dirac.mass_spectrum",
          "mass-only Dirac matrix has eigenvalues +-m, each with multiplicity n1 n2 / 2", 1e-10,
          ns=[1, 2, 3, 4], m=0.7)
def _mass(rng, ns, m):
    worst = 0.0
    for n in ns:
        rep = cl.build_gamma(n)
        ym = geo.su2()
        d = ham.h_dirac(1, 1.0, rep, None, ym, m, periodic=False, build_fock=False)
        k = rep.gammas.shape[1] * ym.n2 // 2
        ev = np.linalg.eigvalsh(d.one_particle)
        worst = max(worst, np.abs(ev - np.array([-m] * k + [m] * k)).max())
    return Outcome(float(worst))


@register("hamiltonian.dirac.rep_independence",
          "Dirac spectrum is unchanged under unitary conjugation of the gamma representation", 1e-9,
          n=2, sites=3)
def _rep_indep(rng, n, sites):
    rep, metric, ym, h, m = _dirac_setup(rng, n, sites)
    E = geo.vielbein(metric.g).E
    d1 = ham.h_dirac(sites, h, rep, geo.spin_connection(metric, rep), ym, m, E=E, build_fock=False)
    U = unitary_group.rvs(rep.gammas.shape[1], random_state=rng)
    gc = cl.conjugate_rep(rep, U)
    rep2 = SimpleNamespace(n=n, gammas=gc)
    d2 = ham.h_dirac(sites, h, gc, geo.spin_connection(metric, rep2), ym, m, E=E, build_fock=False)
    drift = np.abs(np.linalg.eigvalsh(d1.one_particle) - np.linalg.eigvalsh(d2.one_particle)).max()
    return Outcome(float(drift))


@register("hamiltonian.constraint.toy_state",
          "total constraint vanishes after solving for one gravitational momentum", 1e-6)
def _constraint(rng):
    p = ham.random_point(rng, 2, geo.su2())
    d = ham.h_dirac(3, 0.5, cl.build_gamma(1), None, geo.trivial_gauge(1), 0.7)
    state = rng.normal(size=d.gens.dim) + 1j * rng.normal(size=d.gens.dim)
    p2 = ham.solve_constraint(p, d.expectation(state))
    parts = ham.total_constraint(p2, d, state)
    return Outcome(abs(parts["total"]), details=parts)


def _variable_lattice(h=1 / 32, T=2.0, L=2.0):
    Nx = int(round(L / h))
    hx = L / Nx
    x = np.arange(Nx) * hx
    a = 1 + 0.3 * np.sin(2 * np.pi * x / L)
    b = 1 + 0.2 * np.cos(2 * np.pi * x / L)
    speed = np.sqrt(a / b).max()
    ht = 0.5 * hx / speed
    Nt = int(np.ceil(T / ht)) + 1
    t = np.arange(Nt) * ht
    c = 0.5 + 0.3 * np.outer(np.cos(t), np.sin(2 * np.pi * x / L))
    return hyp.LatticeFiber(Nt=Nt, Nx=Nx, ht=ht, hx=hx, a=a, b=b, c=c)


def _random_bump(rng, lat, T):
    t0 = rng.uniform(0.35, 0.65) * T
    x0 = rng.uniform(0.2, 0.8) * lat.length
    return hyp.bump(lat, t0, x0, rng.uniform(0.15, 0.3) * T, rng.uniform(0.15, 0.35))


@register("hamiltonian.wdw.symmetry",
          "discrete Wheeler-DeWitt operator is symmetric on compactly supported pairs", 1e-10, pairs=20)
def _wdw_sym(rng, pairs):
    lat = _variable_lattice()
    T = (lat.Nt - 1) * lat.ht
    H = ham.wdw_operator(lat)
    worst = 0.0
    for _ in range(pairs):
        u, v = _random_bump(rng, lat, T), _random_bump(rng, lat, T)
        lhs, rhs = hyp.inner(lat, H(u), v), hyp.inner(lat, u, H(v))
        worst = max(worst, abs(lhs - rhs) / max(abs(lhs), np.sqrt(hyp.inner(lat, u, u) * hyp.inner(lat, v, v))))
    return Outcome(float(worst))


@register("hamiltonian.wdw.plane_wave",
          "discrete operator scales a plane wave by k^2 - w^2 (flat section)", 1e-2, h=1 / 64)
def _plane_wave(rng, h):
    lat = hyp.LatticeFiber.flat(h)
    k, w = np.pi, 2 * np.pi
    u = np.cos(w * lat.t[:, None] - k * lat.x[None, :])
    Hu = hyp.apply_H(lat, u)[1:-1, :, 0]
    ref = (k * k - w * w) * u[1:-1]
    const = hyp.apply_H(lat, np.ones((lat.Nt, lat.Nx)))[1:-1]
    return Outcome(float(np.abs(Hu - ref).max() / np.abs(ref).max()), ok=float(np.abs(const).max()) <= 1e-12,
                   details={"constant_image": float(np.abs(const).max())})


@register("hamiltonian.wdw.section_metric",
          "default section at g = I with su(2): trace direction timelike, gauge direction spacelike", 1e-12)
def _section(rng):
    fm = geo.fiber_metric(np.eye(2), np.eye(2), geo.su2())
    a, b = ham.section_metric(fm)
    # oracle: trace direction (1, 0, 1) against the flattened DeWitt matrix, and 2 gamma g^-1
    flat = np.array([[0, 0, -1], [0, 2, 0], [-1, 0, 0]], dtype=float)
    tr = np.array([1.0, 0.0, 1.0])
    a_ref = -(tr @ flat @ tr) / (tr @ tr)
    b_ref = 2 * 2.0
    return Outcome(max(abs(a - a_ref), abs(b - b_ref)), details={"a": a, "b": b})


# ==========================================================================
# hyperbolic


@register("hyperbolic.cauchy.standing_wave",
          "Cauchy solver reproduces cos(kt) sin(kx) at second order", 1e-2, min_order=1.9,
          resolutions=[32, 64, 128], courant=0.5)
def _standing(rng, resolutions, courant):
    errs, hs = [], []
    for N in resolutions:
        lat = hyp.LatticeFiber.flat(2.0 / N, courant=courant)
        k = np.pi
        u = hyp.solve_cauchy(lat, np.sin(k * lat.x), np.zeros(lat.Nx), row=1)
        # the solver seeds rows 0 and 2 from row 1; compare with the exact wave at t = 1 relative to row 1
        ex = np.cos(k * (lat.t - lat.t[1]))[:, None] * np.sin(k * lat.x)[None, :]
        r1 = int(np.argmin(np.abs(lat.t - lat.t[1] - 1.0)))
        errs.append(float(np.abs(u[r1, :, 0] - ex[r1]).max()))
        hs.append(lat.hx)
    return Outcome(errs[0], order=_order(errs, hs), details={"errors": errs, "hs": hs})


@register("hyperbolic.cauchy.linearity", "Cauchy solutions are linear in data and source; zero data give zero",
          1e-12, h=1 / 64)
def _linearity(rng, h):
    lat = hyp.LatticeFiber.flat(h)
    u0, v0 = rng.normal(size=lat.Nx), rng.normal(size=lat.Nx)
    u1, v1 = rng.normal(size=lat.Nx), rng.normal(size=lat.Nx)
    f = hyp.bump(lat, 1.0, 1.0, 0.3, 0.3)
    a = hyp.solve_cauchy(lat, u0 + v0, u1 + v1, 2 * f)
    b = hyp.solve_cauchy(lat, u0, u1, f) + hyp.solve_cauchy(lat, v0, v1, f)
    zero = hyp.solve_cauchy(lat, np.zeros(lat.Nx), np.zeros(lat.Nx))
    return Outcome(float(np.abs(a - b).max() / np.abs(a).max()), ok=not np.any(zero))


@register("hyperbolic.green.inverse",
          "H(G+- u) = u: fourth-order residual of the discrete Green operators", 5e-3, min_order=1.8,
          resolutions=list(REFINE))
def _green_inverse(rng, resolutions):
    errs = {"retarded": [], "advanced": []}
    for h in resolutions:
        lat = hyp.LatticeFiber.flat(h)
        u = hyp.bump(lat, 1.0, 1.0, 0.4, 0.4)
        for mode in errs:
            errs[mode].append(hyp.green_residual(lat, u, mode))
    order = min(_order(e, resolutions) for e in errs.values())
    return Outcome(max(e[0] for e in errs.values()), order=order, details={"errors": errs})


@register("hyperbolic.green.discrete_inverse", "H_h G+-_h u = u exactly on the lattice", 1e-11, h=1 / 64)
def _green_discrete(rng, h):
    lat = hyp.LatticeFiber.flat(h, c=2.0)
    u = hyp.bump(lat, 1.0, 1.0, 0.4, 0.4)
    worst = 0.0
    for mode in ("retarded", "advanced"):
        r = hyp.apply_H(lat, hyp.green_apply(lat, u, mode)) - hyp.as_field(lat, u)
        worst = max(worst, np.abs(r[1:-1]).max() / np.abs(u).max())
    return Outcome(float(worst))


@register("hyperbolic.green.support",
          "retarded/advanced responses vanish outside the causal future/past plus a 2-cell halo",
          1e-12, h=1 / 64)
def _green_support(rng, h):
    lat = hyp.LatticeFiber.flat(h)
    n0, j0 = lat.Nt // 2, lat.Nx // 2
    delta = np.zeros((lat.Nt, lat.Nx))
    delta[n0, j0] = 1 / (lat.ht * lat.hx)
    # physical cones |x - x0| <= +-(t - t0) + 2h with a 2h margin in time
    tt, xx = np.meshgrid(lat.t - lat.t[n0], lat.x - lat.x[j0], indexing="ij")
    fut = (np.abs(xx) <= tt + 2 * lat.hx + 1e-12) & (tt >= -2 * lat.ht - 1e-12)
    past = (np.abs(xx) <= -tt + 2 * lat.hx + 1e-12) & (tt <= 2 * lat.ht + 1e-12)
    worst = 0.0
    for mode, cone in (("retarded", fut), ("advanced", past)):
        w = hyp.green_apply(lat, delta, mode)[..., 0]
        worst = max(worst, np.abs(w[~cone]).max() / np.abs(w).max())
    # general sources against the halo-inclusive discrete causal sets
    u = hyp.bump(lat, 1.0, 1.0, 0.2, 0.2)
    jp, jm = hyp.causal_sets(lat, hyp.support_box(u), halo=2)
    for mode, J in (("retarded", jp), ("advanced", jm)):
        w = hyp.green_apply(lat, u, mode)[..., 0]
        worst = max(worst, np.abs(w[~J]).max() / np.abs(w).max())
    # the bare stencil cone of a single cell lies inside the physical cone
    jp0, jm0 = hyp.causal_sets(lat, (n0, n0, j0, j0), halo=0)
    nested = bool(np.all(fut[jp0]) and np.all(past[jm0]))
    return Outcome(float(worst), ok=nested, details={"stencil_cone_inside_physical": nested})


def _smooth_pair(rng, lat):
    def one():
        return hyp.bump(lat, rng.uniform(0.8, 1.2), rng.uniform(0.6, 1.4), rng.uniform(0.25, 0.4),
                        rng.uniform(0.2, 0.35))
    return one(), one()


@register("hyperbolic.green.skew", "<u, G v> + <G u, v> = 0 (Pauli-Jordan operator is skew)",
          1e-10, min_order=1.8, resolutions=list(REFINE), pairs=2)
def _green_skew(rng, resolutions, pairs):
    specs = [(rng.uniform(0.8, 1.2), rng.uniform(0.6, 1.4), rng.uniform(0.25, 0.4), rng.uniform(0.2, 0.35))
             for _ in range(2 * pairs)]
    errs = []
    for h in resolutions:
        lat = hyp.LatticeFiber.flat(h)
        worst = 0.0
        for i in range(pairs):
            u, v = (hyp.bump(lat, *specs[2 * i + j]) for j in range(2))
            val = hyp.inner(lat, u, hyp.green_apply(lat, v)) + hyp.inner(lat, hyp.green_apply(lat, u), v)
            scale = np.sqrt(hyp.inner(lat, u, u) * hyp.inner(lat, v, v))
            worst = max(worst, abs(val) / scale)
        errs.append(worst)
    return Outcome(max(errs), order=_order(errs, resolutions), details={"errors": errs})


@register("hyperbolic.green.null_space",
          "G(H u) = 0 for compact u: with the exact H image at second order, with the discrete H exactly",
          5e-3, min_order=1.8, resolutions=list(REFINE), courant=0.5)
def _null_space(rng, resolutions, courant):
    errs, discrete = [], 0.0
    for h in resolutions:
        lat = hyp.LatticeFiber.flat(h, courant=courant)
        w, Hw = hyp.bump(lat, 1.0, 1.0, 0.4, 0.4, with_H=True)
        errs.append(float(np.abs(hyp.green_apply(lat, Hw)).max() / np.abs(w).max()))
        discrete = max(discrete, np.abs(hyp.green_apply(lat, hyp.apply_H(lat, w))).max() / np.abs(w).max())
    return Outcome(errs[0], order=_order(errs, resolutions), ok=discrete <= 1e-11,
                   details={"errors": errs, "discrete_image": discrete})


@register("hyperbolic.pairing.identity",
          "sum <u, G v> equals the surface pairing of Gu and Gv on a Cauchy row", 1e-10, min_order=1.8,
          resolutions=list(REFINE))
def _pairing(rng, resolutions):
    spec = [(rng.uniform(0.8, 1.2), rng.uniform(0.6, 1.4), 0.3, 0.3) for _ in range(2)]
    errs = []
    for h in resolutions:
        lat = hyp.LatticeFiber.flat(h)
        u, v = (hyp.bump(lat, *s) for s in spec)
        r = hyp.pairing_identity_check(lat, u, v, lat.Nt // 2)
        errs.append(r["residual"] / np.sqrt(hyp.inner(lat, u, u) * hyp.inner(lat, v, v)))
    same = hyp.pairing_identity_check(lat, u, u, lat.Nt // 2)
    return Outcome(max(errs), order=_order(errs, resolutions), ok=abs(same["lhs"]) <= 1e-12 * abs(r["lhs"]) + 1e-14,
                   details={"errors": errs, "u_equals_v_lhs": same["lhs"]})


@register("hyperbolic.pairing.row_independence",
          "surface pairing is the same on every Cauchy row", 1e-10, min_order=1.8, resolutions=list(REFINE))
def _row_indep(rng, resolutions):
    errs = []
    for h in resolutions:
        lat = hyp.LatticeFiber.flat(h)
        u, v = _smooth_pair(rng, lat)
        Gu, Gv = hyp.green_apply(lat, u), hyp.green_apply(lat, v)
        rows = [3, lat.Nt // 4, lat.Nt // 2, lat.Nt // 2 + 1, 3 * lat.Nt // 4, lat.Nt - 4]
        vals = [hyp.surface_pairing(lat, Gu, Gv, r) for r in rows]
        errs.append((max(vals) - min(vals)) / np.sqrt(hyp.inner(lat, u, u) * hyp.inner(lat, v, v)))
    return Outcome(max(errs), order=_order(errs, resolutions), details={"errors": errs})


_TRIG_U = dict(t0=0.8, rt=0.4, k=1)
_TRIG_V = dict(t0=1.1, rt=0.5, k=1)


@register("hyperbolic.symplectic.continuum",
          "lattice symplectic form converges to the continuum value at second order", 1e-2, min_order=1.8,
          resolutions=list(REFINE), cs=[0.0, 3.0])
def _omega_cont(rng, resolutions, cs):
    rel, orders = [], []
    for c in cs:
        errs = []
        for h in resolutions:
            lat = hyp.LatticeFiber.flat(h, c=c)
            u = hyp.trig_field(lat, _TRIG_U["t0"], _TRIG_U["rt"], _TRIG_U["k"])
            v = hyp.trig_field(lat, _TRIG_V["t0"], _TRIG_V["rt"], _TRIG_V["k"])
            ex = hyp.trig_omega_exact(lat, _TRIG_U, _TRIG_V)
            errs.append(abs(hyp.symplectic_form(lat, u, v) - ex))
        rel.append(errs[0] / abs(ex))
        orders.append(_order(errs, resolutions))
    return Outcome(max(rel), order=min(orders), details={"relative_error_coarse": rel, "orders": orders})


@register("hyperbolic.symplectic.diagonal", "omega(u, u) = 0", 1e-12, h=1 / 64, samples=5)
def _omega_diag(rng, h, samples):
    lat = hyp.LatticeFiber.flat(h)
    worst = 0.0
    for _ in range(samples):
        u, _ = _smooth_pair(rng, lat)
        worst = max(worst, abs(hyp.symplectic_form(lat, u, u)) / hyp.inner(lat, u, u))
    return Outcome(float(worst))


@register("hyperbolic.symplectic.range_null", "omega(H u, v) = 0 at second order with the exact H image",
          1e-2, min_order=1.8, resolutions=list(REFINE), courant=0.5)
def _omega_range(rng, resolutions, courant):
    errs = []
    for h in resolutions:
        lat = hyp.LatticeFiber.flat(h, courant=courant)
        w, Hw = hyp.bump(lat, 1.0, 1.0, 0.4, 0.4, with_H=True)
        v = hyp.trig_field(lat, 1.1, 0.5, 1)
        errs.append(abs(hyp.symplectic_form(lat, Hw, v)) / np.sqrt(hyp.inner(lat, w, w) * hyp.inner(lat, v, v)))
    return Outcome(errs[0], order=_order(errs, resolutions), details={"errors": errs})


@register("hyperbolic.causal.cones",
          "single-cell cones are 45 degree on the flat lattice; J+ and J- of spacelike boxes are disjoint",
          0, h=1 / 64)
def _cones(rng, h):
    lat = hyp.LatticeFiber.flat(h)
    n0, j0 = 40, lat.Nx // 2
    jp, jm = hyp.causal_sets(lat, (n0, n0, j0, j0), halo=0)
    bad = 0
    for n in range(lat.Nt):
        width = int(jp[n].sum())
        expect = 2 * (n - n0) + 1 if n >= n0 else 0
        bad += int(width != min(expect, lat.Nx))
        width = int(jm[n].sum())
        expect = 2 * (n0 - n) + 1 if n <= n0 else 0
        bad += int(width != min(expect, lat.Nx))
    a, b = (60, 70, 10, 30), (60, 70, 90, 110)
    jpa, _ = hyp.causal_sets(lat, a)
    _, jmb = hyp.causal_sets(lat, b)
    bad += int(np.any(jpa & jmb))
    return Outcome(bad)


# ==========================================================================
# ccr


def _ccr_setup(h, row=None):
    lat = hyp.LatticeFiber.flat(h)
    row = (lat.Nt - 1) // 2 if row is None else row
    return lat, row, ccr.OneParticleSpace.trig(lat, row)


_FOCK_CACHE: dict = {}


def _fock(D, N):
    if (D, N) not in _FOCK_CACHE:
        _FOCK_CACHE[(D, N)] = ccr.FockSpace(D, N)
    return _FOCK_CACHE[(D, N)]


@register("ccr.commutator.central",
          "[Phi_M(u), Phi_M(v)] = i omega(u, v) on the safe block; the scalar converges to the continuum omega",
          1e-9, min_order=1.8, resolutions=list(REFINE), N_max=6)
def _ccr_comm(rng, resolutions, N_max):
    disc, cont = [], []
    for h in resolutions:
        lat, row, space = _ccr_setup(h)
        fock = _fock(space.dim, N_max)
        u = hyp.trig_field(lat, 0.8, 0.4, 1) + hyp.trig_field(lat, 1.2, 0.4, 3, "sin")
        v = hyp.trig_field(lat, 1.1, 0.5, 1)
        r = ccr.ccr_commutator_check(lat, space, fock, u, v)
        ex = hyp.trig_omega_exact(lat, _TRIG_U, _TRIG_V) + hyp.trig_omega_exact(
            lat, dict(t0=1.2, rt=0.4, k=3, kind="sin"), _TRIG_V)
        disc.append(r["residual"] / max(abs(r["omega"]), 1.0))
        cont.append(abs(r["commutator_scalar"] - ex))
    o_disc, o_cont = _order(disc, resolutions), _order(cont, resolutions)
    return Outcome(max(disc), order=min(o_disc, o_cont),
                   details={"discrete_residuals": disc, "continuum_errors": cont,
                            "discrete_order": o_disc, "continuum_order": o_cont})


@register("ccr.field.range_null",
          "Phi_M(H v) vanishes: exactly for the lattice H image, at second order for the exact image",
          1e-4, min_order=1.8, resolutions=list(REFINE), N_max=6)
def _phi_range(rng, resolutions, N_max):
    errs, discrete = [], 0.0
    for h in resolutions:
        lat, row, space = _ccr_setup(h)
        fock = _fock(space.dim, N_max)
        idx = fock.safe_indices()
        w, Hw = hyp.trig_field(lat, 1.0, 0.4, 2, with_H=True)
        errs.append(ccr.opnorm(ccr.restrict(ccr.quantum_field(lat, space, fock, Hw), idx)))
        Pd = ccr.quantum_field(lat, space, fock, hyp.apply_H(lat, w))
        discrete = max(discrete, ccr.opnorm(ccr.restrict(Pd, idx)))
    return Outcome(errs[0], order=_order(errs, resolutions), ok=discrete <= 1e-10,
                   details={"errors": errs, "discrete_image": discrete})


@register("ccr.field.symmetric", "Phi_M(u) is symmetric on the safe block and linear in u", 1e-9,
          h=1 / 64, N_max=6)
def _phi_sym(rng, h, N_max):
    lat, row, space = _ccr_setup(h)
    fock = _fock(space.dim, N_max)
    idx = fock.safe_indices()
    u = hyp.trig_field(lat, 0.9, 0.4, 2, "sin") + 0.5 * hyp.trig_field(lat, 1.1, 0.4, 1)
    P = ccr.restrict(ccr.quantum_field(lat, space, fock, u), idx)
    P2 = ccr.restrict(ccr.quantum_field(lat, space, fock, 2 * u), idx)
    return Outcome(max(ccr.opnorm(P - P.conj().T), ccr.opnorm(P2 - 2 * P)))


@register("ccr.segal.vacuum",
          "<vac, Theta(f)^2 vac> = |f|^2 / 2, Theta(f) vac has one particle, [Theta(f), Theta(g)] vac = i Im<f,g> vac",
          1e-12, D=4, N_max=4)
def _segal(rng, D, N_max):
    fock = ccr.FockSpace(D, N_max)
    f = rng.normal(size=D) + 1j * rng.normal(size=D)
    g = rng.normal(size=D) + 1j * rng.normal(size=D)
    A, B = fock.segal(f), fock.segal(g)
    vac = fock.vacuum()
    e1 = abs(vac.conj() @ (A @ (A @ vac)) - 0.5 * np.vdot(f, f).real)
    one = A @ vac
    e2 = abs(one.conj() @ (fock.number_operator() @ one) / (one.conj() @ one) - 1)
    comm = A @ (B @ vac) - B @ (A @ vac)
    e3 = np.abs(comm - 1j * np.vdot(f, g).imag * vac).max()
    return Outcome(float(max(e1, e2, e3)))


def _weyl_pairs(lat, row, amplitude):
    u = hyp.trig_field(lat, 0.8, 0.4, 1, amplitude=amplitude)
    v = hyp.trig_field(lat, 1.1, 0.5, 1, amplitude=amplitude)
    w = hyp.trig_field(lat, 1.1, 0.5, 2, "sin", amplitude=amplitude)
    return u, v, w


@register("ccr.weyl.relation",
          "W(u) W(v) = exp(-i omega / 2) W(u + v), W unitary and W(0) = I on the safe block",
          1e-8, h=1 / 64, N_max=6, amplitude=0.1)
def _weyl_rel(rng, h, N_max, amplitude):
    lat, row, space = _ccr_setup(h)
    u, v, _ = _weyl_pairs(lat, row, amplitude)
    fu, fv = ccr.cauchy_vector(lat, u, row), ccr.cauchy_vector(lat, v, row)
    om = hyp.symplectic_form(lat, u, v)
    r = ccr.pair_weyl_check(space.inner, fu, fv, om, N_max=N_max)
    fock = ccr.FockSpace(2, 3)
    W0 = ccr.weyl(fock.segal(np.zeros(2)), fock).matrix()
    r["identity_at_zero"] = float(np.abs(W0 - np.eye(fock.dim)).max())
    return Outcome(max(r["weyl_relation"], r["unitarity"], r["commutator"], r["identity_at_zero"]),
                   details={**r, "omega": om})


@register("ccr.weyl.commutation",
          "omega(u, v) = 0 implies W(u) W(v) = W(v) W(u) on the safe block", 1e-8, h=1 / 64, N_max=6,
          amplitude=0.1)
def _weyl_comm(rng, h, N_max, amplitude):
    lat, row, space = _ccr_setup(h)
    u, _, w = _weyl_pairs(lat, row, amplitude)
    fu, fw = ccr.cauchy_vector(lat, u, row), ccr.cauchy_vector(lat, w, row)
    om = hyp.symplectic_form(lat, u, w)
    r = ccr.pair_weyl_check(space.inner, fu, fw, om, N_max=N_max)
    # a second pair: identical fields commute trivially
    same = ccr.pair_weyl_check(space.inner, fu, fu, 0.0, N_max=N_max)
    return Outcome(max(r["commutation"], same["commutation"]), ok=abs(om) <= 1e-12,
                   details={"omega": om, "commutation": r["commutation"]})


@register("ccr.surface_independence",
          "omega and the commutator scalar agree between Cauchy rows", 1e-10, min_order=1.8,
          resolutions=list(REFINE), N_max=6)
def _surface(rng, resolutions, N_max):
    errs = []
    for h in resolutions:
        lat = hyp.LatticeFiber.flat(h)
        u = hyp.trig_field(lat, 0.8, 0.25, 1)
        v = hyp.trig_field(lat, 1.1, 0.25, 2, "sin") + hyp.trig_field(lat, 1.0, 0.3, 1)
        mid = (lat.Nt - 1) // 2
        early = int(np.searchsorted(lat.t, 0.45))
        late = int(np.searchsorted(lat.t, 1.45))
        worst = 0.0
        scale = abs(hyp.symplectic_form(lat, u, v))
        for r1, r2 in ((mid, mid), (mid, mid + 1), (early, late)):
            s1 = ccr.OneParticleSpace.trig(lat, r1)
            s2 = ccr.OneParticleSpace.trig(lat, r2)
            fock = _fock(s1.dim, N_max)
            res = ccr.surface_independence_check(lat, s1, s2, u, v, fock, fock)
            worst = max(worst, res["residual"] / scale, res["commutator_residual"] / scale)
        errs.append(worst)
    return Outcome(max(errs), order=_order(errs, resolutions), details={"errors": errs})


# ==========================================================================
# localnets


def _hk_lattice(h):
    lat = hyp.LatticeFiber.flat(h)
    return lat, (lat.Nt - 1) // 2


def _spacelike_regions(lat):
    # two same-time intervals around t = 1 of temporal extent 0.1875 and gap 0.75
    r1 = ln.Region.physical(lat, 0.90625, 1.09375, 0.25, 0.625)
    r2 = ln.Region.physical(lat, 0.90625, 1.09375, 1.375, 1.75)
    r3 = ln.Region.physical(lat, 1.25, 1.4375, 0.625, 1.0)  # causally connected to r1
    return r1, r2, r3


@register("localnets.isotony", "nested regions have nested generator sets", 0, h=1 / 64)
def _isotony(rng, h):
    lat, row = _hk_lattice(h)
    r3 = ln.Region.box(50, 80, 20, 100)
    r2 = ln.Region.box(55, 75, 30, 90)
    r1 = ln.Region.box(60, 70, 40, 60)
    d = (ln.Dictionary.bumps(lat, r1, prefix="a", per_axis=(2, 2)) + ln.Dictionary.bumps(lat, r2, prefix="b", per_axis=(2, 2))
         + ln.Dictionary.bumps(lat, r3, prefix="c", per_axis=(2, 2)))
    bad = 0
    a12, a23 = ln.axiom1_isotony_check(lat, r1, r2, d), ln.axiom1_isotony_check(lat, r2, r3, d)
    bad += int(not (a12["pass"] and a23["pass"] and a12["strict"] and a23["strict"]))
    bad += int(d.generators(r1, lat) != d.generators(r1, lat) or not ln.axiom1_isotony_check(lat, r1, r1, d)["pass"])
    try:
        ln.axiom1_isotony_check(lat, ln.Region.box(10, 20, 5, 10), r1, d)
        bad += 1
    except ValueError:
        pass
    return Outcome(bad, details={"sizes": [a12["n_small"], a12["n_large"], a23["n_large"]]})


@register("localnets.spacelike.predicates",
          "separated same-time intervals are spacelike; nested or lightlike-touching boxes are not", 0, h=1 / 64)
def _predicates(rng, h):
    lat, _ = _hk_lattice(h)
    r1, r2, _ = _spacelike_regions(lat)
    inner = ln.Region.box(60, 62, 20, 24)
    corner_a = ln.Region.box(60, 64, 40, 44)
    corner_b = ln.Region.box(68, 72, 52, 56)  # touches corner_a's future light cone
    bad = int(not ln.spacelike_separated(lat, r1, r2)) + int(ln.spacelike_separated(lat, r1, inner))
    bad += int(ln.spacelike_separated(lat, corner_a, corner_b))
    return Outcome(bad)


@register("localnets.causality.spacelike",
          "generators of spacelike regions commute: omega and Weyl commutators vanish; causal control does not",
          1e-6, h=1 / 64, N_max=6)
def _axiom3(rng, h, N_max):
    lat, row = _hk_lattice(h)
    r1, r2, r3 = _spacelike_regions(lat)
    d = ln.Dictionary.bumps(lat, r1, prefix="A", row=row) + ln.Dictionary.bumps(lat, r2, prefix="B", row=row)
    rep = ln.axiom3_causality_check(lat, r1, r2, d, row=row, N_max=N_max)
    back = ln.axiom3_causality_check(lat, r2, r1, d, row=row, weyl=False)
    d3 = ln.Dictionary.bumps(lat, r3, prefix="C", row=row)
    ctrl = ln.axiom3_causality_check(lat, r1, r3, d + d3, row=row, require_spacelike=False, weyl=False)
    ok = ctrl["max_abs_omega"] > 10 * 1e-6 and abs(back["max_abs_omega"] - rep["max_abs_omega"]) <= 1e-15
    return Outcome(max(rep["max_abs_omega"], rep["max_weyl_commutator"]), ok=ok,
                   details={"pairs": rep["pairs"], "max_abs_omega": rep["max_abs_omega"],
                            "max_weyl_commutator": rep["max_weyl_commutator"],
                            "control_max_abs_omega": ctrl["max_abs_omega"]})


@register("localnets.causality.refinement",
          "omega between spacelike generators stays below tolerance under refinement", 1e-6, min_order=1.8,
          resolutions=list(REFINE))
def _axiom3_refine(rng, resolutions):
    errs = []
    for h in resolutions:
        lat, row = _hk_lattice(h)
        r1, r2, _ = _spacelike_regions(lat)
        d = (ln.Dictionary.bumps(lat, r1, prefix="A", per_axis=(2, 2), row=row)
             + ln.Dictionary.bumps(lat, r2, prefix="B", per_axis=(2, 2), row=row))
        errs.append(ln.axiom3_causality_check(lat, r1, r2, d, row=row, weyl=False)["max_abs_omega"])
    return Outcome(max(errs), order=_order(errs, resolutions, scale=1e-3), details={"errors": errs})


def _axiom4_case(h):
    lat, row = _hk_lattice(h)
    r_dep = ln.Region.physical(lat, 1.40625, 1.5625, 0.875, 1.125)
    u = hyp.bump(lat, 1.484375, 1.0, 0.06, 0.1)
    x_lo, x_hi = 0.125, 1.875
    r_src = ln.Region.physical(lat, lat.t[row - 4], lat.t[row + 4], x_lo, x_hi)
    return lat, row, r_dep, r_src, u


@register("localnets.second_causality",
          "Gu is reproduced by a source supported near the Cauchy row inside the source region",
          1e-3, min_order=0.9, resolutions=[1 / 64, 1 / 128, 1 / 256])
def _axiom4(rng, resolutions):
    errs, support_ok = [], True
    for h in resolutions:
        lat, row, r_dep, r_src, u = _axiom4_case(h)
        r = ln.axiom4_second_causality_check(lat, r_dep, r_src, row, u)
        errs.append(r["residual_future"])
        support_ok &= r["support_ok"]
    lat, row, r_dep, r_src, u = _axiom4_case(resolutions[0])
    narrow = ln.Region.physical(lat, lat.t[row - 4], lat.t[row + 4], 0.625, 1.375)
    try:
        ln.axiom4_second_causality_check(lat, r_dep, narrow, row, u)
        rejected = False
    except ValueError:
        rejected = True
    w = hyp.bump(lat, 1.484375, 1.0, 0.06, 0.1)
    Gu = hyp.green_apply(lat, hyp.apply_H(lat, w))
    range_zero = float(np.abs(Gu).max() / np.abs(w).max())
    return Outcome(errs[0], order=_order(errs, resolutions), ok=support_ok and rejected and range_zero <= 1e-11,
                   details={"residuals": errs, "support_ok": support_ok, "narrow_source_rejected": rejected,
                            "range_image_G": range_zero})


@register("localnets.primitivity",
          "commutant of the generated algebra on the safe block is trivial for the full dictionary",
          0, h=1 / 64, N_max=6)
def _axiom2(rng, h, N_max):
    lat, row = _hk_lattice(h)
    space = ccr.OneParticleSpace.trig(lat, row)
    fock = _fock(space.dim, N_max)
    full = ln.axiom2_primitivity_surrogate(lat, space, ln.Dictionary.trig(lat), fock=fock, rng=rng)
    part = ln.axiom2_primitivity_surrogate(
        lat, space, ln.Dictionary.trig(lat, modes=[(1, "cos"), (1, "sin"), (2, "cos"), (2, "sin")]),
        fock=fock, rng=rng)
    safe = fock.safe_indices().size
    empty = ln.commutant_dimension([], dim=safe)
    ok = part["commutant_dimension"] > 1 and empty["commutant_dimension"] == safe * safe
    return Outcome(abs(full["commutant_dimension"] - 1), ok=ok,
                   details={"full": full["commutant_dimension"], "proper_subspace": part["commutant_dimension"],
                            "proper_multiplicities": part["multiplicities"], "empty": empty["commutant_dimension"],
                            "safe_dim": safe})
