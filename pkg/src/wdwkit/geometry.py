"""Metrics and connections on the space of Riemannian metrics and its fibers.

Covers the DeWitt supermetric, the density ratio phi, the block Lorentzian
fiber metric, Cholesky vielbeins, the spinor connection on a grid and the
covariant Dirac derivative.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations_with_replacement

import numpy as np


# --------------------------------------------------------------------------
# spatial metrics


def _check_spd(g: np.ndarray, what: str = "metric") -> None:
    g = np.asarray(g, dtype=float)
    if g.shape[-1] != g.shape[-2]:
        raise ValueError(f"{what} must be square, got shape {g.shape}")
    if not np.allclose(g, np.swapaxes(g, -1, -2), rtol=0, atol=1e-12 * max(1.0, np.abs(g).max())):
        raise ValueError(f"{what} is not symmetric")
    try:
        np.linalg.cholesky(g)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"{what} is not positive-definite") from exc


@dataclass(frozen=True)
class SpatialMetric:
    """A single SPD matrix or a grid of them over a 1D/2D chart with spacing h.

    ``g`` has shape (n, n) for a point, (Nx, n, n) or (Nx, Ny, n, n) for a grid.
    """

    g: np.ndarray
    h: float = 1.0
    periodic: bool = False

    def __post_init__(self):
        g = np.asarray(self.g, dtype=float)
        if g.ndim < 2 or g.ndim > 4:
            raise ValueError(f"metric array must have 2..4 dims, got {g.ndim}")
        _check_spd(g)
        object.__setattr__(self, "g", g)

    @property
    def n(self) -> int:
        return self.g.shape[-1]

    @property
    def chart_dim(self) -> int:
        return self.g.ndim - 2

    @property
    def grid_shape(self) -> tuple[int, ...]:
        return self.g.shape[:-2]

    @classmethod
    def from_json(cls, path) -> "SpatialMetric":
        """Read ``{n, h, points: [[g11, g12, ...], ...]}`` (row-major entries per point)."""
        with open(path) as fh:
            data = json.load(fh)
        n = int(data["n"])
        pts = np.asarray(data["points"], dtype=float)
        if pts.shape[-1] != n * n:
            raise ValueError(f"each point needs {n * n} entries")
        g = pts.reshape(pts.shape[:-1] + (n, n))
        return cls(g, h=float(data.get("h", 1.0)), periodic=bool(data.get("periodic", False)))


def _as_point(g) -> np.ndarray:
    g = g.g if isinstance(g, SpatialMetric) else np.asarray(g, dtype=float)
    if g.ndim != 2:
        raise ValueError("expected a single metric point")
    _check_spd(g)
    return g


# --------------------------------------------------------------------------
# DeWitt metric


def pair_basis(n: int) -> list[tuple[int, int]]:
    """Ordered symmetric-pair basis {(i, j): i <= j}; xi^r = g_ij."""
    return list(combinations_with_replacement(range(n), 2))


@dataclass(frozen=True)
class DeWittTensor:
    tensor: np.ndarray  # G^{ij,kl}, shape (n, n, n, n)
    flat: np.ndarray  # G_rs on the pair basis
    pairs: list = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.tensor.shape[0]

    def signature(self, tol: float = 1e-12) -> tuple[int, int, int]:
        return signature(self.flat, tol)


def signature(m: np.ndarray, tol: float = 1e-12) -> tuple[int, int, int]:
    """(negative, zero, positive) eigenvalue counts of a symmetric matrix."""
    ev = np.linalg.eigvalsh(m)
    scale = tol * max(1.0, np.abs(ev).max())
    return int((ev < -scale).sum()), int((np.abs(ev) <= scale).sum()), int((ev > scale).sum())


def dewitt(g) -> DeWittTensor:
    """G^{ij,kl} = 1/2 (g^ik g^jl + g^il g^jk) - g^ij g^kl.

    The flattened matrix satisfies G_rs xidot^r xidot^s = G^{ij,kl} gdot_ij gdot_kl
    with xi^r = g_ij over i <= j: each entry sums the tensor over both
    orderings of the off-diagonal pairs.
    """
    g = _as_point(g)
    n = g.shape[0]
    gi = np.linalg.inv(g)
    gi = 0.5 * (gi + gi.T)
    t = 0.5 * (np.einsum("ik,jl->ijkl", gi, gi) + np.einsum("il,jk->ijkl", gi, gi)) \
        - np.einsum("ij,kl->ijkl", gi, gi)
    pairs = pair_basis(n)
    m = len(pairs)
    flat = np.zeros((m, m))
    for r, (i, j) in enumerate(pairs):
        orb_r = {(i, j), (j, i)}
        for s, (k, l) in enumerate(pairs):
            orb_s = {(k, l), (l, k)}
            flat[r, s] = sum(t[a, b, c, d] for (a, b) in orb_r for (c, d) in orb_s)
    return DeWittTensor(tensor=t, flat=flat, pairs=pairs)


def trace_direction_value(G: DeWittTensor) -> float:
    """G^{ij,kl} delta_ij delta_kl."""
    eye = np.eye(G.n)
    return float(np.einsum("ijkl,ij,kl->", G.tensor, eye, eye))


def sym_to_pair(a: np.ndarray) -> np.ndarray:
    """Coordinates of a symmetric matrix in the pair basis."""
    return np.array([a[i, j] for i, j in pair_basis(a.shape[0])])


def pair_to_sym(x: np.ndarray, n: int) -> np.ndarray:
    a = np.zeros((n, n))
    for r, (i, j) in enumerate(pair_basis(n)):
        a[i, j] = a[j, i] = x[r]
    return a


def phi(g, rho) -> float:
    """Density ratio sqrt(det g / det rho)."""
    g = _as_point(g)
    rho = _as_point(rho)
    if g.shape != rho.shape:
        raise ValueError("g and rho have different dimensions")
    dg = np.linalg.det(g)
    dr = np.linalg.det(rho)
    if dg <= 0 or dr <= 0:
        raise ValueError("degenerate metric")
    return float(np.sqrt(dg / dr))


# --------------------------------------------------------------------------
# Yang-Mills data


@dataclass(frozen=True)
class YangMillsData:
    """Compact Lie algebra data: f^a_{cb} as f[a, c, b], metric gamma, rep matrices t[c].

    ``connection`` optionally holds grid samples A^a_i with shape (*grid, n0, n).
    """

    f: np.ndarray
    gamma: np.ndarray
    t: np.ndarray
    connection: np.ndarray | None = None

    @property
    def n0(self) -> int:
        return self.gamma.shape[0]

    @property
    def n2(self) -> int:
        return self.t.shape[-1]

    def validate(self, tol: float = 1e-12) -> list[str]:
        issues = []
        n0 = self.n0
        if n0 == 0:
            return issues
        if not np.allclose(self.gamma, self.gamma.T, atol=tol):
            issues.append("gamma is not symmetric")
        if np.linalg.eigvalsh(self.gamma).min() <= 0:
            issues.append("gamma is not positive-definite")
        low = np.einsum("ad,dcb->acb", self.gamma, self.f)
        for perm in ((1, 0, 2), (0, 2, 1), (2, 1, 0)):
            if not np.allclose(low, -np.transpose(low, perm), atol=tol):
                issues.append("lowered structure constants are not totally antisymmetric")
                break
        if not np.allclose(self.t, -np.conj(np.swapaxes(self.t, -1, -2)), atol=tol):
            issues.append("representation matrices are not antihermitian")
        comm = np.einsum("bij,cjk->bcik", self.t, self.t) - np.einsum("cij,bjk->bcik", self.t, self.t)
        if not np.allclose(comm, np.einsum("abc,aij->bcij", self.f, self.t), atol=tol):
            issues.append("[t_b, t_c] != f^a_bc t_a")
        return issues

    def matrix_connection(self, k: int) -> np.ndarray:
        """A_k = t_c A^c_k on the grid, shape (*grid, n2, n2)."""
        if self.connection is None or self.n0 == 0:
            raise ValueError("no connection samples")
        return np.einsum("...c,cij->...ij", self.connection[..., :, k], self.t)

    def components(self, mat: np.ndarray) -> np.ndarray:
        """Solve t_c x^c = mat for x (least squares over the t basis)."""
        basis = self.t.reshape(self.n0, -1).T
        rhs = mat.reshape(mat.shape[:-2] + (-1,))
        sol, *_ = np.linalg.lstsq(basis, rhs.reshape(-1, basis.shape[0]).T, rcond=None)
        return sol.T.real.reshape(mat.shape[:-2] + (self.n0,))

    def gauge_rotate(self, U: np.ndarray) -> "YangMillsData":
        """Constant gauge transformation A -> U A U^-1 on the connection samples."""
        if self.connection is None:
            return self
        n = self.connection.shape[-1]
        new = np.empty_like(self.connection)
        Ui = np.linalg.inv(U)
        for k in range(n):
            Ak = U @ self.matrix_connection(k) @ Ui
            new[..., :, k] = self.components(Ak)
        return YangMillsData(self.f, self.gamma, self.t, new)

    def with_connection(self, connection: np.ndarray) -> "YangMillsData":
        return YangMillsData(self.f, self.gamma, self.t, np.asarray(connection, dtype=float))


def su2() -> YangMillsData:
    """su(2) in the fundamental rep: t_c = -(i/2) sigma_c, f = epsilon, gamma = 2 delta."""
    sig = np.array([[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]], dtype=complex)
    eps = np.zeros((3, 3, 3))
    for a, b, c in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        eps[a, b, c] = 1.0
        eps[a, c, b] = -1.0
    # gamma is minus the Killing form f^c_ad f^d_bc
    killing = np.einsum("cad,dbc->ab", eps, eps)
    return YangMillsData(f=eps, gamma=-killing, t=-0.5j * sig)


def trivial_gauge(n2: int = 1) -> YangMillsData:
    """No gauge sector (n0 = 0) acting on n2 colours."""
    return YangMillsData(f=np.zeros((0, 0, 0)), gamma=np.zeros((0, 0)),
                         t=np.zeros((0, n2, n2), dtype=complex))


# --------------------------------------------------------------------------
# fiber metric


@dataclass(frozen=True)
class FiberMetric:
    matrix: np.ndarray
    sectors: dict  # name -> slice
    phi: float

    def signature(self, tol: float = 1e-12) -> tuple[int, int, int]:
        return signature(self.matrix, tol)

    def block(self, name: str) -> np.ndarray:
        s = self.sectors[name]
        return self.matrix[s, s]


def yang_mills_block(g, ym: YangMillsData) -> np.ndarray:
    """G_pq = gamma_ab g^ij on coordinates zeta^p, p = (a, i) in row-major order."""
    g = _as_point(g)
    return np.kron(ym.gamma, np.linalg.inv(g))


def fiber_metric(g, rho, ym: YangMillsData, alphaN: float = 1.0, check: bool = True) -> FiberMetric:
    """phi * blockdiag(G_rs / alphaN, 2 G_pq, 2 gamma, 2 gamma)."""
    if alphaN <= 0:
        raise ValueError("alphaN must be positive")
    g = _as_point(g)
    p = phi(g, rho)
    blocks = [dewitt(g).flat / alphaN]
    names = ["gravity"]
    if ym.n0:
        blocks += [2.0 * yang_mills_block(g, ym), 2.0 * ym.gamma, 2.0 * ym.gamma]
        names += ["yang_mills", "higgs_re", "higgs_im"]
    size = sum(b.shape[0] for b in blocks)
    mat = np.zeros((size, size))
    sectors = {}
    pos = 0
    for name, b in zip(names, blocks):
        k = b.shape[0]
        mat[pos:pos + k, pos:pos + k] = b
        sectors[name] = slice(pos, pos + k)
        pos += k
    fm = FiberMetric(matrix=p * mat, sectors=sectors, phi=p)
    if check:
        neg, zero, _ = fm.signature()
        if neg != 1 or zero:
            raise ValueError(f"fiber metric is not Lorentzian: signature {fm.signature()}")
    return fm


# --------------------------------------------------------------------------
# frames and spin connection


@dataclass(frozen=True)
class Vielbein:
    """e[a, i] = e^a_i with g = e^T e, E = e^-1 (E[i, a] = E^i_a), and the lift with lapse w."""

    e: np.ndarray
    E: np.ndarray
    w: float = 1.0

    @property
    def spacetime(self) -> np.ndarray:
        n = self.e.shape[-1]
        out = np.zeros(self.e.shape[:-2] + (n + 1, n + 1))
        out[..., 0, 0] = self.w
        out[..., 1:, 1:] = self.e
        return out

    def reconstruct(self) -> np.ndarray:
        return np.swapaxes(self.e, -1, -2) @ self.e


def vielbein(g, w: float = 1.0, rotation: np.ndarray | None = None) -> Vielbein:
    """Cholesky frame: g = L L^T and e = L^T (upper triangular), optionally rotated by a constant O."""
    if w <= 0:
        raise ValueError("lapse must be positive")
    g = g.g if isinstance(g, SpatialMetric) else np.asarray(g, dtype=float)
    try:
        L = np.linalg.cholesky(g)
    except np.linalg.LinAlgError as exc:
        raise ValueError("metric is not positive-definite") from exc
    e = np.swapaxes(L, -1, -2)
    if rotation is not None:
        e = rotation @ e
    return Vielbein(e=e, E=np.linalg.inv(e), w=w)


def _diff(a: np.ndarray, axis: int, h: float, periodic: bool) -> np.ndarray:
    """Centered second-order derivative along a grid axis."""
    if a.shape[axis] < 3:
        raise ValueError("grid too small for the centered stencil")
    if periodic:
        return (np.roll(a, -1, axis) - np.roll(a, 1, axis)) / (2 * h)
    a = np.moveaxis(a, axis, 0)
    out = np.empty_like(a)
    out[1:-1] = (a[2:] - a[:-2]) / (2 * h)
    # one-sided second-order ends, written in differences so constants give exact zeros
    out[0] = (3 * (a[1] - a[0]) - (a[2] - a[1])) / (2 * h)
    out[-1] = (3 * (a[-1] - a[-2]) - (a[-2] - a[-3])) / (2 * h)
    return np.moveaxis(out, 0, axis)


@dataclass(frozen=True)
class SpinConnection:
    """gamma_tilde[k] on the grid (shape (n, *grid, n1, n1)), antihermitian.

    ``omega[k][..., a, b]`` holds E^j_a e^b_{j;k}; ``hermitian_defect`` is the
    max norm of the Hermitian part that was projected away.
    """

    gamma_tilde: np.ndarray
    omega: np.ndarray
    hermitian_defect: float
    chart_dim: int


def christoffel(metric: SpatialMetric) -> np.ndarray:
    """Gamma^l_{jk} on the grid, shape (*grid, n, n, n) indexed [l, j, k]."""
    g = metric.g
    n = metric.n
    d = metric.chart_dim
    dg = np.zeros((n,) + g.shape)  # dg[m] = d_m g
    for m in range(min(d, n)):
        dg[m] = _diff(g, m, metric.h, metric.periodic)
    gi = np.linalg.inv(g)
    # d_j g_mk + d_k g_mj - d_m g_jk, as [m, j, k]
    djg = np.moveaxis(dg, 0, -1)  # [..., a, b, m] = d_m g_ab
    t = (np.einsum("...mkj->...mjk", djg)
         + np.einsum("...mjk->...mjk", djg)
         - np.einsum("...jkm->...mjk", djg))
    return 0.5 * np.einsum("...lm,...mjk->...ljk", gi, t)


def spin_connection(metric: SpatialMetric, gamma, rotation: np.ndarray | None = None) -> SpinConnection:
    """Gamma~_k = -1/4 E^j_a e^b_{j;k} gamma_b gamma^a for every spatial direction k.

    Derivatives along chart axes use centered differences; directions beyond
    the chart have vanishing coordinate derivatives but still pick up
    Christoffel terms.
    """
    n = metric.n
    if gamma.n != n:
        raise ValueError(f"gamma rep is for n={gamma.n}, metric has n={n}")
    d = metric.chart_dim
    fr = vielbein(metric.g, rotation=rotation)
    e, E = fr.e, fr.E
    chris = christoffel(metric)
    de = np.zeros((n,) + e.shape)
    for k in range(min(d, n)):
        de[k] = _diff(e, k, metric.h, metric.periodic)
    # e^b_{j;k} = d_k e^b_j - Gamma^l_{jk} e^b_l, stored [k, ..., b, j]
    cov = de - np.moveaxis(np.einsum("...ljk,...bl->...kbj", chris, e), -3, 0)
    omega = np.einsum("...ja,k...bj->k...ab", E, cov)
    gs = gamma.gammas[1:]  # spatial, Hermitian, index up equals index down
    prod = np.einsum("bij,ajk->abik", gs, gs)  # gamma_b gamma^a as [a, b]
    gt = -0.25 * np.einsum("k...ab,abij->k...ij", omega, prod)
    herm = 0.5 * (gt + np.conj(np.swapaxes(gt, -1, -2)))
    defect = float(np.abs(herm).max()) if herm.size else 0.0
    return SpinConnection(gamma_tilde=gt - herm, omega=omega, hermitian_defect=defect, chart_dim=d)


def scalar_curvature_2d(metric: SpatialMetric) -> np.ndarray:
    """R for n=2 diagonal metrics diag(E, G) on a 1D or 2D chart.

    Uses R = -1/sqrt(EG) [d_x(G_x / sqrt(EG)) + d_y(E_y / sqrt(EG))].
    """
    g = metric.g
    if metric.n != 2 or not np.allclose(g[..., 0, 1], 0):
        raise ValueError("only diagonal n=2 metrics are supported")
    Ee, Gg = g[..., 0, 0], g[..., 1, 1]
    root = np.sqrt(Ee * Gg)
    h, per = metric.h, metric.periodic
    total = _diff(_diff(Gg, 0, h, per) / root, 0, h, per)
    if metric.chart_dim == 2:
        total = total + _diff(_diff(Ee, 1, h, per) / root, 1, h, per)
    return -total / root


def covariant_dirac_derivative(chi: np.ndarray, sc: SpinConnection, ym: YangMillsData | None,
                               k: int, h: float, periodic: bool = False) -> np.ndarray:
    """D~_k chi = chi_,k + Gamma~_k chi + A_k chi.

    ``chi`` has shape (*grid, n1, n2). A_k acts on the colour index.
    """
    chi = np.asarray(chi, dtype=complex)
    gt = sc.gamma_tilde[k]
    if chi.shape[:-1] != gt.shape[:-1]:
        raise ValueError(f"spinor field shape {chi.shape} does not match connection {gt.shape}")
    out = np.einsum("...ij,...jI->...iI", gt, chi)
    if k < sc.chart_dim:
        out = out + _diff(chi, k, h, periodic)
    if ym is not None and ym.connection is not None and ym.n0:
        Ak = ym.matrix_connection(k)
        if Ak.shape[-1] != chi.shape[-1]:
            raise ValueError("colour dimension mismatch")
        out = out + np.einsum("...IJ,...AJ->...AI", Ak, chi)
    return out
