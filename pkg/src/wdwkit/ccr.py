"""Truncated symmetric Fock space over Cauchy data, Segal fields, the quantum
field of a test section, and Weyl operators.

Conventions. The one-particle inner product on a Cauchy row is antilinear in
its first slot. The Segal field is Theta(f) = (a(f) + a*(f)) / sqrt2 with
a(f) antilinear in f, so [Theta(f), Theta(g)] = i Im<f, g>. A test section u
is sent to the Cauchy datum

    f_u = D_nu(G*u)|_M + i (G*u)|_M,     G* = -G,

and Im<f_u, f_v>_M equals the surface pairing of Gu and Gv, i.e. omega(u, v).
With these choices [Phi_M(u), Phi_M(v)] = i omega(u, v) and
W(u) W(v) = exp(-i omega(u, v) / 2) W(u + v).

Fock states are truncated at total particle number N_max; identities are
asserted on the safe block of states with at most N_max - 2 particles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

from . import hyperbolic as hyp

SQRT2 = np.sqrt(2.0)


# --------------------------------------------------------------------------
# one-particle spaces


def cauchy_vector(lat: hyp.LatticeFiber, u, row: int) -> np.ndarray:
    """f_u = D_nu(G*u) + i G*u on the row, flattened over (x, component)."""
    Gs = -hyp.green_apply(lat, u)
    d = hyp.normal_derivative(lat, Gs, row)
    return (d + 1j * Gs[row]).reshape(-1)


def cauchy_data_vector(lat: hyp.LatticeFiber, value, normal) -> np.ndarray:
    """One-particle vector of a Cauchy data pair (value row, normal-derivative row)."""
    return (np.asarray(normal) + 1j * np.asarray(value)).reshape(-1).astype(complex)


class OneParticleSpace:
    """Orthonormal family of complex Cauchy-row functions, inner product hx sqrt(b)."""

    def __init__(self, lat: hyp.LatticeFiber, row: int, basis: np.ndarray, tol: float = 1e-12):
        if row not in lat.cauchy_rows:
            raise ValueError(f"row {row} is not a designated Cauchy row")
        self.lat = lat
        self.row = row
        self.basis = np.atleast_2d(np.asarray(basis, dtype=complex))
        if self.basis.size and self.basis.shape[1] != lat.Nx * lat.fiber_dim:
            raise ValueError("basis vectors have the wrong length")
        err = np.abs(self.gram() - np.eye(self.dim)).max() if self.dim else 0.0
        if err > tol:
            raise ValueError(f"basis is not orthonormal (defect {err:.2e})")

    @property
    def weights(self) -> np.ndarray:
        return np.repeat(self.lat.row_weight, self.lat.fiber_dim)

    @property
    def dim(self) -> int:
        return self.basis.shape[0] if self.basis.size else 0

    def inner(self, f, g) -> complex:
        return complex(np.sum(self.weights * np.conj(f) * g))

    def gram(self) -> np.ndarray:
        return (self.basis.conj() * self.weights) @ self.basis.T

    def coords(self, f, tol: float = 1e-9, atol: float = 1e-12) -> np.ndarray:
        """Coordinates of f in the basis; raises when f is not in the span.

        The residual is judged relative to ||f||, except that residuals below
        ``atol`` in absolute terms (vectors that are zero up to roundoff) pass.
        """
        f = np.asarray(f, dtype=complex).reshape(-1)
        c = (self.basis.conj() * self.weights) @ f
        resid = f - c @ self.basis
        nf = np.sqrt(abs(self.inner(f, f)))
        nr = np.sqrt(abs(self.inner(resid, resid)))
        rel = nr / nf if nf > 0 else 0.0
        if rel > tol and nr > atol:
            raise ValueError(f"vector lies outside the one-particle span (relative residual {rel:.2e})")
        return c

    @classmethod
    def trig(cls, lat: hyp.LatticeFiber, row: int, kmax: int = 4, component: int = 0) -> "OneParticleSpace":
        """cos/sin(2 pi k x / L), k = 1..kmax, in one fiber component; dimension 2 kmax."""
        K = lat.fiber_dim
        vecs = []
        for k in range(1, kmax + 1):
            for fn in (np.cos, np.sin):
                v = np.zeros((lat.Nx, K), dtype=complex)
                v[:, component] = fn(2 * np.pi * k * lat.x / lat.length)
                vecs.append(v.reshape(-1))
        return cls.from_vectors(lat, row, vecs)

    @classmethod
    def from_vectors(cls, lat: hyp.LatticeFiber, row: int, vecs, rtol: float = 1e-10) -> "OneParticleSpace":
        """Orthonormalize the complex span of the given row vectors (rank-revealing)."""
        w = np.sqrt(np.repeat(lat.row_weight, lat.fiber_dim))
        A = np.array([np.asarray(v, dtype=complex).reshape(-1) for v in vecs]).T * w[:, None]
        if A.size == 0:
            return cls(lat, row, np.zeros((0, lat.Nx * lat.fiber_dim)))
        U, s, _ = np.linalg.svd(A, full_matrices=False)
        rank = int(np.sum(s > rtol * s.max())) if s.size and s.max() > 0 else 0
        basis = (U[:, :rank] / w[:, None]).T
        return cls(lat, row, basis, tol=1e-10)

    @classmethod
    def from_fields(cls, lat: hyp.LatticeFiber, row: int, fields) -> "OneParticleSpace":
        return cls.from_vectors(lat, row, [cauchy_vector(lat, u, row) for u in fields])


# --------------------------------------------------------------------------
# Fock space


def _compositions(N: int, D: int):
    """Occupation vectors of length D summing to N, in lexicographically decreasing order."""
    if D == 0:
        return [()] if N == 0 else []
    if D == 1:
        return [(N,)]
    out = []
    for first in range(N, -1, -1):
        out.extend((first,) + rest for rest in _compositions(N - first, D - 1))
    return out


class FockSpace:
    """Symmetric Fock space over C^D truncated at total particle number N_max."""

    def __init__(self, D: int, N_max: int = 6):
        if D < 0 or N_max < 0:
            raise ValueError("D and N_max must be non-negative")
        self.D = D
        self.N_max = N_max
        states = []
        for N in range(N_max + 1):
            states.extend(_compositions(N, D))
        self.states = states
        self.index = {s: i for i, s in enumerate(states)}
        self.number = np.array([sum(s) for s in states])
        self._ann = [self._annihilator(k) for k in range(D)]

    @property
    def dim(self) -> int:
        return len(self.states)

    def safe_indices(self, margin: int = 2) -> np.ndarray:
        return np.flatnonzero(self.number <= self.N_max - margin)

    def vacuum(self) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[0] = 1.0
        return v

    def _annihilator(self, k: int) -> sp.csr_matrix:
        rows, cols, vals = [], [], []
        for j, s in enumerate(self.states):
            if s[k]:
                t = list(s)
                t[k] -= 1
                rows.append(self.index[tuple(t)])
                cols.append(j)
                vals.append(np.sqrt(s[k]))
        return sp.csr_matrix((vals, (rows, cols)), shape=(self.dim, self.dim), dtype=complex)

    def annihilation(self, c) -> sp.csr_matrix:
        """a(f) = sum_k conj(c_k) a_k (antilinear in f)."""
        out = sp.csr_matrix((self.dim, self.dim), dtype=complex)
        for k, ck in enumerate(np.asarray(c, dtype=complex)):
            if ck != 0:
                out = out + np.conj(ck) * self._ann[k]
        return out

    def creation(self, c) -> sp.csr_matrix:
        return self.annihilation(c).conj().T.tocsr()

    def segal(self, c) -> sp.csr_matrix:
        a = self.annihilation(c)
        return ((a + a.conj().T) / SQRT2).tocsr()

    def number_operator(self) -> sp.csr_matrix:
        return sp.diags(self.number.astype(complex)).tocsr()

    def truncation_leak(self, vec: np.ndarray) -> float:
        """Weight on the top level N_max (where the truncation acts)."""
        vec = np.asarray(vec)
        top = self.number == self.N_max
        return float(np.linalg.norm(vec[top]) / max(np.linalg.norm(vec), 1e-300))


def segal_field(space: OneParticleSpace, fock: FockSpace, f, tol: float = 1e-9) -> sp.csr_matrix:
    """Theta(f) on the truncated Fock space; f must lie in the one-particle span."""
    if fock.D != space.dim:
        raise ValueError("Fock space and one-particle space dimensions differ")
    return fock.segal(space.coords(f, tol))


def quantum_field(lat: hyp.LatticeFiber, space: OneParticleSpace, fock: FockSpace, u, row: int | None = None,
                  tol: float = 1e-6) -> sp.csr_matrix:
    """Phi_M(u) = Theta(D_nu(G*u)|_M + i (G*u)|_M)."""
    row = space.row if row is None else row
    if row != space.row:
        raise ValueError("one-particle space belongs to a different Cauchy row")
    return segal_field(space, fock, cauchy_vector(lat, u, row), tol)


def restrict(op, idx: np.ndarray) -> np.ndarray:
    op = op.tocsr() if sp.issparse(op) else np.asarray(op)
    sub = op[idx][:, idx]
    return sub.toarray() if sp.issparse(sub) else sub


def opnorm(m: np.ndarray) -> float:
    return float(np.linalg.norm(m, 2)) if m.size else 0.0


def ccr_commutator_check(lat: hyp.LatticeFiber, space: OneParticleSpace, fock: FockSpace, u, v,
                         row: int | None = None) -> dict:
    """[Phi_M(u), Phi_M(v)] against i omega(u, v) I on the safe block."""
    A = quantum_field(lat, space, fock, u, row)
    B = quantum_field(lat, space, fock, v, row)
    C = (A @ B - B @ A).tocsr()
    idx = fock.safe_indices()
    lhs = restrict(C, idx)
    omega = hyp.symplectic_form(lat, u, v)
    rhs = 1j * omega * np.eye(idx.size)
    scalar = complex(lhs[0, 0]) / 1j
    return {"omega": omega, "commutator_scalar": scalar.real, "lhs": lhs,
            "residual": opnorm(lhs - rhs)}


# --------------------------------------------------------------------------
# Weyl operators


@dataclass
class WeylElement:
    """exp(i phi) on the truncated Fock space; the action is computed on demand."""

    phi: sp.csr_matrix
    fock: FockSpace

    def apply(self, vecs: np.ndarray) -> np.ndarray:
        return expm_multiply(1j * self.phi, vecs)

    def matrix(self) -> np.ndarray:
        return sla.expm(1j * self.phi.toarray())

    def safe_columns(self) -> np.ndarray:
        idx = self.fock.safe_indices()
        E = np.zeros((self.fock.dim, idx.size), dtype=complex)
        E[idx, np.arange(idx.size)] = 1.0
        return self.apply(E)

    def unitarity_defect(self) -> float:
        X = self.safe_columns()
        return opnorm(X.conj().T @ X - np.eye(X.shape[1]))


def weyl(phi_op, fock: FockSpace) -> WeylElement:
    return WeylElement(sp.csr_matrix(phi_op), fock)


def weyl_product_residual(fock: FockSpace, A, B, omega: float, dense_limit: int = 400) -> dict:
    """W(u) W(v) against exp(-i omega / 2) W(u + v), and W(u) W(v) against
    W(v) W(u), both on the safe block."""
    idx = fock.safe_indices()
    if fock.dim <= dense_limit:
        Wu, Wv = sla.expm(1j * _dense(A)), sla.expm(1j * _dense(B))
        Wuv = sla.expm(1j * (_dense(A) + _dense(B)))
        uv = (Wu @ Wv)[np.ix_(idx, idx)]
        vu = (Wv @ Wu)[np.ix_(idx, idx)]
        joint = Wuv[np.ix_(idx, idx)]
    else:
        E = np.zeros((fock.dim, idx.size), dtype=complex)
        E[idx, np.arange(idx.size)] = 1.0
        Wu, Wv, Wuv = weyl(A, fock), weyl(B, fock), weyl(A + B, fock)
        uv = Wu.apply(Wv.apply(E))[idx]
        vu = Wv.apply(Wu.apply(E))[idx]
        joint = Wuv.apply(E)[idx]
    return {"weyl_relation": opnorm(uv - np.exp(-0.5j * omega) * joint),
            "commutation": opnorm(uv - vu)}


def _dense(m) -> np.ndarray:
    return m.toarray() if sp.issparse(m) else np.asarray(m)


def pair_weyl_check(space_inner, f_u: np.ndarray, f_v: np.ndarray, omega: float, N_max: int = 6,
                    spectators: bool = True) -> dict:
    """Weyl identities for one pair, reduced exactly to the span of {f_u, f_v}.

    Fields only act on the two-dimensional span, so a Fock space over a larger
    one-particle space splits into sectors with k particles in the orthogonal
    complement; sector k is the two-mode space truncated at N_max - k with
    safe level N_max - 2 - k. The worst sector is reported.
    """
    # orthonormal basis of span{f_u, f_v} under the given inner product
    basis = []
    for f in (f_u, f_v):
        g = f.astype(complex).copy()
        for b in basis:
            g = g - space_inner(b, g) * b
        nrm = np.sqrt(abs(space_inner(g, g)))
        if nrm > 1e-12 * max(1.0, np.sqrt(abs(space_inner(f, f)))):
            basis.append(g / nrm)
    cu = np.array([space_inner(b, f_u) for b in basis])
    cv = np.array([space_inner(b, f_v) for b in basis])
    worst = {"weyl_relation": 0.0, "commutation": 0.0, "unitarity": 0.0, "commutator": 0.0}
    sectors = range(0, N_max - 1) if spectators else [0]
    for k in sectors:
        fock = FockSpace(len(basis), N_max - k)
        A, B = fock.segal(cu), fock.segal(cv)
        res = weyl_product_residual(fock, A, B, omega)
        idx = fock.safe_indices()
        C = restrict(A @ B - B @ A, idx)
        worst["weyl_relation"] = max(worst["weyl_relation"], res["weyl_relation"])
        worst["commutation"] = max(worst["commutation"], res["commutation"])
        worst["commutator"] = max(worst["commutator"], opnorm(C - 1j * omega * np.eye(idx.size)))
        W = sla.expm(1j * _dense(A))[:, idx]
        worst["unitarity"] = max(worst["unitarity"], opnorm(W.conj().T @ W - np.eye(idx.size)))
    return worst


def surface_independence_check(lat: hyp.LatticeFiber, space1: OneParticleSpace, space2: OneParticleSpace,
                               u, v, fock1: FockSpace | None = None, fock2: FockSpace | None = None) -> dict:
    """Compare omega and the commutator scalar computed from two Cauchy rows."""
    r1, r2 = space1.row, space2.row
    f1u, f1v = cauchy_vector(lat, u, r1), cauchy_vector(lat, v, r1)
    f2u, f2v = cauchy_vector(lat, u, r2), cauchy_vector(lat, v, r2)
    om1 = space1.inner(f1u, f1v).imag
    om2 = space2.inner(f2u, f2v).imag
    out = {"omega_row1": om1, "omega_row2": om2, "residual": abs(om1 - om2)}
    if fock1 is not None and fock2 is not None:
        s1 = ccr_commutator_check(lat, space1, fock1, u, v)["commutator_scalar"]
        s2 = ccr_commutator_check(lat, space2, fock2, u, v)["commutator_scalar"]
        out["commutator_row1"], out["commutator_row2"] = s1, s2
        out["commutator_residual"] = abs(s1 - s2)
    return out
