"""Dirac matrices in n+1 dimensions with an antihermitian time generator.

Convention: the Minkowski metric is diag(-1, +1, ..., +1), ``gamma^0`` is
antihermitian with ``(gamma^0)^2 = -I`` and the spatial ``gamma^a'`` are
Hermitian. This is NOT the usual particle-physics choice of a Hermitian
``gamma^0``.

Matrices are kept as pairs of integer arrays (real part, imaginary part) so
that every Clifford identity is checked in exact integer arithmetic. Entries
are always in {0, +-1, +-i}.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import reduce

import numpy as np

MAX_SPINOR_DIM = 64

# Pauli matrices as (re, im) integer pairs
_I2 = (np.eye(2, dtype=np.int64), np.zeros((2, 2), dtype=np.int64))
_X = (np.array([[0, 1], [1, 0]], dtype=np.int64), np.zeros((2, 2), dtype=np.int64))
_Y = (np.zeros((2, 2), dtype=np.int64), np.array([[0, -1], [1, 0]], dtype=np.int64))
_Z = (np.array([[1, 0], [0, -1]], dtype=np.int64), np.zeros((2, 2), dtype=np.int64))


def _mul(a, b):
    """Exact product of Gaussian-integer matrices given as (re, im)."""
    return (a[0] @ b[0] - a[1] @ b[1], a[0] @ b[1] + a[1] @ b[0])


def _add(a, b):
    return (a[0] + b[0], a[1] + b[1])


def _scale(a, re, im):
    # (re + i im) * (A + iB)
    return (re * a[0] - im * a[1], re * a[1] + im * a[0])


def _kron(a, b):
    return (np.kron(a[0], b[0]) - np.kron(a[1], b[1]),
            np.kron(a[0], b[1]) + np.kron(a[1], b[0]))


def _dagger(a):
    return (a[0].T.copy(), -a[1].T)


def _eye(n):
    return (np.eye(n, dtype=np.int64), np.zeros((n, n), dtype=np.int64))


def _is_zero(a):
    return not (a[0].any() or a[1].any())


@dataclass(frozen=True)
class MinkowskiSignature:
    n: int

    @property
    def eta(self) -> tuple[int, ...]:
        return (-1,) + (1,) * self.n


@dataclass(frozen=True, eq=False)
class GammaRep:
    """A concrete set of n+1 Dirac matrices acting on C^n1.

    ``re`` and ``im`` have shape (n+1, n1, n1) and hold integers.
    """

    n: int
    n1: int
    re: np.ndarray
    im: np.ndarray

    @property
    def signature(self) -> MinkowskiSignature:
        return MinkowskiSignature(self.n)

    @property
    def eta(self) -> tuple[int, ...]:
        return self.signature.eta

    @property
    def gammas(self) -> np.ndarray:
        """Complex floating copy, shape (n+1, n1, n1), for numerical code."""
        return self.re.astype(np.complex128) + 1j * self.im.astype(np.complex128)

    def exact(self, a: int):
        return (self.re[a], self.im[a])

    def __getitem__(self, a: int) -> np.ndarray:
        return self.gammas[a]

    def replace(self, a: int, re: np.ndarray, im: np.ndarray) -> "GammaRep":
        """Copy with generator ``a`` swapped out (used to build broken reps)."""
        new_re = self.re.copy()
        new_im = self.im.copy()
        new_re[a] = re
        new_im[a] = im
        return GammaRep(self.n, self.n1, new_re, new_im)

    def to_json(self) -> dict:
        mats = []
        for a in range(self.n + 1):
            mats.append([[[str(int(self.re[a, i, j])), str(int(self.im[a, i, j]))]
                          for j in range(self.n1)] for i in range(self.n1)])
        return {"n": self.n, "n1": self.n1, "eta": list(self.eta), "gammas": mats}


def spinor_dimension(n: int) -> int:
    if n < 1:
        raise ValueError(f"spatial dimension must be >= 1, got {n}")
    if n % 2 == 1:
        return 2 ** ((n + 1) // 2)
    return 2 * 2 ** (n // 2)


def _euclidean_generators(k: int):
    """2k Hermitian generators of Cl(2k) on C^(2^k), Jordan-Wigner style."""
    gens = []
    for j in range(k):
        left = [_Z] * j
        right = [_I2] * (k - j - 1)
        for p in (_X, _Y):
            gens.append(reduce(_kron, left + [p] + right, _eye(1)))
    return gens


def _chirality(gens):
    """Hermitian product of all 2k generators, squares to +I."""
    k = len(gens) // 2
    prod = reduce(_mul, gens)
    # (e_0 ... e_{2k-1})^2 = (-1)^k, so i^k fixes both the square and hermiticity
    phase = [(1, 0), (0, 1), (-1, 0), (0, -1)][k % 4]
    return _scale(prod, *phase)


def build_gamma(n: int, max_spinor_dim: int = MAX_SPINOR_DIM) -> GammaRep:
    """Dirac matrices for n spatial dimensions.

    Odd n uses the irreducible rep of dimension 2^((n+1)/2). Even n uses the
    direct sum of the two inequivalent irreps of dimension 2^(n/2): the first
    n generators are duplicated on both blocks and the last one is
    diag(C, -C) with C the chirality matrix of the first n.
    """
    n1 = spinor_dimension(n)
    if n1 > max_spinor_dim:
        raise ValueError(f"n={n} needs spinor dimension {n1} > cap {max_spinor_dim}")

    if n % 2 == 1:
        euclid = _euclidean_generators((n + 1) // 2)
    else:
        base = _euclidean_generators(n // 2)
        chi = _chirality(base)
        zero = (np.zeros_like(chi[0]), np.zeros_like(chi[0]))
        euclid = [_block_diag(g, g, zero) for g in base]
        euclid.append(_block_diag(chi, _scale(chi, -1, 0), zero))

    # gamma^0 = i e_0 is antihermitian with square -I
    gens = [_scale(euclid[0], 0, 1)] + euclid[1:]
    re = np.stack([g[0] for g in gens])
    im = np.stack([g[1] for g in gens])
    re.setflags(write=False)
    im.setflags(write=False)
    return GammaRep(n=n, n1=n1, re=re, im=im)


def _block_diag(a, b, zero):
    top = (np.hstack([a[0], zero[0]]), np.hstack([a[1], zero[1]]))
    bottom = (np.hstack([zero[0], b[0]]), np.hstack([zero[1], b[1]]))
    return (np.vstack([top[0], bottom[0]]), np.vstack([top[1], bottom[1]]))


def check_clifford(rep: GammaRep) -> list[str]:
    """List every violated anticommutator or hermiticity identity; empty if valid."""
    issues = []
    eye = _eye(rep.n1)
    eta = rep.eta
    for a in range(rep.n + 1):
        ga = rep.exact(a)
        for b in range(a, rep.n + 1):
            gb = rep.exact(b)
            anti = _add(_mul(ga, gb), _mul(gb, ga))
            target = _scale(eye, 2 * eta[a], 0) if a == b else _scale(eye, 0, 0)
            if not _is_zero(_add(anti, _scale(target, -1, 0))):
                issues.append(f"anticommutator ({a},{b}) != 2 eta^({a}{b}) I")
        dag = _dagger(ga)
        if a == 0:
            if not _is_zero(_add(dag, ga)):
                issues.append("gamma^0 is not antihermitian")
        elif not _is_zero(_add(dag, _scale(ga, -1, 0))):
            issues.append(f"gamma^{a} is not Hermitian")
    return issues


def lower_index(rep: GammaRep, a: int) -> np.ndarray:
    """gamma_a = eta_ab gamma^b as an exact integer-valued complex array."""
    if not 0 <= a <= rep.n:
        raise IndexError(f"index {a} outside 0..{rep.n}")
    sign = rep.eta[a]
    return sign * (rep.re[a] + 1j * rep.im[a])


def raise_index(rep: GammaRep, lowered: np.ndarray, a: int) -> np.ndarray:
    if not 0 <= a <= rep.n:
        raise IndexError(f"index {a} outside 0..{rep.n}")
    return rep.eta[a] * lowered


def conjugate_rep(rep: GammaRep, unitary: np.ndarray) -> np.ndarray:
    """Floating-point gammas U gamma^a U^dagger; preserves all invariants."""
    return np.einsum("ij,ajk,lk->ail", unitary, rep.gammas, unitary.conj())


def dump(rep: GammaRep, path) -> None:
    with open(path, "w") as fh:
        json.dump(rep.to_json(), fh, indent=1)
