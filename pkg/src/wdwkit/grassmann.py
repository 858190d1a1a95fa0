"""Exact finite Grassmann algebra P(chi) with left derivatives.

Basis monomials are stored as bitmasks over an ordered generator set; bit g
set means generator g is present, and the monomial is the ascending product.
Coefficients are exact sympy numbers (rationals, i, sqrt(2)).

The conjugate generator acts as the left derivative, and every polynomial
doubles as the operator "multiply from the left". With the Hermitian product
that makes the basis monomials orthonormal (antilinear in the first slot),
the derivative by chi_g is exactly the adjoint of multiplication by chi_g.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from numbers import Number

import numpy as np
import scipy.sparse as sp
import sympy

DEFAULT_GENERATOR_CAP = 12


@dataclass(frozen=True, order=True)
class GeneratorIndex:
    """chi^I_A at a lattice site; ordered lexicographically by (site, I, A)."""

    site: int
    I: int
    A: int

    def __str__(self) -> str:
        return f"chi[s{self.site},I{self.I},A{self.A}]"


class GeneratorSet:
    """Ordered, immutable collection of Grassmann generator labels."""

    def __init__(self, labels, cap: int | None = DEFAULT_GENERATOR_CAP):
        labels = tuple(labels)
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate generator labels")
        if cap is not None and len(labels) > cap:
            raise ValueError(f"{len(labels)} generators exceed the cap of {cap}")
        self.labels = labels
        self.cap = cap
        self._index = {lab: k for k, lab in enumerate(labels)}

    @classmethod
    def spinor(cls, n1: int, n2: int, sites: int = 1, cap: int | None = DEFAULT_GENERATOR_CAP):
        labels = sorted(GeneratorIndex(s, i, a) for s in range(sites)
                        for i in range(1, n2 + 1) for a in range(1, n1 + 1))
        return cls(labels, cap=cap)

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def __eq__(self, other) -> bool:
        return isinstance(other, GeneratorSet) and self.labels == other.labels

    def __hash__(self) -> int:
        return hash(self.labels)

    def position(self, label) -> int:
        if isinstance(label, (int, np.integer)) and label not in self._index:
            if not 0 <= label < len(self.labels):
                raise KeyError(label)
            return int(label)
        return self._index[label]

    @property
    def dim(self) -> int:
        return 2 ** len(self.labels)


def _popcount(x: int) -> int:
    return bin(x).count("1")


def _monomial_product(a: int, b: int) -> tuple[int, int]:
    """(sign, mask) of the product of two ascending monomials; sign 0 if they overlap."""
    if a & b:
        return 0, 0
    swaps = 0
    rest = b
    while rest:
        low = rest & -rest
        # generators of a that sit above this generator of b
        swaps += _popcount(a & ~((low << 1) - 1))
        rest ^= low
    return (-1 if swaps % 2 else 1), a | b


def _sign_below(mask: int, g: int) -> int:
    return -1 if _popcount(mask & ((1 << g) - 1)) % 2 else 1


def _clean(c):
    if isinstance(c, sympy.Basic) and not c.is_Number:
        c = sympy.expand(c)
    return c


def _to_exact(c):
    if isinstance(c, sympy.Basic):
        return c
    if isinstance(c, Fraction):
        return sympy.Rational(c.numerator, c.denominator)
    if isinstance(c, complex):
        return _to_exact(Fraction(c.real)) + sympy.I * _to_exact(Fraction(c.imag))
    if isinstance(c, float):
        return _to_exact(Fraction(c))
    return sympy.sympify(c)


class GrassmannPoly:
    """An element of P: a finite sum of coefficient * basis monomial."""

    __slots__ = ("gens", "terms")

    def __init__(self, gens: GeneratorSet, terms: dict | None = None):
        self.gens = gens
        cleaned = {}
        for mask, c in (terms or {}).items():
            c = _clean(_to_exact(c))
            if c != 0:
                cleaned[int(mask)] = c
        self.terms = cleaned

    @classmethod
    def one(cls, gens: GeneratorSet) -> "GrassmannPoly":
        return cls(gens, {0: 1})

    @classmethod
    def zero(cls, gens: GeneratorSet) -> "GrassmannPoly":
        return cls(gens, {})

    @classmethod
    def generator(cls, gens: GeneratorSet, label) -> "GrassmannPoly":
        return cls(gens, {1 << gens.position(label): 1})

    @classmethod
    def monomial(cls, gens: GeneratorSet, labels, coeff=1) -> "GrassmannPoly":
        """Product of the given generators in the order listed."""
        out = cls(gens, {0: coeff})
        for lab in labels:
            out = out * cls.generator(gens, lab)
        return out

    def _check(self, other: "GrassmannPoly"):
        if self.gens != other.gens:
            raise ValueError("polynomials live on different generator sets")

    def __add__(self, other):
        if not isinstance(other, GrassmannPoly):
            other = GrassmannPoly(self.gens, {0: other})
        self._check(other)
        terms = dict(self.terms)
        for m, c in other.terms.items():
            terms[m] = terms.get(m, 0) + c
        return GrassmannPoly(self.gens, terms)

    __radd__ = __add__

    def __neg__(self):
        return GrassmannPoly(self.gens, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, GrassmannPoly):
            c = _to_exact(other)
            return GrassmannPoly(self.gens, {m: c * v for m, v in self.terms.items()})
        return multiply(self, other)

    def __rmul__(self, other):
        c = _to_exact(other)
        return GrassmannPoly(self.gens, {m: c * v for m, v in self.terms.items()})

    def __eq__(self, other) -> bool:
        if not isinstance(other, GrassmannPoly):
            other = GrassmannPoly(self.gens, {0: other} if other != 0 else {})
        return self.gens == other.gens and (self - other).terms == {}

    def __hash__(self):
        return hash((self.gens, frozenset(self.terms.items())))

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m in sorted(self.terms, key=lambda k: (_popcount(k), k)):
            word = "*".join(str(self.gens.labels[g]) for g in range(len(self.gens)) if m >> g & 1)
            parts.append(f"({self.terms[m]}){'*' + word if word else ''}")
        return " + ".join(parts)

    def is_homogeneous(self) -> bool:
        return len({_popcount(m) for m in self.terms}) <= 1

    @property
    def degree(self) -> int:
        return max((_popcount(m) for m in self.terms), default=0)

    def conjugate_coefficients(self) -> "GrassmannPoly":
        return GrassmannPoly(self.gens, {m: sympy.conjugate(c) for m, c in self.terms.items()})

    def coefficient_vector(self) -> np.ndarray:
        vec = np.zeros(self.gens.dim, dtype=np.complex128)
        for m, c in self.terms.items():
            vec[m] = complex(c)
        return vec


def multiply(u: GrassmannPoly, v: GrassmannPoly) -> GrassmannPoly:
    """Grassmann product u*v."""
    u._check(v)
    terms: dict[int, object] = {}
    for a, ca in u.terms.items():
        for b, cb in v.terms.items():
            sign, m = _monomial_product(a, b)
            if sign:
                terms[m] = terms.get(m, 0) + sign * ca * cb
    return GrassmannPoly(u.gens, terms)


def left_derivative(g, u: GrassmannPoly) -> GrassmannPoly:
    """d/dchi_g acting from the left: move chi_g to the front, then drop it."""
    pos = u.gens.position(g)
    bit = 1 << pos
    terms = {}
    for m, c in u.terms.items():
        if m & bit:
            terms[m ^ bit] = _sign_below(m, pos) * c
    return GrassmannPoly(u.gens, terms)


def inner_product(u: GrassmannPoly, v: GrassmannPoly):
    """<u, v> with orthonormal monomials, antilinear in the first argument."""
    u._check(v)
    total = sympy.Integer(0)
    for m, c in v.terms.items():
        if m in u.terms:
            total += sympy.conjugate(u.terms[m]) * c
    return sympy.expand(total)


# --------------------------------------------------------------------------
# operators


def primitive_matrix(gens: GeneratorSet, kind: str, g) -> sp.csr_matrix:
    """Integer matrix of multiplication by chi_g ("mul") or d/dchi_g ("der")."""
    pos = gens.position(g)
    bit = 1 << pos
    dim = gens.dim
    cols = np.arange(dim, dtype=np.int64)
    if kind == "mul":
        keep = (cols & bit) == 0
        src = cols[keep]
        dst = src | bit
    elif kind == "der":
        keep = (cols & bit) != 0
        src = cols[keep]
        dst = src ^ bit
    else:
        raise ValueError(f"unknown primitive {kind!r}")
    below = src & (bit - 1)
    parity = np.zeros_like(below)
    for shift in range(pos):
        parity ^= (below >> shift) & 1
    signs = 1 - 2 * parity
    return sp.csr_matrix((signs, (dst, src)), shape=(dim, dim), dtype=np.int64)


class GrassmannOp:
    """Linear operator on P built as a tree over multiplication, left
    derivative, scalars, sums and products (composition, right factor acts first)."""

    def __init__(self, gens: GeneratorSet, kind: str, value=None, children=()):
        self.gens = gens
        self.kind = kind
        self.value = value
        self.children = tuple(children)
        for ch in self.children:
            if ch.gens != gens:
                raise ValueError("operators live on different generator sets")

    @classmethod
    def mul(cls, gens, g):
        return cls(gens, "mul", gens.position(g))

    @classmethod
    def der(cls, gens, g):
        return cls(gens, "der", gens.position(g))

    @classmethod
    def scalar(cls, gens, c):
        return cls(gens, "scalar", c)

    @classmethod
    def identity(cls, gens):
        return cls.scalar(gens, 1)

    def __add__(self, other):
        return GrassmannOp(self.gens, "sum", children=(self, other))

    def __sub__(self, other):
        return self + (-1) * other

    def __matmul__(self, other):
        return GrassmannOp(self.gens, "prod", children=(self, other))

    def __rmul__(self, c):
        return GrassmannOp.scalar(self.gens, c) @ self

    def apply(self, u: GrassmannPoly) -> GrassmannPoly:
        k = self.kind
        if k == "scalar":
            return _to_exact(self.value) * u
        if k == "mul":
            return GrassmannPoly.generator(self.gens, self.value) * u
        if k == "der":
            return left_derivative(self.value, u)
        if k == "sum":
            return self.children[0].apply(u) + self.children[1].apply(u)
        return self.children[0].apply(self.children[1].apply(u))

    def adjoint(self) -> "GrassmannOp":
        k = self.kind
        if k == "scalar":
            v = self.value
            v = sympy.conjugate(v) if isinstance(v, sympy.Basic) else complex(v).conjugate()
            return GrassmannOp.scalar(self.gens, v)
        if k == "mul":
            return GrassmannOp(self.gens, "der", self.value)
        if k == "der":
            return GrassmannOp(self.gens, "mul", self.value)
        if k == "sum":
            return self.children[0].adjoint() + self.children[1].adjoint()
        return self.children[1].adjoint() @ self.children[0].adjoint()

    @cached_property
    def _matrix(self) -> sp.csr_matrix:
        k = self.kind
        dim = self.gens.dim
        if k == "scalar":
            return complex(self.value) * sp.identity(dim, dtype=np.complex128, format="csr")
        if k in ("mul", "der"):
            return primitive_matrix(self.gens, k, self.value).astype(np.complex128)
        a, b = (ch._matrix for ch in self.children)
        return (a + b) if k == "sum" else (a @ b)


def operator_matrix(op: GrassmannOp, exact: bool = False):
    """Matrix of ``op`` in the monomial basis ordered by bitmask.

    Column j is the coefficient vector of op applied to basis monomial j.
    ``exact=True`` evaluates through polynomial arithmetic and returns a
    sympy sparse matrix; otherwise a dense complex numpy array.
    """
    gens = op.gens
    if gens.cap is not None and len(gens) > gens.cap:
        raise ValueError("generator count exceeds cap")
    if not exact:
        return op._matrix.toarray()
    entries = {}
    for j in range(gens.dim):
        col = op.apply(GrassmannPoly(gens, {j: 1}))
        for i, c in col.terms.items():
            entries[(i, j)] = c
    return sympy.SparseMatrix(gens.dim, gens.dim, entries)


def bilinear_operator(gens: GeneratorSet, matrix, exact: bool = False) -> GrassmannOp:
    """sum_gh M_gh (d/dchi_g)(chi_h .), the quantized form of chibar M chi.

    Factors are kept in the written order: the conjugate generator (left
    derivative) to the left of chi. With ``exact`` the entries are converted
    to exact rationals first (Fraction of the binary float).
    """
    m = np.asarray(matrix)
    n = len(gens)
    if m.shape != (n, n):
        raise ValueError(f"matrix shape {m.shape} does not match {n} generators")
    op = None
    for g in range(n):
        for h in range(n):
            c = complex(m[g, h])
            if c == 0:
                continue
            val = _to_exact(c) if exact else c
            term = GrassmannOp.scalar(gens, val) @ (GrassmannOp.der(gens, g) @ GrassmannOp.mul(gens, h))
            op = term if op is None else op + term
    return op if op is not None else GrassmannOp.scalar(gens, 0)


def car_check(gens: GeneratorSet | int) -> list[dict]:
    """Exact verification of the canonical anticommutation relations.

    Checks, for every pair of generators, {d_g, chi_h} = delta_gh,
    {chi_g, chi_h} = 0, {d_g, d_h} = 0 and that d_g is the conjugate
    transpose of chi_g, all in integer arithmetic.
    """
    if isinstance(gens, int):
        gens = GeneratorSet(range(gens))
    n = len(gens)
    dim = gens.dim
    mul = [primitive_matrix(gens, "mul", g) for g in range(n)]
    der = [primitive_matrix(gens, "der", g) for g in range(n)]
    eye = sp.identity(dim, dtype=np.int64, format="csr")

    def worst(m) -> int:
        m = sp.csr_matrix(m)
        return int(abs(m.data).max()) if m.nnz else 0

    viol = {"der_mul": 0, "mul_mul": 0, "der_der": 0, "adjoint": 0}
    for g in range(n):
        viol["adjoint"] = max(viol["adjoint"], worst(der[g] - mul[g].T))
        for h in range(n):
            target = eye if g == h else 0 * eye
            viol["der_mul"] = max(viol["der_mul"], worst(der[g] @ mul[h] + mul[h] @ der[g] - target))
            if h >= g:
                viol["mul_mul"] = max(viol["mul_mul"], worst(mul[g] @ mul[h] + mul[h] @ mul[g]))
                viol["der_der"] = max(viol["der_der"], worst(der[g] @ der[h] + der[h] @ der[g]))
    names = {
        "der_mul": "{d_g, chi_h} = delta_gh I",
        "mul_mul": "{chi_g, chi_h} = 0",
        "der_der": "{d_g, d_h} = 0",
        "adjoint": "d_g = (chi_g)^*",
    }
    return [{"identity": names[k], "status": "pass" if v == 0 else "fail", "max_violation": v}
            for k, v in viol.items()]


def real_imag_identity_check(n1: int, n2: int) -> dict:
    """Expand both sides of the real/imaginary rewriting of the fermionic
    kinetic term and compare them as exact polynomials.

    chi = (xi + i eta)/sqrt2, chibar = (xi - i eta)/sqrt2, likewise for the
    dotted partners, which are adjoined as independent generators.
    """
    pairs = [(i, a) for i in range(1, n2 + 1) for a in range(1, n1 + 1)]
    labels = []
    for i, a in pairs:
        labels += [("xi", i, a), ("eta", i, a), ("xidot", i, a), ("etadot", i, a)]
    gens = GeneratorSet(labels, cap=None)
    r2 = sympy.sqrt(2)
    I = sympy.I

    def g(name, i, a):
        return GrassmannPoly.generator(gens, (name, i, a))

    lhs = GrassmannPoly.zero(gens)
    rhs = GrassmannPoly.zero(gens)
    for i, a in pairs:
        xi, eta, xid, etad = g("xi", i, a), g("eta", i, a), g("xidot", i, a), g("etadot", i, a)
        chi = (xi + I * eta) * (1 / r2)
        chibar = (xi - I * eta) * (1 / r2)
        chidot = (xid + I * etad) * (1 / r2)
        chidotbar = (xid - I * etad) * (1 / r2)
        lhs = lhs + (I / 2) * (chibar * chidot - chidotbar * chi)
        rhs = rhs + (I / 2) * (xi * xid + eta * etad)
        # back-substitution must return the real generators
        if (chi + chibar) * (1 / r2) != xi or (chi - chibar) * (1 / (r2 * I)) != eta:
            return {"identity": "real/imaginary substitution", "status": "fail",
                    "difference": "back-substitution is not the identity"}
    diff = lhs - rhs
    return {
        "identity": "real/imaginary rewriting of the kinetic term",
        "status": "pass" if not diff.terms else "fail",
        "difference": repr(diff),
        "lhs": repr(lhs),
    }


def rotate_generators(gens: GeneratorSet, unitary) -> list[GrassmannPoly]:
    """chi'_g = sum_h U_gh chi_h for an exact (e.g. rational) unitary U."""
    n = len(gens)
    out = []
    for g in range(n):
        p = GrassmannPoly.zero(gens)
        for h in range(n):
            c = unitary[g][h]
            if c != 0:
                p = p + _to_exact(c) * GrassmannPoly.generator(gens, h)
        out.append(p)
    return out


def monomial_basis(gens: GeneratorSet, generators: list[GrassmannPoly] | None = None) -> list[GrassmannPoly]:
    """All ordered products of the given generators (default: chi_g), indexed by bitmask."""
    if generators is None:
        generators = [GrassmannPoly.generator(gens, g) for g in range(len(gens))]
    basis = []
    for mask in range(gens.dim):
        p = GrassmannPoly.one(gens)
        for g in range(len(gens)):
            if mask >> g & 1:
                p = p * generators[g]
        basis.append(p)
    return basis
