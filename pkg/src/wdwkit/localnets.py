"""Local algebras over lattice regions and desk-scale checks of the
Haag-Kastler axioms (isotony, causality, second causality) plus a
primitivity surrogate.

An algebra is represented by its generating family: Weyl operators of the
dictionary fields supported in the region. All checks are relations between
generators, evaluated through omega and the truncated Fock space.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import connected_components

from . import ccr
from . import hyperbolic as hyp

DEFAULT_FIELD_NORM = 0.02


@dataclass(frozen=True)
class Region:
    """Union of inclusive cell boxes (t0, t1, x0, x1)."""

    boxes: tuple

    @classmethod
    def box(cls, t0: int, t1: int, x0: int, x1: int) -> "Region":
        return cls(((int(t0), int(t1), int(x0), int(x1)),))

    @classmethod
    def physical(cls, lat: hyp.LatticeFiber, t0: float, t1: float, x0: float, x1: float) -> "Region":
        """Box of all cells whose coordinates fall in [t0, t1] x [x0, x1]."""
        ti = np.flatnonzero((lat.t >= t0 - 1e-12) & (lat.t <= t1 + 1e-12))
        xi = np.flatnonzero((lat.x >= x0 - 1e-12) & (lat.x <= x1 + 1e-12))
        if ti.size == 0 or xi.size == 0:
            raise ValueError("physical box contains no lattice cells")
        return cls.box(ti[0], ti[-1], xi[0], xi[-1])

    @classmethod
    def from_spec(cls, spec) -> "Region":
        if isinstance(spec, dict):
            spec = spec["boxes"]
        if spec and isinstance(spec[0], (int, np.integer)):
            spec = [spec]
        return cls(tuple(tuple(int(v) for v in b) for b in spec))

    def __post_init__(self):
        if not self.boxes:
            raise ValueError("region must be nonempty")
        for t0, t1, x0, x1 in self.boxes:
            if t0 > t1 or x0 > x1:
                raise ValueError(f"empty box {(t0, t1, x0, x1)}")

    def mask(self, lat: hyp.LatticeFiber) -> np.ndarray:
        m = np.zeros((lat.Nt, lat.Nx), dtype=bool)
        for t0, t1, x0, x1 in self.boxes:
            if t0 < 0 or x0 < 0 or t1 >= lat.Nt or x1 >= lat.Nx:
                raise ValueError(f"box {(t0, t1, x0, x1)} is outside the lattice")
            m[t0:t1 + 1, x0:x1 + 1] = True
        return m

    def within_margins(self, lat: hyp.LatticeFiber) -> bool:
        return all(t0 >= hyp.MARGIN_ROWS and t1 <= lat.Nt - 1 - hyp.MARGIN_ROWS
                   for t0, t1, _, _ in self.boxes)

    def subset_of(self, other: "Region", lat: hyp.LatticeFiber) -> bool:
        a, b = self.mask(lat), other.mask(lat)
        return bool(np.all(b[a]))


@dataclass
class DictionaryField:
    name: str
    values: np.ndarray

    def support(self) -> np.ndarray:
        v = np.abs(self.values)
        return v.any(axis=2) if v.ndim == 3 else v > 0


@dataclass
class Dictionary:
    fields: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.fields)

    def __iter__(self):
        return iter(self.fields)

    def __add__(self, other: "Dictionary") -> "Dictionary":
        return Dictionary(list(self.fields) + list(other.fields))

    def generators(self, region: Region, lat: hyp.LatticeFiber) -> list[str]:
        """Names of the fields supported inside the region."""
        m = region.mask(lat)
        return [f.name for f in self.fields if not np.any(f.support() & ~m)]

    def get(self, name: str) -> DictionaryField:
        for f in self.fields:
            if f.name == name:
                return f
        raise KeyError(name)

    @classmethod
    def bumps(cls, lat: hyp.LatticeFiber, region: Region, per_axis: tuple = (4, 4), prefix: str = "",
              row: int | None = None, target_norm: float | None = DEFAULT_FIELD_NORM) -> "Dictionary":
        """Tensor-product bump fields centred on a grid inside each box of the region.

        With ``target_norm`` each field is scaled so that its Cauchy datum on
        ``row`` has that norm, which keeps Fock truncation effects small.
        """
        fields = []
        row = row if row is not None else lat.cauchy_rows[len(lat.cauchy_rows) // 2]
        for bi, (t0, t1, x0, x1) in enumerate(region.boxes):
            T0, T1 = lat.t[t0], lat.t[t1]
            X0, X1 = lat.x[x0], lat.x[x1]
            nt, nx = per_axis
            rt = 0.3 * (T1 - T0)
            rx = 0.3 * (X1 - X0)
            for i, ft in enumerate(np.linspace(0.3, 0.7, nt)):
                for j, fx in enumerate(np.linspace(0.3, 0.7, nx)):
                    tc = T0 + ft * (T1 - T0)
                    xc = X0 + fx * (X1 - X0)
                    vals = hyp.bump(lat, tc, xc, rt, rx)
                    # no wrap-around: the bump must lie inside the box
                    vals = vals * region.mask(lat)[..., None] if vals.ndim == 3 else vals * region.mask(lat)
                    if target_norm is not None:
                        f = ccr.cauchy_vector(lat, vals, row)
                        nrm = np.sqrt(np.sum(np.repeat(lat.row_weight, lat.fiber_dim) * np.abs(f) ** 2))
                        if nrm > 0:
                            vals = vals * (target_norm / nrm)
                    fields.append(DictionaryField(f"{prefix}b{bi}_{i}{j}", vals))
        return cls(fields)

    @classmethod
    def trig(cls, lat: hyp.LatticeFiber, profiles=((0.8, 0.4), (1.2, 0.5)), kmax: int = 4,
             modes=None, amplitude: float = 0.1) -> "Dictionary":
        """Trigonometric fields tau(t) cos/sin(2 pi k x / L) for each time profile."""
        fields = []
        for pi, (t0, rt) in enumerate(profiles):
            for k in range(1, kmax + 1):
                for kind in ("cos", "sin"):
                    if modes is not None and (k, kind) not in modes:
                        continue
                    vals = hyp.trig_field(lat, t0, rt, k, kind, amplitude=amplitude)
                    fields.append(DictionaryField(f"p{pi}_{kind}{k}", vals))
        return cls(fields)


# --------------------------------------------------------------------------
# causal predicates


def causal_hull(lat: hyp.LatticeFiber, region: Region, halo: int = 2) -> np.ndarray:
    jp, jm = hyp.causal_sets(lat, region.mask(lat), halo=halo)
    return jp | jm


def spacelike_separated(lat: hyp.LatticeFiber, r1: Region, r2: Region, halo: int = 2) -> bool:
    """No discrete causal curve (halo-inclusive) joins the two regions."""
    return not (np.any(causal_hull(lat, r1, halo) & r2.mask(lat))
                or np.any(causal_hull(lat, r2, halo) & r1.mask(lat)))


# --------------------------------------------------------------------------
# axioms


def axiom1_isotony_check(lat: hyp.LatticeFiber, r1: Region, r2: Region, dictionary: Dictionary) -> dict:
    if not r1.subset_of(r2, lat):
        raise ValueError("isotony needs r1 contained in r2")
    g1 = set(dictionary.generators(r1, lat))
    g2 = set(dictionary.generators(r2, lat))
    return {"pass": g1 <= g2, "n_small": len(g1), "n_large": len(g2), "strict": g1 < g2}


def axiom3_causality_check(lat: hyp.LatticeFiber, r1: Region, r2: Region, dictionary: Dictionary,
                           row: int | None = None, N_max: int = 6, tol: float = 1e-6,
                           require_spacelike: bool = True, weyl: bool = True) -> dict:
    """omega and Weyl commutators over all generator pairs of two regions."""
    if require_spacelike and not spacelike_separated(lat, r1, r2):
        raise ValueError("regions are not spacelike separated")
    row = row if row is not None else lat.cauchy_rows[len(lat.cauchy_rows) // 2]
    g1 = [dictionary.get(n) for n in dictionary.generators(r1, lat)]
    g2 = [dictionary.get(n) for n in dictionary.generators(r2, lat)]
    if not g1 or not g2:
        raise ValueError("a region has no dictionary generators")
    weights = np.repeat(lat.row_weight, lat.fiber_dim)

    def row_inner(f, g):
        return complex(np.sum(weights * np.conj(f) * g))

    G2 = {f.name: hyp.green_apply(lat, f.values) for f in g2}
    cv = {f.name: ccr.cauchy_vector(lat, f.values, row) for f in g2} if weyl else {}
    max_omega = 0.0
    max_comm = 0.0
    for fu in g1:
        cu = ccr.cauchy_vector(lat, fu.values, row) if weyl else None
        for fv in g2:
            om = float(np.real(hyp.inner(lat, fu.values, G2[fv.name])))
            max_omega = max(max_omega, abs(om))
            if weyl:
                res = ccr.pair_weyl_check(row_inner, cu, cv[fv.name], om, N_max=N_max)
                max_comm = max(max_comm, res["commutation"])
    return {"max_abs_omega": max_omega, "max_weyl_commutator": max_comm, "pairs": len(g1) * len(g2),
            "tolerance": tol, "pass": max_omega <= tol and max_comm <= tol}


def smooth_step(s: np.ndarray) -> np.ndarray:
    s = np.clip(s, 0.0, 1.0)
    return s ** 3 * (10 - 15 * s + 6 * s * s)


def axiom4_second_causality_check(lat: hyp.LatticeFiber, r_dep: Region, r_src: Region, row: int, u,
                                  width: int = 4, halo: int = 2) -> dict:
    """Rebuild Gu from a source localized near the Cauchy row.

    With psi = Gu and a smooth step theta equal to 0 in the past of the row
    and 1 in its future, v = H(theta psi) is supported in a strip around the
    row and satisfies Gv = Gu.
    """
    u = hyp.as_field(lat, u)
    supp = np.abs(u).any(axis=2)
    if np.any(supp & ~r_dep.mask(lat)):
        raise ValueError("u is not supported in the dependent region")
    lo, hi = row - width // 2 - 1, row + width // 2 + 1
    if lo < hyp.MARGIN_ROWS or hi > lat.Nt - 1 - hyp.MARGIN_ROWS:
        raise ValueError("cutoff strip leaves the lattice margins")
    # every causal curve through r_dep must cross the strip inside r_src
    jp, jm = hyp.causal_sets(lat, r_dep.mask(lat), halo=halo)
    shadow = (jp | jm)
    strip = np.zeros_like(shadow)
    strip[lo:hi + 1] = True
    need = shadow & strip
    src = r_src.mask(lat)
    if np.any(need & ~src):
        raise ValueError("dependent region is not in the domain of dependence of the source region")
    psi = hyp.green_apply(lat, u)
    theta = smooth_step((np.arange(lat.Nt) - (row - width / 2)) / width)
    v = hyp.apply_H(lat, theta[:, None, None] * psi)
    v[:lo] = 0
    v[hi + 1:] = 0
    vsupp = np.abs(v).any(axis=2)
    Gv = hyp.green_apply(lat, v)
    diff = np.abs(Gv - psi)
    scale = max(np.abs(psi).max(), 1e-300)
    return {"v": v, "residual": float(diff.max()), "relative_residual": float(diff.max() / scale),
            "residual_future": float(diff[row:].max()), "support_ok": bool(not np.any(vsupp & ~src)),
            "gu_norm": float(np.abs(psi).max())}


# --------------------------------------------------------------------------
# primitivity surrogate


def compressed_fields(space: ccr.OneParticleSpace, fock: ccr.FockSpace, lat: hyp.LatticeFiber,
                      dictionary: Dictionary) -> list[np.ndarray]:
    idx = fock.safe_indices()
    out = []
    for f in dictionary:
        phi = ccr.quantum_field(lat, space, fock, f.values, space.row)
        out.append(ccr.restrict(phi, idx))
    return out


def commutant_dimension(gens: list[np.ndarray], dim: int | None = None, rng: np.random.Generator | None = None,
                        tol: float = 1e-8) -> dict:
    """Dimension of the commutant of the *-algebra generated by Hermitian matrices.

    A generic Hermitian element B of the algebra is diagonalized; the algebra
    is a direct sum of full matrix blocks, each showing up as eigenvalue
    clusters of a common multiplicity m linked by nonzero generator blocks.
    The commutant has dimension sum m^2 over the linked components.
    """
    if not gens:
        if dim is None:
            raise ValueError("dimension needed for an empty generating set")
        return {"commutant_dimension": dim * dim, "components": 0, "multiplicities": [dim]}
    rng = rng or np.random.default_rng(0)
    d = gens[0].shape[0]
    B = np.zeros((d, d), dtype=complex)
    for G in gens:
        B += rng.normal() * G
    k = len(gens)
    pairs = [(i, j) for i in range(k) for j in range(i, k)]
    for i, j in pairs:
        P = gens[i] @ gens[j]
        B += rng.normal() * (P + P.conj().T)
    B = 0.5 * (B + B.conj().T)
    ev, V = np.linalg.eigh(B)
    spread = max(ev.max() - ev.min(), 1e-300)
    cuts = np.flatnonzero(np.diff(ev) > tol * spread)
    labels = np.zeros(d, dtype=int)
    for c in cuts:
        labels[c + 1:] += 1
    ncl = labels[-1] + 1
    S = np.zeros((d, ncl))
    S[np.arange(d), labels] = 1.0
    adj = np.zeros((ncl, ncl), dtype=bool)
    for G in gens:
        M = np.abs(V.conj().T @ G @ V)
        blk = S.T @ M @ S
        adj |= blk > tol * max(np.abs(G).max(), 1e-300) * d
    ncomp, comp = connected_components(adj, directed=False)
    mult = np.bincount(labels)
    dims = []
    consistent = True
    for c in range(ncomp):
        ms = mult[comp == c]
        consistent &= bool(np.all(ms == ms[0]))
        dims.append(int(ms[0]))
    return {"commutant_dimension": int(sum(m * m for m in dims)), "components": int(ncomp),
            "multiplicities": dims, "consistent": consistent, "clusters": int(ncl)}


def commutant_dimension_linear(gens: list[np.ndarray], tol: float = 1e-9) -> int:
    """Null-space dimension of X -> ([G_k, X])_k; dense, for small matrices only."""
    d = gens[0].shape[0]
    eye = np.eye(d)
    rows = [np.kron(G, eye) - np.kron(eye, G.T) for G in gens]
    A = np.vstack(rows)
    s = np.linalg.svd(A, compute_uv=False)
    return int(np.sum(s <= tol * max(s.max(), 1.0))) + max(0, d * d - s.size)


def axiom2_primitivity_surrogate(lat: hyp.LatticeFiber, space: ccr.OneParticleSpace, dictionary: Dictionary,
                                 N_max: int = 6, rng: np.random.Generator | None = None,
                                 fock: ccr.FockSpace | None = None) -> dict:
    fock = fock or ccr.FockSpace(space.dim, N_max)
    safe = fock.safe_indices().size
    gens = compressed_fields(space, fock, lat, dictionary)
    res = commutant_dimension(gens, dim=safe, rng=rng)
    res.update({"safe_dim": int(safe), "generators": len(gens), "trivial": res["commutant_dimension"] == 1})
    return res
