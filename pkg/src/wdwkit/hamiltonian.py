"""The four Hamilton functions, their Legendre round trips, the quantized Dirac
operator on the Grassmann algebra and the discrete Wheeler-DeWitt operator.

Closed-form Hamiltonians H are densities without the lapse; the Legendre
transform of the corresponding Lagrangian gives H * w.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import geometry as geo
from . import grassmann as gr
from . import hyperbolic as hyp


def higgs_potential(lam: float = 1.0, v: float = 1.0) -> Callable[[np.ndarray, np.ndarray], float]:
    """V(Phi) = lam (|Phi|^2 - v^2)^2 with |Phi|^2 measured by the doubled metric."""

    def V(theta: np.ndarray, gamma2: np.ndarray) -> float:
        norm2 = float(theta @ gamma2 @ theta)
        return lam * (norm2 - v * v) ** 2

    return V


@dataclass
class FiberPoint:
    """A point of the fiber with conjugate momenta in all bosonic sectors.

    xi are metric coordinates g_ij on the pair basis i <= j, with momenta pi
    in the same basis. zeta holds Yang-Mills coordinates (p = (a, i)) and
    theta the doubled real Higgs coordinates.
    """

    n: int
    xi: np.ndarray
    pi: np.ndarray
    ym: geo.YangMillsData
    zeta: np.ndarray | None = None
    pi_zeta: np.ndarray | None = None
    theta: np.ndarray | None = None
    p_theta: np.ndarray | None = None
    w: float = 1.0
    Lambda: float = 0.0
    R: float = 0.0
    F: np.ndarray | None = None  # F[a, i, j], antisymmetric in (i, j)
    gradPhi: np.ndarray | None = None  # gradPhi[a, i] over the doubled index a
    V: Callable | None = None
    rho: np.ndarray | None = None

    def __post_init__(self):
        n, n0 = self.n, self.ym.n0
        m1 = n * (n + 1) // 2
        self.xi = np.asarray(self.xi, dtype=float)
        self.pi = np.asarray(self.pi, dtype=float)
        if self.xi.shape != (m1,) or self.pi.shape != (m1,):
            raise ValueError(f"gravity coordinates need {m1} entries")
        defaults = {"zeta": (n0 * n,), "pi_zeta": (n0 * n,), "theta": (2 * n0,), "p_theta": (2 * n0,),
                    "F": (n0, n, n), "gradPhi": (2 * n0, n)}
        for name, shape in defaults.items():
            val = getattr(self, name)
            val = np.zeros(shape) if val is None else np.asarray(val, dtype=float)
            if val.shape != shape:
                raise ValueError(f"{name} has shape {val.shape}, expected {shape}")
            setattr(self, name, val)
        if not np.allclose(self.F, -np.swapaxes(self.F, 1, 2)):
            raise ValueError("F must be antisymmetric in its spatial indices")
        if self.w <= 0:
            raise ValueError("lapse must be positive")
        if self.rho is None:
            self.rho = np.eye(n)
        if self.V is None:
            self.V = higgs_potential()

    @property
    def g(self) -> np.ndarray:
        return geo.pair_to_sym(self.xi, self.n)

    @property
    def phi(self) -> float:
        return geo.phi(self.g, self.rho)

    @property
    def gamma2(self) -> np.ndarray:
        """Doubled Lie-algebra metric on the real Higgs coordinates."""
        n0 = self.ym.n0
        out = np.zeros((2 * n0, 2 * n0))
        out[:n0, :n0] = self.ym.gamma
        out[n0:, n0:] = self.ym.gamma
        return out


def _inv(m: np.ndarray, what: str) -> np.ndarray:
    if m.size == 0:
        return m
    if np.linalg.cond(m) > 1e14:
        raise ValueError(f"singular {what}")
    return np.linalg.inv(m)


# --------------------------------------------------------------------------
# closed forms


def h_gravity(p: FiberPoint, G: geo.DeWittTensor | None = None, phi: float | None = None,
              alphaN: float = 1.0, with_lapse: bool = False) -> float:
    """alphaN phi^-1 G^{rs} pi_r pi_s - alphaN^-1 (R - 2 Lambda) phi."""
    G = geo.dewitt(p.g) if G is None else G
    phi = p.phi if phi is None else phi
    Ginv = _inv(G.flat, "DeWitt matrix")
    val = alphaN / phi * p.pi @ Ginv @ p.pi - (p.R - 2 * p.Lambda) * phi / alphaN
    return float(val * p.w) if with_lapse else float(val)


def field_strength_squared(p: FiberPoint) -> float:
    """F_ij F^ij = gamma_ab g^ik g^jl F^a_ij F^b_kl."""
    if p.ym.n0 == 0:
        return 0.0
    gi = np.linalg.inv(p.g)
    return float(np.einsum("ab,ik,jl,aij,bkl->", p.ym.gamma, gi, gi, p.F, p.F))


def h_yangmills(p: FiberPoint, Gpq: np.ndarray | None = None, phi: float | None = None,
                with_lapse: bool = False) -> float:
    """1/2 phi^-1 G^{pq} pi_p pi_q + 1/4 F_ij F^ij phi."""
    if p.ym.n0 == 0:
        return 0.0
    Gpq = geo.yang_mills_block(p.g, p.ym) if Gpq is None else Gpq
    phi = p.phi if phi is None else phi
    val = 0.5 / phi * p.pi_zeta @ _inv(Gpq, "Yang-Mills metric") @ p.pi_zeta + 0.25 * field_strength_squared(p) * phi
    return float(val * p.w) if with_lapse else float(val)


def higgs_gradient_energy(p: FiberPoint) -> float:
    """g^ij gamma_ab Phi^a_i Phi^b_j."""
    gi = np.linalg.inv(p.g)
    return float(np.einsum("ij,ab,ai,bj->", gi, p.gamma2, p.gradPhi, p.gradPhi))


def h_higgs(p: FiberPoint, phi: float | None = None, with_lapse: bool = False) -> float:
    """1/2 phi^-1 gamma^ab p_a p_b + 1/2 g^ij gamma_ab Phi^a_i Phi^b_j phi + V phi."""
    if p.ym.n0 == 0:
        return 0.0
    phi = p.phi if phi is None else phi
    g2 = p.gamma2
    val = (0.5 / phi * p.p_theta @ np.linalg.inv(g2) @ p.p_theta
           + 0.5 * higgs_gradient_energy(p) * phi + p.V(p.theta, g2) * phi)
    return float(val * p.w) if with_lapse else float(val)


# --------------------------------------------------------------------------
# Lagrangians (functions of the velocities at fixed coordinates)


def lagrangian_gravity(p: FiberPoint, xidot: np.ndarray, alphaN: float = 1.0) -> float:
    """alphaN^-1 { 1/4 G_rs xidot^r xidot^s w^-1 phi + (R - 2 Lambda) w phi }."""
    G = geo.dewitt(p.g).flat
    phi = p.phi
    return float((0.25 * xidot @ G @ xidot * phi / p.w + (p.R - 2 * p.Lambda) * p.w * phi) / alphaN)


def lagrangian_yangmills(p: FiberPoint, zetadot: np.ndarray) -> float:
    Gpq = geo.yang_mills_block(p.g, p.ym)
    phi = p.phi
    return float(0.5 * zetadot @ Gpq @ zetadot * phi / p.w - 0.25 * field_strength_squared(p) * p.w * phi)


def lagrangian_higgs(p: FiberPoint, thetadot: np.ndarray) -> float:
    phi = p.phi
    g2 = p.gamma2
    pot = 0.5 * higgs_gradient_energy(p) + p.V(p.theta, g2)
    return float(0.5 * thetadot @ g2 @ thetadot * phi / p.w - pot * p.w * phi)


def legendre_roundtrip(L: Callable[[np.ndarray], float], H: Callable[[np.ndarray], float],
                       qdot: np.ndarray, step: float = 1e-4) -> tuple[float, np.ndarray]:
    """|H(p) - (p . qdot - L(qdot))| with p = dL/dqdot by central differences."""
    if step < 1e-10:
        raise ValueError("finite-difference step underflow")
    qdot = np.asarray(qdot, dtype=float)
    p = np.empty_like(qdot)
    for i in range(qdot.size):
        e = np.zeros_like(qdot)
        e[i] = step
        p[i] = (L(qdot + e) - L(qdot - e)) / (2 * step)
    return abs(H(p) - (p @ qdot - L(qdot))), p


def _with(p: FiberPoint, **kw) -> FiberPoint:
    data = {k: getattr(p, k) for k in ("n", "xi", "pi", "ym", "zeta", "pi_zeta", "theta", "p_theta",
                                       "w", "Lambda", "R", "F", "gradPhi", "V", "rho")}
    data.update(kw)
    return FiberPoint(**data)


def sector_roundtrip(sector: str, p: FiberPoint, velocity: np.ndarray, alphaN: float = 1.0,
                     step: float = 1e-4) -> float:
    """Legendre residual of one sector at the point's coordinates and a given velocity."""
    if sector == "gravity":
        L = lambda v: lagrangian_gravity(p, v, alphaN)
        H = lambda mom: h_gravity(_with(p, pi=mom), alphaN=alphaN, with_lapse=True)
    elif sector == "ym":
        L = lambda v: lagrangian_yangmills(p, v)
        H = lambda mom: h_yangmills(_with(p, pi_zeta=mom), with_lapse=True)
    elif sector == "higgs":
        L = lambda v: lagrangian_higgs(p, v)
        H = lambda mom: h_higgs(_with(p, p_theta=mom), with_lapse=True)
    else:
        raise ValueError(f"unknown sector {sector!r}")
    return legendre_roundtrip(L, H, velocity, step)[0]


def random_spd(rng: np.random.Generator, n: int, spread: float = 0.5) -> np.ndarray:
    a = rng.normal(size=(n, n))
    return np.eye(n) + spread * (a @ a.T) / n


def random_point(rng: np.random.Generator, n: int, ym: geo.YangMillsData) -> FiberPoint:
    """Random fiber point with an antisymmetric field strength and positive lapse."""
    g = random_spd(rng, n)
    n0 = ym.n0
    F = rng.normal(size=(n0, n, n))
    F = F - np.swapaxes(F, 1, 2)
    return FiberPoint(n=n, xi=geo.sym_to_pair(g), pi=rng.normal(size=n * (n + 1) // 2), ym=ym,
                      zeta=rng.normal(size=n0 * n), pi_zeta=rng.normal(size=n0 * n),
                      theta=0.5 * rng.normal(size=2 * n0), p_theta=rng.normal(size=2 * n0),
                      w=float(rng.uniform(0.5, 2.0)), Lambda=float(rng.normal()), R=float(rng.normal()),
                      F=F, gradPhi=rng.normal(size=(2 * n0, n)), rho=random_spd(rng, n))


# --------------------------------------------------------------------------
# Dirac sector


@dataclass
class DiracHamiltonianData:
    """One-particle matrix M on index (site, I, A) and its quantization on the Grassmann algebra."""

    one_particle: np.ndarray
    m: float
    gens: gr.GeneratorSet | None = None
    fock_op: gr.GrassmannOp | None = None
    hermitian_defect: float = 0.0
    extra: dict = field(default_factory=dict)

    def fock_matrix(self) -> np.ndarray:
        return gr.operator_matrix(self.fock_op)

    def self_adjoint_residual(self) -> float:
        F = self.fock_matrix()
        return float(np.abs(F - F.conj().T).max())

    def exact_self_adjoint(self) -> bool:
        """Self-adjointness after rationalizing M and using exact Grassmann arithmetic."""
        Mq = 0.5 * (self.one_particle + self.one_particle.conj().T)
        op = gr.bilinear_operator(self.gens, Mq, exact=True)
        E = gr.operator_matrix(op, exact=True)
        return (E - E.H).is_zero_matrix

    def expectation(self, state: np.ndarray) -> float:
        F = self.fock_matrix()
        state = np.asarray(state, dtype=complex)
        return float(np.real(state.conj() @ F @ state) / np.real(state.conj() @ state))


def _gamma_array(gamma) -> np.ndarray:
    return gamma.gammas if hasattr(gamma, "gammas") else np.asarray(gamma, dtype=complex)


def derivative_matrix(nsites: int, h: float, periodic: bool) -> np.ndarray:
    """Centered first-derivative matrix on a line of sites (zero outside if not periodic)."""
    D = np.zeros((nsites, nsites))
    if nsites == 1:
        return D
    for j in range(nsites):
        for s, sign in ((1, 1.0), (-1, -1.0)):
            k = j + s
            if periodic:
                k %= nsites
            elif not 0 <= k < nsites:
                continue
            D[j, k] += sign / (2 * h)
    return D


def h_dirac(nsites: int, h: float, gamma, sc: geo.SpinConnection | None, ym: geo.YangMillsData,
            m: float, E: np.ndarray | None = None, periodic: bool = True, build_fock: bool = True,
            cap: int | None = gr.DEFAULT_GENERATOR_CAP) -> DiracHamiltonianData:
    """Symmetrized Dirac operator M = (i/2)(D - D^dag) - m i gamma^0 (x) 1.

    D is the discretized gamma^0 E^k_a gamma^a (d_k + Gamma~_k + A_k) on a
    one-dimensional chart of ``nsites`` sites; direction k = 0 is the chart
    direction and other directions contribute only connection terms.
    ``E`` holds inverse vielbeins E[site, k, a] (default identity).
    """
    gam = _gamma_array(gamma)
    n = gam.shape[0] - 1
    n1 = gam.shape[1]
    n2 = ym.n2
    if E is None:
        E = np.broadcast_to(np.eye(n), (nsites, n, n))
    E = np.asarray(E)
    size = nsites * n2 * n1
    ns = n2 * n1
    ds = derivative_matrix(nsites, h, periodic)
    D = np.zeros((size, size), dtype=complex)
    eye_c = np.eye(n2)
    for k in range(n):
        for j in range(nsites):
            # gamma^0 E^k_a gamma^a at site j
            lead = gam[0] @ np.einsum("a,aij->ij", E[j, k], gam[1:])
            blk = np.zeros((ns, ns), dtype=complex)
            if sc is not None:
                blk += np.kron(eye_c, sc.gamma_tilde[k][j])
            if ym.connection is not None and ym.n0:
                blk += np.kron(ym.matrix_connection(k)[j], np.eye(n1))
            rows = slice(j * ns, (j + 1) * ns)
            D[rows, rows] += np.kron(eye_c, lead) @ blk
            if k == 0:
                for jj in range(nsites):
                    if ds[j, jj]:
                        D[rows, jj * ns:(jj + 1) * ns] += ds[j, jj] * np.kron(eye_c, lead)
    mass = np.kron(np.eye(nsites * n2), 1j * gam[0])
    M = 0.5j * (D - D.conj().T) - m * mass
    defect = float(np.abs(M - M.conj().T).max())
    if defect > 1e-10:
        raise ValueError(f"one-particle matrix is not Hermitian (defect {defect:.2e})")
    data = DiracHamiltonianData(one_particle=M, m=m, hermitian_defect=defect)
    if build_fock:
        gens = gr.GeneratorSet.spinor(n1, n2, sites=nsites, cap=cap)
        data.gens = gens
        data.fock_op = gr.bilinear_operator(gens, M)
    return data


def mass_spectrum(gamma, m: float) -> np.ndarray:
    """Eigenvalues of -m i gamma^0."""
    gam = _gamma_array(gamma)
    return np.linalg.eigvalsh(-m * 1j * gam[0])


# --------------------------------------------------------------------------
# constraint assembly


def total_constraint(p: FiberPoint, dirac: DiracHamiltonianData | None = None, state=None,
                     alphaN: float = 1.0) -> dict:
    parts = {"gravity": h_gravity(p, alphaN=alphaN), "yang_mills": h_yangmills(p), "higgs": h_higgs(p)}
    parts["dirac"] = dirac.expectation(state) if dirac is not None else 0.0
    parts["total"] = float(sum(parts.values()))
    return parts


def solve_constraint(p: FiberPoint, dirac_value: float = 0.0, alphaN: float = 1.0) -> FiberPoint:
    """Adjust one gravitational momentum component so that the total constraint vanishes."""
    rest = h_yangmills(p) + h_higgs(p) + dirac_value - (p.R - 2 * p.Lambda) * p.phi / alphaN
    Ginv = np.linalg.inv(geo.dewitt(p.g).flat)
    scale = alphaN / p.phi
    for r in range(p.pi.size):
        a = scale * Ginv[r, r]
        others = p.pi.copy()
        others[r] = 0.0
        b = scale * 2 * (Ginv[r] @ others)
        c = scale * others @ Ginv @ others + rest
        if abs(a) < 1e-14:
            if abs(b) > 1e-14:
                others[r] = -c / b
                return _with(p, pi=others)
            continue
        disc = b * b - 4 * a * c
        if disc >= 0:
            others[r] = (-b + np.sqrt(disc)) / (2 * a)
            return _with(p, pi=others)
    raise ValueError("no momentum component admits a real solution")


# --------------------------------------------------------------------------
# Wheeler-DeWitt operator on a 1+1 section


def section_metric(fm: geo.FiberMetric) -> tuple[float, float]:
    """(a, b) for the section spanned by the DeWitt trace direction and the
    first Yang-Mills direction. Without a gauge sector the most positive
    gravity eigen-direction replaces the Yang-Mills one."""
    gslice = fm.sectors["gravity"]
    mgrav = gslice.stop - gslice.start
    n = int(round((np.sqrt(8 * mgrav + 1) - 1) / 2))
    tr = np.zeros(fm.matrix.shape[0])
    tr[gslice] = geo.sym_to_pair(np.eye(n))
    a = -float(tr @ fm.matrix @ tr) / float(tr @ tr)
    if "yang_mills" in fm.sectors:
        y = np.zeros_like(tr)
        y[fm.sectors["yang_mills"].start] = 1.0
    else:
        blk = fm.matrix[gslice, gslice]
        ev, vecs = np.linalg.eigh(blk)
        y = np.zeros_like(tr)
        y[gslice] = vecs[:, -1]
    b = float(y @ fm.matrix @ y) / float(y @ y)
    if a <= 0 or b <= 0:
        raise ValueError("section metric signature is not (-,+)")
    return a, b


def wdw_operator(lat: hyp.LatticeFiber) -> Callable[[np.ndarray], np.ndarray]:
    """Discrete H u = -Laplace-Beltrami(u) + c u on the lattice section."""
    return lambda u: hyp.apply_H(lat, u)


def section_lattice(fm: geo.FiberMetric, h: float, T: float = 2.0, L: float = 2.0, c: float = 0.0,
                    fiber_dim: int = 1) -> hyp.LatticeFiber:
    """Constant-coefficient lattice carrying the fiber metric restricted to the default section."""
    a, b = section_metric(fm)
    Nx = int(round(L / h))
    hx = L / Nx
    ht = hx / np.sqrt(a / b)
    Nt = int(np.ceil(T / ht - 1e-9)) + 1
    ht = T / (Nt - 1)
    while ht * np.sqrt(a / b) > hx * (1 + 1e-12) or ht ** 2 * a * (abs(c) + 4 / (np.sqrt(a * b) * hx * hx) * np.sqrt(a / b)) / 4 > 1 + 1e-12:
        Nt += 1
        ht = T / (Nt - 1)
    return hyp.LatticeFiber(Nt=Nt, Nx=Nx, ht=ht, hx=hx, a=a, b=b, c=c, fiber_dim=fiber_dim,
                            meta={"section": "trace+yang_mills", "a": a, "b": b})
