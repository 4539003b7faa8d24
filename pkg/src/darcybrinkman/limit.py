"""The dimension-reduced Darcy-Brinkman limit problem on Omega_1 x Gamma.

Unknowns: porous face velocities (same layout prefix as the epsilon
problem), tangential interface velocity at the nx-1 interior Gamma nodes
(endpoints clamped to zero), porous cell pressures, and one interface
pressure per Gamma cell.  The velocity block is

    A = blockdiag( Q-mass + (mu+alpha) * Robin trace,
                   beta (sqrtQ)_11 * lumped Gamma mass + mu * Gamma stiffness ),

the constraint rows are the porous divergence against p1 and, per Gamma
cell, the tangential flux difference minus the shared normal trace against
p2.  The vertical profile of the channel limit is reconstructed afterwards:
xi(x, z) = (1 - z) * (v1.n)(x).

The zero-mean gauge sometimes attached to the limit pressure space is not
imposed: the drained outer boundary already anchors the discrete pressure
(uniqueness is verified numerically in the tests).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import darcy
from .coefficients import (CoefficientSet, ForcingSet, bjs_tangential_weight,
                           validate)
from .epsilon import SaddleSystem, _solve_saddle
from .grids import DofLayout, GridPair
from .linalg import SchurStats, SparseSym, sparse_sum


@dataclass(frozen=True)
class LimitLayout:
    """Index map of the limit unknowns: porous prefix + Gamma nodes."""

    nx: int
    ny: int

    @property
    def porous(self) -> DofLayout:
        # nz is irrelevant for porous indexing; keep the minimum legal value
        return DofLayout(nx=self.nx, ny=self.ny, nz=2)

    @property
    def n_porous(self) -> int:
        return self.porous.n_porous

    @property
    def n_vT(self) -> int:
        return self.nx - 1

    @property
    def n_velocity(self) -> int:
        return self.n_porous + self.n_vT

    @property
    def n_p1(self) -> int:
        return self.nx * self.ny

    @property
    def n_p2(self) -> int:
        return self.nx

    @property
    def n_pressure(self) -> int:
        return self.n_p1 + self.n_p2

    def ivT(self, i):
        """Gamma node index map, physical nodes i = 1..nx-1."""
        return self.n_porous + np.asarray(i) - 1

    @property
    def interface(self) -> np.ndarray:
        return self.porous.interface

    def split_velocity(self, x: np.ndarray):
        u1 = x[:self.porous.n_pu].reshape(self.nx + 1, self.ny)
        v1 = x[self.porous.n_pu:self.n_porous].reshape(self.nx, self.ny + 1)
        vT = x[self.n_porous:]
        return u1, v1, vT

    def split_pressure(self, p: np.ndarray):
        return p[:self.n_p1].reshape(self.nx, self.ny), p[self.n_p1:]


@dataclass
class LimitSolution:
    """Discrete fields of the limit problem, plus the reconstructed profile."""

    grids: GridPair
    layout: LimitLayout
    x: np.ndarray
    p: np.ndarray
    kkt_residual: float
    stats: SchurStats
    Q: np.ndarray | None = None

    @property
    def u1(self) -> np.ndarray:
        return self.layout.split_velocity(self.x)[0]

    @property
    def v1(self) -> np.ndarray:
        return self.layout.split_velocity(self.x)[1]

    @property
    def vT(self) -> np.ndarray:
        """Interior Gamma node values (endpoints are zero by construction)."""
        return self.layout.split_velocity(self.x)[2]

    @property
    def interface_vn(self) -> np.ndarray:
        return self.x[self.layout.interface]

    @property
    def p1(self) -> np.ndarray:
        return self.layout.split_pressure(self.p)[0]

    @property
    def p2(self) -> np.ndarray:
        return self.layout.split_pressure(self.p)[1]

    @property
    def xi(self) -> np.ndarray:
        return reconstruct_xi(self, self.grids)


def gamma_stiffness(g: GridPair, n: int, offset_map) -> SparseSym:
    """1D three-point stiffness on Gamma nodes (endpoint values are zero)."""
    c = 1.0 / g.dx
    rows, cols, vals = [], [], []
    for i in range(g.nx):            # interval between nodes i, i+1
        a_in = 1 <= i <= g.nx - 1
        b_in = 1 <= i + 1 <= g.nx - 1
        if a_in:
            rows.append(offset_map(i)); cols.append(offset_map(i)); vals.append(c)
        if b_in:
            rows.append(offset_map(i + 1)); cols.append(offset_map(i + 1)); vals.append(c)
        if a_in and b_in:
            rows.append(offset_map(i)); cols.append(offset_map(i + 1)); vals.append(-c)
    return SparseSym.from_triplets(n, np.array(rows), np.array(cols),
                                   np.array(vals, dtype=np.float64))


def assemble_limit(c: CoefficientSet, fs: ForcingSet, g: GridPair) -> SaddleSystem:
    """Assemble the reduced limit problem for the given coefficients/forcing."""
    validate(c)
    lay = LimitLayout(nx=g.nx, ny=g.ny)
    n = lay.n_velocity

    nodes = lay.ivT(np.arange(1, g.nx))
    parts = {
        "darcy_Q": darcy.assemble_darcy_mass(c, g).resized(n),
        "robin_n": darcy.assemble_interface_robin(c.mu + c.alpha, g).resized(n),
        "gamma_mass": SparseSym.from_triplets(
            n, nodes, nodes,
            np.full(nodes.size, c.beta * bjs_tangential_weight(c) * g.dx)),
        "gamma_stiff": gamma_stiffness(g, n, lambda i: lay.ivT(i)).scaled(c.mu),
    }
    A = sparse_sum(n, parts.values())

    D1 = darcy.assemble_divergence(g)
    D1 = sp.hstack([D1, sp.csr_matrix((D1.shape[0], lay.n_vT))]).tocsr()
    rows, cols, vals = [], [], []
    for i in range(g.nx):            # Gamma cell i: div_T vT - v1.n
        if i + 1 <= g.nx - 1:
            rows.append(i); cols.append(lay.ivT(i + 1)); vals.append(1.0)
        if i >= 1:
            rows.append(i); cols.append(lay.ivT(i)); vals.append(-1.0)
        rows.append(i); cols.append(lay.interface[i]); vals.append(-g.dx)
    Bg = sp.csr_matrix((np.array(vals), (np.array(rows), np.array(cols))),
                       shape=(g.nx, n))
    B = sp.vstack([D1, Bg]).tocsr()

    # limit RHS: vertically averaged tangential force against z-independent
    # test functions, with the same midpoint z-quadrature as the eps family
    xt = g.x_nodes[1:-1][:, None]
    zc = g.z_centers[None, :]
    FT = np.broadcast_to(fs.f2_T_at(0.0, xt, zc), (g.nx - 1, g.nz))
    fbar = FT.sum(axis=1) * g.dz
    f = np.zeros(n)
    f[nodes] = g.dx * fbar

    xc = g.x_centers[:, None]
    yc = g.y_centers[None, :]
    H1 = np.broadcast_to(fs.h1_at(0.0, xc, yc), (g.nx, g.ny))
    h = np.zeros(lay.n_pressure)
    h[:lay.n_p1] = H1.ravel() * g.dx * g.dy

    mp = np.concatenate([np.full(lay.n_p1, g.dx * g.dy), np.full(g.nx, g.dx)])
    return SaddleSystem(A=A, B=B, f=f, h=h, layout=lay, grids=g,
                        pressure_mass=mp, parts=parts, epsilon=None, Q=c.Q)


def solve_limit(sys: SaddleSystem, *, inner: str = "direct",
                inner_tol: float = 1e-13, outer_tol: float = 1e-12,
                inner_cap: int | None = None,
                outer_cap: int | None = None) -> LimitSolution:
    """Solve the assembled limit problem to a relative KKT residual <= 1e-10."""
    stats = SchurStats()
    v, p, res = _solve_saddle(sys, inner=inner, inner_tol=inner_tol,
                              outer_tol=outer_tol, inner_cap=inner_cap,
                              outer_cap=outer_cap, stats=stats)
    return LimitSolution(grids=sys.grids, layout=sys.layout, x=v, p=p,
                         kkt_residual=res, stats=stats, Q=sys.Q)


def reconstruct_xi(sol: LimitSolution, g: GridPair) -> np.ndarray:
    """Vertical limit profile xi(x_i, z_j) = (1 - z_j) (v1.n)(x_i), (nx, nz+1).

    Linear in z by construction: xi = v1.n on Gamma, xi = 0 at z = 1, and
    d_z xi = -(v1.n) is z-independent.
    """
    vn = sol.interface_vn
    return vn[:, None] * (1.0 - g.z_nodes)[None, :]


def pressure_identity_residual(sol: LimitSolution, c: CoefficientSet) -> float:
    """Max Gamma-cell defect of p1|_Gamma - p2 = (mu + alpha) v1.n.

    The porous trace is the top-row cell pressure (distance dy/2 from Gamma),
    so the defect is first order in the mesh size.
    """
    p1_top = sol.p1[:, -1]
    return float(np.max(np.abs(p1_top - sol.p2 - (c.mu + c.alpha) * sol.interface_vn)))
