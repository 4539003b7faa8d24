"""Discrete operators of the scaled Stokes system on the reference channel.

Viscous blocks decompose into tangential-gradient and vertical-derivative
stiffness parts; the epsilon scaling multiplies exactly the parts displayed
in the rescaled weak form:

    K_TT(eps) = eps^2 mu * GT_T + mu * DZ_T        (tangential velocities)
    K_NN(eps) = eps^2 mu * GT_N + mu * DZ_N        (normal velocities)
    S_bjs(eps) = eps^2 beta (sqrtQ)_11 * trace mass (bottom tangential row)
    D2(eps)   = eps * tangential flux difference + vertical flux difference

Boundary handling: tangential DOFs on the lateral walls are eliminated
(no-slip), so GT_T's boundary intervals reference a zero wall value; the
normal component satisfies no-slip on the walls through half-cell ghost
terms in GT_N.  Vertical stencils are natural at z = 1 (no ghost force);
the Gamma-side tangential coupling enters only through S_bjs, which reads
the nearest interior row as the interface trace (distance dz/2).
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .coefficients import CoefficientSet, bjs_tangential_weight
from .grids import DofLayout, GridPair
from .linalg import SparseSym


def _layout(g: GridPair) -> DofLayout:
    return DofLayout(nx=g.nx, ny=g.ny, nz=g.nz)


def _vn_index(lay: DofLayout, i: np.ndarray, j: int) -> np.ndarray:
    """Global index of normal-velocity row j (row 0 is the shared interface)."""
    if j == 0:
        return lay.interface[i]
    return lay.ivN(i, j)


def tangential_grad_form(g: GridPair) -> SparseSym:
    """Unscaled int |grad_T w_T|^2 over the channel (wall values are zero)."""
    lay = _layout(g)
    c = g.dz / g.dx
    rows, cols, vals = [], [], []
    jj = np.arange(g.nz)
    for i in range(g.nx):        # interval between nodes i and i+1
        left_in = 1 <= i <= g.nx - 1
        right_in = 1 <= i + 1 <= g.nx - 1
        if left_in:
            a = lay.ivT(np.full(g.nz, i), jj)
            rows.append(a); cols.append(a); vals.append(np.full(g.nz, c))
        if right_in:
            b = lay.ivT(np.full(g.nz, i + 1), jj)
            rows.append(b); cols.append(b); vals.append(np.full(g.nz, c))
        if left_in and right_in:
            a = lay.ivT(np.full(g.nz, i), jj)
            b = lay.ivT(np.full(g.nz, i + 1), jj)
            rows.append(a); cols.append(b); vals.append(np.full(g.nz, -c))
    return SparseSym.from_triplets(lay.n_velocity, np.concatenate(rows),
                                   np.concatenate(cols), np.concatenate(vals))


def tangential_dz_form(g: GridPair) -> SparseSym:
    """Unscaled int |d_z w_T|^2; natural (no ghost) at both z = 0 and z = 1."""
    lay = _layout(g)
    c = g.dx / g.dz
    ii = np.arange(1, g.nx)
    rows, cols, vals = [], [], []
    for j in range(g.nz - 1):
        a = lay.ivT(ii, np.full(ii.size, j))
        b = lay.ivT(ii, np.full(ii.size, j + 1))
        rows += [a, b, a]
        cols += [a, b, b]
        vals += [np.full(ii.size, c), np.full(ii.size, c), np.full(ii.size, -c)]
    return SparseSym.from_triplets(lay.n_velocity, np.concatenate(rows),
                                   np.concatenate(cols), np.concatenate(vals))


def normal_grad_form(g: GridPair) -> SparseSym:
    """Unscaled int |grad_T w_N|^2 with half-cell no-slip ghosts at the walls."""
    lay = _layout(g)
    rows, cols, vals = [], [], []
    for j in range(g.nz):        # face rows carrying a DOF (j = nz eliminated)
        hz = 0.5 * g.dz if j == 0 else g.dz
        c = hz / g.dx
        ii = np.arange(g.nx - 1)
        a = _vn_index(lay, ii, j)
        b = _vn_index(lay, ii + 1, j)
        rows += [a, b, a]
        cols += [a, b, b]
        vals += [np.full(ii.size, c), np.full(ii.size, c), np.full(ii.size, -c)]
        # wall ghosts: value 0 at distance dx/2 from the first/last column
        w = _vn_index(lay, np.array([0, g.nx - 1]), j)
        rows.append(w); cols.append(w); vals.append(np.full(2, 2.0 * hz / g.dx))
    return SparseSym.from_triplets(lay.n_velocity, np.concatenate(rows),
                                   np.concatenate(cols), np.concatenate(vals))


def normal_dz_form(g: GridPair) -> SparseSym:
    """Unscaled int |d_z w_N|^2; couples the shared bottom row, zero at z = 1."""
    lay = _layout(g)
    c = g.dx / g.dz
    ii = np.arange(g.nx)
    rows, cols, vals = [], [], []
    for j in range(g.nz):        # cell between face rows j and j+1
        a = _vn_index(lay, ii, j)
        rows.append(a); cols.append(a); vals.append(np.full(g.nx, c))
        if j + 1 <= g.nz - 1:
            b = _vn_index(lay, ii, j + 1)
            rows += [b, a]
            cols += [b, b]
            vals += [np.full(g.nx, c), np.full(g.nx, -c)]
    return SparseSym.from_triplets(lay.n_velocity, np.concatenate(rows),
                                   np.concatenate(cols), np.concatenate(vals))


def assemble_viscous(c: CoefficientSet, g: GridPair,
                     epsilon: float) -> tuple[SparseSym, SparseSym]:
    """Scaled viscous blocks (K_TT, K_NN) of the epsilon problem."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    e2mu = epsilon * epsilon * c.mu
    K_TT = tangential_grad_form(g).scaled(e2mu) + tangential_dz_form(g).scaled(c.mu)
    K_NN = normal_grad_form(g).scaled(e2mu) + normal_dz_form(g).scaled(c.mu)
    return K_TT, K_NN


def assemble_bjs(c: CoefficientSet, g: GridPair, epsilon: float) -> SparseSym:
    """Interface slip form eps^2 int_Gamma beta sqrtQ v_T.w_T dS.

    Diagonal on the bottom-row tangential DOFs; the nearest interior row
    stands in for the Gamma trace.
    """
    lay = _layout(g)
    idx = lay.ivT(np.arange(1, g.nx), 0)
    val = epsilon * epsilon * c.beta * bjs_tangential_weight(c) * g.dx
    return SparseSym.from_triplets(lay.n_velocity, idx, idx,
                                   np.full(idx.size, val))


def assemble_channel_divergence(g: GridPair, epsilon: float) -> sp.csr_matrix:
    """Channel constraint rows: eps * tangential flux diff + vertical flux diff.

    Row of cell (i, j):  eps*dz*(vT_{i+1,j} - vT_{i,j}) + dx*(vN_{i,j+1} - vN_{i,j})
    with eliminated wall/top values dropped and the bottom row reading the
    shared interface DOFs.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    lay = _layout(g)
    rows, cols, vals = [], [], []
    for j in range(g.nz):
        cell = np.arange(g.nx) * g.nz + j   # local channel-cell index
        # tangential fluxes (nodes 1..nx-1 carry DOFs)
        ii = np.arange(g.nx)
        right = ii + 1
        keep = right <= g.nx - 1
        rows.append(cell[keep])
        cols.append(lay.ivT(right[keep], np.full(keep.sum(), j)))
        vals.append(np.full(keep.sum(), epsilon * g.dz))
        keep = ii >= 1
        rows.append(cell[keep])
        cols.append(lay.ivT(ii[keep], np.full(keep.sum(), j)))
        vals.append(np.full(keep.sum(), -epsilon * g.dz))
        # vertical fluxes
        if j + 1 <= g.nz - 1:
            rows.append(cell)
            cols.append(_vn_index(lay, ii, j + 1))
            vals.append(np.full(g.nx, g.dx))
        rows.append(cell)
        cols.append(_vn_index(lay, ii, j))
        vals.append(np.full(g.nx, -g.dx))
    return sp.csr_matrix((np.concatenate(vals),
                          (np.concatenate(rows), np.concatenate(cols))),
                         shape=(g.nx * g.nz, lay.n_velocity))
