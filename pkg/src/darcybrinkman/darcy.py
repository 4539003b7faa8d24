"""Discrete operators on the porous region: weighted mass, divergence, Robin term.

All matrices are indexed by the porous prefix of the global velocity layout
(u1 block then v1 block), so they embed unchanged into both the coupled
epsilon problem and the dimension-reduced limit problem.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .coefficients import CoefficientSet, validate
from .grids import DofLayout, GridPair
from .linalg import SparseSym


def _layout(g: GridPair) -> DofLayout:
    return DofLayout(nx=g.nx, ny=g.ny, nz=g.nz)


def assemble_darcy_mass(c: CoefficientSet, g: GridPair) -> SparseSym:
    """Velocity mass form int_Omega1 Q v.w on the staggered porous faces.

    Diagonal entries are Q_ii times the face control volume.  A full tensor
    couples each cell's two vertical faces to its two horizontal faces with
    weight Q_12 * cellvol / 4 (arithmetic four-point averaging), which equals
    the exact integral of the piecewise-constant face-box reconstruction.
    """
    validate(c)
    lay = _layout(g)
    Q = c.Q
    rows = [lay.iu1(*np.meshgrid(np.arange(g.nx + 1), np.arange(g.ny), indexing="ij")).ravel(),
            lay.iv1(*np.meshgrid(np.arange(g.nx), np.arange(g.ny + 1), indexing="ij")).ravel()]
    vals = [Q[0, 0] * g.u1_volumes().ravel(), Q[1, 1] * g.v1_volumes().ravel()]
    cols = [rows[0], rows[1]]

    if Q[0, 1] != 0.0:
        ii, jj = np.meshgrid(np.arange(g.nx), np.arange(g.ny), indexing="ij")
        ii, jj = ii.ravel(), jj.ravel()
        quarter = Q[0, 1] * g.dx * g.dy / 4.0
        u_left, u_right = lay.iu1(ii, jj), lay.iu1(ii + 1, jj)
        v_bot, v_top = lay.iv1(ii, jj), lay.iv1(ii, jj + 1)
        for uf in (u_left, u_right):
            for vf in (v_bot, v_top):
                rows.append(uf)
                cols.append(vf)
                vals.append(np.full(uf.size, quarter))

    return SparseSym.from_triplets(lay.n_porous,
                                   np.concatenate(rows),
                                   np.concatenate(cols),
                                   np.concatenate(vals))


def assemble_divergence(g: GridPair) -> sp.csr_matrix:
    """Per-cell net outflux operator: (D1 v)_cell = closed-surface sum of v.n dS.

    For cell (i, j) this is (u_{i+1,j} - u_{i,j}) dy + (v_{i,j+1} - v_{i,j}) dx,
    i.e. cell volume times the discrete divergence.
    """
    lay = _layout(g)
    ii, jj = np.meshgrid(np.arange(g.nx), np.arange(g.ny), indexing="ij")
    ii, jj = ii.ravel(), jj.ravel()
    cell = lay.ip1(ii, jj)
    rows = np.concatenate([cell] * 4)
    cols = np.concatenate([lay.iu1(ii + 1, jj), lay.iu1(ii, jj),
                           lay.iv1(ii, jj + 1), lay.iv1(ii, jj)])
    n = ii.size
    vals = np.concatenate([np.full(n, g.dy), np.full(n, -g.dy),
                           np.full(n, g.dx), np.full(n, -g.dx)])
    return sp.csr_matrix((vals, (rows, cols)), shape=(lay.n_p1, lay.n_porous))


def assemble_interface_robin(weight: float, g: GridPair) -> SparseSym:
    """Interface Robin form weight * int_Gamma (v.n)(w.n) dS.

    Diagonal with entry weight*dx on each shared interface DOF; the weight is
    alpha for the epsilon problem and mu + alpha for the limit problem.
    """
    if weight < 0:
        raise ValueError("Robin weight must be nonnegative")
    lay = _layout(g)
    idx = lay.interface
    return SparseSym.from_triplets(lay.n_porous, idx, idx,
                                   np.full(idx.size, weight * g.dx))
