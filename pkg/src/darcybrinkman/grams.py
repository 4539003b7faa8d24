"""Velocity-space Gram matrices matching the NormSuite quadratures.

The inf-sup estimate is the smallest generalized singular value of the
constraint block with respect to these norms, so the Gram matrices must use
exactly the quadratures the convergence lab measures with: Hdiv for the
porous faces, full H1 for the channel tangential block, the vertical-
derivative norm for the channel normal block, and Hdiv + interface trace +
H1(Gamma) for the limit problem.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from . import channel as ch
from . import darcy
from .grids import DofLayout, GridPair
from .linalg import SparseSym, sparse_sum


def _sym_from_csr(M: sp.spmatrix, n: int) -> SparseSym:
    U = sp.triu(M.tocsr(), k=0).tocoo()
    return SparseSym.from_triplets(n, U.row, U.col, U.data)


def _hdiv_porous(g: GridPair, n: int) -> SparseSym:
    lay = DofLayout(nx=g.nx, ny=g.ny, nz=g.nz)
    mass = np.zeros(n)
    mass[:lay.n_pu] = g.u1_volumes().ravel()
    mass[lay.n_pu:lay.n_porous] = g.v1_volumes().ravel()
    D1 = darcy.assemble_divergence(g)
    W = sp.diags(np.full(D1.shape[0], 1.0 / (g.dx * g.dy)))
    div_form = (D1.T @ W @ D1).tocsr()
    div_form.resize((n, n))
    return SparseSym.diagonal(mass) + _sym_from_csr(div_form, n)


def velocity_gram_epsilon(g: GridPair) -> SparseSym:
    """Gram of Hdiv(porous) x H1(tangential) x H(dz)(normal)."""
    lay = DofLayout(nx=g.nx, ny=g.ny, nz=g.nz)
    n = lay.n_velocity
    mass = np.zeros(n)
    ii, jj = np.meshgrid(np.arange(1, g.nx), np.arange(g.nz), indexing="ij")
    mass[lay.ivT(ii, jj).ravel()] = g.vT_volumes().ravel()
    vols = g.vN_volumes()
    mass[lay.interface] += vols[:, 0]
    for j in range(1, g.nz):
        mass[lay.ivN(np.arange(g.nx), j)] = vols[:, j]
    terms = [_hdiv_porous(g, n), SparseSym.diagonal(mass).resized(n),
             ch.tangential_grad_form(g), ch.tangential_dz_form(g),
             ch.normal_dz_form(g)]
    return sparse_sum(n, terms)


def velocity_gram_limit(g: GridPair) -> SparseSym:
    """Gram of {Hdiv + interface trace}(porous) x H1(Gamma nodes)."""
    from .limit import LimitLayout, gamma_stiffness

    lay = LimitLayout(nx=g.nx, ny=g.ny)
    n = lay.n_velocity
    mass = np.zeros(n)
    mass[lay.interface] += g.dx               # ||w1.n||_Gamma term
    mass[lay.ivT(np.arange(1, g.nx))] = g.dx  # lumped Gamma node mass
    return sparse_sum(n, [_hdiv_porous(g, n), SparseSym.diagonal(mass),
                          gamma_stiffness(g, n, lambda i: lay.ivT(i))])
