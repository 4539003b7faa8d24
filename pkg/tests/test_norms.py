import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from darcybrinkman.grids import DomainSpec, build_grids
from darcybrinkman.norms import NormSuite

G, _ = build_grids(DomainSpec(), 6, 5, 4)
NS = NormSuite(G)

# norm name -> field shapes it consumes
VECTOR_NORMS = {
    "l2_porous": [(G.nx + 1, G.ny), (G.nx, G.ny + 1)],
    "hdiv_porous": [(G.nx + 1, G.ny), (G.nx, G.ny + 1)],
}
SCALAR_NORMS = {
    "l2_T": (G.nx - 1, G.nz),
    "dz_of_T": (G.nx - 1, G.nz),
    "grad_T_of_T": (G.nx - 1, G.nz),
    "trace_gamma_T": (G.nx - 1, G.nz),
    "l2_N": (G.nx, G.nz + 1),
    "dz_of_N": (G.nx, G.nz + 1),
    "grad_T_of_N": (G.nx, G.nz + 1),
    "h_dz_N": (G.nx, G.nz + 1),
    "trace_gamma_N": (G.nx, G.nz + 1),
    "l2_p1": (G.nx, G.ny),
    "l2_p2": (G.nx, G.nz),
    "l2_gamma_nodes": (G.nx - 1,),
    "grad_gamma_nodes": (G.nx - 1,),
    "l2_gamma_cells": (G.nx,),
}
PROPER_NORMS = ("l2_porous", "hdiv_porous", "l2_T", "l2_N", "h_dz_N",
                "l2_p1", "l2_p2", "l2_gamma_nodes", "l2_gamma_cells")

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def _apply(name, arrays):
    fn = getattr(NS, name)
    return fn(*arrays)


@pytest.mark.parametrize("name", list(SCALAR_NORMS) + list(VECTOR_NORMS))
def test_norm_nonnegative_and_zero_on_zero(name):
    shapes = VECTOR_NORMS.get(name) or [SCALAR_NORMS[name]]
    zeros = [np.zeros(s) for s in shapes]
    assert _apply(name, zeros) == 0.0
    rng = np.random.default_rng(0)
    vals = [rng.standard_normal(s) for s in shapes]
    assert _apply(name, vals) >= 0.0


@pytest.mark.parametrize("name", PROPER_NORMS)
def test_proper_norm_vanishes_only_on_zero(name):
    shapes = VECTOR_NORMS.get(name) or [SCALAR_NORMS[name]]
    for k, s in enumerate(shapes):
        arrays = [np.zeros(sh) for sh in shapes]
        bumped = np.zeros(s)
        bumped.flat[0] = 1.0
        arrays[k] = bumped
        assert _apply(name, arrays) > 0.0


@given(c=st.floats(-50, 50, allow_nan=False), seed=st.integers(0, 2**16))
@settings(max_examples=30, deadline=None)
def test_homogeneity(c, seed):
    rng = np.random.default_rng(seed)
    for name in list(SCALAR_NORMS) + list(VECTOR_NORMS):
        shapes = VECTOR_NORMS.get(name) or [SCALAR_NORMS[name]]
        arrays = [rng.standard_normal(s) for s in shapes]
        base = _apply(name, arrays)
        scaled = _apply(name, [c * a for a in arrays])
        assert scaled == pytest.approx(abs(c) * base, rel=1e-12, abs=1e-12)


@given(seed=st.integers(0, 2**16))
@settings(max_examples=30, deadline=None)
def test_triangle_inequality(seed):
    rng = np.random.default_rng(seed)
    for name in list(SCALAR_NORMS) + list(VECTOR_NORMS):
        shapes = VECTOR_NORMS.get(name) or [SCALAR_NORMS[name]]
        a = [rng.standard_normal(s) for s in shapes]
        b = [rng.standard_normal(s) for s in shapes]
        lhs = _apply(name, [x + y for x, y in zip(a, b)])
        assert lhs <= _apply(name, a) + _apply(name, b) + 1e-12


def test_discrete_trace_inequality_on_corpus(rng):
    # ||u||_Gamma <= sqrt(2) (||u|| + ||d_z u||) on 100 random normal fields
    for _ in range(100):
        u = rng.standard_normal((G.nx, G.nz + 1)) * rng.uniform(0.1, 10)
        lhs = NS.trace_gamma_N(u)
        rhs = np.sqrt(2.0) * (NS.l2_N(u) + NS.dz_of_N(u))
        assert lhs <= rhs + 1e-12


def test_divergence_matches_flux_form(rng):
    u1 = rng.standard_normal((G.nx + 1, G.ny))
    v1 = rng.standard_normal((G.nx, G.ny + 1))
    div = NS.porous_divergence(u1, v1)
    i, j = 2, 3
    expect = ((u1[i + 1, j] - u1[i, j]) / G.dx
              + (v1[i, j + 1] - v1[i, j]) / G.dy)
    assert div[i, j] == pytest.approx(expect, rel=1e-13)


def test_h1_surrogate_reduces_to_l2_for_identity_tensor(rng):
    dp = rng.standard_normal((G.nx, G.ny))
    du = rng.standard_normal((G.nx + 1, G.ny))
    dv = rng.standard_normal((G.nx, G.ny + 1))
    val = NS.h1_surrogate_p1(dp, du, dv, np.eye(2))
    assert val == pytest.approx(NS.l2_p1(dp) + NS.l2_porous(du, dv), rel=1e-12)
