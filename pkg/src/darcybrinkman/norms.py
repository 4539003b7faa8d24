"""Discrete norms matching the continuous spaces of the two-region problem.

Field conventions (see grids module): porous velocities as (u1, v1) face
arrays, channel tangential fields as (nx-1, nz) arrays on interior vertical
faces, channel normal fields as (nx, nz+1) arrays on horizontal faces (row 0
on Gamma, row nz at z = 1).  All norms are box-rule quadratures of the
staggered layout, so they are exact for the piecewise reconstructions the
mass matrices integrate.

The Gamma trace of a normal field is its bottom row (exact: the DOFs sit on
Gamma); the trace of a tangential field is its nearest interior row
(distance dz/2, the same convention the slip term uses).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import GridPair


@dataclass(frozen=True)
class NormSuite:
    grids: GridPair

    # --- porous region --------------------------------------------------------
    def l2_porous_sq(self, u1, v1) -> float:
        g = self.grids
        return float(np.sum(g.u1_volumes() * np.square(u1))
                     + np.sum(g.v1_volumes() * np.square(v1)))

    def l2_porous(self, u1, v1) -> float:
        return float(np.sqrt(self.l2_porous_sq(u1, v1)))

    def porous_divergence(self, u1, v1) -> np.ndarray:
        """Cellwise discrete divergence (nx, ny)."""
        g = self.grids
        return ((u1[1:, :] - u1[:-1, :]) / g.dx
                + (v1[:, 1:] - v1[:, :-1]) / g.dy)

    def hdiv_porous(self, u1, v1) -> float:
        g = self.grids
        div = self.porous_divergence(u1, v1)
        return float(np.sqrt(self.l2_porous_sq(u1, v1)
                             + g.dx * g.dy * np.sum(np.square(div))))

    def l2_p1(self, p1) -> float:
        g = self.grids
        return float(np.sqrt(g.dx * g.dy * np.sum(np.square(p1))))

    def h1_surrogate_p1(self, dp1, du1, dv1, Q) -> float:
        """Pressure error surrogate ||dp||_0 + ||Q dv||_0 (Darcy's law gradient)."""
        g = self.grids
        Q = np.asarray(Q, dtype=np.float64)
        v_at_u = np.zeros((g.nx + 1, g.ny))
        pair = 0.5 * (dv1[:, :-1] + dv1[:, 1:])       # per-cell vertical average
        v_at_u[1:-1, :] = 0.5 * (pair[:-1, :] + pair[1:, :])
        v_at_u[0, :] = pair[0, :]
        v_at_u[-1, :] = pair[-1, :]
        u_at_v = np.zeros((g.nx, g.ny + 1))
        pair_u = 0.5 * (du1[:-1, :] + du1[1:, :])     # per-cell horizontal average
        u_at_v[:, 1:-1] = 0.5 * (pair_u[:, :-1] + pair_u[:, 1:])
        u_at_v[:, 0] = pair_u[:, 0]
        u_at_v[:, -1] = pair_u[:, -1]
        qx = Q[0, 0] * du1 + Q[0, 1] * v_at_u
        qy = Q[1, 0] * u_at_v + Q[1, 1] * dv1
        return self.l2_p1(dp1) + self.l2_porous(qx, qy)

    # --- channel: tangential fields -------------------------------------------
    def l2_T(self, vT) -> float:
        g = self.grids
        return float(np.sqrt(np.sum(g.vT_volumes() * np.square(vT))))

    def grad_T_of_T(self, vT) -> float:
        """Tangential-gradient seminorm; eliminated wall values are zero."""
        g = self.grids
        padded = np.zeros((g.nx + 1, g.nz))
        padded[1:-1, :] = vT
        diff = (padded[1:, :] - padded[:-1, :]) / g.dx
        return float(np.sqrt(g.dx * g.dz * np.sum(np.square(diff))))

    def dz_of_T(self, vT) -> float:
        g = self.grids
        diff = (vT[:, 1:] - vT[:, :-1]) / g.dz
        return float(np.sqrt(g.dx * g.dz * np.sum(np.square(diff))))

    def trace_gamma_T(self, vT) -> float:
        g = self.grids
        return float(np.sqrt(g.dx * np.sum(np.square(vT[:, 0]))))

    # --- channel: normal fields ------------------------------------------------
    def l2_N(self, vN) -> float:
        g = self.grids
        return float(np.sqrt(np.sum(g.vN_volumes() * np.square(vN))))

    def grad_T_of_N(self, vN) -> float:
        """Tangential-gradient seminorm of a normal field, interior differences.

        Measures only the resolved gradient between face columns; the no-slip
        wall half-cells are excluded so the value tracks the continuum decay
        instead of the unresolved wall-layer slope of a fixed grid.
        """
        g = self.grids
        hz = np.full(g.nz + 1, g.dz)
        hz[0] = hz[-1] = 0.5 * g.dz
        diff = (vN[1:, :] - vN[:-1, :]) / g.dx
        return float(np.sqrt(np.sum(np.square(diff) * hz[None, :]) * g.dx))

    def dz_of_N(self, vN) -> float:
        g = self.grids
        diff = (vN[:, 1:] - vN[:, :-1]) / g.dz
        return float(np.sqrt(g.dx * g.dz * np.sum(np.square(diff))))

    def h_dz_N(self, vN) -> float:
        """Norm of the vertical-derivative space: (||u||^2 + ||d_z u||^2)^1/2."""
        return float(np.hypot(self.l2_N(vN), self.dz_of_N(vN)))

    def trace_gamma_N(self, vN) -> float:
        g = self.grids
        return float(np.sqrt(g.dx * np.sum(np.square(vN[:, 0]))))

    def l2_p2(self, p2) -> float:
        g = self.grids
        return float(np.sqrt(g.dx * g.dz * np.sum(np.square(p2))))

    # --- interface fields -------------------------------------------------------
    def l2_gamma_nodes(self, w) -> float:
        """L2(Gamma) of a nodal field on interior Gamma nodes (lumped)."""
        g = self.grids
        return float(np.sqrt(g.dx * np.sum(np.square(w))))

    def grad_gamma_nodes(self, w) -> float:
        g = self.grids
        padded = np.zeros(g.nx + 1)
        padded[1:-1] = w
        return float(np.sqrt(np.sum(np.square(np.diff(padded) / g.dx)) * g.dx))

    def l2_gamma_cells(self, w) -> float:
        g = self.grids
        return float(np.sqrt(g.dx * np.sum(np.square(w))))
