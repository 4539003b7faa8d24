"""Reference geometry and matching staggered grids for the two-region problem.

Geometry (N = 2).  The porous rectangle sits below the interface, the
rescaled channel above it:

    porous   Omega_1 = (0, W) x (-D, 0)
    interface Gamma  = (0, W) x {0}
    channel  Omega_2 = (0, W) x (0, 1)     (reference coordinates (x, z))

Both regions carry a uniform MAC layout (pressures at cell centers, normal
velocity components at faces):

    porous, nx x ny cells, dx = W/nx, dy = D/ny
      p1[i, j]  cell centers    x=(i+0.5)dx, y=-D+(j+0.5)dy     (nx, ny)
      u1[i, j]  vertical faces  x=i*dx,      y=-D+(j+0.5)dy     (nx+1, ny)
      v1[i, k]  horiz. faces    x=(i+0.5)dx, y=-D+k*dy          (nx, ny+1)

    channel, nx x nz cells, dz = 1/nz
      p2[i, j]  cell centers    x=(i+0.5)dx, z=(j+0.5)dz        (nx, nz)
      vT[i, j]  vertical faces  x=i*dx,      z=(j+0.5)dz        (nx+1, nz)
      vN[i, j]  horiz. faces    x=(i+0.5)dx, z=j*dz             (nx, nz+1)

Eliminated by boundary conditions: vT at i=0 and i=nx (lateral no-slip) and
vN at j=nz (zero normal flux at the top).  The channel bottom faces vN[:, 0]
are *identified* with the porous top faces v1[:, ny]: one global unknown per
column, so the interface mass constraint v1.n = v2.n holds exactly by
construction.  All remaining outer porous faces stay as unknowns (the drained
pressure condition is natural).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class DomainSpec:
    """Fixed reference geometry: porous rectangle below a height-1 channel."""

    porous_width: float = 1.0
    porous_depth: float = 1.0
    channel_reference_height: float = 1.0

    def __post_init__(self):
        if not (self.porous_width > 0 and self.porous_depth > 0):
            raise ValueError("porous dimensions must be positive")
        if self.channel_reference_height != 1.0:
            raise ValueError("the rescaled channel has height exactly 1")


@dataclass(frozen=True)
class GridPair:
    """Matched staggered grids for porous region and reference channel."""

    spec: DomainSpec
    nx: int
    ny: int
    nz: int

    def __post_init__(self):
        if min(self.nx, self.ny, self.nz) < 2:
            raise ValueError("nx, ny, nz must all be >= 2")

    @property
    def dx(self) -> float:
        return self.spec.porous_width / self.nx

    @property
    def dy(self) -> float:
        return self.spec.porous_depth / self.ny

    @property
    def dz(self) -> float:
        return 1.0 / self.nz

    # --- porous coordinates -------------------------------------------------
    @property
    def x_centers(self) -> np.ndarray:
        return (np.arange(self.nx) + 0.5) * self.dx

    @property
    def x_nodes(self) -> np.ndarray:
        return np.arange(self.nx + 1) * self.dx

    @property
    def y_centers(self) -> np.ndarray:
        return -self.spec.porous_depth + (np.arange(self.ny) + 0.5) * self.dy

    @property
    def y_nodes(self) -> np.ndarray:
        return -self.spec.porous_depth + np.arange(self.ny + 1) * self.dy

    # --- channel coordinates ------------------------------------------------
    @property
    def z_centers(self) -> np.ndarray:
        return (np.arange(self.nz) + 0.5) * self.dz

    @property
    def z_nodes(self) -> np.ndarray:
        return np.arange(self.nz + 1) * self.dz

    @property
    def interface_map(self) -> np.ndarray:
        """Porous top face i  <->  channel bottom face i (same x by layout)."""
        return np.arange(self.nx, dtype=np.int64)

    # face control volumes (boundary boxes are halved in the staggered
    # direction; the interface row is half because only the porous side of
    # Gamma belongs to Omega_1)
    def u1_volumes(self) -> np.ndarray:
        w = np.full(self.nx + 1, self.dx)
        w[0] = w[-1] = 0.5 * self.dx
        return np.repeat(w[:, None], self.ny, axis=1) * self.dy

    def v1_volumes(self) -> np.ndarray:
        w = np.full(self.ny + 1, self.dy)
        w[0] = w[-1] = 0.5 * self.dy
        return np.repeat(w[None, :], self.nx, axis=0) * self.dx

    def vT_volumes(self) -> np.ndarray:
        return np.full((self.nx - 1, self.nz), self.dx * self.dz)

    def vN_volumes(self) -> np.ndarray:
        w = np.full(self.nz + 1, self.dz)
        w[0] = w[-1] = 0.5 * self.dz
        return np.repeat(w[None, :], self.nx, axis=0) * self.dx


@dataclass(frozen=True)
class DofLayout:
    """Global index map of the coupled epsilon-problem unknowns.

    Velocity vector order: porous u1, porous v1 (interface row included once),
    channel tangential vT (interior nodes), channel normal vN (interior rows
    j = 1..nz-1).  Pressure vector order: porous cells, channel cells.
    """

    nx: int
    ny: int
    nz: int

    @property
    def n_pu(self) -> int:
        return (self.nx + 1) * self.ny

    @property
    def n_pv(self) -> int:
        return self.nx * (self.ny + 1)

    @property
    def n_vT(self) -> int:
        return (self.nx - 1) * self.nz

    @property
    def n_vN(self) -> int:
        return self.nx * (self.nz - 1)

    @property
    def n_porous(self) -> int:
        return self.n_pu + self.n_pv

    @property
    def n_velocity(self) -> int:
        return self.n_porous + self.n_vT + self.n_vN

    @property
    def n_p1(self) -> int:
        return self.nx * self.ny

    @property
    def n_p2(self) -> int:
        return self.nx * self.nz

    @property
    def n_pressure(self) -> int:
        return self.n_p1 + self.n_p2

    # --- index maps ---------------------------------------------------------
    def iu1(self, i, j):
        return np.asarray(i) * self.ny + np.asarray(j)

    def iv1(self, i, k):
        return self.n_pu + np.asarray(i) * (self.ny + 1) + np.asarray(k)

    def ivT(self, i, j):
        """i is the physical node index 1..nx-1."""
        return self.n_porous + (np.asarray(i) - 1) * self.nz + np.asarray(j)

    def ivN(self, i, j):
        """Interior rows only, j = 1..nz-1; row 0 aliases the interface."""
        return (self.n_porous + self.n_vT
                + np.asarray(i) * (self.nz - 1) + (np.asarray(j) - 1))

    @property
    def interface(self) -> np.ndarray:
        """Global indices of the nx shared interface normal velocities."""
        return self.iv1(np.arange(self.nx), self.ny)

    def ip1(self, i, j):
        return np.asarray(i) * self.ny + np.asarray(j)

    def ip2(self, i, j):
        return self.n_p1 + np.asarray(i) * self.nz + np.asarray(j)

    # --- vector <-> field views ----------------------------------------------
    def split_velocity(self, x: np.ndarray):
        """Return (u1, v1, vT, vN_full) field arrays from a global vector.

        vN_full has shape (nx, nz+1): row 0 is the shared interface values,
        row nz the eliminated zeros.
        """
        u1 = x[:self.n_pu].reshape(self.nx + 1, self.ny)
        v1 = x[self.n_pu:self.n_porous].reshape(self.nx, self.ny + 1)
        vT = x[self.n_porous:self.n_porous + self.n_vT].reshape(self.nx - 1, self.nz)
        vN = np.zeros((self.nx, self.nz + 1))
        vN[:, 0] = v1[:, self.ny]
        vN[:, 1:self.nz] = x[self.n_porous + self.n_vT:].reshape(self.nx, self.nz - 1)
        return u1, v1, vT, vN

    def join_velocity(self, u1, v1, vT, vN_full=None) -> np.ndarray:
        x = np.concatenate([np.ravel(u1), np.ravel(v1), np.ravel(vT)])
        if vN_full is None:
            inner = np.zeros(self.n_vN)
        else:
            inner = np.ravel(np.asarray(vN_full)[:, 1:self.nz])
        return np.concatenate([x, inner])

    def split_pressure(self, p: np.ndarray):
        p1 = p[:self.n_p1].reshape(self.nx, self.ny)
        p2 = p[self.n_p1:].reshape(self.nx, self.nz)
        return p1, p2


def build_grids(spec: DomainSpec, nx: int, ny: int, nz: int) -> tuple[GridPair, DofLayout]:
    """Build the matched grid pair and its coupled DOF layout.

    Requires nx, ny, nz >= 2; the number of shared interface unknowns is nx.
    """
    grids = GridPair(spec=spec, nx=int(nx), ny=int(ny), nz=int(nz))
    return grids, DofLayout(nx=grids.nx, ny=grids.ny, nz=grids.nz)


def reference_transform_check(field, epsilon: float, points=None):
    """Check the divergence identity of the thin-channel rescaling.

    ``field`` is a pair of sympy expressions (w_T, w_N) in symbols (x, xn)
    describing a vector field on the physical channel Gamma x (0, epsilon).
    Under x_n = epsilon * z the physical divergence must equal
    div_T(w_T) + (1/epsilon) d_z(w_N) in reference coordinates.

    Returns (physical, reference) value arrays evaluated at ``points``
    (array of (x, z) reference samples; a small default lattice otherwise).
    """
    import sympy as sy

    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    x, xn, z = sy.symbols("x xn z", real=True)
    wT = sy.sympify(field[0])
    wN = sy.sympify(field[1])
    phys_div = sy.diff(wT, x) + sy.diff(wN, xn)
    # reference forms: substitute xn = eps*z, then apply the rescaled operators
    wT_ref = wT.subs(xn, epsilon * z)
    wN_ref = wN.subs(xn, epsilon * z)
    ref_div = sy.diff(wT_ref, x) + sy.Rational(1) / epsilon * sy.diff(wN_ref, z)

    phys = sy.lambdify((x, z), phys_div.subs(xn, epsilon * z), "numpy")
    ref = sy.lambdify((x, z), ref_div, "numpy")

    if points is None:
        xs = np.linspace(0.1, 0.9, 5)
        zs = np.linspace(0.1, 0.9, 5)
        X, Z = np.meshgrid(xs, zs, indexing="ij")
        points = np.column_stack([X.ravel(), Z.ravel()])
    pts = np.asarray(points, dtype=np.float64)
    a = np.broadcast_to(np.asarray(phys(pts[:, 0], pts[:, 1]), dtype=np.float64),
                        (pts.shape[0],)).copy()
    b = np.broadcast_to(np.asarray(ref(pts[:, 0], pts[:, 1]), dtype=np.float64),
                        (pts.shape[0],)).copy()
    return a, b
