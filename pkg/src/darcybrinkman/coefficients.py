"""Physical coefficients and forcing data.

The resistance tensor Q must be symmetric elliptic; mu > 0; the interface
coefficients alpha (fluid entry resistance) and beta (slip) are nonnegative.
Coefficients are spatially constant per run.

Forcing families are affine in epsilon: f(eps) = base + eps * perturbation,
so the strong limit at eps -> 0 is simply the base part.  Fields are
callables of the region coordinates; the constant presets wrap scalars.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

SYMMETRY_TOL = 1e-12


class NotSymmetric(ValueError):
    pass


class NotElliptic(ValueError):
    pass


@dataclass(frozen=True)
class CoefficientSet:
    """Resistance tensor Q, shear viscosity mu, entry resistance alpha, slip beta."""

    Q: np.ndarray
    mu: float = 1.0
    alpha: float = 0.0
    beta: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "Q", np.array(self.Q, dtype=np.float64).reshape(2, 2))
        if self.mu <= 0:
            raise ValueError("mu must be positive")
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be nonnegative")

    @classmethod
    def isotropic(cls, q: float = 1.0, mu: float = 1.0,
                  alpha: float = 0.0, beta: float = 1.0) -> "CoefficientSet":
        return cls(Q=q * np.eye(2), mu=mu, alpha=alpha, beta=beta)


def validate(c: CoefficientSet) -> float:
    """Return the ellipticity constant of Q (its smallest eigenvalue).

    Raises NotSymmetric if Q is asymmetric beyond 1e-12 and NotElliptic if
    the smallest eigenvalue is not strictly positive.
    """
    Q = c.Q
    skew = abs(Q[0, 1] - Q[1, 0])
    if skew > SYMMETRY_TOL * max(1.0, float(np.abs(Q).max())):
        raise NotSymmetric(f"Q asymmetric by {skew:.3e}")
    c_q = float(np.linalg.eigvalsh(0.5 * (Q + Q.T))[0])
    if c_q <= 0:
        raise NotElliptic(f"smallest eigenvalue of Q is {c_q:.3e}")
    return c_q


def sqrt_Q(c: CoefficientSet) -> np.ndarray:
    """Symmetric positive definite square root of Q, via eigendecomposition."""
    validate(c)
    Qs = 0.5 * (c.Q + c.Q.T)
    w, V = np.linalg.eigh(Qs)
    return (V * np.sqrt(w)) @ V.T


def bjs_tangential_weight(c: CoefficientSet) -> float:
    """Tangential-tangential entry of sqrt(Q), the scalar acting on slip.

    In 2D a tangential interface vector embeds as (w_t, 0), so the
    Beavers-Joseph-Saffman tensor reduces to (sqrt Q)_11.
    """
    return float(sqrt_Q(c)[0, 0])


def _as_callable(v) -> Callable:
    if callable(v):
        return v
    value = float(v)
    return lambda *coords: np.full_like(np.asarray(coords[0], dtype=np.float64),
                                        value, dtype=np.float64)


@dataclass(frozen=True)
class ForcingSet:
    """Channel body force (f2_T, f2_N) on Omega_2 and mass source h1 on Omega_1.

    Each part is ``base + eps * pert``; pert defaults to zero (constant in
    epsilon).  The declared strong limits are the base callables.
    """

    f2_T: Callable = field(default=_as_callable(0.0))
    f2_N: Callable = field(default=_as_callable(0.0))
    h1: Callable = field(default=_as_callable(0.0))
    pert_f2_T: Callable = field(default=_as_callable(0.0))
    pert_f2_N: Callable = field(default=_as_callable(0.0))
    pert_h1: Callable = field(default=_as_callable(0.0))

    @classmethod
    def zero(cls) -> "ForcingSet":
        return cls()

    @classmethod
    def constant(cls, f2_T: float = 0.0, f2_N: float = 0.0, h1: float = 0.0) -> "ForcingSet":
        return cls(f2_T=_as_callable(f2_T), f2_N=_as_callable(f2_N), h1=_as_callable(h1))

    @classmethod
    def eps_perturbed(cls, f2_T=0.0, f2_N=0.0, h1=0.0,
                      pert_f2_T=0.0, pert_f2_N=0.0, pert_h1=0.0) -> "ForcingSet":
        return cls(f2_T=_as_callable(f2_T), f2_N=_as_callable(f2_N),
                   h1=_as_callable(h1), pert_f2_T=_as_callable(pert_f2_T),
                   pert_f2_N=_as_callable(pert_f2_N), pert_h1=_as_callable(pert_h1))

    @classmethod
    def from_callables(cls, f2_T=None, f2_N=None, h1=None) -> "ForcingSet":
        return cls(f2_T=_as_callable(f2_T if f2_T is not None else 0.0),
                   f2_N=_as_callable(f2_N if f2_N is not None else 0.0),
                   h1=_as_callable(h1 if h1 is not None else 0.0))

    def f2_T_at(self, eps: float, x, z):
        return np.asarray(self.f2_T(x, z), dtype=np.float64) \
            + eps * np.asarray(self.pert_f2_T(x, z), dtype=np.float64)

    def f2_N_at(self, eps: float, x, z):
        return np.asarray(self.f2_N(x, z), dtype=np.float64) \
            + eps * np.asarray(self.pert_f2_N(x, z), dtype=np.float64)

    def h1_at(self, eps: float, x, y):
        return np.asarray(self.h1(x, y), dtype=np.float64) \
            + eps * np.asarray(self.pert_h1(x, y), dtype=np.float64)


PRESETS = ("zero", "constant", "eps-perturbed")


def forcing_preset(name: str, **params) -> ForcingSet:
    """Build a ForcingSet from a named preset; rejects unknown names."""
    if name == "zero":
        return ForcingSet.zero()
    if name == "constant":
        return ForcingSet.constant(**params)
    if name == "eps-perturbed":
        return ForcingSet.eps_perturbed(**params)
    raise ValueError(f"unknown forcing preset '{name}' (known: {', '.join(PRESETS)})")


@dataclass(frozen=True)
class ForcingSamples:
    """Point samples of the forcing on one grid pair at a given epsilon."""

    FT: np.ndarray   # (nx-1, nz)  at tangential velocity points
    FN: np.ndarray   # (nx, nz+1)  at all horizontal channel face points
    H1: np.ndarray   # (nx, ny)    at porous cell centers


def forcing_at(fs: ForcingSet, epsilon: float, grids) -> ForcingSamples:
    """Sample f2(eps) at channel velocity points and h1(eps) at porous centers."""
    xt = grids.x_nodes[1:-1][:, None]
    zc = grids.z_centers[None, :]
    xc = grids.x_centers[:, None]
    zn = grids.z_nodes[None, :]
    yc = grids.y_centers[None, :]
    shape_T = (grids.nx - 1, grids.nz)
    shape_N = (grids.nx, grids.nz + 1)
    shape_H = (grids.nx, grids.ny)
    FT = np.broadcast_to(fs.f2_T_at(epsilon, xt, zc), shape_T).astype(np.float64)
    FN = np.broadcast_to(fs.f2_N_at(epsilon, xc, zn), shape_N).astype(np.float64)
    H1 = np.broadcast_to(fs.h1_at(epsilon, xc, yc), shape_H).astype(np.float64)
    return ForcingSamples(FT=FT.copy(), FN=FN.copy(), H1=H1.copy())
