"""Manufactured verification cases and their convergence studies.

Each case starts from a closed-form porous pressure (and, for the interface
cases, a tangential velocity), derives every other field symbolically with
sympy, and carries a residual oracle that substitutes the stored fields back
into the governing strong form on a sample lattice.  A case whose oracle
exceeds 1e-10 is inconsistent and aborts the study.

Cases:
  darcy-linear    linear pressure, constant velocity; the staggered scheme
                  reproduces it to roundoff at every resolution
  darcy-sine      smooth Darcy flow with inhomogeneous pressure data on the
                  whole porous boundary; first-order-or-better L2 rates
  limit-sine      coupled porous/interface fields solving the reduced limit
                  problem exactly (alpha = beta = 0, Q = I)
  darcy-embedded  porous fields with zero interface flux and zero trace
                  pressure, so the full coupled eps-problem has a quiescent
                  channel; exercises the coupled solver against Darcy rates
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import sympy as sy

from . import darcy
from .coefficients import CoefficientSet, ForcingSet
from .epsilon import assemble_epsilon, solve_epsilon
from .fitting import fit_loglog
from .grids import DomainSpec, build_grids
from .limit import assemble_limit, solve_limit
from .linalg import schur_solve
from .norms import NormSuite

ORACLE_TOL = 1e-10
_X, _Y = sy.symbols("x y", real=True)


class InconsistentCase(ValueError):
    """Manufactured fields fail their own strong-form residual oracle."""


def _lam(expr, *symbols) -> Callable:
    f = sy.lambdify(symbols, expr, "numpy")

    def call(*args):
        out = f(*args)
        return np.broadcast_to(np.asarray(out, dtype=np.float64),
                               np.broadcast_shapes(*(np.shape(a) for a in args))).copy()

    return call


@dataclass
class ManufacturedCase:
    """Closed-form fields plus the data making them exact solutions."""

    name: str
    kind: str                      # "darcy" | "limit" | "eps-embedded"
    coefficients: CoefficientSet
    exprs: dict = field(default_factory=dict)    # sympy expressions by field
    funcs: dict = field(default_factory=dict)    # lambdified counterparts
    epsilon: float = 0.5           # used by eps-embedded only

    def residual_max(self, samples: int = 7) -> float:
        """Evaluate the strong-form residuals of the stored fields."""
        xs = np.linspace(0.05, 0.95, samples)
        ys = np.linspace(-0.95, -0.05, samples)
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        c, e = self.coefficients, self.exprs
        Q = c.Q
        r = []
        # Darcy law and mass balance hold for every case
        gp = [sy.diff(e["p1"], _X), sy.diff(e["p1"], _Y)]
        r.append(_lam(Q[0, 0] * e["u1"] + Q[0, 1] * e["v1"] + gp[0], _X, _Y)(X, Y))
        r.append(_lam(Q[1, 0] * e["u1"] + Q[1, 1] * e["v1"] + gp[1], _X, _Y)(X, Y))
        div = sy.diff(e["u1"], _X) + sy.diff(e["v1"], _Y)
        r.append(_lam(div - e["h1"], _X, _Y)(X, Y))
        if self.kind == "limit":
            from .coefficients import bjs_tangential_weight
            sq = bjs_tangential_weight(c)
            vn = e["v1"].subs(_Y, 0)
            mom = (sy.diff(e["p2"], _X) + c.beta * sq * e["vT"]
                   - c.mu * sy.diff(e["vT"], _X, 2) - e["fT"])
            r.append(_lam(mom, _X)(xs))
            r.append(_lam(sy.diff(e["vT"], _X) - vn, _X)(xs))
            ident = e["p1"].subs(_Y, 0) - e["p2"] - (c.mu + c.alpha) * vn
            r.append(_lam(ident, _X)(xs))
            r.append(np.array([float(e["vT"].subs(_X, 0)),
                               float(e["vT"].subs(_X, 1))]))
        if self.kind == "eps-embedded":
            # quiescent channel requires zero interface flux and trace pressure
            r.append(_lam(e["v1"].subs(_Y, 0), _X)(xs))
            r.append(_lam(e["p1"].subs(_Y, 0), _X)(xs))
        if self.kind in ("limit", "eps-embedded"):
            # these run through the production assembly, whose outer boundary
            # is homogeneously drained; pure Darcy cases bring their own data
            p1f = _lam(e["p1"], _X, _Y)
            r.append(p1f(np.zeros_like(ys), ys))
            r.append(p1f(np.ones_like(ys), ys))
            r.append(p1f(xs, -np.ones_like(xs)))
        return max(float(np.max(np.abs(np.atleast_1d(v)))) for v in r)


def _derive_darcy_fields(p1_expr, c: CoefficientSet) -> tuple[dict, dict]:
    Qinv = np.linalg.inv(c.Q)
    gp = [sy.diff(p1_expr, _X), sy.diff(p1_expr, _Y)]
    u1 = -(Qinv[0, 0] * gp[0] + Qinv[0, 1] * gp[1])
    v1 = -(Qinv[1, 0] * gp[0] + Qinv[1, 1] * gp[1])
    h1 = sy.simplify(sy.diff(u1, _X) + sy.diff(v1, _Y))
    exprs = {"p1": p1_expr, "u1": u1, "v1": v1, "h1": h1}
    funcs = {k: _lam(v, _X, _Y) for k, v in exprs.items()}
    return exprs, funcs


def _case_darcy_linear() -> ManufacturedCase:
    c = CoefficientSet.isotropic()
    exprs, funcs = _derive_darcy_fields(
        sy.Rational(3, 10) + sy.Rational(7, 10) * _X - sy.Rational(1, 2) * _Y, c)
    return ManufacturedCase("darcy-linear", "darcy", c, exprs, funcs)


def _case_darcy_sine() -> ManufacturedCase:
    c = CoefficientSet.isotropic()
    exprs, funcs = _derive_darcy_fields(
        sy.sin(sy.pi * _X) * sy.cos(sy.pi * _Y / 2), c)
    return ManufacturedCase("darcy-sine", "darcy", c, exprs, funcs)


def _case_darcy_embedded() -> ManufacturedCase:
    c = CoefficientSet.isotropic()
    exprs, funcs = _derive_darcy_fields(
        sy.sin(sy.pi * _X) * (1 - sy.cos(2 * sy.pi * _Y)), c)
    return ManufacturedCase("darcy-embedded", "eps-embedded", c, exprs, funcs)


def _case_limit_sine() -> ManufacturedCase:
    from .coefficients import bjs_tangential_weight
    c = CoefficientSet.isotropic(alpha=0.0, beta=0.0)
    exprs, funcs = _derive_darcy_fields(sy.sin(2 * sy.pi * _X) * (_Y + 1), c)
    vn = exprs["v1"].subs(_Y, 0)                      # interface normal trace
    vT = sy.integrate(vn, (_X, 0, _X))                # div_T vT = v1.n, vT(0)=0
    assert sy.simplify(vT.subs(_X, 1)) == 0
    p2 = sy.simplify(exprs["p1"].subs(_Y, 0) - (c.mu + c.alpha) * vn)
    sq = bjs_tangential_weight(c)
    fT = sy.simplify(sy.diff(p2, _X) + c.beta * sq * vT
                     - c.mu * sy.diff(vT, _X, 2))
    exprs.update({"vT": vT, "p2": p2, "fT": fT})
    funcs.update({"vT": _lam(vT, _X), "p2": _lam(p2, _X), "fT": _lam(fT, _X)})
    return ManufacturedCase("limit-sine", "limit", c, exprs, funcs)


_BUILDERS = {
    "darcy-linear": _case_darcy_linear,
    "darcy-sine": _case_darcy_sine,
    "limit-sine": _case_limit_sine,
    "darcy-embedded": _case_darcy_embedded,
}

CASE_NAMES = tuple(_BUILDERS)


def get_case(name: str) -> ManufacturedCase:
    if name not in _BUILDERS:
        raise KeyError(f"unknown manufactured case '{name}' "
                       f"(known: {', '.join(CASE_NAMES)})")
    return _BUILDERS[name]()


def _solve_darcy_subproblem(case: ManufacturedCase, n: int):
    """Porous-only mixed solve with pressure data from the case on all sides."""
    g, lay = build_grids(DomainSpec(), n, n, 2)
    c = case.coefficients
    M1 = darcy.assemble_darcy_mass(c, g)
    D1 = darcy.assemble_divergence(g)
    p_bc = case.funcs["p1"]
    f = np.zeros(lay.n_porous)
    jj = np.arange(g.ny)
    # natural pressure data: -p_bc * (w.n) per boundary face, outward normal
    f[lay.iu1(np.zeros(g.ny, int), jj)] += p_bc(0.0, g.y_centers) * g.dy
    f[lay.iu1(np.full(g.ny, g.nx), jj)] -= p_bc(g.spec.porous_width, g.y_centers) * g.dy
    ii = np.arange(g.nx)
    f[lay.iv1(ii, np.zeros(g.nx, int))] += p_bc(g.x_centers, -g.spec.porous_depth) * g.dx
    f[lay.iv1(ii, np.full(g.nx, g.ny))] -= p_bc(g.x_centers, 0.0) * g.dx
    h = (case.funcs["h1"](g.x_centers[:, None], g.y_centers[None, :]).ravel()
         * g.dx * g.dy)
    # one KKT refinement pass: linear cases must reproduce to roundoff
    v, q = schur_solve(M1, D1, f, h, refine=1)
    p = -q
    return g, lay, v, p


def _porous_errors(case, g, lay, v, p) -> dict:
    ns = NormSuite(g)
    u1 = v[:lay.n_pu].reshape(g.nx + 1, g.ny)
    v1 = v[lay.n_pu:lay.n_porous].reshape(g.nx, g.ny + 1)
    ue = case.funcs["u1"](g.x_nodes[:, None], g.y_centers[None, :])
    ve = case.funcs["v1"](g.x_centers[:, None], g.y_nodes[None, :])
    pe = case.funcs["p1"](g.x_centers[:, None], g.y_centers[None, :])
    p1 = p[:g.nx * g.ny].reshape(g.nx, g.ny)
    return {"p1": ns.l2_p1(p1 - pe), "v1": ns.l2_porous(u1 - ue, v1 - ve)}


def _limit_errors(case, g, sol) -> dict:
    ns = NormSuite(g)
    xin = g.x_nodes[1:-1]
    errs = _porous_errors(case, g, sol.layout.porous,
                          sol.x[:sol.layout.n_porous], sol.p1.ravel())
    errs["vT2"] = ns.l2_gamma_nodes(sol.vT - case.funcs["vT"](xin))
    errs["p2"] = ns.l2_gamma_cells(sol.p2 - case.funcs["p2"](g.x_centers))
    return errs


@dataclass
class MmsResult:
    case: str
    levels: tuple[int, ...]
    errors: dict[str, list[float]]        # field -> per-level error
    orders: dict[str, tuple[float, float]]  # field -> (order, r2)

    def rows(self):
        fields = sorted(self.errors)
        for k, lev in enumerate(self.levels):
            yield [lev] + [self.errors[f][k] for f in fields]


def mms_convergence(case: ManufacturedCase | str, levels) -> MmsResult:
    """Per-level L2 errors of a manufactured case with fitted orders.

    The case's residual oracle runs first; an inconsistent case aborts with
    a diagnostic instead of producing misleading rates.
    """
    if isinstance(case, str):
        case = get_case(case)
    res = case.residual_max()
    if res > ORACLE_TOL:
        raise InconsistentCase(
            f"case {case.name}: strong-form residual {res:.3e} > {ORACLE_TOL}")
    levels = tuple(int(n) for n in levels)
    errors: dict[str, list[float]] = {}
    for n in levels:
        if case.kind == "darcy":
            g, lay, v, p = _solve_darcy_subproblem(case, n)
            errs = _porous_errors(case, g, lay, v, p)
        elif case.kind == "limit":
            g, _ = build_grids(DomainSpec(), n, n, 2)
            fs = ForcingSet.from_callables(
                f2_T=lambda x, z: case.funcs["fT"](x) + 0.0 * z,
                h1=case.funcs["h1"])
            sol = solve_limit(assemble_limit(case.coefficients, fs, g))
            errs = _limit_errors(case, g, sol)
        elif case.kind == "eps-embedded":
            g, lay = build_grids(DomainSpec(), n, n, n)
            fs = ForcingSet.from_callables(h1=case.funcs["h1"])
            sol = solve_epsilon(assemble_epsilon(case.coefficients, fs, g,
                                                 case.epsilon))
            errs = _porous_errors(case, g, lay, sol.x[:lay.n_porous],
                                  sol.p[:g.nx * g.ny])
            ns = NormSuite(g)
            errs["channel_l2"] = np.hypot(ns.l2_T(sol.vT), ns.l2_N(sol.vN))
        else:
            raise ValueError(f"unknown case kind {case.kind}")
        for k, e in errs.items():
            errors.setdefault(k, []).append(float(e))
    orders = {}
    hs = [1.0 / n for n in levels]
    for f, errs in errors.items():
        if len(levels) >= 2 and all(e > 0 for e in errs):
            orders[f] = fit_loglog(hs, errs)
    return MmsResult(case=case.name, levels=levels, errors=errors, orders=orders)
