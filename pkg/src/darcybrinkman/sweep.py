"""The epsilon-convergence lab: error columns, sweep driver, rate fits.

A sweep solves the limit problem once and the epsilon problem per epsilon,
then measures how the epsilon fields approach the limit fields in the norms
of the underlying spaces.  Column conventions:

  err_v1_hdiv   ||v1_eps - v1||_Hdiv(Omega_1)
  err_vT        ||eps vT_eps - vT|| + ||grad_T(eps vT_eps) - grad_T vT||
                (the scaled tangential velocity is the convergent quantity;
                its weak limit defines the interface Brinkman velocity)
  err_dz_vT     ||d_z(eps vT_eps)||   (limit value is z-independent)
  err_vN_hdz    ||vN_eps - xi|| in the vertical-derivative norm
  err_p1        L2 + Darcy-gradient surrogate of the H1 pressure error
  err_p2        ||p2_eps - p2||_L2(Omega_2), p2 extended constant in z
  vanish_dzvT        ||d_z vT_eps||        (unscaled vanishing term)
  vanish_gradT_epsvN ||grad_T(eps vN_eps)||

Per-epsilon solver failures are recorded on the row without aborting the
remaining sweep.  Rows are ordered by decreasing epsilon; rate fits are
ordinary least squares on log-log points over all successful rows.
"""

from __future__ import annotations

from dataclasses import dataclass, fields as dc_fields

from .coefficients import CoefficientSet, ForcingSet
from .epsilon import (EpsilonSolution, apriori_quantities, assemble_epsilon,
                      energy_identity_residual, solve_epsilon)
from .fitting import fit_loglog
from .grids import GridPair
from .limit import LimitSolution, assemble_limit, reconstruct_xi, solve_limit
from .linalg import NonConvergence, SingularSystem
from .norms import NormSuite

RATIO_FLOOR = 1e-14

ERROR_COLUMNS = ("err_v1_hdiv", "err_vT", "err_dz_vT",
                 "err_vN_hdz", "err_p1", "err_p2")
CSV_COLUMNS = ("epsilon",) + ERROR_COLUMNS + (
    "energy_residual", "apriori_E", "ratio_T_N",
    "vanish_dzvT", "vanish_gradT_epsvN")
RATE_COLUMNS = ERROR_COLUMNS + ("apriori_E", "ratio_T_N",
                                "vanish_dzvT", "vanish_gradT_epsvN")


@dataclass
class SweepRow:
    epsilon: float
    err_v1_hdiv: float | None = None
    err_vT: float | None = None
    err_dz_vT: float | None = None
    err_vN_hdz: float | None = None
    err_p1: float | None = None
    err_p2: float | None = None
    energy_residual: float | None = None
    apriori_E: float | None = None
    ratio_T_N: float | None = None
    vanish_dzvT: float | None = None
    vanish_gradT_epsvN: float | None = None
    error: str | None = None

    def values(self):
        return {f.name: getattr(self, f.name) for f in dc_fields(self)
                if f.name not in ("epsilon", "error")}


@dataclass
class ConvergenceReport:
    rows: list
    rates: dict[str, tuple[float, float]]   # column -> (rate, r2)
    nx: int
    ny: int
    nz: int

    def column(self, name: str) -> list:
        return [getattr(r, name) for r in self.rows]


def velocity_ratio(eps_sol: EpsilonSolution) -> float | None:
    """Tangential-over-normal channel speed ratio; None for a still channel."""
    ns = NormSuite(eps_sol.grids)
    _, _, vT, vN = eps_sol.layout.split_velocity(eps_sol.x)
    denom = ns.l2_N(vN)
    if denom < RATIO_FLOOR:
        return None
    return ns.l2_T(vT) / denom


def compare_to_limit(eps_sol: EpsilonSolution, lim_sol: LimitSolution,
                     norms: NormSuite) -> dict[str, float]:
    """Error columns of one epsilon solution against the limit solution."""
    if eps_sol.grids != lim_sol.grids or norms.grids != eps_sol.grids:
        raise ValueError("epsilon and limit solutions live on different grids")
    g = eps_sol.grids
    e = eps_sol.epsilon
    u1, v1, vT, vN = eps_sol.layout.split_velocity(eps_sol.x)
    du1, dv1 = u1 - lim_sol.u1, v1 - lim_sol.v1
    dvT = e * vT - lim_sol.vT[:, None]            # limit field is z-independent
    xi = reconstruct_xi(lim_sol, g)
    return {
        "err_v1_hdiv": norms.hdiv_porous(du1, dv1),
        "err_vT": norms.l2_T(dvT) + norms.grad_T_of_T(dvT),
        "err_dz_vT": e * norms.dz_of_T(vT),
        "err_vN_hdz": norms.h_dz_N(vN - xi),
        "err_p1": norms.h1_surrogate_p1(eps_sol.p1 - lim_sol.p1, du1, dv1,
                                        eps_sol.Q),
        "err_p2": norms.l2_p2(eps_sol.p2 - lim_sol.p2[:, None]),
    }


def run_sweep(c: CoefficientSet, fs: ForcingSet, g: GridPair, epsilons,
              *, solver_options: dict | None = None) -> ConvergenceReport:
    """Solve limit once and the epsilon problem per epsilon; fit the rates."""
    epsilons = [float(e) for e in epsilons]
    if any(e <= 0 or e >= 1 for e in epsilons):
        raise ValueError("every epsilon must lie in (0, 1)")
    if any(b >= a for a, b in zip(epsilons, epsilons[1:])):
        raise ValueError("epsilon list must be strictly decreasing")
    opts = solver_options or {}
    ns = NormSuite(g)
    lim = solve_limit(assemble_limit(c, fs, g), **opts)
    rows = []
    for e in epsilons:
        row = SweepRow(epsilon=e)
        try:
            sys_e = assemble_epsilon(c, fs, g, e)
            sol = solve_epsilon(sys_e, **opts)
        except (NonConvergence, SingularSystem) as exc:
            row.error = f"{type(exc).__name__}: {exc}"
            rows.append(row)
            continue
        errs = compare_to_limit(sol, lim, ns)
        for k, v in errs.items():
            setattr(row, k, v)
        row.energy_residual = energy_identity_residual(sol, sys_e)
        ap = apriori_quantities(sol)
        row.apriori_E = ap["E"]
        row.ratio_T_N = velocity_ratio(sol)
        _, _, vT, vN = sol.layout.split_velocity(sol.x)
        row.vanish_dzvT = ns.dz_of_T(vT)
        row.vanish_gradT_epsvN = e * ns.grad_T_of_N(vN)
        rows.append(row)
    rates = fit_rates(rows)
    return ConvergenceReport(rows=rows, rates=rates, nx=g.nx, ny=g.ny, nz=g.nz)


def fit_rates(rows) -> dict[str, tuple[float, float]]:
    """Log-log OLS rate of every positive column over the successful rows."""
    rates: dict[str, tuple[float, float]] = {}
    ok = [r for r in rows if r.error is None]
    if len(ok) < 2:
        return rates
    eps = [r.epsilon for r in ok]
    for col in RATE_COLUMNS:
        vals = [getattr(r, col) for r in ok]
        if all(v is not None and v > 0 for v in vals):
            rates[col] = fit_loglog(eps, vals)
    return rates
