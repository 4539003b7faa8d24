"""The runnable invariant suite behind the ``check`` subcommand.

Each check returns (name, passed, detail).  Structural invariants run at a
reduced resolution (capped per direction) so the whole suite stays fast on
large configured grids; coefficient checks always use the configured values.
"""

from __future__ import annotations

import numpy as np

from . import darcy
from .coefficients import sqrt_Q, validate
from .config import RunConfig
from .epsilon import (apriori_quantities, assemble_epsilon,
                      energy_identity_residual, solve_epsilon)
from .grams import velocity_gram_epsilon, velocity_gram_limit
from .grids import build_grids
from .limit import assemble_limit, pressure_identity_residual, solve_limit
from .linalg import dense_inf_sup, estimate_inf_sup, schur_solve
from .norms import NormSuite

CHECK_CAP = 12


def _capped(cfg: RunConfig):
    nx = min(cfg.nx, CHECK_CAP)
    ny = min(cfg.ny, CHECK_CAP)
    nz = min(cfg.nz, CHECK_CAP)
    return build_grids(cfg.domain_spec(), nx, ny, nz)


def run_checks(cfg: RunConfig) -> list[tuple[str, bool, str]]:
    results = []

    def record(name, ok, detail=""):
        results.append((name, bool(ok), detail))

    c = cfg.coefficient_set()
    fs = cfg.forcing_set()
    g, lay = _capped(cfg)
    eps0 = cfg.epsilons[0]

    # grid bookkeeping: closed-form face counts and the interface bijection
    n_vert = (g.nx + 1) * g.ny
    n_horz = g.nx * (g.ny + 1)
    ok = (lay.n_pu == n_vert and lay.n_pv == n_horz
          and lay.interface.size == g.nx
          and np.array_equal(np.sort(lay.interface), lay.interface))
    record("grid-face-counts", ok,
           f"pu={lay.n_pu} pv={lay.n_pv} shared={lay.interface.size}")

    cq = validate(c)
    S = sqrt_Q(c)
    comm = float(np.abs(S @ c.Q - c.Q @ S).max())
    sq_err = float(np.abs(S @ S - c.Q).max())
    record("coefficients", cq > 0 and comm <= 1e-12 and sq_err <= 1e-12,
           f"C_Q={cq:.3e} commutator={comm:.1e} sqrt-defect={sq_err:.1e}")

    M1 = darcy.assemble_darcy_mass(c, g)
    lam_min = float(np.linalg.eigvalsh(M1.toarray())[0])
    bound = cq * g.dx * g.dy / 2          # half boxes at the outer boundary
    record("darcy-mass-spd", lam_min >= bound - 1e-12,
           f"lambda_min={lam_min:.3e} >= C_Q*minvol={bound:.3e}")

    sys_e = assemble_epsilon(c, fs, g, eps0)
    Acsr = sys_e.A.to_csr()
    asym = abs(Acsr - Acsr.T).max() if Acsr.nnz else 0.0
    record("velocity-block-symmetric", asym == 0.0, f"max |A - A'|={asym:.1e}")

    sol = solve_epsilon(sys_e, **cfg.solver_options())
    record("kkt-residual", sol.kkt_residual <= 1e-10 *
           (1 + np.linalg.norm(sys_e.f) + np.linalg.norm(sys_e.h)),
           f"residual={sol.kkt_residual:.3e}")
    er = energy_identity_residual(sol, sys_e)
    record("energy-identity", er <= 1e-10, f"residual={er:.3e}")
    mass = float(np.max(np.abs(sys_e.B @ sol.x - sys_e.h)))
    record("mass-conservation", mass <= 1e-10, f"max cell defect={mass:.3e}")

    shared = sol.x[lay.interface]
    record("interface-shared-dof",
           np.array_equal(sol.v1[:, g.ny], shared)
           and np.array_equal(sol.vN[:, 0], shared),
           "v1.n and vN2|_Gamma are one unknown (0 ulp)")

    sol_b = solve_epsilon(assemble_epsilon(c, fs, g, eps0), **cfg.solver_options())
    record("determinism", np.array_equal(sol.x, sol_b.x)
           and np.array_equal(sol.p, sol_b.p), "repeated solve bit-identical")

    sys_l = assemble_limit(c, fs, g)
    lsol = solve_limit(sys_l, **cfg.solver_options())
    pid = pressure_identity_residual(lsol, c)
    record("limit-pressure-identity", pid <= 10.0 * (c.mu + c.alpha + 1) * g.dy,
           f"max defect={pid:.3e} (first order in mesh)")

    v2, q2 = schur_solve(sys_l.A, sys_l.B, sys_l.f, sys_l.h,
                         p0=np.full(sys_l.h.size, 0.37))
    record("pressure-uniqueness",
           float(np.max(np.abs(-q2 - lsol.p))) <= 1e-8 * (1 + np.max(np.abs(lsol.p))),
           "perturbed-start solve matches (no pressure nullspace)")

    ns = NormSuite(g)
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(100):
        u = rng.standard_normal((g.nx, g.nz + 1))
        lhs = ns.trace_gamma_N(u)
        rhs = np.sqrt(2.0) * (ns.l2_N(u) + ns.dz_of_N(u))
        worst = max(worst, lhs - rhs)
    record("trace-inequality", worst <= 1e-12, f"max violation={worst:.1e}")

    g6, _ = build_grids(cfg.domain_spec(), 6, 6, 6)
    se = assemble_epsilon(c, fs, g6, 0.25)
    est = estimate_inf_sup(se, velocity_gram_epsilon(g6), tag="eps", resolution=6)
    oracle = dense_inf_sup(se, velocity_gram_epsilon(g6))
    record("infsup-eps-vs-dense", abs(est.constant - oracle) <= 1e-6,
           f"power={est.constant:.8f} dense={oracle:.8f}")
    sl = assemble_limit(c, fs, g6)
    est_l = estimate_inf_sup(sl, velocity_gram_limit(g6), tag="limit", resolution=6)
    oracle_l = dense_inf_sup(sl, velocity_gram_limit(g6))
    record("infsup-limit-vs-dense", abs(est_l.constant - oracle_l) <= 1e-6,
           f"power={est_l.constant:.8f} dense={oracle_l:.8f}")

    ap = apriori_quantities(sol)
    record("apriori-finite", all(np.isfinite(v) and v >= 0 for v in ap.values()),
           f"E={ap['E']:.4e}")
    return results
