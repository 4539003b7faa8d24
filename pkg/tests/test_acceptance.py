"""Acceptance criteria A1-A9 at full scale.

Every test prints one PASS/FAIL line (visible with ``pytest -s`` or in the
captured output).  The default corpus is the RunConfig default: unit square
porous region, 64x64 porous + 64x64 channel cells, Q = I, mu = 1, alpha = 0,
beta = 1, constant forcing f2_T = 1 with unit mass source h1 = 1, epsilon
sweep 1/2 .. 1/64.
"""

import time

import numpy as np
import pytest

from darcybrinkman.config import RunConfig
from darcybrinkman.epsilon import assemble_epsilon, solve_epsilon
from darcybrinkman.grams import velocity_gram_epsilon, velocity_gram_limit
from darcybrinkman.grids import build_grids
from darcybrinkman.limit import (assemble_limit, pressure_identity_residual,
                                 solve_limit)
from darcybrinkman.linalg import dense_inf_sup, estimate_inf_sup
from darcybrinkman.mms import mms_convergence
from darcybrinkman.norms import NormSuite
from darcybrinkman.sweep import run_sweep

CFG = RunConfig()
EPS_RUNTIME_LIMIT = 60.0


def verdict(name: str, ok: bool, detail: str) -> None:
    print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    assert ok, f"{name}: {detail}"


@pytest.fixture(scope="session")
def default_sweep():
    g, _ = CFG.grids()
    times = []
    import darcybrinkman.sweep as sweep_mod
    real = sweep_mod.solve_epsilon

    def timed(sys_e, **kw):
        t0 = time.perf_counter()
        sol = real(sys_e, **kw)
        times.append(time.perf_counter() - t0)
        return sol

    sweep_mod.solve_epsilon = timed
    try:
        rep = run_sweep(CFG.coefficient_set(), CFG.forcing_set(), g,
                        CFG.epsilons, solver_options=CFG.solver_options())
    finally:
        sweep_mod.solve_epsilon = real
    assert all(r.error is None for r in rep.rows)
    return rep, times


def row_at(rep, eps):
    return next(r for r in rep.rows if np.isclose(r.epsilon, eps))


def test_A1_energy_identity(default_sweep):
    rep, times = default_sweep
    worst = max(r.energy_residual for r in rep.rows)
    slowest = max(times)
    ok = worst <= 1e-10 and slowest <= EPS_RUNTIME_LIMIT
    verdict("A1 energy identity",
            ok, f"max residual {worst:.3e} (<= 1e-10), "
                f"slowest solve {slowest:.1f}s (<= {EPS_RUNTIME_LIMIT:.0f}s)")


def test_A2_uniform_apriori_bound(default_sweep):
    rep, _ = default_sweep
    E = np.array([r.apriori_E for r in rep.rows])
    spread = E.max() / E.min()
    slope, _ = rep.rates["apriori_E"]
    ok = spread <= 10.0 and abs(slope) <= 0.2
    verdict("A2 uniform a-priori bound", ok,
            f"max/min E = {spread:.2f} (<= 10), |slope| = {abs(slope):.3f} (<= 0.2)")


def test_A3_strong_convergence(default_sweep):
    rep, _ = default_sweep
    cols = ("err_v1_hdiv", "err_vT", "err_vN_hdz", "err_p1", "err_p2")
    details, ok = [], True
    r8, r64 = row_at(rep, 1 / 8), row_at(rep, 1 / 64)
    for col in cols:
        drop = getattr(r64, col) / getattr(r8, col)
        rate, r2 = rep.rates[col]
        good = drop <= 0.25 and rate > 0 and r2 >= 0.9
        ok &= good
        details.append(f"{col}: drop {drop:.3f} rate {rate:.2f} r2 {r2:.3f}")
    verdict("A3 strong convergence", ok, "; ".join(details))


def test_A4_vanishing_terms(default_sweep):
    rep, _ = default_sweep
    details, ok = [], True
    for col in ("err_dz_vT", "vanish_gradT_epsvN"):
        first = getattr(rep.rows[0], col)
        last = getattr(rep.rows[-1], col)
        good = first >= 4.0 * last
        ok &= good
        details.append(f"{col}: shrink x{first / last:.1f} (>= 4)")
    # module invariant: the twisted-term norms trend to zero monotonically
    for col in ("vanish_dzvT", "vanish_gradT_epsvN"):
        seq = rep.column(col)
        trend = all(b <= 1.05 * a for a, b in zip(seq, seq[1:]))
        final = seq[-1] <= 0.25 * seq[0]
        ok &= trend and final
        details.append(f"{col}: final/initial {seq[-1] / seq[0]:.3f} (<= 0.25)")
    verdict("A4 vanishing terms", ok, "; ".join(details))


def test_A5_velocity_ratio_blowup(default_sweep):
    rep, _ = default_sweep
    ratios = rep.column("ratio_T_N")
    growth = [b / a for a, b in zip(ratios, ratios[1:])]
    ok = all(g >= 1.8 for g in growth)
    verdict("A5 velocity-ratio blow-up", ok,
            "growth per halving " + " ".join(f"{g:.3f}" for g in growth)
            + " (each >= 1.8)")


def test_A6_interface_identities():
    g, lay = build_grids(CFG.domain_spec(), 32, 32, 32)
    c, fs = CFG.coefficient_set(), CFG.forcing_set()
    sol = solve_epsilon(assemble_epsilon(c, fs, g, 0.25))
    exact = (np.array_equal(sol.v1[:, g.ny], sol.vN[:, 0])
             and np.array_equal(sol.interface_vn, sol.vN[:, 0]))
    res = []
    for n in (16, 32, 64):
        gn, _ = build_grids(CFG.domain_spec(), n, n, n)
        lsol = solve_limit(assemble_limit(c, fs, gn))
        res.append(pressure_identity_residual(lsol, c))
    halving = all(0.7 * 0.5 * a <= b <= 1.3 * 0.5 * a
                  for a, b in zip(res, res[1:]))
    verdict("A6 interface identities", exact and halving,
            f"shared DOF exact (0 ulp): {exact}; pressure-identity residuals "
            + " ".join(f"{r:.3e}" for r in res) + " (halving +-30%)")


def test_A7_infsup_robustness():
    c, fs = CFG.coefficient_set(), CFG.forcing_set()
    details, ok = [], True
    for tag in ("eps", "limit"):
        consts = []
        for n in (6, 9, 12):
            g, _ = build_grids(CFG.domain_spec(), n, n, n)
            if tag == "eps":
                sys_ = assemble_epsilon(c, fs, g, 0.25)
                gram = velocity_gram_epsilon(g)
            else:
                sys_ = assemble_limit(c, fs, g)
                gram = velocity_gram_limit(g)
            rep = estimate_inf_sup(sys_, gram, tag=tag, resolution=n)
            oracle = dense_inf_sup(sys_, gram)
            good = abs(rep.constant - oracle) <= 1e-6
            ok &= good
            consts.append(rep.constant)
        spread = max(consts) / min(consts)
        ok &= spread <= 1.2
        details.append(f"{tag}: " + " ".join(f"{v:.4f}" for v in consts)
                       + f" spread x{spread:.3f} (<= 1.2), dense match <= 1e-6")
    verdict("A7 inf-sup robustness", ok, "; ".join(details))


def test_A8_mms_orders():
    details, ok = [], True
    lin = mms_convergence("darcy-linear", [4, 8, 16])
    exact = max(max(v) for v in lin.errors.values())
    ok &= exact <= 1e-12
    details.append(f"darcy-linear max err {exact:.2e} (<= 1e-12)")
    for name, fields in (("darcy-sine", ("p1", "v1")),
                         ("limit-sine", ("p1", "v1", "vT2", "p2")),
                         ("darcy-embedded", ("p1", "v1"))):
        res = mms_convergence(name, [8, 16, 32])
        for f in fields:
            order = res.orders[f][0]
            ok &= order >= 0.9
            details.append(f"{name}/{f}: order {order:.2f}")
    verdict("A8 MMS orders", ok, "; ".join(details))


def test_A9_wellposedness_stability():
    from darcybrinkman.coefficients import ForcingSet
    c = CFG.coefficient_set()
    zeta = 1e-3
    ratios = []
    for n in (8, 16):
        for eps in (0.5, 0.125):
            g, _ = build_grids(CFG.domain_spec(), n, n, n)
            ns = NormSuite(g)
            base_fs = CFG.forcing_set()
            pert_fs = ForcingSet.from_callables(
                f2_T=lambda x, z: 1.0 + 0.0 * x,
                h1=lambda x, y: 1.0 + zeta * np.sin(np.pi * x) * np.sin(np.pi * y))
            base = solve_epsilon(assemble_epsilon(c, base_fs, g, eps))
            pert = solve_epsilon(assemble_epsilon(c, pert_fs, g, eps))
            dsol = (ns.l2_porous(pert.u1 - base.u1, pert.v1 - base.v1)
                    + ns.l2_p1(pert.p1 - base.p1)
                    + ns.l2_T(pert.vT - base.vT) * eps
                    + ns.l2_p2(pert.p2 - base.p2))
            dh = ns.l2_p1(zeta * np.sin(np.pi * g.x_centers[:, None])
                          * np.sin(np.pi * g.y_centers[None, :]))
            ratios.append(dsol / dh)
    spread = max(ratios) / min(ratios)
    g, _ = build_grids(CFG.domain_spec(), 16, 16, 16)
    a = solve_epsilon(assemble_epsilon(c, CFG.forcing_set(), g, 0.25))
    b = solve_epsilon(assemble_epsilon(c, CFG.forcing_set(), g, 0.25))
    identical = np.array_equal(a.x, b.x) and np.array_equal(a.p, b.p)
    ok = spread <= 2.0 and identical
    verdict("A9 well-posedness stability", ok,
            f"perturbation ratios {' '.join(f'{r:.3f}' for r in ratios)} "
            f"spread x{spread:.2f} (<= 2); repeated solves bit-identical: "
            f"{identical}")
