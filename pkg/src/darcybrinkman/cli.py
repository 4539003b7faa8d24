"""Command-line driver.

Subcommands:
  solve-eps    --config F --epsilon E [--dump-fields]
  solve-limit  --config F [--dump-fields]
  sweep        --config F
  mms          --case NAME --levels L1,L2,... [--config F]
  infsup       --problem eps|limit --levels L1,L2,... [--epsilon E] [--config F]
  check        --config F

All outputs land under the configured output directory.  Report CSVs are
byte-identical across repeated runs on the same inputs; figures are rendered
next to them.  Failures print one machine-parsable line
``error: <Kind>: <message>`` on stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import report
from .checks import run_checks
from .coefficients import NotElliptic, NotSymmetric
from .config import ConfigError, RunConfig, parse_config
from .epsilon import (apriori_quantities, assemble_epsilon,
                      energy_identity_residual, mass_residual, solve_epsilon)
from .grams import velocity_gram_epsilon, velocity_gram_limit
from .grids import build_grids
from .limit import assemble_limit, pressure_identity_residual, solve_limit
from .linalg import NonConvergence, SingularSystem, estimate_inf_sup
from .mms import InconsistentCase, get_case, mms_convergence
from .sweep import run_sweep, velocity_ratio


def _load_config(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig()
    with open(path) as f:
        return parse_config(f.read())


def _levels(raw: str) -> list[int]:
    return [int(s) for s in raw.split(",") if s.strip()]


def _cmd_solve_eps(args) -> int:
    cfg = _load_config(args.config)
    eps = float(args.epsilon)
    if not 0 < eps < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {eps}")
    g, _ = cfg.grids()
    sys_e = assemble_epsilon(cfg.coefficient_set(), cfg.forcing_set(), g, eps)
    sol = solve_epsilon(sys_e, **cfg.solver_options())
    ap = apriori_quantities(sol)
    out = cfg.output_dir
    report.write_csv(os.path.join(out, "summary.csv"),
                     ("epsilon", "kkt_residual", "energy_residual",
                      "mass_residual", "apriori_E", "ratio_T_N"),
                     [[eps, sol.kkt_residual,
                       energy_identity_residual(sol, sys_e),
                       mass_residual(sol, sys_e), ap["E"], velocity_ratio(sol)]])
    if args.dump_fields or cfg.dump_fields:
        report.dump_epsilon_fields(sol, out)
        report.render_field_figure(sol, out, "eps")
    print(f"solve-eps: eps={eps} kkt={sol.kkt_residual:.3e} -> {out}/")
    return 0


def _cmd_solve_limit(args) -> int:
    cfg = _load_config(args.config)
    g, _ = cfg.grids()
    c = cfg.coefficient_set()
    sys_l = assemble_limit(c, cfg.forcing_set(), g)
    sol = solve_limit(sys_l, **cfg.solver_options())
    out = cfg.output_dir
    report.write_csv(os.path.join(out, "summary.csv"),
                     ("kkt_residual", "pressure_identity_residual"),
                     [[sol.kkt_residual, pressure_identity_residual(sol, c)]])
    if args.dump_fields or cfg.dump_fields:
        report.dump_limit_fields(sol, out)
        report.render_field_figure(sol, out, "limit")
    print(f"solve-limit: kkt={sol.kkt_residual:.3e} -> {out}/")
    return 0


def _cmd_sweep(args) -> int:
    cfg = _load_config(args.config)
    g, _ = cfg.grids()
    rep = run_sweep(cfg.coefficient_set(), cfg.forcing_set(), g, cfg.epsilons,
                    solver_options=cfg.solver_options())
    out = cfg.output_dir
    report.write_sweep_csv(rep, out)
    report.write_rates_csv(rep, out)
    report.render_sweep_figures(rep, out)
    failures = [r.epsilon for r in rep.rows if r.error is not None]
    note = f" ({len(failures)} failed rows)" if failures else ""
    print(f"sweep: {len(rep.rows)} epsilons{note} -> {out}/sweep.csv")
    return 0


def _cmd_mms(args) -> int:
    cfg = _load_config(args.config)
    result = mms_convergence(get_case(args.case), _levels(args.levels))
    out = cfg.output_dir
    report.write_mms_csv(result, out)
    report.render_mms_figure(result, out)
    orders = " ".join(f"{f}={o[0]:.2f}" for f, o in sorted(result.orders.items()))
    print(f"mms {args.case}: {orders} -> {out}/")
    return 0


def _cmd_infsup(args) -> int:
    cfg = _load_config(args.config)
    eps = float(args.epsilon)
    reports = []
    for n in _levels(args.levels):
        g, _ = build_grids(cfg.domain_spec(), n, n, n)
        if args.problem == "eps":
            sys_ = assemble_epsilon(cfg.coefficient_set(), cfg.forcing_set(), g, eps)
            gram = velocity_gram_epsilon(g)
        else:
            sys_ = assemble_limit(cfg.coefficient_set(), cfg.forcing_set(), g)
            gram = velocity_gram_limit(g)
        reports.append(estimate_inf_sup(sys_, gram, tag=args.problem, resolution=n))
    out = cfg.output_dir
    report.write_infsup_csv(reports, out)
    report.render_infsup_figure(reports, out)
    consts = " ".join(f"{r.resolution}:{r.constant:.4f}" for r in reports)
    print(f"infsup {args.problem}: {consts} -> {out}/infsup.csv")
    return 0


def _cmd_check(args) -> int:
    cfg = _load_config(args.config)
    results = run_checks(cfg)
    report.write_csv(os.path.join(cfg.output_dir, "check.csv"),
                     ("check", "passed", "detail"),
                     [[name, ok, detail] for name, ok, detail in results])
    failed = 0
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        failed += 0 if ok else 1
    print(f"check: {len(results) - failed}/{len(results)} passed")
    return 0 if failed == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="darcy-brinkman",
        description="Darcy-Stokes thin-channel solver and Darcy-Brinkman "
                    "limit verification lab")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, **flags):
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="run configuration file")
        for flag, kw in flags.items():
            p.add_argument(flag, **kw)
        p.set_defaults(fn=fn)
        return p

    add("solve-eps", _cmd_solve_eps,
        **{"--epsilon": dict(required=True, type=float),
           "--dump-fields": dict(action="store_true")})
    add("solve-limit", _cmd_solve_limit,
        **{"--dump-fields": dict(action="store_true")})
    add("sweep", _cmd_sweep)
    add("mms", _cmd_mms,
        **{"--case": dict(required=True),
           "--levels": dict(required=True)})
    add("infsup", _cmd_infsup,
        **{"--problem": dict(required=True, choices=("eps", "limit")),
           "--levels": dict(required=True),
           "--epsilon": dict(default=0.25, type=float)})
    add("check", _cmd_check)
    return ap


def run_command(argv) -> int:
    """Entry point used by tests: parse argv, run, return the exit status."""
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.fn(args)
    except (ConfigError, NonConvergence, SingularSystem, NotSymmetric,
            NotElliptic, InconsistentCase, KeyError, ValueError,
            FileNotFoundError) as exc:
        msg = str(exc).replace("\n", " ")
        print(f"error: {type(exc).__name__}: {msg}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))
