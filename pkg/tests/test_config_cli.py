import os

import pytest
from dataclasses import replace

from darcybrinkman.cli import run_command
from darcybrinkman.config import (ConstraintViolation, RunConfig, TypeMismatch,
                                  UnknownKey, parse_config, render_config)


# --- parsing -------------------------------------------------------------------

def test_minimal_config_gets_documented_defaults():
    cfg = parse_config("resolution.nx = 16\n")
    assert cfg.nx == 16 and cfg.ny == 64 and cfg.nz == 64
    assert cfg.Q == (1.0, 0.0, 0.0, 1.0)
    assert cfg.mu == 1.0 and cfg.alpha == 0.0 and cfg.beta == 1.0
    assert cfg.preset == "constant" and cfg.f2_T == 1.0 and cfg.h1 == 1.0
    assert cfg.epsilons[0] == 0.5 and len(cfg.epsilons) == 6


def test_comments_and_blank_lines_ignored():
    cfg = parse_config("""
# full-line comment
resolution.nx = 8   # trailing comment

coefficients.mu = 2.0
""")
    assert cfg.nx == 8 and cfg.mu == 2.0


def test_unknown_key_names_key_and_line():
    with pytest.raises(UnknownKey) as e:
        parse_config("resolution.nx = 8\nresolution.nw = 9\n")
    assert e.value.key == "resolution.nw" and e.value.line == 2


def test_type_mismatch_names_key_and_line():
    with pytest.raises(TypeMismatch) as e:
        parse_config("resolution.nx = eight\n")
    assert e.value.key == "resolution.nx" and e.value.line == 1


def test_asymmetric_tensor_rejected():
    with pytest.raises(ConstraintViolation) as e:
        parse_config("coefficients.Q = 1.0, 0.5, 0.2, 1.0\n")
    assert e.value.key == "coefficients.Q"


def test_non_decreasing_epsilons_rejected():
    with pytest.raises(ConstraintViolation) as e:
        parse_config("sweep.epsilons = 0.5, 0.5\n")
    assert e.value.key == "sweep.epsilons"
    with pytest.raises(ConstraintViolation):
        parse_config("sweep.epsilons = 0.5, 0.25, 1.5\n")


def test_resolution_floor_rejected():
    with pytest.raises(ConstraintViolation) as e:
        parse_config("resolution.ny = 1\n")
    assert e.value.key == "resolution.ny"


@pytest.mark.parametrize("mutation", [
    {},
    {"nx": 8, "ny": 6, "nz": 4},
    {"Q": (2.0, 0.5, 0.5, 3.0), "alpha": 0.25, "beta": 0.0},
    {"preset": "eps-perturbed", "pert_f2_T": 0.5, "pert_h1": -1.0},
    {"epsilons": (0.9, 0.3, 0.1), "dump_fields": True},
    {"inner": "cg", "inner_tol": 1e-11, "output_dir": "elsewhere"},
])
def test_render_parse_roundtrip(mutation):
    cfg = replace(RunConfig(), **mutation)
    assert parse_config(render_config(cfg)) == cfg


# --- CLI ------------------------------------------------------------------------

SMALL = """
resolution.nx = 6
resolution.ny = 6
resolution.nz = 6
sweep.epsilons = 0.5, 0.25, 0.125
output.dir = {out}
"""


def write_cfg(tmp_path, name="run.cfg", out="out"):
    p = tmp_path / name
    p.write_text(SMALL.format(out=tmp_path / out))
    return str(p), str(tmp_path / out)


def test_sweep_subcommand_writes_reports_and_figures(tmp_path):
    cfg, out = write_cfg(tmp_path)
    assert run_command(["sweep", "--config", cfg]) == 0
    made = set(os.listdir(out))
    assert {"sweep.csv", "rates.csv", "sweep_errors.png",
            "sweep_diagnostics.png"} <= made
    header = open(os.path.join(out, "sweep.csv")).readline().strip()
    assert header == ("epsilon,err_v1_hdiv,err_vT,err_dz_vT,err_vN_hdz,"
                      "err_p1,err_p2,energy_residual,apriori_E,ratio_T_N,"
                      "vanish_dzvT,vanish_gradT_epsvN")
    assert open(os.path.join(out, "rates.csv")).readline().strip() == "quantity,rate,r2"


def test_sweep_outputs_byte_identical_across_runs(tmp_path):
    cfg1, out1 = write_cfg(tmp_path, "a.cfg", "out_a")
    cfg2, out2 = write_cfg(tmp_path, "b.cfg", "out_b")
    assert run_command(["sweep", "--config", cfg1]) == 0
    assert run_command(["sweep", "--config", cfg2]) == 0
    for name in ("sweep.csv", "rates.csv"):
        a = open(os.path.join(out1, name), "rb").read()
        b = open(os.path.join(out2, name), "rb").read()
        assert a == b, name


def test_solve_limit_dump_fields_contract(tmp_path):
    cfg, out = write_cfg(tmp_path)
    assert run_command(["solve-limit", "--config", cfg, "--dump-fields"]) == 0
    made = set(os.listdir(out))
    assert {"p1.csv", "p2.csv", "v1_x.csv", "v1_y.csv", "vT2.csv",
            "xi.csv", "summary.csv", "fields.png"} <= made
    assert open(os.path.join(out, "p1.csv")).readline().strip() == "x,y,value"
    assert open(os.path.join(out, "p2.csv")).readline().strip() == "x,value"
    assert open(os.path.join(out, "xi.csv")).readline().strip() == "x,z,value"


def test_solve_eps_dump_fields_contract(tmp_path):
    cfg, out = write_cfg(tmp_path)
    assert run_command(["solve-eps", "--config", cfg, "--epsilon", "0.25",
                        "--dump-fields"]) == 0
    made = set(os.listdir(out))
    assert {"p1.csv", "p2.csv", "v1_x.csv", "v1_y.csv", "vT2.csv",
            "vN2.csv", "summary.csv", "fields.png"} <= made
    assert open(os.path.join(out, "p2.csv")).readline().strip() == "x,z,value"


def test_infsup_subcommand_row_count(tmp_path):
    cfg, out = write_cfg(tmp_path)
    assert run_command(["infsup", "--problem", "limit",
                        "--levels", "4,6,8", "--config", cfg]) == 0
    lines = open(os.path.join(out, "infsup.csv")).read().strip().splitlines()
    assert len(lines) == 4     # header + 3 rows
    assert lines[0] == "problem,level,constant,eigenvalue,iterations"


def test_mms_subcommand(tmp_path):
    cfg, out = write_cfg(tmp_path)
    assert run_command(["mms", "--case", "darcy-linear", "--levels", "4,8",
                        "--config", cfg]) == 0
    made = set(os.listdir(out))
    assert {"mms_darcy-linear.csv", "mms_darcy-linear_rates.csv",
            "mms_darcy-linear.png"} <= made


def test_check_subcommand_passes(tmp_path, capsys):
    cfg, out = write_cfg(tmp_path)
    assert run_command(["check", "--config", cfg]) == 0
    printed = capsys.readouterr().out
    assert "FAIL" not in printed and "PASS" in printed


def test_bad_epsilon_is_one_line_machine_parsable_error(tmp_path, capsys):
    cfg, _ = write_cfg(tmp_path)
    rc = run_command(["solve-eps", "--config", cfg, "--epsilon", "1.5"])
    assert rc != 0
    err = capsys.readouterr().err
    assert err.startswith("error: ") and err.count("\n") == 1


def test_config_error_reported_with_key_and_line(tmp_path, capsys):
    p = tmp_path / "bad.cfg"
    p.write_text("resolution.nx = 8\nsweep.epsilons = 0.5, 0.5\n")
    rc = run_command(["sweep", "--config", str(p)])
    assert rc != 0
    err = capsys.readouterr().err
    assert "sweep.epsilons" in err and "line 2" in err


def test_unknown_mms_case_fails_cleanly(tmp_path, capsys):
    cfg, _ = write_cfg(tmp_path)
    rc = run_command(["mms", "--case", "nope", "--levels", "4,8",
                      "--config", cfg])
    assert rc != 0
    assert "error: " in capsys.readouterr().err
