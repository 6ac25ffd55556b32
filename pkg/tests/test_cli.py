"""Command-line behavior: exit codes, artifact files, config/flag merging.

Everything runs in-process through main(argv) so coverage and debuggers see
the same code a shell invocation would hit.
"""
import json
import os

import numpy as np

from varan.cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, main
from varan.report import read_bundle_members_csv, read_d2_samples_csv

# small grids keep the end-to-end runs quick without changing any code path
FAST_GRIDS = """\
[grids]
bundle_levels = 5
bundle_per_shell = 12
svar_pts_per_axis = 41
tilt_directions = 16
tilt_radius_levels = 5
d2_directions = 8
epi_levels = 4
epi_pts_per_axis = 11
"""


def _cfg_file(tmp_path, body):
    p = tmp_path / "run.cfg"
    p.write_text(body)
    return str(p)


#### exit codes ####


def test_corpus_list_exit_ok(capsys):
    assert main(["corpus-list"]) == EXIT_OK
    out = capsys.readouterr().out
    for name in ("huber", "quad_s", "paper_example", "usc_jump"):
        assert name in out
    assert "negative-control" in out  # usc_jump and friends are labeled


def test_bad_flag_is_config_error(capsys):
    assert main(["analyze", "--no-such-flag"]) == EXIT_CONFIG
    assert main([]) == EXIT_CONFIG  # a verb is required


def test_unknown_function_is_config_error(tmp_path, capsys):
    rc = main(["analyze", "--func", "nosuch", "--anchor", "0", "--out", str(tmp_path)])
    assert rc == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_anchor_dim_mismatch_is_config_error(tmp_path, capsys):
    rc = main(["analyze", "--func", "quad_s", "--anchor", "0,0", "--out", str(tmp_path)])
    assert rc == EXIT_CONFIG


def test_malformed_param_and_vector_are_config_errors(tmp_path):
    base = ["analyze", "--func", "quad_s", "--out", str(tmp_path)]
    assert main(base + ["--param", "s2.0", "--anchor", "0"]) == EXIT_CONFIG
    assert main(base + ["--anchor", "abc"]) == EXIT_CONFIG


def test_unknown_suite_is_config_error(capsys):
    assert main(["suite", "--suite", "nope"]) == EXIT_CONFIG


def test_infeasible_anchor_is_numerical_error(tmp_path, capsys):
    # indicator of a box: the value outside is infinite, so the anchor fails
    rc = main(
        ["analyze", "--func", "indicator_box", "--anchor", "5.0", "--subgrad", "0.0",
         "--out", str(tmp_path / "run")]
    )
    assert rc == EXIT_NUMERICAL
    assert "numerical failure" in capsys.readouterr().err


#### analyze artifacts ####


def test_analyze_writes_all_artifacts(tmp_path, capsys):
    cfg = _cfg_file(tmp_path, FAST_GRIDS)
    out = str(tmp_path / "run")
    rc = main(
        ["analyze", "--config", cfg, "--func", "quad_s", "--param", "s=2.0",
         "--anchor", "0.0", "--subgrad", "0.0", "--out", out]
    )
    assert rc == EXIT_OK
    for name in ("report.json", "bundle_members.csv", "d2_samples.csv", "epi_certificates.json"):
        assert os.path.exists(os.path.join(out, name)), name

    with open(os.path.join(out, "report.json")) as fh:
        report = json.load(fh)
    assert report["function"] == "quad_s"
    assert report["params"]["s"] == 2.0
    assert report["anchor"] == {"x": [0.0], "v": [0.0], "fx": 0.0}

    # s x^2 has one second-order behavior everywhere: every member is s/2
    members = read_bundle_members_csv(os.path.join(out, "bundle_members.csv"))
    assert members
    assert all(abs(q.A[0, 0] - 1.0) < 1e-3 for q in members)

    rows = read_d2_samples_csv(os.path.join(out, "d2_samples.csv"))
    assert {tuple(r["direction"]) for r in rows} == {(1.0,), (-1.0,)}
    assert all(abs(r["value"] - 2.0) < 1e-3 for r in rows)
    assert not any(r["low_confidence"] for r in rows)

    with open(os.path.join(out, "epi_certificates.json")) as fh:
        cert = json.load(fh)
    assert cert["function"] == "quad_s"
    assert cert["epi"]["quotients_epi_converge"] is True


def test_config_file_with_flag_overrides(tmp_path):
    body = FAST_GRIDS + "\n".join(
        ["[function]", "name = quad_s", "s = 2.5", "", "[anchor]", "x = 0.0", "v = 0.0",
         "", "[run]", "epsilon = 0.4", ""]
    )
    cfg = _cfg_file(tmp_path, body)
    out = str(tmp_path / "override")
    rc = main(["analyze", "--config", cfg, "--param", "s=3.0", "--out", out])
    assert rc == EXIT_OK
    with open(os.path.join(out, "report.json")) as fh:
        report = json.load(fh)
    assert report["params"]["s"] == 3.0  # flag beats the file
    assert report["config"]["epsilon"] == 0.4  # file value survives
    assert report["config"]["bundle_per_shell"] == 12


#### single-purpose verbs ####


def test_bundle_verb_prints_members(tmp_path, capsys):
    cfg = _cfg_file(tmp_path, FAST_GRIDS)
    rc = main(["bundle", "--config", cfg, "--func", "huber",
               "--anchor", "0.0", "--subgrad", "0.0"])
    assert rc == EXIT_OK
    out = capsys.readouterr().out
    assert "huber: " in out and "members" in out
    assert "mu = " in out


def test_tilt_verb_prints_report(tmp_path, capsys):
    cfg = _cfg_file(tmp_path, FAST_GRIDS)
    rc = main(["tilt", "--config", cfg, "--func", "quad_s", "--param", "s=2.0",
               "--anchor", "0.0", "--subgrad", "0.0"])
    assert rc == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert doc["config"]["stable"] is True
    assert abs(doc["kappa"] - 0.5) < 0.05  # argmin moves v/s for s x^2


def test_cnv_verb_prints_modulus(capsys):
    rc = main(["cnv", "--func", "quad_s", "--param", "s=2.0",
               "--anchor", "0.0", "--subgrad", "0.0"])
    assert rc == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("cnv = ")
    assert abs(float(out.split()[2]) - 2.0) < 1e-4
