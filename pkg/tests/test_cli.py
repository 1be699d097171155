import json

import numpy as np
import pytest

from laue_lab.cli import (
    EXIT_NUMERIC,
    EXIT_OK,
    EXIT_USAGE,
    EXIT_VERDICT,
    emit,
    main,
    records_to_csv,
    rng_from_seed,
)
from laue_lab.quadrature import IntegralRecord


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_algebra_suite_passes(capsys):
    code, out, _ = run(capsys, "verify", "algebra", "--seed", "7")
    assert code == EXIT_OK
    assert out.startswith("quantity,component,value,grid_N,h,refinement_ratio,tolerance,verdict")
    assert "duality_property" in out
    assert ",fail" not in out


def test_poincare_suite_passes(capsys):
    code, out, _ = run(capsys, "verify", "poincare", "--seed", "3")
    assert code == EXIT_OK
    assert "killing_residual_generators" in out


def test_identities_suite_strict(capsys):
    code, out, _ = run(capsys, "verify", "identities", "--seed", "1", "--strict")
    assert code == EXIT_OK
    assert "contracted_current_refinement" in out


def test_conservation_suite(capsys):
    code, out, _ = run(capsys, "verify", "conservation")
    assert code == EXIT_OK
    assert "charge_difference" in out
    assert "source_volume_match" in out


def test_coulomb_classical_fails_by_design(capsys):
    code, out, _ = run(
        capsys, "laue", "classical", "--scenario", "coulomb_shell",
        "--beta", "0.6", "--format", "csv", "--grid-n", "24",
    )
    assert code == EXIT_VERDICT
    assert "four_vector_residual" in out
    assert "verdict_four_vector" in out
    # the stress table carries the one-third entries
    lines = [l for l in out.splitlines() if l.startswith("stress_T11")]
    assert len(lines) == 1
    value = float(lines[0].split(",")[2])
    p0 = float([l for l in out.splitlines() if l.startswith("P0,")][0].split(",")[2])
    assert value == pytest.approx(p0 / 3.0, rel=5e-3)


def test_completed_shell_classical_passes(capsys):
    code, out, _ = run(
        capsys, "laue", "classical", "--scenario", "completed_shell",
        "--beta", "0.6", "--grid-n", "24",
    )
    assert code == EXIT_OK


def test_fake_covariance_command(capsys):
    code, out, _ = run(
        capsys, "laue", "fake", "--scenario", "uniform_field_box", "--grid-n", "24",
    )
    assert code == EXIT_OK
    assert "fake_covariance" in out
    assert ",fail" not in out


def test_equivariance_command(capsys):
    code, out, _ = run(
        capsys, "laue", "equivariance", "--scenario", "gaussian_dust", "--grid-n", "24",
    )
    assert code == EXIT_OK
    assert "equivariance_full" in out
    assert "equivariance_restricted" in out


def test_moving_dust_rejected_as_usage(capsys):
    code, _, err = run(capsys, "laue", "classical", "--scenario", "moving_dust")
    assert code == EXIT_USAGE
    assert "stationary" in err


def test_unknown_scenario_usage_error(capsys):
    code, _, err = run(capsys, "scenario", "black_body")
    assert code == EXIT_USAGE
    assert "unknown scenario" in err


def test_unknown_flag_usage_error(capsys):
    code, _, _ = run(capsys, "verify", "algebra", "--frobnicate")
    assert code == EXIT_USAGE


def test_scenario_command_emits_momentum(capsys):
    code, out, _ = run(capsys, "scenario", "gaussian_dust", "--grid-n", "24")
    assert code == EXIT_OK
    p0 = float([l for l in out.splitlines() if l.startswith("P0,")][0].split(",")[2])
    assert p0 == pytest.approx(np.pi**1.5, rel=1e-5)


def test_config_file_roundtrip(tmp_path, capsys):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[run]\nseed = 11\nformat = json\n\n[scenario.gaussian_dust]\nsigma = 0.5\n")
    code, out, _ = run(capsys, "--config", str(cfg), "scenario", "gaussian_dust", "--grid-n", "24")
    assert code == EXIT_OK
    rows = json.loads(out)
    p0 = [r for r in rows if r["quantity"] == "P0"][0]["value"]
    assert p0 == pytest.approx(np.pi**1.5 * 0.125, rel=1e-5)


def test_flag_overrides_config(tmp_path, capsys):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[run]\nformat = json\n")
    code, out, err = run(capsys, "--config", str(cfg), "verify", "algebra", "--format", "csv")
    assert code == EXIT_OK
    assert out.startswith("quantity,")  # csv won, config said json
    assert "overrides config value" in err


def test_config_unknown_key_rejected(tmp_path, capsys):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[run]\nfrobnicate = 1\n")
    code, _, err = run(capsys, "--config", str(cfg), "verify", "algebra")
    assert code == EXIT_USAGE
    assert "unknown config key" in err


def test_determinism_identical_bytes(capsys):
    _, out1, _ = run(capsys, "verify", "algebra", "--seed", "42")
    _, out2, _ = run(capsys, "verify", "algebra", "--seed", "42")
    assert out1 == out2


def test_out_flag_writes_file(tmp_path, capsys):
    target = tmp_path / "report.csv"
    code, out, _ = run(capsys, "verify", "algebra", "--out", str(target))
    assert code == EXIT_OK
    assert out == ""
    assert target.read_text().startswith("quantity,")


def test_unwritable_out_is_numeric_fault(tmp_path, capsys):
    code, _, err = run(capsys, "verify", "algebra", "--out", str(tmp_path / "no" / "x.csv"))
    assert code == EXIT_NUMERIC
    assert "cannot write" in err


def test_emit_empty_report_header_only():
    assert records_to_csv([]) == "quantity,component,value,grid_N,h,refinement_ratio,tolerance,verdict\n"


def test_emit_json_round_trip():
    rec = IntegralRecord("thing[x=1]", 0.5, "grid", h=1e-3, tolerance=1e-6, verdict="pass")
    rows = json.loads(emit([rec], "json"))
    assert rows[0]["quantity"] == "thing"
    assert rows[0]["component"] == "x=1"
    assert rows[0]["value"] == 0.5
    assert rows[0]["h"] == 1e-3


def test_emit_markdown_table():
    rec = IntegralRecord("p", 1.25, "g")
    text = emit([rec], "md")
    assert text.splitlines()[0].startswith("| quantity |")
    assert "| p | 1.25 | g |" in text


def test_csv_quoting_safe_for_commas():
    rec = IntegralRecord("x[a,b]", 1.0, "g")
    text = records_to_csv([rec])
    # component with a comma must stay one field
    assert '"a,b"' in text


def test_rng_is_counter_based_and_seeded():
    a = rng_from_seed(9).standard_normal(4)
    b = rng_from_seed(9).standard_normal(4)
    assert np.array_equal(a, b)
    assert isinstance(np.random.Generator(np.random.Philox(9)).bit_generator, np.random.Philox)
