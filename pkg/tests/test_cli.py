import csv
import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from qriccati.cli import EXIT_INPUT_ERROR, EXIT_NOT_APPLICABLE, EXIT_OK, main
from qriccati.errors import ParseError, ValidationError
from qriccati.io import load_system, parse_system, system_from_dict, system_to_dict

SAMPLES = Path(__file__).resolve().parent.parent / "samples"


def write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj) if not isinstance(obj, str) else obj)
    return path


def run(tmp_path, *args):
    return main([*args, "--out", str(tmp_path / "out")])


def read_json(path):
    return json.loads(Path(path).read_text())


def test_parse_harmonics_readout():
    sys_ = system_from_dict({"T": 1.0, "d": {"c1": {"harmonics": [[1, 0.3, 0]]}}}).system
    assert sys_.d.components[1].harmonics == [(1, 0.3, 0.0)]
    assert sys_.a == system_from_dict({"T": 1.0}).system.a


def test_missing_period_names_field():
    with pytest.raises(ValidationError) as info:
        system_from_dict({"a": {"c0": {"const": 1.0}}})
    assert info.value.field == "T"


def test_unknown_key_rejected():
    with pytest.raises(ValidationError):
        system_from_dict({"T": 1.0, "e": {}})


def test_bad_json_reports_line():
    with pytest.raises(ParseError) as info:
        parse_system('{\n "T": 1.0,\n oops\n}')
    assert info.value.line == 3


def test_tabulated_component_is_fitted():
    samples = [1.0 + 0.5 * math.cos(2 * math.pi * k / 32) for k in range(32)]
    loaded = system_from_dict({"T": 1.0, "a": {"c0": {"samples": samples, "n_harmonics": 3}}})
    assert loaded.system.a.components[0].const == pytest.approx(1.0, abs=1e-12)
    assert loaded.fit_residuals["a.c0"] <= 1e-12


def test_system_round_trip():
    sys_ = load_system(SAMPLES / "quaternionic.json").system
    assert system_from_dict(system_to_dict(sys_)).system == sys_


def test_check_tanh(tmp_path):
    assert run(tmp_path, "check", str(SAMPLES / "tanh.json")) == EXIT_OK
    rep = read_json(tmp_path / "out" / "tanh.report.json")
    assert rep["theorem31"]["route"] == "Corollary32"
    assert rep["theorem11"]["applicable"] is True


def test_check_not_applicable_exit_code(tmp_path):
    assert run(tmp_path, "check", str(SAMPLES / "zero_a.json")) == EXIT_NOT_APPLICABLE
    rep = read_json(tmp_path / "out" / "zero_a.report.json")
    assert rep["theorem31"]["route"] == "NotApplicable"


def test_find_writes_report_and_trajectory(tmp_path):
    assert run(tmp_path, "find", str(SAMPLES / "tanh.json"), "--emit-trajectory") == EXIT_OK
    rep = read_json(tmp_path / "out" / "tanh.report.json")
    assert rep["status"] == "Found"
    assert rep["solution"]["q0"][0] == pytest.approx(1.0, abs=1e-6)
    assert rep["solution"]["companion"]["q0"][0] == pytest.approx(-1.0, abs=1e-6)
    lines = (tmp_path / "out" / "tanh.traj.csv").read_text().splitlines()
    assert lines[0].startswith("t,")
    assert float(lines[-1].split(",")[0]) == pytest.approx(1.0)


def test_find_not_applicable(tmp_path):
    assert run(tmp_path, "find", str(SAMPLES / "zero_a.json")) == EXIT_NOT_APPLICABLE
    assert read_json(tmp_path / "out" / "zero_a.report.json")["status"] == "NotApplicable"


@pytest.mark.parametrize("content", ['{"a": {}}', "{not json", '{"T": -1.0}'], ids=["no-period", "bad-json", "negative-period"])
def test_input_errors_exit_4(tmp_path, content):
    path = write(tmp_path, "bad.json", content)
    assert run(tmp_path, "check", str(path)) == EXIT_INPUT_ERROR


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as info:
        main(["check", str(SAMPLES / "tanh.json"), "--rtol", "-1"])
    assert info.value.code == EXIT_INPUT_ERROR


def test_missing_file_exit_4(tmp_path):
    assert run(tmp_path, "check", str(tmp_path / "nope.json")) == EXIT_INPUT_ERROR


def test_reduce_case_iv(tmp_path):
    obj = {"T": 1.0, "a": {"c0": {"const": -1.0}, "c1": {"const": -0.5}}, "d": {"c0": {"const": 1.0}}}
    path = write(tmp_path, "neg.json", obj)
    assert run(tmp_path, "reduce", str(path)) == EXIT_OK
    rep = read_json(tmp_path / "out" / "neg.report.json")
    assert rep["source_case"] == "IV" and rep["final_case"] == "I"
    reduced = load_system(tmp_path / "out" / "neg.reduced.json").system
    assert reduced.a.components[0].const == 1.0
    assert run(tmp_path, "reduce", str(path), "--strict-proof") == EXIT_NOT_APPLICABLE
    assert read_json(tmp_path / "out" / "neg.report.json")["status"] == "StrictRefusal"


def test_classify(tmp_path):
    assert run(tmp_path, "classify", str(SAMPLES / "tanh.json"), "--qa=-1", "--qb", "1") == EXIT_OK
    rep = read_json(tmp_path / "out" / "tanh.report.json")
    assert rep["classification"] == "DriftNegative"
    assert rep["drift_rate"] == pytest.approx(-2.0, abs=1e-6)


def test_integrate(tmp_path):
    assert run(tmp_path, "integrate", str(SAMPLES / "tanh.json"), "--q0", "0,0,0,0", "--periods", "2") == EXIT_OK
    rows = list(csv.reader((tmp_path / "out" / "tanh.traj.csv").open()))
    assert float(rows[-1][0]) == pytest.approx(2.0)


def test_compare_table(tmp_path):
    assert run(tmp_path, "compare", str(SAMPLES)) == EXIT_OK
    rows = list(csv.DictReader((tmp_path / "out" / "compare.csv").open()))
    by_name = {r["system"]: r for r in rows}
    assert set(by_name) >= {"tanh", "quaternionic", "zero_a", "imaginary_drift"}
    assert by_name["zero_a"]["found"] == "false"
    assert by_name["imaginary_drift"]["theorem11_applicable"] == "false"
    assert by_name["imaginary_drift"]["found"] == "true"


def test_reports_are_byte_identical(tmp_path):
    outs = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        cmd = [sys.executable, "-m", "qriccati.cli"]
        for sub in ("find", "check"):
            subprocess.run([*cmd, sub, str(SAMPLES / "quaternionic.json"), "--out", str(out / sub)], check=True, capture_output=True)
        outs.append({p.relative_to(out): p.read_bytes() for p in sorted(out.rglob("*.json"))})
    assert outs[0] == outs[1]
    assert len(outs[0]) == 2
