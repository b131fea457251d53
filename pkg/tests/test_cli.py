import json
import subprocess
import sys

import pytest

from artifact.cli import EXIT_CONFIG, EXIT_FAIL, EXIT_OVERFLOW, EXIT_PASS, main


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def run(argv, tmp_path):
    out = tmp_path / "out"
    code = main(argv + ["--out", str(out)])
    report = json.loads((out / "report.json").read_text()) if (out / "report.json").exists() else None
    return code, report, out


def test_galois_on_z4_reports_three_nodes(tmp_path):
    code, rep, _ = run(["galois", "--group", "Z4"], tmp_path)
    assert code == EXIT_PASS
    check = rep["sections"][0]["checks"][0]
    assert check["details"]["nodes"] == 3 and check["passed"]


def test_cuntz_index_is_reported(tmp_path, capsys):
    code, rep, out = run(["cuntz", "--n", "2", "--depth", "3"], tmp_path)
    assert code == EXIT_PASS
    index = [c for c in rep["sections"][0]["checks"] if c["name"] == "index[depth=3]"][0]
    assert index["details"]["index"] == "4*1"
    assert "4*1" in capsys.readouterr().out


def test_missing_unit_fiber_is_a_config_error(tmp_path, capsys):
    cfg = write(tmp_path, "bad.ini", "[model]\nkind = group\ngroup = Z4\n[object]\nfibers = 1, 2\n")
    assert main(["check", "--config", cfg]) == EXIT_CONFIG
    assert "unit fiber" in capsys.readouterr().err


def test_unparsable_config_is_a_config_error(tmp_path):
    cfg = write(tmp_path, "bad.ini", "[model]\nkind group\n")
    assert main(["check", "--config", cfg]) == EXIT_CONFIG


def test_empty_suite_gives_header_only(tmp_path):
    cfg = write(tmp_path, "e.ini", "[model]\nkind = group\ngroup = Z3\n[run]\nsuite = none\n")
    code, rep, _ = run(["check", "--config", cfg], tmp_path)
    assert code == EXIT_PASS
    assert rep["sections"] == [] and rep["summary"]["checks"] == 0
    assert {"config_hash", "seed"} <= set(rep["header"])


def test_two_suites_concatenate_in_declared_order(tmp_path):
    base = "[model]\nkind = group\ngroup = Z3\n[run]\nsamples = 3\nsuite = "
    both = run(["check", "--config", write(tmp_path, "b.ini", base + "galois, axioms\n")], tmp_path / "b")[1]
    assert [s["suite"] for s in both["sections"]] == ["galois", "axioms"]
    for k, name in enumerate(("galois", "axioms")):
        single = run(["check", "--config", write(tmp_path, f"{name}.ini", base + name + "\n")], tmp_path / name)[1]
        strip = lambda sec: [{k: v for k, v in c.items() if k != "inputs_hash"} for c in sec["checks"]]  # noqa: E731
        assert strip(single["sections"][0]) == strip(both["sections"][k])


def test_reports_are_deterministic(tmp_path):
    cfg = write(tmp_path, "d.ini", "[model]\nkind = group\ngroup = S3\n[run]\nsuite = crossed\nsamples = 3\nseed = 7\n")
    run(["check", "--config", cfg], tmp_path / "one")
    run(["check", "--config", cfg], tmp_path / "two")
    a = (tmp_path / "one" / "out" / "report.json").read_text()
    b = (tmp_path / "two" / "out" / "report.json").read_text()
    assert a == b
    rep = json.loads(a)
    assert rep["header"]["seed"] == 7
    assert list(json.loads(a)) == sorted(json.loads(a))
    for c in rep["sections"][0]["checks"]:
        assert {"name", "inputs_hash", "defect", "threshold", "passed"} <= set(c)


def test_text_report_mirrors_json(tmp_path, capsys):
    code, rep, out = run(["semicircular", "--cap", "6"], tmp_path)
    assert code == EXIT_PASS
    text = (out / "report.txt").read_text()
    capsys.readouterr()
    assert main(["report", "--input", str(out / "report.json")]) == EXIT_PASS
    assert capsys.readouterr().out == text
    for c in rep["sections"][0]["checks"]:
        assert c["name"] in text


def test_config_hash_round_trip(tmp_path, capsys):
    cfg = write(tmp_path, "h.ini", "[run]\nsuite = galois\n[model]\ngroup = Z2\nkind = group\n")
    _, rep, _ = run(["check", "--config", cfg], tmp_path)
    capsys.readouterr()
    main(["report", "--config", cfg])
    canonical = capsys.readouterr().out
    assert canonical.strip().endswith(rep["header"]["config_hash"])
    again = write(tmp_path, "h2.ini", canonical)
    _, rep2, _ = run(["check", "--config", again], tmp_path / "again")
    assert rep2["header"]["config_hash"] == rep["header"]["config_hash"]


def test_overflow_exit_code(tmp_path):
    assert main(["semicircular", "--model", "block", "--cap", "5"]) == EXIT_OVERFLOW


def test_failed_check_exit_code(tmp_path):
    cfg = write(tmp_path, "f.ini", "[model]\nkind = group\ngroup = S3\n[run]\nsuite = axioms\n")
    assert main(["check", "--config", cfg, "--tol", "1e-300"]) == EXIT_FAIL


def test_output_directory_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("ARTIFACT_OUT", str(tmp_path / "env"))
    assert main(["galois", "--group", "Z2"]) == EXIT_PASS
    assert (tmp_path / "env" / "report.json").exists()


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "artifact.cli", "galois", "--group", "Z3"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "lattice_matches_subgroups" in proc.stdout


def test_unknown_subcommand_is_rejected():
    with pytest.raises(SystemExit):
        main(["frobnicate"])
