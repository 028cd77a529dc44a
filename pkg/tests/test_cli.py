import json

from anticyclo_h10.cli import EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_OK, EXIT_USAGE, run_cli

GOLDEN = ["certify", "--p", "3", "--D", "5", "--e1", "56b1", "--e2", "392c1",
          "--externals", "bundled", "--sturm-bound", "formula", "--offline"]


def test_decompose_output(capsys):
    assert run_cli(["decompose", "--D", "5", "--p", "3", "--ell", "7"]) == EXIT_OK
    out = capsys.readouterr().out
    for line in ("h = 2", "mu = 0", "nu = 0", "(a, b) = (2, 3)", "(a*, b*) = (-41, 12)", "b* = 12", "t = 0", "s = 1"):
        assert line in out


def test_certify_golden_offline_is_deterministic(tmp_path, capsys):
    outs = []
    for i in range(2):
        path = tmp_path / f"cert{i}.json"
        assert run_cli(GOLDEN + ["--out", str(path)]) == EXIT_OK
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    doc = json.loads(outs[0])
    assert doc["conclusion"] == "negative-answer-all-layers"
    assert "negative-answer-all-layers" in capsys.readouterr().out


def test_certify_with_externals_file(tmp_path):
    ext = tmp_path / "ex5.json"
    ext.write_text(json.dumps({
        "schema_version": "1",
        "externals": {
            "rank_E1_Q": {"value": "0"}, "rank_E1_twist_Q": {"value": "0"},
            "rank_E2_Q": {"value": "1"}, "rank_E2_twist_Q": {"value": "1"},
        },
    }))
    argv = [a if a != "bundled" else str(ext) for a in GOLDEN]
    assert run_cli(argv + ["--out", str(tmp_path / "c.json")]) == EXIT_INCONCLUSIVE  # Sha missing


def test_missing_externals_is_usage_error(tmp_path):
    argv = [a if a != "bundled" else str(tmp_path / "nope.json") for a in GOLDEN]
    assert run_cli(argv) == EXIT_USAGE


def test_malformed_flags(capsys):
    assert run_cli(["certify", "--p", "3"]) == EXIT_USAGE
    assert run_cli(["decompose", "--D", "five", "--p", "3", "--ell", "7"]) == EXIT_USAGE
    assert run_cli(["frobnicate"]) == EXIT_USAGE
    assert run_cli([]) == EXIT_USAGE
    assert "usage" in capsys.readouterr().err


def test_refuted_instance_exit_code(tmp_path):
    argv = [a if a != "5" else "2" for a in GOLDEN]
    assert run_cli(argv + ["--out", str(tmp_path / "c.json")]) == EXIT_FAIL


def test_congruence_command(capsys):
    assert run_cli(["congruence", "--e1", "56b1", "--e2", "392c1", "--p", "3", "--offline"]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)["report"]
    assert report["verdict"] == "pass" and report["strip_E1"] == [7]
    assert run_cli(["congruence", "--e1", "56b1", "--e2", "392c1", "--p", "3", "--strip", "none",
                    "--bound", "200", "--offline"]) == EXIT_FAIL


def test_localdata_command(capsys):
    assert run_cli(["localdata", "--curve", "392c1", "--field", "Kprime", "--D", "5", "--ell", "2", "--offline"]) == 0
    (row,) = json.loads(capsys.readouterr().out)
    assert row["kodaira"] == "I1*"
    assert run_cli(["localdata", "--curve", "56b1", "--ell", "7", "--offline"]) == 0
    (row,) = json.loads(capsys.readouterr().out)
    assert row["kind"] == "split-multiplicative"
    assert run_cli(["localdata", "--curve", "56b1", "--field", "K", "--ell", "7"]) == EXIT_USAGE


def test_fetch_offline_cold_cache(tmp_path, capsys):
    assert run_cli(["fetch", "--label", "56b1", "--offline", "--cache-dir", str(tmp_path)]) == EXIT_FAIL
    assert "offline" in capsys.readouterr().err
