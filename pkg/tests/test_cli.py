import io
import json
import subprocess
import sys

import jsonschema
import pytest

from isingmin.cli import RunConfig, UsageError, main
from isingmin.exact import exhaustive_ground_state
from isingmin.io import REPORT_SCHEMA, parse_instance, read_distribution, read_instance


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_generate_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.ising", tmp_path / "b.ising"
    for p in (a, b):
        assert run(capsys, "generate", "--dims", "15,15", "--periodic", "1",
                   "--dist", "gaussian", "--seed", "1", "-o", str(p))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    s = read_instance(a)
    assert s.num_spins == 225


def test_generate_torus_degrees(capsys):
    code, out, _ = run(capsys, "generate", "--dims", "6,6", "--periodic", "2")
    assert code == 0
    assert set(parse_instance(out).degrees()) == {4}


def test_solve_bnb_matches_exhaustive(tmp_path, capsys):
    inst = tmp_path / "i.ising"
    run(capsys, "generate", "--dims", "4,5", "--field", "gaussian", "--seed", "3", "-o", str(inst))
    _, out, _ = run(capsys, "solve", str(inst), "--solver", "bnb")
    doc = json.loads(out)
    jsonschema.validate(doc, REPORT_SCHEMA)
    assert doc["proven_optimal"]
    assert doc["best_energy"] == exhaustive_ground_state(read_instance(inst)).best_energy
    assert doc["run_config"]["instance"] == str(inst)
    _, out, _ = run(capsys, "solve", str(inst), "--solver", "exhaustive")
    assert json.loads(out)["best_energy"] == doc["best_energy"]


def test_solve_local_close_to_bnb(capsys):
    args = ["solve", "--dims", "7,7", "--gen-seed", "4"]
    _, out, _ = run(capsys, *args)
    opt = json.loads(out)["best_energy"]
    _, out, _ = run(capsys, *args, "--solver", "local", "--starts", "16", "--workers", "2")
    doc = json.loads(out)
    assert doc["best_energy"] - opt <= 0.05 * abs(opt)
    assert len(doc["extra"]["start_energies"]) == 16
    assert doc["run_config"]["generator"]["dims"] == [7, 7]


def test_no_dominance_changes_node_counts(capsys):
    args = ["solve", "--dims", "5,5", "--periodic", "2", "--dist", "bimodal"]
    on = json.loads(run(capsys, *args)[1])
    off = json.loads(run(capsys, *args, "--no-dominance")[1])
    assert on["best_energy"] == off["best_energy"]
    assert on["nodes_explored"] < off["nodes_explored"]
    assert off["dominance_prunes"] == 0 and off["run_config"]["options"]["use_dominance"] is False


def test_node_limit_flag(capsys):
    doc = json.loads(run(capsys, "solve", "--dims", "8,8", "--periodic", "2",
                         "--node-limit", "100")[1])
    assert not doc["proven_optimal"] and doc["nodes_explored"] <= 100


def test_solve_reads_stdin(monkeypatch, capsys):
    monkeypatch.setattr(sys, "stdin", io.StringIO("ising 1 2 1\ne 2 0 1 1\noffset 0\n"))
    doc = json.loads(run(capsys, "solve", "-", "--solver", "exhaustive")[1])
    assert doc["best_energy"] == -1


def test_samples_csv_identical_across_workers(tmp_path, capsys):
    paths = []
    for w in (1, 4):
        p = tmp_path / f"s{w}.csv"
        j = tmp_path / f"r{w}.json"
        assert run(capsys, "solve", "--dims", "9,9", "--periodic", "2", "--solver", "local",
                   "--starts", "20", "--seed", "5", "--workers", str(w), "--no-timing",
                   "--samples", str(p), "-o", str(j))[0] == 0
        paths.append((p, j))
    assert paths[0][0].read_bytes() == paths[1][0].read_bytes()
    a, b = (json.loads(j.read_text()) for _, j in paths)
    for doc in (a, b):
        del doc["run_config"]["workers"], doc["run_config"]["outputs"]
    assert a == b


def test_factor_21(capsys):
    doc = json.loads(run(capsys, "factor", "21", "--starts", "50")[1])
    assert doc["results"][0]["success_probability"] > 0


def test_factor_35_truncated_fails(capsys):
    doc = json.loads(run(capsys, "factor", "35", "--truncate", "2", "--starts", "50")[1])
    assert doc["results"][0]["encoder"] == "truncated"
    assert doc["results"][0]["success_probability"] == 0


def test_factor_both_encoders(tmp_path, capsys):
    csv = tmp_path / "d.csv"
    doc = json.loads(run(capsys, "factor", "51", "--encoder", "both", "--starts", "40",
                         "--csv", str(csv))[1])
    assert set(doc["comparison"]["num_spins"]) == {"direct", "ancilla"}
    assert doc["comparison"]["num_spins"]["ancilla"] > doc["comparison"]["num_spins"]["direct"]
    for enc in ("direct", "ancilla"):
        hist = read_distribution(tmp_path / f"d.{enc}.csv")
        assert sum(hist.values()) == 40


def test_factor_csv_identical_across_workers(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(capsys, "factor", "91", "--starts", "30", "--workers", "1", "--csv", str(a))
    run(capsys, "factor", "91", "--starts", "30", "--workers", "3", "--csv", str(b))
    assert a.read_bytes() == b.read_bytes()


def test_bench_small(tmp_path, capsys):
    csv = tmp_path / "t.csv"
    code, out, _ = run(capsys, "bench", "--shapes", "10,10", "20,50", "--rounds", "2",
                       "--passes", "3", "--csv", str(csv))
    assert code == 0
    lines = csv.read_text().splitlines()
    assert lines[0] == "num_spins,round,passes,mean_pass_seconds"
    sizes = [int(l.split(",")[0]) for l in lines[1:]]
    assert set(sizes) == {100, 1000}
    doc = json.loads(out)
    assert doc["sizes"] == [100, 1000] and len(doc["ratios"]) == 1


def test_classify(capsys):
    doc = json.loads(run(capsys, "classify", "--dims", "2")[1])
    assert doc["hardness"] == "poly_mwpm"
    doc = json.loads(run(capsys, "classify", "--dims", "2", "--periodic", "2", "--field")[1])
    assert doc["hardness"] == "np_hard"
    doc = json.loads(run(capsys, "classify", "--dims", "2", "--signs", "nonnegative")[1])
    assert doc["hardness"] == "poly_maxflow"


@pytest.mark.parametrize("argv, code, kind", [
    (["solve"], 2, "usage"),
    (["frobnicate"], 2, "usage"),
    (["solve", "--dims", "3,3", "--starts", "0", "--solver", "local"], 2, "usage"),
    (["solve", "--dims", "3,3", "--seed", "-1"], 2, "usage"),
    (["factor", "20"], 2, "usage"),
    (["factor", "35", "--encoder", "ancilla", "--truncate", "2"], 2, "usage"),
    (["solve", "/nonexistent/x.ising"], 1, "FileNotFoundError"),
    (["generate", "--dims", "1,3"], 1, "ValueError"),
    (["classify", "--dims", "2", "--periodic", "3"], 1, "ValueError"),
])
def test_errors_are_json_on_stderr(capsys, argv, code, kind):
    got, out, err = run(capsys, *argv)
    assert got == code
    doc = json.loads(err)
    assert doc["error"] == kind and doc["message"]


def test_malformed_instance_reports_line(tmp_path, capsys):
    p = tmp_path / "bad.ising"
    p.write_text("ising 1 2 1\ne 3 0 1 1\n")
    code, _, err = run(capsys, "solve", str(p))
    assert code == 1 and "line 2" in json.loads(err)["message"]


def test_run_config_validation():
    with pytest.raises(UsageError):
        RunConfig("solve", workers=0).validate()
    with pytest.raises(UsageError):
        RunConfig("solve", limits={"node_limit": -5}).validate()
    assert RunConfig("solve").to_dict() == {"subcommand": "solve", "seed": 0, "workers": 1,
                                            "num_starts": 1}


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "isingmin.cli", "classify", "--dims", "3"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["hardness"] == "np_hard"
