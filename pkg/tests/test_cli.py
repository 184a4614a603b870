import subprocess
import sys

import pytest

from tracedensity.analysis import c_for, traces_needed
from tracedensity.cli import ExperimentConfig, run


def cli(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_gen_example(capsys):
    code, out, _ = cli(capsys, "gen", "--source", "0101", "--p", "0", "--t", "2", "--seed", "7")
    assert code == 0
    assert out.splitlines()[1:] == ["0101", "0101"]


def test_gen_requires_seed(capsys):
    code, _, err = cli(capsys, "gen", "--source", "0101", "--p", "0", "--t", "2")
    assert code == 2 and "--seed" in err


def test_usage_errors_name_the_flag(capsys):
    code, _, err = cli(capsys, "gen", "--source", "01a", "--p", "0", "--t", "2", "--seed", "1")
    assert code == 2 and "--source" in err
    code, _, err = cli(capsys, "budget", "--kind", "map", "--n", "20", "--k", "2", "--p", "0.1", "--delta", "0.1")
    assert code == 2 and "--eps" in err
    assert cli(capsys, "frobnicate")[0] == 2


def test_missing_file_reports_path(capsys, tmp_path):
    missing = tmp_path / "nope.txt"
    code, _, err = cli(capsys, "density", "estimate", "--traces", str(missing), "--k", "2")
    assert code == 1 and str(missing) in err


def test_budget_matches_library(capsys):
    code, out, _ = cli(capsys, "budget", "--kind", "map", "--n", "20", "--k", "2", "--p", "0.1",
                       "--eps", "0.05", "--delta", "0.1")
    assert code == 0
    assert int(out.splitlines()[-1]) == traces_needed("map", 20, c_for(2, 20), 0.1, 0.05, 0.1)


def test_bounds_grid(capsys):
    code, out, _ = cli(capsys, "bounds", "--c", "0.5,1,2", "--p-grid", "0.005:0.495:99")
    rows = [line for line in out.splitlines() if not line.startswith("#")]
    assert code == 0 and rows[0].startswith("p,c,alpha,beta")
    assert len(rows) == 1 + 99 * 3


def test_estimate_pipeline(capsys, tmp_path):
    traces = tmp_path / "t.txt"
    assert run(["gen", "--source", "0110100110", "--p", "0.1", "--t", "3000", "--seed", "3",
                "--out", str(traces)]) == 0
    code, out, _ = cli(capsys, "density", "estimate", "--traces", str(traces), "--k", "2")
    assert code == 0
    assert "traces_seed=3" in out and "kmer,i,value" in out
    code, out, _ = cli(capsys, "deck", "estimate", "--traces", str(traces), "--k", "3", "--mode", "truncated")
    assert code == 0 and "mode=truncated" in out
    code, out, _ = cli(capsys, "distinguish", "--traces", str(traces), "--k", "2",
                       "--candidates", "0110100110,0110100101")
    assert code == 0
    assert out.splitlines()[-2].endswith(",1")


def test_reconstruct_commands(capsys, tmp_path):
    deck = tmp_path / "d.tsv"
    assert run(["deck", "exact", "--source", "000111000111000000000111", "--k", "4", "--out", str(deck)]) == 0
    code, out, _ = cli(capsys, "reconstruct", "debruijn", "--deck", str(deck), "--limit", "2")
    assert code == 0 and len([x for x in out.splitlines() if not x.startswith("#")]) == 2
    code, out, _ = cli(capsys, "reconstruct", "debruijn", "--deck", str(deck), "--format", "dot")
    assert "digraph" in out
    code, _, err = cli(capsys, "reconstruct", "merge", "--deck", str(deck), "--n", "24")
    assert code == 1 and "occurs" in err

    dens = tmp_path / "k.csv"
    assert run(["density", "exact", "--source", "0110100111", "--k", "3", "--p", "0.1", "--out", str(dens)]) == 0
    code, out, _ = cli(capsys, "reconstruct", "ridge", "--density", str(dens), "--p", "0.1", "--lam", "1e-8")
    assert code == 0 and out.splitlines()[-1] == "0110100111"


def test_oracle_tables(capsys):
    code, out, _ = cli(capsys, "oracle", "--source", "0110", "--p", "0.3", "--k", "2", "--table", "occurrence")
    assert code == 0 and "y,mean" in out and "table=occurrence" in out


@pytest.mark.parametrize("suite", ["lemma2", "coefficients", "bounds", "truncation"])
def test_verify_suites(capsys, suite):
    code, out, _ = cli(capsys, "verify", "--suite", suite)
    assert code == 0 and f"{suite}: pass" in out


def test_verify_lemma1_subset(capsys):
    code, out, _ = cli(capsys, "verify", "--suite", "lemma1", "--n", "10", "--p", "0.25")
    assert code == 0 and "lemma1: pass" in out


def test_verify_rejects_unknown_suite(capsys):
    assert cli(capsys, "verify", "--suite", "everything")[0] == 2


def test_config_header_omits_threads():
    cfg = ExperimentConfig(command="x", k=3, p=0.25, threads=8, out="f")
    header = cfg.header()
    assert "k=3 p=0.25" in header
    assert "threads" not in header and "out" not in header


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "tracedensity", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("tracedensity ")
