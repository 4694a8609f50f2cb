from __future__ import annotations

import csv
import json
import shutil
from decimal import Decimal

import pytest

from soltestgen.bench import parse_sweep
from soltestgen.cli import main

from conftest import CORPUS

SAFE_ADD = str(CORPUS / "safe_add.sol")


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_analyze_safe_add(tmp_path, capsys):
    dot = tmp_path / "cfg.dot"
    code, out, _ = run(["analyze", SAFE_ADD, "--emit-cfg", str(dot)], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["schema_version"] == 1
    assert len(doc["dups"]) == 10 and sum(d["require_related"] for d in doc["dups"]) == 4
    assert dot.read_text().startswith('digraph "SafeMath"')


def test_analyze_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.sol"
    bad.write_text("contract C {\n  function f( public { }\n}\n")
    code, _, err = run(["analyze", str(bad)], capsys)
    assert code == 1 and f"{bad}:2:" in err
    uninit = tmp_path / "uninit.sol"
    uninit.write_text("contract C { function f() public { uint8 x; uint8 y = x; } }")
    code, _, err = run(["analyze", str(uninit)], capsys)
    assert code == 2 and "f:2" in err
    code, _, err = run(["analyze", SAFE_ADD, "--function", "nope"], capsys)
    assert code == 3


def test_generate(tmp_path, capsys):
    out = tmp_path / "run.json"
    stats = tmp_path / "stats.csv"
    code, stdout, _ = run(["generate", SAFE_ADD, "--fitness", "adfga", "--epsilon", "0.45", "--seed", "7",
                           "--out", str(out), "--stats-csv", str(stats)], capsys)
    assert code == 0
    assert "N_dup 10/10, R_dup 4/4" in stdout
    doc = json.loads(out.read_text())
    assert doc["schema_version"] == 1 and doc["approach"] == "ADF-GA"
    assert doc["config"]["epsilon"] == 0.45 and doc["suite"]
    assert stats.read_text().splitlines()[0].startswith("generation,best_fitness")
    code, _, _ = run(["generate", SAFE_ADD, "--function", "missing"], capsys)
    assert code == 3


@pytest.mark.parametrize("flag", [["--max-gen", "0"], ["--pop", "1"], ["--pm", "2"], ["--fitness", "x"]])
def test_generate_usage_errors(flag, capsys):
    with pytest.raises(SystemExit) as info:
        main(["generate", SAFE_ADD, *flag])
    assert info.value.code == 2


def test_generate_random_uses_ga_budget(tmp_path, capsys):
    ga, rt = tmp_path / "ga.json", tmp_path / "rt.json"
    run(["generate", str(CORPUS / "trade.sol"), "--seed", "3", "--out", str(ga)], capsys)
    run(["generate", str(CORPUS / "trade.sol"), "--seed", "3", "--fitness", "random", "--out", str(rt)], capsys)
    assert json.loads(ga.read_text())["executions"] == json.loads(rt.read_text())["executions"]


def test_parse_sweep_counts():
    assert len(parse_sweep("0.1:0.9:0.1")) == 9
    assert len(parse_sweep("0.3:0.6:0.05")) == 7
    assert parse_sweep("0.3:0.6:0.05")[1] == Decimal("0.35")
    with pytest.raises(ValueError):
        parse_sweep("0.5:0.1:0.1")


def test_bench_outputs(tmp_path, capsys):
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    for name in ("safe_add", "trade"):
        shutil.copy(CORPUS / f"{name}.sol", corpus)
    (corpus / "broken.sol").write_text("contract {")
    argv = ["bench", str(corpus), "--reps", "2", "--max-gen", "8", "--epsilon-sweep", "0.3:0.6:0.1"]
    code, stdout, _ = run(argv + ["--out", str(tmp_path / "a")], capsys)
    assert code == 0
    run(argv + ["--out", str(tmp_path / "b")], capsys)
    for f in ("bench.csv", "sweep.csv", "runs.jsonl"):
        a = (tmp_path / "a" / f).read_bytes()
        b = (tmp_path / "b" / f).read_bytes()
        assert a == b and b"\r\n" not in a
    rows = list(csv.DictReader((tmp_path / "a" / "bench.csv").open()))
    assert [(r["program"], r["approach"]) for r in rows] == [
        ("safe_add", "ADF-GA"), ("safe_add", "GA-classic"), ("safe_add", "RT"),
        ("trade", "ADF-GA"), ("trade", "GA-classic"), ("trade", "RT")]
    assert all(0 <= float(r["mean_n_coverage"]) <= 1 for r in rows)
    sweep = list(csv.DictReader((tmp_path / "a" / "sweep.csv").open()))
    assert len(sweep) == 2 * 4
    # means recompute from the raw dump
    raw = [json.loads(line) for line in (tmp_path / "a" / "runs.jsonl").read_text().splitlines()]
    adf = [r for r in raw if r["kind"] == "compare" and r["program"] == "trade" and r["approach"] == "ADF-GA"]
    mean_n = sum(r["n"] / r["N"] for r in adf) / len(adf)
    assert float(rows[3]["mean_n_coverage"]) == pytest.approx(mean_n, abs=1e-6)
    assert [r["seed"] for r in adf] == [0, 1]


def test_bench_empty_corpus(tmp_path, capsys):
    code, _, _ = run(["bench", str(tmp_path), "--out", str(tmp_path / "o")], capsys)
    assert code == 1
