"""Seeded comparison of ADF-GA, classic-fitness GA and random testing.

Every repetition r of a program uses seed ``seed_base + r`` for all three
approaches. Random testing gets the same number of executions as the
ADF-GA run with that seed.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import asdict, dataclass, fields, replace
from decimal import Decimal, InvalidOperation
from pathlib import Path

import numpy as np

from .dataflow import find_requires
from .errors import SolTestGenError
from .ga import GaConfig, RunReport, evolve, random_baseline
from .program import Program

log = logging.getLogger(__name__)

APPROACHES = ("ADF-GA", "GA-classic", "RT")
SCOPES = ("suite", "individual")


@dataclass
class BenchResult:
    program: str
    approach: str
    repetitions: int
    mean_total_generations: float
    mean_first_best_generation: float
    mean_n_coverage: float
    mean_m_coverage: float
    generations_to_match_classic_best: float


@dataclass
class SweepRow:
    program: str
    epsilon: str
    repetitions: int
    mean_n_coverage: float
    mean_m_coverage: float
    mean_combined_coverage: float
    mean_total_generations: float


@dataclass
class BenchOptions:
    reps: int = 20
    seed_base: int = 0
    base: GaConfig = GaConfig()
    coverage_scope: str = "suite"  # or "individual": best individual only
    count_failed_require: bool = True
    min_requires: int = 0

    def __post_init__(self):
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if self.coverage_scope not in SCOPES:
            raise ValueError(f"coverage_scope must be one of {SCOPES}")


def parse_sweep(text: str) -> list:
    """'a:b:step' -> inclusive list of Decimals, computed without float drift."""
    try:
        a, b, step = (Decimal(part) for part in text.split(":"))
    except (ValueError, InvalidOperation):
        raise ValueError(f"bad sweep {text!r}, expected a:b:step") from None
    if step <= 0 or b < a:
        raise ValueError(f"bad sweep {text!r}: need step > 0 and a <= b")
    count = int((b - a) / step) + 1
    return [(a + i * step).normalize() for i in range(count)]


def coverage_of(report: RunReport, scope: str = "suite") -> tuple:
    """(n, m) covered by the whole suite or by the best individual."""
    if scope == "individual":
        return report.best_n, report.best_m
    return report.suite_n, report.suite_m


def _fraction(k: int, total: int) -> float:
    # a program with no pairs of a kind counts as fully covered for it
    return k / total if total else 1.0


def _gens_to_reach(report: RunReport, n: int, m: int) -> int:
    g = report.generation_reaching(n, m)
    return g if g is not None else report.total_generations


def load_programs(corpus: Path, count_failed_require: bool = True, min_requires: int = 0) -> list:
    """Every parseable *.sol in ``corpus``, sorted by name; failures are logged and skipped."""
    programs = []
    for path in sorted(Path(corpus).glob("*.sol")):
        try:
            prog = Program.from_file(path, count_failed_require=count_failed_require)
        except SolTestGenError as exc:
            log.warning("skipping %s: %s", path.name, exc)
            continue
        if prog.dups.n == 0:
            log.warning("skipping %s: no def-use pairs", path.name)
            continue
        if n_requires(prog) < min_requires:
            log.info("skipping %s: fewer than %d requires", path.name, min_requires)
            continue
        programs.append(prog)
    return programs


def n_requires(prog: Program) -> int:
    reach = set(prog.cfg.reachable_functions(prog.entry))
    return sum(1 for r in find_requires(prog.cfg) if r.function in reach)


def run_record(prog: Program, report: RunReport, epsilon, seed: int, scope: str, match_gens: int,
               kind: str = "compare") -> dict:
    n, m = coverage_of(report, scope)
    return {
        "kind": kind,
        "program": prog.name,
        "approach": report.approach,
        "epsilon": str(epsilon),
        "seed": seed,
        "n": n,
        "m": m,
        "N": report.n_total,
        "M": report.m_total,
        "total_generations": report.total_generations,
        "first_best_generation": report.first_best_generation,
        "executions": report.executions,
        "generations_to_match_classic_best": match_gens,
        "termination": report.termination,
    }


def compare_program(prog: Program, opts: BenchOptions) -> list:
    """Raw run records for the three approaches over all repetitions."""
    records = []
    eps = opts.base.epsilon
    for rep in range(opts.reps):
        seed = opts.seed_base + rep
        adf = evolve(prog, None, replace(opts.base, rng_seed=seed, fitness_mode="adfga"))
        classic = evolve(prog, None, replace(opts.base, rng_seed=seed, fitness_mode="classic"))
        rt = random_baseline(prog, None, adf.executions, seed, replace(opts.base, rng_seed=seed))
        cn, cm = coverage_of(classic, opts.coverage_scope)
        for report in (adf, classic, rt):
            match = _gens_to_reach(report, cn, cm)
            records.append(run_record(prog, report, eps, seed, opts.coverage_scope, match))
    return records


def sweep_program(prog: Program, epsilons: list, opts: BenchOptions) -> list:
    records = []
    for eps in epsilons:
        for rep in range(opts.reps):
            seed = opts.seed_base + rep
            cfg = replace(opts.base, epsilon=float(eps), rng_seed=seed, fitness_mode="adfga")
            report = evolve(prog, None, cfg)
            records.append(run_record(prog, report, eps, seed, opts.coverage_scope,
                                      report.total_generations, kind="sweep"))
    return records


def summarize(records: list) -> list:
    """BenchResult rows: arithmetic means of the raw records per (program, approach)."""
    groups: dict = {}
    for r in records:
        groups.setdefault((r["program"], r["approach"]), []).append(r)
    rows = []
    for (program, approach), runs in groups.items():
        rows.append(BenchResult(
            program=program,
            approach=approach,
            repetitions=len(runs),
            mean_total_generations=float(np.mean([r["total_generations"] for r in runs])),
            mean_first_best_generation=float(np.mean([r["first_best_generation"] for r in runs])),
            mean_n_coverage=float(np.mean([_fraction(r["n"], r["N"]) for r in runs])),
            mean_m_coverage=float(np.mean([_fraction(r["m"], r["M"]) for r in runs])),
            generations_to_match_classic_best=float(np.mean([r["generations_to_match_classic_best"] for r in runs])),
        ))
    order = {a: i for i, a in enumerate(APPROACHES)}
    return sorted(rows, key=lambda r: (r.program, order.get(r.approach, 99)))


def summarize_sweep(records: list) -> list:
    groups: dict = {}
    for r in records:
        groups.setdefault((r["program"], r["epsilon"]), []).append(r)
    rows = []
    for (program, eps), runs in groups.items():
        rows.append(SweepRow(
            program=program,
            epsilon=eps,
            repetitions=len(runs),
            mean_n_coverage=float(np.mean([_fraction(r["n"], r["N"]) for r in runs])),
            mean_m_coverage=float(np.mean([_fraction(r["m"], r["M"]) for r in runs])),
            mean_combined_coverage=float(np.mean([(r["n"] + r["m"]) / (r["N"] + r["M"]) for r in runs])),
            mean_total_generations=float(np.mean([r["total_generations"] for r in runs])),
        ))
    return sorted(rows, key=lambda r: (r.program, Decimal(r.epsilon)))


def best_epsilons(sweep_rows: list) -> dict:
    """Per program, every epsilon attaining the top mean combined coverage."""
    by_prog: dict = {}
    for r in sweep_rows:
        by_prog.setdefault(r.program, []).append(r)
    out = {}
    for prog, rows in by_prog.items():
        top = max(r.mean_combined_coverage for r in rows)
        out[prog] = [Decimal(r.epsilon) for r in rows if r.mean_combined_coverage == top]
    return out


# -- output ---------------------------------------------------------------------------

def _fmt(v):
    return f"{v:.6f}" if isinstance(v, float) else v


def to_csv(rows: list) -> str:
    buf = io.StringIO()
    if not rows:
        return ""
    names = [f.name for f in fields(rows[0])]
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names)
    for r in rows:
        d = asdict(r)
        w.writerow([_fmt(d[k]) for k in names])
    return buf.getvalue()


def to_jsonl(records: list) -> str:
    return "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)


def write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def run_bench(corpus: Path, out: Path, opts: BenchOptions, epsilons: list | None = None) -> dict:
    """Run comparisons (and an optional epsilon sweep) and write CSV/JSONL outputs.

    Returns the summary rows keyed by ``"bench"`` and ``"sweep"``.
    """
    programs = load_programs(corpus, opts.count_failed_require, opts.min_requires)
    records, sweep_records = [], []
    for prog in programs:
        log.info("benchmarking %s (N=%d, M=%d)", prog.name, prog.dups.n, prog.dups.m)
        records.extend(compare_program(prog, opts))
        if epsilons:
            sweep_records.extend(sweep_program(prog, epsilons, opts))
    bench_rows = summarize(records)
    sweep_rows = summarize_sweep(sweep_records)
    out = Path(out)
    write_text(out / "bench.csv", to_csv(bench_rows))
    write_text(out / "runs.jsonl", to_jsonl(records + sweep_records))
    if epsilons:
        write_text(out / "sweep.csv", to_csv(sweep_rows))
    return {"programs": [p.name for p in programs], "bench": bench_rows, "sweep": sweep_rows}
