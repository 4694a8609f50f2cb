"""Command-line entry point: ``analyze``, ``generate`` and ``bench``.

Exit codes: 0 success, 1 lex/parse/type error, 2 analysis error,
3 unknown entry function.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import asdict, fields
from pathlib import Path

from . import __version__
from .bench import SCOPES, BenchOptions, parse_sweep, run_bench, write_text
from .cfg import build_cfg, cfg_to_dot
from .dataflow import analyze, dup_table
from .errors import AnalysisError, CfgError, DegenerateError, SetupError, SourceError
from .frontend import load_file
from .ga import GaConfig, GenerationStats, evolve, random_baseline
from .program import Program

log = logging.getLogger("soltestgen")

SCHEMA_VERSION = 1
EXIT_OK, EXIT_SOURCE, EXIT_ANALYSIS, EXIT_NO_FUNCTION = 0, 1, 2, 3


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _probability(text: str) -> float:
    v = float(text)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"must be in [0, 1], got {v}")
    return v


def _non_negative(text: str) -> float:
    v = float(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {v}")
    return v


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out:
        write_text(Path(out), text)
    else:
        sys.stdout.write(text)


def _source_error(path: Path, exc: SourceError) -> int:
    print(exc.format(str(path)), file=sys.stderr)
    return EXIT_SOURCE


# -- analyze --------------------------------------------------------------------------

def analysis_document(path: Path, entry: str | None = None) -> tuple:
    """Load, build and analyze one file; returns (json-ready dict, cfg)."""
    unit = load_file(path)
    if entry is not None and unit.find_function(entry) is None:
        raise SetupError(f"no function named {entry!r}")
    cfg = build_cfg(unit, entry)
    functions = cfg.reachable_functions(entry) if entry else None
    variables, requires, dups = analyze(cfg, unit, functions)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "source": path.name,
        "contract": cfg.contract.name,
        "entry": cfg.entry_function,
        "variables": [asdict(v) for v in variables],
        "requires": [asdict(r) for r in requires],
        "n_dup": dups.n,
        "r_dup": dups.m,
        "dups": [
            {"function": p.function, "variable": p.variable, "def_node": p.def_node,
             "use_node": p.use_node, "require_related": p in dups.require_related}
            for p in dups.all
        ],
        "dup_table": [r for r in dup_table(cfg, dups) if functions is None or r["function"] in functions],
        "warnings": list(cfg.warnings),
    }
    return doc, cfg


def cmd_analyze(args) -> int:
    path = Path(args.path)
    try:
        doc, cfg = analysis_document(path, args.function)
    except SourceError as exc:
        return _source_error(path, exc)
    except SetupError as exc:
        print(f"{path}: {exc}", file=sys.stderr)
        return EXIT_NO_FUNCTION
    except AnalysisError as exc:
        print(f"{path}: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS
    except CfgError as exc:
        print(f"{path}: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS
    if args.emit_cfg:
        write_text(Path(args.emit_cfg), cfg_to_dot(cfg))
    _emit(_dump_json(doc), args.out)
    return EXIT_OK


# -- generate -------------------------------------------------------------------------

def stats_csv(gens: list) -> str:
    buf = io.StringIO()
    names = [f.name for f in fields(GenerationStats)]
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names)
    for g in gens:
        d = asdict(g)
        w.writerow([f"{d[k]:.6f}" if isinstance(d[k], float) else d[k] for k in names])
    return buf.getvalue()


def trace_lines(prog: Program, report) -> str:
    """JSON lines of executed (function, node) for every suite member."""
    out = []
    for i, entry in enumerate(report.suite):
        rec = prog.execute(tuple(entry.inputs))
        for fn, node in rec.executed_nodes:
            out.append(json.dumps({"case": i, "function": fn, "node": node}) + "\n")
    return "".join(out)


def cmd_generate(args) -> int:
    path = Path(args.path)
    try:
        prog = Program.from_file(path, args.function, count_failed_require=not args.ignore_failed_require)
    except SourceError as exc:
        return _source_error(path, exc)
    except SetupError as exc:
        print(f"{path}: {exc}", file=sys.stderr)
        return EXIT_NO_FUNCTION
    except (AnalysisError, CfgError) as exc:
        print(f"{path}: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS
    mode = "classic" if args.fitness == "classic" else "adfga"
    cfg = GaConfig(epsilon=args.epsilon, population_size=args.pop, mutation_prob=args.pm,
                   max_generations=args.max_gen, stall_window=args.stall,
                   fitness_mode=mode, rng_seed=args.seed)
    try:
        if args.fitness == "random":
            # equal-cost baseline: as many executions as the same-seed ADF-GA run
            budget = args.budget or evolve(prog, None, cfg).executions
            report = random_baseline(prog, None, budget, args.seed, cfg)
        else:
            report = evolve(prog, None, cfg)
    except DegenerateError as exc:
        print(f"{path}: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS
    if args.emit_cfg:
        write_text(Path(args.emit_cfg), cfg_to_dot(prog.cfg))
    if args.stats_csv:
        write_text(Path(args.stats_csv), stats_csv(report.generations))
    if args.trace:
        write_text(Path(args.trace), trace_lines(prog, report))
    doc = {"schema_version": SCHEMA_VERSION, "source": path.name, **report.to_dict()}
    _emit(_dump_json(doc), args.out)
    summary = (f"{prog.name}.{prog.entry} [{report.approach}]: "
               f"N_dup {report.suite_n}/{report.n_total}, R_dup {report.suite_m}/{report.m_total}, "
               f"generations {report.total_generations}, first best at {report.first_best_generation}")
    print(summary, file=sys.stderr if not args.out else sys.stdout)
    return EXIT_OK


# -- bench ----------------------------------------------------------------------------

def cmd_bench(args) -> int:
    opts = BenchOptions(
        reps=args.reps,
        seed_base=args.seed_base,
        base=GaConfig(epsilon=args.epsilon, population_size=args.pop, mutation_prob=args.pm,
                      max_generations=args.max_gen, stall_window=args.stall),
        coverage_scope=args.coverage_scope,
        count_failed_require=not args.ignore_failed_require,
        min_requires=args.min_requires,
    )
    epsilons = parse_sweep(args.epsilon_sweep) if args.epsilon_sweep else None
    result = run_bench(Path(args.corpus), Path(args.out), opts, epsilons)
    if not result["programs"]:
        print(f"{args.corpus}: no program could be benchmarked", file=sys.stderr)
        return EXIT_SOURCE
    for row in result["bench"]:
        print(f"{row.program:18s} {row.approach:10s} N_dup {row.mean_n_coverage:.3f} "
              f"R_dup {row.mean_m_coverage:.3f} generations {row.mean_total_generations:.2f}")
    return EXIT_OK


# -- parser ---------------------------------------------------------------------------

def _add_ga_options(p: argparse.ArgumentParser) -> None:
    d = GaConfig()
    p.add_argument("--epsilon", type=_non_negative, default=d.epsilon, help="weight of require-related pairs")
    p.add_argument("--pop", type=_positive, default=d.population_size,
                   help="population size (>= 2)")
    p.add_argument("--pm", type=_probability, default=d.mutation_prob, help="per-bit mutation probability")
    p.add_argument("--max-gen", type=_positive, default=d.max_generations)
    p.add_argument("--stall", type=_positive, default=d.stall_window,
                   help="stop after this many generations without a new best")
    p.add_argument("--ignore-failed-require", action="store_true",
                   help="do not count the predicate uses of a require that evaluates false")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="soltestgen", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="variables, require sites and def-use pairs as JSON")
    p.add_argument("path")
    p.add_argument("--function", help="entry function (default: first uncalled function)")
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.add_argument("--emit-cfg", metavar="DOT", help="also write the CFG in Graphviz DOT form")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("generate", help="search for inputs covering the def-use pairs")
    p.add_argument("path")
    p.add_argument("--function", help="entry function (default: first uncalled function)")
    _add_ga_options(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fitness", choices=("adfga", "classic", "random"), default="adfga")
    p.add_argument("--budget", type=_positive, help="executions for --fitness random")
    p.add_argument("--out", help="write the run report JSON here instead of stdout")
    p.add_argument("--stats-csv", metavar="CSV", help="write per-generation statistics")
    p.add_argument("--trace", metavar="JSONL", help="write the executed nodes of each suite case")
    p.add_argument("--emit-cfg", metavar="DOT", help="also write the CFG in Graphviz DOT form")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("bench", help="compare ADF-GA, classic GA and random testing on a corpus")
    p.add_argument("corpus", help="directory of .sol files")
    p.add_argument("--reps", type=_positive, default=20)
    p.add_argument("--seed-base", type=int, default=0)
    p.add_argument("--epsilon-sweep", metavar="A:B:STEP", help="also sweep epsilon over this range")
    p.add_argument("--out", default="bench-out", help="output directory")
    p.add_argument("--coverage-scope", choices=SCOPES, default="suite",
                   help="report coverage of the whole suite or of the best individual")
    p.add_argument("--min-requires", type=int, default=0,
                   help="only bench programs with at least this many require statements")
    _add_ga_options(p)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "pop", 2) < 2:
        parser.error("--pop must be >= 2")
    if getattr(args, "epsilon_sweep", None):
        try:
            parse_sweep(args.epsilon_sweep)
        except ValueError as exc:
            parser.error(str(exc))
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
