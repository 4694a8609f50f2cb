from __future__ import annotations

import json
import logging
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from soltestgen.errors import DegenerateError, ShapeError
from soltestgen.frontend import nodes as N
from soltestgen.frontend.nodes import VarDecl
from soltestgen.ga import (
    Chromosome, GaConfig, SubChromosome, crossover, crossover_with_masks, decode, encode,
    evolve, fitness, fitness_value, init_population, mutate, random_baseline, roulette_indices, select,
)
from soltestgen.interp import CoverageRecord, NORMAL_END, TestCase, Value
from soltestgen.program import Program

from conftest import narrow
from oracles import all_inputs

U8, I8, U16 = N.IntType(False, 8), N.IntType(True, 8), N.IntType(False, 16)


def sig(*types):
    return [VarDecl(f"p{i}", t, 0, 0) for i, t in enumerate(types)]


def chrom(*pairs):
    return Chromosome(tuple(SubChromosome(t, v) for t, v in pairs))


# -- encoding ---------------------------------------------------------------------------

def test_encode_examples():
    assert str(encode(TestCase((Value(U8, 117),)))) == "001110101"
    assert str(encode(TestCase((Value.of(I8, 117),)))) == "101110101"
    assert str(encode(TestCase((Value(U16, 0),)))) == "0" + "0" * 16
    assert str(encode(TestCase((Value.of(I8, -1),)))) == "111111111"


def test_decode_examples():
    assert decode(chrom((0, "01110101")), sig(U8)).numbers() == (117,)
    assert decode(chrom((1, "11111111")), sig(I8)).numbers() == (-1,)
    with pytest.raises(ShapeError):
        decode(chrom((0, "0111")), sig(U8))
    with pytest.raises(ShapeError):
        decode(chrom((0, "01110101")), sig(U8, U8))
    with pytest.raises(ShapeError):
        decode(chrom((1, "01110101")), sig(U8))


def test_init_population():
    params = sig(U8, I8)
    a = init_population(params, GaConfig(population_size=4, rng_seed=42))
    b = init_population(params, GaConfig(population_size=4, rng_seed=42))
    assert a == b and len(a) == 4
    assert all([s.type_bit for s in c.subs] == [0, 1] for c in a)
    assert len(init_population(params, GaConfig(population_size=2))) == 2
    big = init_population(sig(U8), GaConfig(population_size=10_000, rng_seed=1))
    freq = np.mean([[int(ch) for ch in c.subs[0].value_bits] for c in big])
    assert abs(freq - 0.5) < 0.05


@pytest.mark.parametrize("kw", [
    dict(population_size=1), dict(stall_window=0), dict(mutation_prob=1.5),
    dict(epsilon=-0.1), dict(max_generations=0), dict(fitness_mode="other"),
])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        GaConfig(**kw)


# -- fitness ----------------------------------------------------------------------------

def test_fitness_examples():
    assert fitness_value(10, 4, 10, 0.45, exact=True) == Fraction(118, 100)
    assert fitness_value(10, 4, 10, 0.45) == pytest.approx(1.18)
    assert fitness_value(6, 0, 10, 0.45, exact=True) == Fraction(6, 10)
    with pytest.raises(DegenerateError):
        fitness_value(0, 0, 0, 0.45)


@given(n=st.integers(0, 60), m=st.integers(0, 60), extra=st.integers(0, 40),
       eps=st.floats(0, 5, allow_nan=False))
def test_fitness_bounds_and_reduction(n, m, extra, eps):
    m = min(m, n)
    total = n + extra or 1
    big_m = m + extra // 2
    f = fitness_value(n, m, total, eps)
    c = fitness_value(n, m, total, eps, mode="classic")
    assert 0 <= c <= 1
    assert 0 <= f <= (total + eps * big_m) / total + 1e-12
    assert fitness_value(n, m, total, 0.0) == c
    assert fitness_value(n, 0, total, eps) == c


def test_fitness_of_record(safe_add):
    rec = safe_add.execute((40000, 100))
    assert len(rec.covered) == 8
    cfg = GaConfig(epsilon=0.45)
    assert fitness(rec, safe_add.dups, cfg) == pytest.approx((4 + 1.45 * 4) / 10)
    empty = CoverageRecord(frozenset(), NORMAL_END, (), 0)
    assert fitness(empty, safe_add.dups, cfg) == 0


# -- selection --------------------------------------------------------------------------

def test_roulette_examples():
    assert list(roulette_indices([1, 3], [0.5])) == [1]
    assert list(roulette_indices([1, 3], [0.25, 0.2500001, 1.0])) == [0, 1, 1]
    rng = np.random.default_rng(0)
    picks = select(["a", "b", "c"], [0, 0, 5], rng)
    assert picks == ["c", "c", "c"]


def test_select_zero_fitness_falls_back(caplog):
    rng = np.random.default_rng(0)
    with caplog.at_level(logging.WARNING, logger="soltestgen.ga"):
        picks = select(list(range(1000)), [0.0] * 1000, rng)
    assert "uniformly" in caplog.text
    assert len(set(picks)) > 500
    with pytest.raises(ValueError):
        select([1, 2], [-1, 2], rng)


# -- crossover and mutation -------------------------------------------------------------

def test_crossover_mask_example():
    x, y = chrom((0, "1010")), chrom((0, "0110"))
    cx, cy = crossover_with_masks(x, y, [[1, 0, 0, 0]])
    assert (cx.subs[0].value_bits, cy.subs[0].value_bits) == ("0010", "1110")
    assert crossover_with_masks(x, y, [[0, 0, 0, 0]]) == (x, y)
    with pytest.raises(ShapeError):
        crossover_with_masks(x, chrom((0, "01")), [[0, 0, 0, 0]])


bits = lambda w: st.text("01", min_size=w, max_size=w)  # noqa: E731


@settings(max_examples=200)
@given(w=st.integers(1, 24), t=st.integers(0, 1), data=st.data(), seed=st.integers(0, 2**31))
def test_operators_keep_type_bits(w, t, data, seed):
    x = chrom((t, data.draw(bits(w))), (1 - t, data.draw(bits(w))))
    y = chrom((t, data.draw(bits(w))), (1 - t, data.draw(bits(w))))
    rng = np.random.default_rng(seed)
    for c in (*crossover(x, y, rng), mutate(x, 0.5, rng)):
        assert [s.type_bit for s in c.subs] == [t, 1 - t]
        assert [s.width for s in c.subs] == [w, w]


def test_mutation_extremes():
    rng = np.random.default_rng(3)
    x = chrom((1, "10110"), (0, "0001"))
    assert mutate(x, 0.0, rng) == x
    assert mutate(x, 1.0, rng) == chrom((1, "01001"), (0, "1110"))


# -- evolution --------------------------------------------------------------------------

STRAIGHT = "contract C { uint8 s; function f(uint8 a) public { uint8 b = a; s = b + a; } }"
# (c, 3, 4) can never execute: every input scores the same
FLAT = """contract C { function f(uint8 a) public {
    uint8 c = 0; if (a < a) { c = 1; } uint8 d = c; } }"""


def test_safe_add_full_coverage(safe_add):
    rep = evolve(safe_add, None, GaConfig(epsilon=0.45, rng_seed=7))
    assert (rep.suite_n, rep.n_total, rep.suite_m, rep.m_total) == (10, 10, 4, 4)
    assert rep.termination == "full_coverage"
    assert not rep.uncovered
    union = set()
    for entry in rep.suite:
        union |= set(entry.covered)
    assert union == set(rep.covered)


def test_straight_line_one_generation():
    prog = Program.from_source(STRAIGHT)
    rep = evolve(prog, None, GaConfig(rng_seed=1))
    assert rep.total_generations == 1 and rep.termination == "full_coverage"
    rt = random_baseline(prog, None, 5, 1)
    assert rt.suite_n == prog.dups.n and rt.suite[0].generation == 1 and len(rt.suite) == 1


def test_stall_rule():
    prog = Program.from_source(FLAT)
    rep = evolve(prog, None, GaConfig(stall_window=3, rng_seed=5))
    assert rep.termination == "stall" and rep.total_generations <= 4
    assert rep.uncovered == ["(c,4,5)"]


def test_max_generations():
    prog = Program.from_source(FLAT)
    rep = evolve(prog, None, GaConfig(stall_window=50, max_generations=6))
    assert rep.termination == "max_generations" and rep.total_generations == 6
    assert rep.executions == 6 * 50


@pytest.mark.parametrize("name", ["trade", "fundraise"])
def test_elitism_monotone_and_deterministic(name):
    prog = Program.from_file(f"corpus/{name}.sol")
    cfg = GaConfig(rng_seed=11)
    a, b = evolve(prog, None, cfg), evolve(Program.from_file(f"corpus/{name}.sol"), None, cfg)
    assert json.dumps(a.to_dict()) == json.dumps(b.to_dict())
    best = -1.0
    for g in a.generations:
        # the elite is re-inserted, so no generation falls below the best so far
        assert g.best_fitness >= best
        best = g.best_fitness
        assert g.covered_m <= g.covered_n <= a.n_total
        assert g.suite_m <= g.suite_n <= a.n_total
    assert a.best_fitness == best


def test_epsilon_zero_matches_classic():
    prog = Program.from_file("corpus/safe_buy.sol")
    adf = evolve(prog, None, GaConfig(epsilon=0.0, rng_seed=4))
    cls = evolve(prog, None, GaConfig(epsilon=0.0, rng_seed=4, fitness_mode="classic"))
    strip = lambda r: {k: v for k, v in r.to_dict().items() if k not in ("approach", "config")}  # noqa: E731
    assert strip(adf) == strip(cls)


def test_random_baseline_exhaustive_on_4bit():
    prog = narrow("safe_add4")
    best = set()
    for numbers in all_inputs(prog.params):
        best |= prog.execute(numbers).covered
    rt = random_baseline(prog, None, 256, 0, dedup=True)
    assert rt.executions == 256 and rt.suite_n == len(best)
    with pytest.raises(ValueError):
        random_baseline(prog, None, 0, 0)
