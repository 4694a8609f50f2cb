"""Genetic search for def-use covering inputs, plus a random baseline.

A chromosome holds one sub-chromosome per entry parameter: a type bit
(0 uint, 1 int) followed by the value's two's-complement bit pattern,
most significant bit first. Operators never touch the type bit.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from .errors import DegenerateError, ShapeError
from .interp import CoverageRecord, TestCase, Value

log = logging.getLogger(__name__)

FITNESS_MODES = ("adfga", "classic")


@dataclass(frozen=True)
class SubChromosome:
    type_bit: int
    value_bits: str

    @property
    def width(self) -> int:
        return len(self.value_bits)

    def __str__(self) -> str:
        return f"{self.type_bit}{self.value_bits}"


@dataclass(frozen=True)
class Chromosome:
    subs: tuple

    def __str__(self) -> str:
        return " ".join(str(s) for s in self.subs)


@dataclass(frozen=True)
class GaConfig:
    epsilon: float = 0.45
    population_size: int = 50
    mutation_prob: float = 0.01
    max_generations: int = 200
    stall_window: int = 10
    fitness_mode: str = "adfga"
    rng_seed: int = 0

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if not 0.0 <= self.mutation_prob <= 1.0:
            raise ValueError("mutation_prob must be in [0, 1]")
        if self.max_generations < 1:
            raise ValueError("max_generations must be >= 1")
        if self.stall_window < 1:
            raise ValueError("stall_window must be >= 1")
        if self.fitness_mode not in FITNESS_MODES:
            raise ValueError(f"fitness_mode must be one of {FITNESS_MODES}")


# -- encoding -------------------------------------------------------------------------

def encode(tc: TestCase) -> Chromosome:
    return Chromosome(tuple(
        SubChromosome(v.type.type_flag, format(v.magnitude, f"0{v.type.width_bits}b"))
        for v in tc.values
    ))


def _check_shape(ch: Chromosome, params: list) -> None:
    if len(ch.subs) != len(params):
        raise ShapeError(f"chromosome has {len(ch.subs)} genes, signature has {len(params)}")
    for sub, p in zip(ch.subs, params):
        if sub.width != p.type.width_bits or sub.type_bit != p.type.type_flag:
            raise ShapeError(f"gene {sub} does not fit parameter {p.type} {p.name}")


def decode_numbers(ch: Chromosome, params: list) -> tuple:
    return tuple(p.type.wrap(int(sub.value_bits, 2)) for sub, p in zip(ch.subs, params))


def decode(ch: Chromosome, params: list) -> TestCase:
    _check_shape(ch, params)
    return TestCase(tuple(Value(p.type, int(sub.value_bits, 2)) for sub, p in zip(ch.subs, params)))


def random_chromosome(params: list, rng: np.random.Generator) -> Chromosome:
    subs = []
    for p in params:
        bits = rng.integers(0, 2, size=p.type.width_bits)
        subs.append(SubChromosome(p.type.type_flag, "".join("1" if b else "0" for b in bits)))
    return Chromosome(tuple(subs))


def init_population(params: list, cfg: GaConfig, rng: np.random.Generator | None = None) -> list:
    if rng is None:
        rng = np.random.default_rng(cfg.rng_seed)
    return [random_chromosome(params, rng) for _ in range(cfg.population_size)]


# -- fitness --------------------------------------------------------------------------

def fitness_value(n: int, m: int, total: int, epsilon, mode: str = "adfga", exact: bool = False):
    """Weighted coverage ((n - m) + (1 + eps) * m) / N, or n / N in classic mode.

    With ``exact`` the result is a Fraction, taking ``epsilon`` at its
    decimal value (0.45 means 45/100, not the nearest binary float).
    """
    if total == 0:
        raise DegenerateError("no def-use pairs to cover")
    if exact:
        eps = Fraction(str(epsilon)) if isinstance(epsilon, float) else Fraction(epsilon)
        if mode == "classic":
            return Fraction(n, total)
        return ((n - m) + (1 + eps) * m) / Fraction(total)
    if mode == "classic":
        return n / total
    return ((n - m) + (1 + epsilon) * m) / total


def coverage_counts(covered, dups) -> tuple:
    n = len(covered)
    m = sum(1 for p in covered if p in dups.require_related)
    return n, m


def fitness(record: CoverageRecord, dups, cfg: GaConfig) -> float:
    n, m = coverage_counts(record.covered, dups)
    return fitness_value(n, m, dups.n, cfg.epsilon, cfg.fitness_mode)


# -- operators ------------------------------------------------------------------------

def roulette_indices(fits, draws) -> np.ndarray:
    """Map draws r in (0, 1] to individuals: i where p'_(i-1) < r <= p'_i."""
    fits = np.asarray(fits, dtype=float)
    cum = np.cumsum(fits / fits.sum())
    cum[-1] = 1.0
    return np.searchsorted(cum, np.asarray(draws, dtype=float), side="left")


def select(pop: list, fits, rng: np.random.Generator) -> list:
    """Fitness-proportionate sampling with replacement, len(pop) draws."""
    fits = np.asarray(fits, dtype=float)
    if np.any(fits < 0):
        raise ValueError("fitness values must be non-negative")
    draws = 1.0 - rng.random(len(pop))  # in (0, 1]
    if fits.sum() <= 0:
        log.warning("all fitness values are zero; selecting uniformly")
        idx = np.minimum((draws * len(pop)).astype(int), len(pop) - 1)
    else:
        idx = roulette_indices(fits, draws)
    return [pop[i] for i in idx]


def _swap(x: str, y: str, mask) -> tuple:
    xs, ys = list(x), list(y)
    for i, s in enumerate(mask):
        if s:
            xs[i], ys[i] = ys[i], xs[i]
    return "".join(xs), "".join(ys)


def crossover_with_masks(x: Chromosome, y: Chromosome, masks) -> tuple:
    """Uniform crossover with explicit value-bit masks, one per gene."""
    if len(x.subs) != len(y.subs):
        raise ShapeError("parents have different gene counts")
    cx, cy = [], []
    for sx, sy, mask in zip(x.subs, y.subs, masks):
        if sx.width != sy.width or sx.type_bit != sy.type_bit:
            raise ShapeError(f"genes {sx} and {sy} do not pair")
        if len(mask) != sx.width:
            raise ShapeError("mask length differs from gene width")
        vx, vy = _swap(sx.value_bits, sy.value_bits, mask)
        cx.append(SubChromosome(sx.type_bit, vx))
        cy.append(SubChromosome(sy.type_bit, vy))
    return Chromosome(tuple(cx)), Chromosome(tuple(cy))


def crossover(x: Chromosome, y: Chromosome, rng: np.random.Generator) -> tuple:
    """Draw a mask over each whole gene; its first position (the type bit) is ignored."""
    masks = []
    for sub in x.subs:
        full = rng.integers(0, 2, size=sub.width + 1)
        masks.append(full[1:])
    return crossover_with_masks(x, y, masks)


def mutate(ch: Chromosome, p_m: float, rng: np.random.Generator) -> Chromosome:
    subs = []
    for sub in ch.subs:
        flips = rng.random(sub.width) < p_m
        if flips.any():
            bits = "".join(("1" if b == "0" else "0") if f else b for b, f in zip(sub.value_bits, flips))
            sub = SubChromosome(sub.type_bit, bits)
        subs.append(sub)
    return Chromosome(tuple(subs))


# -- reports --------------------------------------------------------------------------

@dataclass
class GenerationStats:
    generation: int
    best_fitness: float
    mean_fitness: float
    covered_n: int  # best individual of this generation
    covered_m: int
    new_best: bool
    suite_n: int  # union over every input evaluated so far
    suite_m: int


@dataclass
class SuiteEntry:
    generation: int
    inputs: tuple
    covered: list  # pair strings this case covered
    terminated_by: str


@dataclass
class RunReport:
    approach: str
    program: str
    entry: str
    config: dict
    n_total: int
    m_total: int
    generations: list
    total_generations: int
    first_best_generation: int
    best_fitness: float
    best_inputs: tuple
    best_n: int
    best_m: int
    suite: list
    covered: list
    uncovered: list
    executions: int
    termination: str

    @property
    def suite_n(self) -> int:
        return len(self.covered)

    @property
    def suite_m(self) -> int:
        return self.generations[-1].suite_m if self.generations else 0

    def generation_reaching(self, n: int, m: int) -> int | None:
        for g in self.generations:
            if g.suite_n >= n and g.suite_m >= m:
                return g.generation
        return None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["best_inputs"] = list(self.best_inputs)
        for s in d["suite"]:
            s["inputs"] = list(s["inputs"])
        return d


class _Tracker:
    """Union coverage and the test suite built from inputs adding new pairs."""

    def __init__(self, dups):
        self.dups = dups
        self.union: set = set()
        self.suite: list = []

    def add(self, generation: int, numbers: tuple, rec: CoverageRecord) -> None:
        if rec.covered - self.union:
            self.union |= rec.covered
            self.suite.append(SuiteEntry(generation, numbers,
                                         [str(p) for p in self._ordered(rec.covered)],
                                         str(rec.terminated_by)))

    def _ordered(self, pairs) -> list:
        return [p for p in self.dups.all if p in pairs]

    @property
    def counts(self) -> tuple:
        return coverage_counts(self.union, self.dups)

    def complete(self) -> bool:
        return len(self.union) == self.dups.n


def _finish(approach, program, cfg, tracker, gens, best, executions, termination, dups) -> RunReport:
    best_fit, best_numbers, best_rec, first_best = best
    bn, bm = coverage_counts(best_rec.covered, dups) if best_rec else (0, 0)
    return RunReport(
        approach=approach,
        program=program.name,
        entry=program.entry,
        config=asdict(cfg),
        n_total=dups.n,
        m_total=dups.m,
        generations=gens,
        total_generations=len(gens),
        first_best_generation=first_best,
        best_fitness=best_fit,
        best_inputs=best_numbers,
        best_n=bn,
        best_m=bm,
        suite=tracker.suite,
        covered=[str(p) for p in tracker._ordered(tracker.union)],
        uncovered=[str(p) for p in dups.all if p not in tracker.union],
        executions=executions,
        termination=termination,
    )


def evolve(program, dups=None, cfg: GaConfig | None = None) -> RunReport:
    """Run the GA on ``program`` (a ``Program``) until a stop rule fires.

    Stops when the suite covers every pair, when the best-ever fitness has
    not improved for ``stall_window`` generations, or at ``max_generations``.
    The best-ever individual is carried into each new generation.
    """
    cfg = cfg or GaConfig()
    dups = program.dups if dups is None else dups
    if dups.n == 0:
        raise DegenerateError(f"{program.name}: no def-use pairs to cover")
    rng = np.random.default_rng(cfg.rng_seed)
    params = program.params
    pop = init_population(params, cfg, rng)
    tracker = _Tracker(dups)
    gens: list = []
    best_fit, best_ch, best_numbers, best_rec, first_best = -math.inf, None, (), None, 0
    stall = 0
    executions = 0
    termination = "max_generations"
    for gen in range(1, cfg.max_generations + 1):
        fits, recs = [], []
        for ch in pop:
            numbers = decode_numbers(ch, params)
            rec = program.execute(numbers)
            tracker.add(gen, numbers, rec)
            recs.append((numbers, rec))
            fits.append(fitness(rec, dups, cfg))
        executions += len(pop)
        i = int(np.argmax(fits))
        new_best = fits[i] > best_fit
        if new_best:
            best_fit, best_ch = fits[i], pop[i]
            best_numbers, best_rec = recs[i]
            first_best = gen
            stall = 0
        else:
            stall += 1
        gn, gm = coverage_counts(recs[i][1].covered, dups)
        sn, sm = tracker.counts
        gens.append(GenerationStats(gen, fits[i], float(np.mean(fits)), gn, gm, new_best, sn, sm))
        if tracker.complete():
            termination = "full_coverage"
            break
        if stall >= cfg.stall_window:
            termination = "stall"
            break
        if gen == cfg.max_generations:
            break
        parents = select(pop, fits, rng)
        children = []
        for k in range(0, len(parents) - 1, 2):
            children.extend(crossover(parents[k], parents[k + 1], rng))
        if len(parents) % 2:
            children.append(parents[-1])
        pop = [mutate(c, cfg.mutation_prob, rng) for c in children]
        pop[0] = best_ch
    return _finish("GA-classic" if cfg.fitness_mode == "classic" else "ADF-GA", program, cfg,
                   tracker, gens, (best_fit, best_numbers, best_rec, first_best), executions, termination, dups)


def random_baseline(program, dups=None, budget: int = 1, rng_seed: int = 0,
                    cfg: GaConfig | None = None, dedup: bool = False) -> RunReport:
    """Uniform random inputs, reported in batches of ``population_size``.

    With ``dedup`` repeated inputs are redrawn, so a budget equal to the
    size of the input space enumerates it exactly.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    cfg = cfg or GaConfig(rng_seed=rng_seed)
    dups = program.dups if dups is None else dups
    if dups.n == 0:
        raise DegenerateError(f"{program.name}: no def-use pairs to cover")
    rng = np.random.default_rng(rng_seed)
    params = program.params
    if dedup:
        space = 1 << sum(p.type.width_bits for p in params)
        budget = min(budget, space)
    seen: set = set()
    tracker = _Tracker(dups)
    gens: list = []
    best_fit, best_numbers, best_rec, first_best = -math.inf, (), None, 0
    batch = cfg.population_size
    done = 0
    termination = "budget"
    gen = 0
    while done < budget:
        gen += 1
        fits = []
        batch_best = (-math.inf, None)
        for _ in range(min(batch, budget - done)):
            numbers = decode_numbers(random_chromosome(params, rng), params)
            while dedup and numbers in seen:
                numbers = decode_numbers(random_chromosome(params, rng), params)
            seen.add(numbers)
            rec = program.execute(numbers)
            tracker.add(gen, numbers, rec)
            f = fitness(rec, dups, cfg)
            fits.append(f)
            if f > batch_best[0]:
                batch_best = (f, rec)
            if f > best_fit:
                best_fit, best_numbers, best_rec, first_best = f, numbers, rec, gen
        done += len(fits)
        gn, gm = coverage_counts(batch_best[1].covered, dups)
        sn, sm = tracker.counts
        gens.append(GenerationStats(gen, batch_best[0], float(np.mean(fits)), gn, gm,
                                    first_best == gen, sn, sm))
    rt_cfg = GaConfig(**{**asdict(cfg), "rng_seed": rng_seed})
    return _finish("RT", program, rt_cfg, tracker, gens, (best_fit, best_numbers, best_rec, first_best),
                   done, termination, dups)
