"""A loaded contract ready for test generation: CFG, test targets, executor."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .cfg import Cfg, build_cfg, default_entry
from .dataflow import DupSets, classify_rdups, compute_dups, find_requires
from .errors import SetupError
from .frontend import load_file, load_source
from .frontend.nodes import SourceUnit
from .interp import DEFAULT_STEP_LIMIT, CoverageRecord, Interpreter, TestCase


@dataclass
class Program:
    """An entry function plus the def-use pairs reachable from it.

    Executions are memoized on the input tuple; a run is a pure function
    of its inputs, so repeated individuals cost nothing.
    """

    name: str
    unit: SourceUnit
    cfg: Cfg
    entry: str
    dups: DupSets
    step_limit: int = DEFAULT_STEP_LIMIT
    count_failed_require: bool = True
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.interpreter = Interpreter(self.cfg, self.dups, self.step_limit, self.count_failed_require)
        self.params = self.cfg.functions[self.entry].params

    @classmethod
    def from_unit(cls, unit: SourceUnit, entry: str | None = None, name: str | None = None, **kw) -> "Program":
        if entry is not None and unit.find_function(entry) is None:
            raise SetupError(f"no function named {entry!r}")
        cfg = build_cfg(unit, entry)
        entry = entry or default_entry(cfg.contract)
        cfg.entry_function = entry
        functions = cfg.reachable_functions(entry)
        requires = [r for r in find_requires(cfg) if r.function in functions]
        dups = classify_rdups(compute_dups(cfg, functions=functions), requires, cfg)
        return cls(name or cfg.contract.name, unit, cfg, entry, dups, **kw)

    @classmethod
    def from_source(cls, text: str, entry: str | None = None, name: str = "<input>",
                    narrow_widths: bool = False, **kw) -> "Program":
        return cls.from_unit(load_source(text, name, narrow_widths), entry, name, **kw)

    @classmethod
    def from_file(cls, path, entry: str | None = None, narrow_widths: bool = False, **kw) -> "Program":
        path = Path(path)
        return cls.from_unit(load_file(path, narrow_widths), entry, path.stem, **kw)

    def execute(self, numbers: tuple) -> CoverageRecord:
        rec = self._cache.get(numbers)
        if rec is None:
            rec = self.interpreter.run_numbers(self.entry, numbers)
            self._cache[numbers] = rec
        return rec

    def run(self, tc: TestCase) -> CoverageRecord:
        self.interpreter.check(self.entry, tc)
        return self.execute(tc.numbers())

