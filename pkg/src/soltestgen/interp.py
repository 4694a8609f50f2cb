"""Instrumented execution with wrapping fixed-width integer semantics.

Arithmetic wraps modulo 2**width (no overflow revert). Values are kept
internally as plain ints already reduced to the type's numeric range, so
signed comparisons work directly.

Use recording is per node: once a node finishes evaluating, each variable
it reads is paired with that variable's last definition in the current
frame. If evaluation faults part-way, only the reads evaluated before the
fault are recorded. ``&&``/``||`` short-circuit for evaluation purposes
only; a completed node still counts all of its static uses.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .cfg import END, FALL, FALSE, START, TRUE, Cfg
from .dataflow import DefUseTable, DupSets, compute_dups
from .errors import SetupError
from .frontend import nodes as N

DEFAULT_STEP_LIMIT = 100_000
MAX_CALL_DEPTH = 64


@dataclass(frozen=True)
class Value:
    type: N.IntType
    magnitude: int  # two's-complement bit pattern in [0, 2**width)

    def __post_init__(self):
        if not 0 <= self.magnitude < (1 << self.type.width_bits):
            raise ValueError(f"magnitude {self.magnitude} out of range for {self.type}")

    @classmethod
    def of(cls, ty: N.IntType, number: int) -> "Value":
        """Wrap an arbitrary integer into ``ty``."""
        return cls(ty, ty.to_bits(number))

    @property
    def number(self) -> int:
        return self.type.wrap(self.magnitude)

    def __repr__(self) -> str:
        return f"{self.type}({self.number})"


@dataclass(frozen=True)
class TestCase:
    values: tuple

    __test__ = False  # not a pytest class

    def numbers(self) -> tuple:
        return tuple(v.number for v in self.values)

    @classmethod
    def from_numbers(cls, params: list, numbers) -> "TestCase":
        return cls(tuple(Value.of(p.type, x) for p, x in zip(params, numbers)))


@dataclass(frozen=True)
class Termination:
    kind: str  # "NormalEnd" | "RequireFailed" | "Fault"
    node: tuple | None = None
    reason: str | None = None

    def __str__(self) -> str:
        if self.kind == "NormalEnd":
            return "NormalEnd"
        where = f"{self.node[0]}:{self.node[1]}"
        return f"{self.kind}({where}{', ' + self.reason if self.reason else ''})"


NORMAL_END = Termination("NormalEnd")


@dataclass(frozen=True)
class CoverageRecord:
    covered: frozenset
    terminated_by: Termination
    executed_nodes: tuple  # (function, node id), Start = 0, End = -1
    steps: int
    return_value: int | None = None
    fault_reads: tuple = field(default=())  # reads evaluated before a fault


class Fault(Exception):
    def __init__(self, reason: str, reads=()):
        super().__init__(reason)
        self.reason = reason
        self.reads = reads


class _Stop(Exception):
    def __init__(self, termination: Termination):
        self.termination = termination


# -- expression evaluation ---------------------------------------------------------

def _div(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def _mod(a: int, b: int) -> int:
    r = abs(a) % abs(b)
    return r if a >= 0 else -r


_ARITH = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "/": _div,
    "%": _mod,
}
_COMPARE = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
}


def _eval(e, env: dict, reads: list):
    """Evaluate on plain ints; appends every variable read to ``reads``."""
    cls = e.__class__
    if cls is N.VarRef:
        reads.append(e.name)
        return env[e.name]
    if cls is N.IntLiteral:
        return e.value
    if cls is N.Binary:
        op = e.op
        if op == "&&":
            return _eval(e.left, env, reads) and _eval(e.right, env, reads)
        if op == "||":
            return _eval(e.left, env, reads) or _eval(e.right, env, reads)
        a = _eval(e.left, env, reads)
        b = _eval(e.right, env, reads)
        if op in _COMPARE:
            return _COMPARE[op](a, b)
        if b == 0 and op in ("/", "%"):
            raise Fault("division by zero" if op == "/" else "modulo by zero", tuple(reads))
        return e.type.wrap(_ARITH[op](a, b))
    if cls is N.Cast:
        return e.target.wrap(_eval(e.operand, env, reads))
    if cls is N.Unary:
        v = _eval(e.operand, env, reads)
        return (not v) if e.op == "!" else e.type.wrap(-v)
    if cls is N.BoolLiteral:
        return e.value
    raise TypeError(f"cannot evaluate {e!r}")


def eval_expression(expr: N.Expr, env: dict):
    """Evaluate a resolved expression over ``Value`` bindings.

    Returns a ``Value`` for integer expressions and ``bool`` for conditions.
    Raises ``Fault`` on division or modulo by zero.
    """
    plain = {k: (v.number if isinstance(v, Value) else v) for k, v in env.items()}
    result = _eval(expr, plain, [])
    if isinstance(result, bool):
        return result
    return Value.of(expr.type, result)


# -- statement execution -------------------------------------------------------------

class Interpreter:
    """Executes functions of one CFG and records covered def-use pairs."""

    def __init__(self, cfg: Cfg, dups: DupSets | None = None, step_limit: int = DEFAULT_STEP_LIMIT,
                 count_failed_require: bool = True):
        self.cfg = cfg
        # whether a false require's own predicate uses count as covered
        self.count_failed_require = count_failed_require
        self.table = DefUseTable(cfg)
        if dups is None:
            dups = compute_dups(cfg)
        self.dups = dups
        self.pair_index = {(p.function, p.variable, p.def_node, p.use_node): p for p in dups.all}
        self.step_limit = step_limit
        self.state_init = {sv.decl.name: sv.init for sv in cfg.contract.state_vars}
        self.succ: dict = {}
        for e in cfg.edges:
            if e.label in (FALL, TRUE, FALSE):
                self.succ[(e.tail, e.label)] = e.head
        self.uses = {k: tuple(dict.fromkeys(v)) for k, v in self.table.uses.items()}

    def check(self, entry: str, tc: TestCase) -> N.FunctionDef:
        fn = self.cfg.functions.get(entry)
        if fn is None:
            raise SetupError(f"no function named {entry!r}")
        if len(tc.values) != len(fn.params):
            raise SetupError(f"{entry} takes {len(fn.params)} argument(s), test case has {len(tc.values)}")
        for p, v in zip(fn.params, tc.values):
            if v.type != p.type:
                raise SetupError(f"parameter {p.name!r} is {p.type}, test case gives {v.type}")
        return fn

    def run(self, entry: str, tc: TestCase) -> CoverageRecord:
        self.check(entry, tc)
        return self.run_numbers(entry, tc.numbers())

    def run_numbers(self, entry: str, numbers: tuple) -> CoverageRecord:
        """Fast path: ``numbers`` are already in range for the parameter types."""
        self._covered = set()
        self._trace = []
        self._steps = 0
        self._fault_reads = ()
        self._storage = dict(self.state_init)
        result = None
        try:
            result = self._call(entry, numbers, 0)
            term = NORMAL_END
        except _Stop as stop:
            term = stop.termination
        return CoverageRecord(frozenset(self._covered), term, tuple(self._trace),
                              self._steps, result, self._fault_reads)

    def _record(self, fn: str, node_id: int, names, last_def: dict) -> None:
        index = self.pair_index
        for v in names:
            d = last_def.get(v)
            if d is not None:
                p = index.get((fn, v, d, node_id))
                if p is not None:
                    self._covered.add(p)

    def _fault(self, fn: str, node_id: int, reason: str, reads, last_def: dict):
        self._record(fn, node_id, dict.fromkeys(reads), last_def)
        self._fault_reads = tuple(reads)
        raise _Stop(Termination("Fault", (fn, node_id), reason))

    def _call(self, name: str, args: tuple, depth: int):
        fdef = self.cfg.functions[name]
        trace = self._trace
        storage = self._storage
        env = {}
        last_def = {v: START for v in storage}
        trace.append((name, START))
        if fdef.param_node is not None:
            key = (name, fdef.param_node)
            self._tick(key)
            trace.append(key)
            for p, x in zip(fdef.params, args):
                env[p.name] = x
                last_def[p.name] = fdef.param_node
            key = self.succ[(key, FALL)]
        else:
            key = self.succ[((name, START), FALL)]
        result = None
        statements = self.cfg.statements
        scope = _Scope(env, storage)
        while key[1] != END:
            self._tick(key)
            trace.append(key)
            node_id = key[1]
            stmt = statements[key]
            cls = stmt.__class__
            reads: list = []
            try:
                if cls is N.Assign or cls is N.VarDeclInit:
                    value = stmt.value if cls is N.Assign else stmt.init
                    if value is None:
                        # zero-initialized, but not a tracked definition
                        env[stmt.decl.name] = 0
                        key = self.succ[(key, FALL)]
                        continue
                    result_value = _eval(value, scope, reads)
                    self._record(name, node_id, self.uses[key], last_def)
                    target = stmt.target if cls is N.Assign else stmt.decl.name
                    scope[target] = result_value
                    last_def[target] = node_id
                    key = self.succ[(key, FALL)]
                elif cls is N.If or cls is N.While or cls is N.Require:
                    cond = _eval(stmt.cond, scope, reads)
                    if cond or cls is not N.Require or self.count_failed_require:
                        self._record(name, node_id, self.uses[key], last_def)
                    if cls is N.Require and not cond:
                        trace.append((name, END))
                        raise _Stop(Termination("RequireFailed", key))
                    key = self.succ[(key, TRUE if cond else FALSE)]
                elif cls is N.Return:
                    if stmt.value is not None:
                        result = _eval(stmt.value, scope, reads)
                    self._record(name, node_id, self.uses[key], last_def)
                    break
                elif cls is N.Call:
                    values = tuple(_eval(a, scope, reads) for a in stmt.args)
                    self._record(name, node_id, self.uses[key], last_def)
                    if depth + 1 >= MAX_CALL_DEPTH:
                        raise _Stop(Termination("Fault", key, "call depth limit"))
                    returned = self._call(stmt.callee, values, depth + 1)
                    trace.append(key)
                    for v in self.table.defs_at(key):
                        last_def[v] = node_id
                    if stmt.target is not None:
                        scope[stmt.target] = returned if returned is not None else 0
                    key = self.succ[(key, FALL)]
                else:  # pragma: no cover
                    raise TypeError(f"unexpected statement {stmt!r}")
            except Fault as f:
                self._fault(name, node_id, f.reason, f.reads, last_def)
        trace.append((name, END))
        if result is None and fdef.returns is not None:
            result = 0
        return result

    def _tick(self, key) -> None:
        if self._steps >= self.step_limit:
            raise _Stop(Termination("Fault", key, "step_limit"))
        self._steps += 1


class _Scope(dict):
    """Locals with fall-back reads and writes to contract storage."""

    __slots__ = ("env", "storage")

    def __init__(self, env: dict, storage: dict):
        self.env = env
        self.storage = storage

    def __getitem__(self, name):
        env = self.env
        if name in env:
            return env[name]
        return self.storage[name]

    def __setitem__(self, name, value):
        if name in self.env or name not in self.storage:
            self.env[name] = value
        else:
            self.storage[name] = value


def execute_function(cfg: Cfg, unit, entry: str, tc: TestCase,
                     step_limit: int = DEFAULT_STEP_LIMIT, dups: DupSets | None = None) -> CoverageRecord:
    """Run ``entry`` on ``tc`` and report the def-use pairs it covers.

    ``unit`` is accepted for interface symmetry; the CFG already carries
    the resolved contract.
    """
    if step_limit <= 0:
        raise SetupError("step_limit must be positive")
    return Interpreter(cfg, dups, step_limit).run(entry, tc)
