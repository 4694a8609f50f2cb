"""Variable table, require sites and def-use pairs.

Pairs are computed per function with a reaching-definitions fixpoint over
intra-function arcs only; call arguments are uses at the call node, and a
call node defines its result target plus every state variable the callee
may assign.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace

from .cfg import END, START, TRUE, Cfg, NodeKey
from .errors import AnalysisError
from .frontend import nodes as N
from .frontend.printer import format_expr


@dataclass(frozen=True)
class VariableInfo:
    name: str
    type_flag: int  # 0 = uint, 1 = int
    width_bits: int
    owning_function: str | None  # None for state variables
    is_parameter: bool = False

    @property
    def is_state(self) -> bool:
        return self.owning_function is None


@dataclass(frozen=True)
class RequireSite:
    function: str
    node_id: int
    condition_text: str

    @property
    def node(self) -> NodeKey:
        return (self.function, self.node_id)


@dataclass(frozen=True)
class DefUsePair:
    function: str
    variable: str
    def_node: int
    use_node: int
    is_require_related: bool = field(default=False, compare=False)

    def as_tuple(self) -> tuple:
        return (self.variable, self.def_node, self.use_node)

    def __str__(self) -> str:
        return f"({self.variable},{self.def_node},{self.use_node})"


@dataclass(frozen=True)
class DupSets:
    all: tuple  # every pair, in report order
    require_related: frozenset = frozenset()

    @property
    def n(self) -> int:
        return len(self.all)

    @property
    def m(self) -> int:
        return len(self.require_related)

    def r_dups(self) -> list:
        return [p for p in self.all if p in self.require_related]

    def restrict(self, functions) -> "DupSets":
        keep = set(functions)
        pairs = tuple(p for p in self.all if p.function in keep)
        return DupSets(pairs, frozenset(p for p in self.require_related if p.function in keep))


# -- variable table -----------------------------------------------------------

def _row(decl: N.VarDecl, owner: str | None, is_param: bool = False) -> VariableInfo:
    return VariableInfo(decl.name, decl.type.type_flag, decl.type.width_bits, owner, is_param)


def extract_variables(unit: N.SourceUnit) -> list:
    """One row per declared variable: each function's parameters and locals
    in source order, then the contract's state variables."""
    rows = []
    for contract in unit.contracts:
        for fn in contract.functions:
            rows.extend(_row(p, fn.name, True) for p in fn.params)
            for stmt in N.walk_statements(fn.body):
                if isinstance(stmt, N.VarDeclInit):
                    rows.append(_row(stmt.decl, fn.name))
                elif isinstance(stmt, N.Call) and stmt.declares is not None:
                    rows.append(_row(stmt.declares, fn.name))
        rows.extend(_row(sv.decl, None) for sv in contract.state_vars)
    return rows


# -- require sites --------------------------------------------------------------

def find_requires(cfg: Cfg) -> list:
    order = {fn.name: i for i, fn in enumerate(cfg.contract.functions)}
    sites = []
    for node in cfg.nodes:
        stmt = cfg.statements.get(node.key)
        if isinstance(stmt, N.Require):
            sites.append(RequireSite(node.function, node.node_id, f"require({format_expr(stmt.cond)})"))
    return sorted(sites, key=lambda s: (order[s.function], s.node_id))


# -- per-node def/use -----------------------------------------------------------

def state_mod_sets(contract: N.ContractDef) -> dict:
    """State variables each function may assign, including through callees."""
    state = {sv.decl.name for sv in contract.state_vars}
    direct, calls = {}, {}
    for fn in contract.functions:
        direct[fn.name] = set()
        calls[fn.name] = set()
        for stmt in N.walk_statements(fn.body):
            if isinstance(stmt, N.Assign) and stmt.target in state:
                direct[fn.name].add(stmt.target)
            elif isinstance(stmt, N.Call):
                calls[fn.name].add(stmt.callee)
                if stmt.target in state:
                    direct[fn.name].add(stmt.target)
    mods = {k: set(v) for k, v in direct.items()}
    changed = True
    while changed:
        changed = False
        for fn, callees in calls.items():
            for c in callees:
                if not mods[c] <= mods[fn]:
                    mods[fn] |= mods[c]
                    changed = True
    return mods


def statement_uses(stmt) -> list:
    """Variables read by a statement, in evaluation order (duplicates kept)."""
    if isinstance(stmt, N.VarDeclInit):
        exprs = [stmt.init]
    elif isinstance(stmt, N.Assign):
        exprs = [stmt.value]
    elif isinstance(stmt, (N.If, N.While, N.Require)):
        exprs = [stmt.cond]
    elif isinstance(stmt, N.Return):
        exprs = [stmt.value]
    elif isinstance(stmt, N.Call):
        exprs = stmt.args
    else:
        exprs = []
    return [ref.name for e in exprs for ref in N.iter_var_refs(e)]


class DefUseTable:
    """Static defs and uses of every node of a CFG."""

    def __init__(self, cfg: Cfg):
        self.cfg = cfg
        contract = cfg.contract
        self.state_vars = [sv.decl.name for sv in contract.state_vars]
        mods = state_mod_sets(contract)
        self.defs: dict = {}
        self.uses: dict = {}
        for fn in contract.functions:
            self.defs[(fn.name, START)] = list(self.state_vars)
            if fn.param_node is not None:
                self.defs[(fn.name, fn.param_node)] = [p.name for p in fn.params]
            for stmt in N.walk_statements(fn.body):
                key = (fn.name, stmt.id)
                self.uses[key] = statement_uses(stmt)
                d = []
                if isinstance(stmt, N.VarDeclInit) and stmt.init is not None:
                    d = [stmt.decl.name]
                elif isinstance(stmt, N.Assign):
                    d = [stmt.target]
                elif isinstance(stmt, N.Call):
                    d = sorted(mods[stmt.callee] - {stmt.target})
                    if stmt.target is not None:
                        d.append(stmt.target)
                self.defs[key] = d

    def defs_at(self, key: NodeKey) -> list:
        return self.defs.get(key, [])

    def uses_at(self, key: NodeKey) -> list:
        return self.uses.get(key, [])


def reaching_definitions(cfg: Cfg, table: DefUseTable, function: str, rng: random.Random | None = None) -> dict:
    """IN sets of (variable, def node id) per node of one function.

    ``rng`` shuffles the worklist; the fixpoint does not depend on it.
    """
    keys = [n.key for n in cfg.function_nodes(function)]
    out = {k: frozenset() for k in keys}
    inn = {k: frozenset() for k in keys}
    work = list(keys)
    if rng is not None:
        rng.shuffle(work)
    pending = set(work)
    while work:
        k = work.pop(0) if rng is None else work.pop(rng.randrange(len(work)))
        pending.discard(k)
        new_in = frozenset().union(*(out[e.tail] for e in cfg.predecessors(k)))
        defs = table.defs_at(k)
        killed = set(defs)
        new_out = frozenset(rd for rd in new_in if rd[0] not in killed) | {(v, k[1]) for v in defs}
        inn[k] = new_in
        if new_out != out[k]:
            out[k] = new_out
            for e in cfg.successors(k):
                if e.head not in pending:
                    pending.add(e.head)
                    work.append(e.head)
    return inn


def _variable_order(cfg: Cfg) -> dict:
    """Report order of variables within each function: params, locals, state."""
    order = {}
    for fn in cfg.contract.functions:
        names = [p.name for p in fn.params]
        for stmt in N.walk_statements(fn.body):
            if isinstance(stmt, N.VarDeclInit):
                names.append(stmt.decl.name)
            elif isinstance(stmt, N.Call) and stmt.declares is not None:
                names.append(stmt.declares.name)
        names += [sv.decl.name for sv in cfg.contract.state_vars]
        order[fn.name] = {v: i for i, v in enumerate(names)}
    return order


def pair_sort_key(cfg: Cfg):
    fn_order = {fn.name: i for i, fn in enumerate(cfg.contract.functions)}
    var_order = _variable_order(cfg)
    return lambda p: (fn_order[p.function], var_order[p.function].get(p.variable, 1 << 30),
                      p.variable, p.def_node, p.use_node)


def compute_dups(cfg: Cfg, variables=None, functions=None, rng: random.Random | None = None) -> DupSets:
    """All def-use pairs (v, d, u) with a def-clear path from d to u.

    ``variables`` restricts the analysis to the named rows of a variable
    table; ``functions`` restricts it to a subset of functions.
    """
    table = DefUseTable(cfg)
    tracked = None if variables is None else {v.name for v in variables}
    names = functions or [fn.name for fn in cfg.contract.functions]
    pairs = set()
    for fn in names:
        inn = reaching_definitions(cfg, table, fn, rng)
        for node in cfg.function_nodes(fn):
            if node.kind != "Stmt" or node.key in cfg.unreachable:
                continue
            for v in dict.fromkeys(table.uses_at(node.key)):
                if tracked is not None and v not in tracked:
                    continue
                defs = sorted(d for (var, d) in inn[node.key] if var == v)
                if not defs:
                    raise AnalysisError(
                        f"{fn}:{node.node_id}: use of {v!r} with no reaching definition", fn, node.node_id)
                pairs.update(DefUsePair(fn, v, d, node.node_id) for d in defs)
    return DupSets(tuple(sorted(pairs, key=pair_sort_key(cfg))))


def _reachable_without(cfg: Cfg, function: str, banned_edge) -> set:
    start = (function, START)
    seen = {start}
    stack = [start]
    while stack:
        for e in cfg.successors(stack.pop()):
            if e == banned_edge or e.head in seen:
                continue
            seen.add(e.head)
            stack.append(e.head)
    return seen


def classify_rdups(dups: DupSets, requires: list, cfg: Cfg) -> DupSets:
    """Flag pairs used at a require node or only reachable past a passing require."""
    guarded: dict = {}
    require_nodes = {r.node for r in requires}
    for site in requires:
        true_edge = cfg.out_edge(site.node, TRUE)
        reach = _reachable_without(cfg, site.function, true_edge)
        for node in cfg.function_nodes(site.function):
            if node.key not in reach and node.node_id != END:
                guarded.setdefault(node.key, set()).add(site.node_id)
    flagged = []
    related = set()
    for p in dups.all:
        key = (p.function, p.use_node)
        hit = key in require_nodes or key in guarded
        flagged.append(replace(p, is_require_related=hit))
        if hit:
            related.add(p)
    return DupSets(tuple(flagged), frozenset(related))


def analyze(cfg: Cfg, unit: N.SourceUnit | None = None, functions=None):
    """Run all three phases; returns (variables, requires, dups)."""
    variables = extract_variables(unit) if unit is not None else None
    requires = find_requires(cfg)
    dups = compute_dups(cfg, functions=functions)
    dups = classify_rdups(dups, [r for r in requires if functions is None or r.function in functions], cfg)
    return variables, requires, dups


def dup_table(cfg: Cfg, dups: DupSets) -> list:
    """Per (function, variable) summary rows: def nodes, use nodes, pairs."""
    table = DefUseTable(cfg)
    rows = []
    var_order = _variable_order(cfg)
    for fn in cfg.contract.functions:
        defs: dict = {}
        uses: dict = {}
        for node in cfg.function_nodes(fn.name):
            if node.kind != "Stmt":
                continue
            for v in table.defs_at(node.key):
                defs.setdefault(v, set()).add(node.node_id)
            for v in table.uses_at(node.key):
                uses.setdefault(v, set()).add(node.node_id)
        fn_pairs = [p for p in dups.all if p.function == fn.name]
        for p in fn_pairs:
            defs.setdefault(p.variable, set()).add(p.def_node)
        for v in sorted(set(defs) | set(uses), key=lambda v: (var_order[fn.name].get(v, 1 << 30), v)):
            vp = [p for p in fn_pairs if p.variable == v]
            rows.append({
                "function": fn.name,
                "variable": v,
                "def_nodes": sorted(defs.get(v, ())),
                "use_nodes": sorted(uses.get(v, ())),
                "n_dup": [str(p) for p in vp],
                "r_dup": [str(p) for p in vp if p in dups.require_related],
            })
    return rows
