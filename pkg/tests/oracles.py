"""Reference computations used to check the analysis and the interpreter.

These are written against the AST and the CFG edge list only; they do not
share code with the reaching-definitions pass or the instrumented
interpreter.
"""

from __future__ import annotations

import itertools

from soltestgen.frontend import nodes as N

START, END = 0, -1
INTRA = ("FallThrough", "CondTrue", "CondFalse")


def _stmt_uses(stmt) -> list:
    if stmt == "params":
        return []
    if isinstance(stmt, N.VarDeclInit):
        roots = [stmt.init]
    elif isinstance(stmt, N.Assign):
        roots = [stmt.value]
    elif isinstance(stmt, (N.If, N.While, N.Require)):
        roots = [stmt.cond]
    elif isinstance(stmt, N.Return):
        roots = [stmt.value]
    elif isinstance(stmt, N.Call):
        roots = list(stmt.args)
    else:
        roots = []
    names = []

    def visit(e):
        if e is None:
            return
        if isinstance(e, N.VarRef):
            names.append(e.name)
        elif isinstance(e, N.Binary):
            visit(e.left)
            visit(e.right)
        elif isinstance(e, (N.Unary, N.Cast)):
            visit(e.operand)

    for r in roots:
        visit(r)
    return list(dict.fromkeys(names))


def _modified_state(contract) -> dict:
    """State variables each function can write, directly or via callees."""
    state = {sv.decl.name for sv in contract.state_vars}
    direct, callees = {}, {}
    for fn in contract.functions:
        w, c = set(), set()
        for s in N.walk_statements(fn.body):
            if isinstance(s, N.Assign) and s.target in state:
                w.add(s.target)
            if isinstance(s, N.Call):
                c.add(s.callee)
                if s.target in state:
                    w.add(s.target)
        direct[fn.name], callees[fn.name] = w, c
    out = {}
    for name in direct:
        seen, stack, acc = {name}, [name], set()
        while stack:
            f = stack.pop()
            acc |= direct[f]
            for g in callees[f]:
                if g not in seen:
                    seen.add(g)
                    stack.append(g)
        out[name] = acc
    return out


def _stmt_defs(stmt, fn, mods, state_names) -> list:
    if stmt == "params":
        return [p.name for p in fn.params]
    if isinstance(stmt, N.VarDeclInit):
        return [stmt.decl.name] if stmt.init is not None else []
    if isinstance(stmt, N.Assign):
        return [stmt.target]
    if isinstance(stmt, N.Call):
        out = set(mods[stmt.callee])
        if stmt.target is not None:
            out.add(stmt.target)
        return sorted(out)
    return []


def bounded_path_pairs(cfg, function: str, max_visits: int = 3) -> set:
    """(variable, def, use) triples seen on any intra-function path from Start
    that visits no node more than ``max_visits`` times."""
    contract = cfg.contract
    fn = contract.function(function)
    mods = _modified_state(contract)
    state_names = [sv.decl.name for sv in contract.state_vars]
    succ = {}
    for e in cfg.edges:
        if e.label in INTRA and e.tail[0] == function:
            succ.setdefault(e.tail, []).append(e.head)
    pairs = set()

    def walk(node, last_def, visits):
        nid = node[1]
        if nid == END:
            return
        if nid != START:
            stmt = cfg.statements[node]
            for v in _stmt_uses(stmt):
                if v in last_def:
                    pairs.add((v, last_def[v], nid))
            defs = _stmt_defs(stmt, fn, mods, state_names)
            if defs:
                last_def = dict(last_def)
                for v in defs:
                    last_def[v] = nid
        for nxt in succ.get(node, []):
            if visits.get(nxt, 0) < max_visits:
                visits[nxt] = visits.get(nxt, 0) + 1
                walk(nxt, last_def, visits)
                visits[nxt] -= 1

    start = (function, START)
    walk(start, {v: START for v in state_names}, {start: 1})
    return pairs


def replay_coverage(cfg, record, count_failed_require: bool = True) -> set:
    """Recompute covered (function, variable, def, use) from an execution trace."""
    contract = cfg.contract
    mods = _modified_state(contract)
    state_names = [sv.decl.name for sv in contract.state_vars]
    term = record.terminated_by
    trace = list(record.executed_nodes)
    covered = set()
    frames = []  # [function, last_def, pending call node]
    for i, (fname, nid) in enumerate(trace):
        if nid == START:
            frames.append([fname, {v: START for v in state_names}, None])
            continue
        if nid == END:
            frames.pop()
            continue
        frame = frames[-1]
        fn = contract.function(fname)
        stmt = cfg.statements[(fname, nid)]
        last_def = frame[1]
        if frame[2] == nid:
            # second visit of a call node: the callee has returned
            frame[2] = None
            for v in _stmt_defs(stmt, fn, mods, state_names):
                last_def[v] = nid
            continue
        is_last = i == len(trace) - 1
        uses = _stmt_uses(stmt)
        if term.kind == "Fault" and is_last and term.node == (fname, nid):
            uses = list(dict.fromkeys(record.fault_reads))
        failed_require = (term.kind == "RequireFailed" and term.node == (fname, nid)
                          and i == len(trace) - 2)
        if failed_require and not count_failed_require:
            uses = []
        for v in uses:
            if v in last_def:
                covered.add((fname, v, last_def[v], nid))
        if isinstance(stmt, N.Call):
            frame[2] = nid
            continue
        for v in _stmt_defs(stmt, fn, mods, state_names):
            last_def[v] = nid
    return covered


def all_inputs(params):
    """Every input tuple for the given parameters (small widths only)."""
    ranges = [range(p.type.min_value, p.type.max_value + 1) for p in params]
    return itertools.product(*ranges)


def as_tuples(pairs) -> set:
    return {(p.function, p.variable, p.def_node, p.use_node) for p in pairs}
