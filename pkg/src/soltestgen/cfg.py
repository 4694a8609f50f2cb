"""Statement-level control-flow graphs.

Every function gets its own sub-graph with a Start node (id 0), an End
node (id -1) and one node per statement. When a function has parameters,
node 1 binds them and the body starts at node 2. Calls are linked to the
callee's sub-graph by a Call arc into its Start and a Return arc from its
End back to the calling node.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .errors import CfgError
from .frontend import nodes as N
from .frontend.printer import format_statement

log = logging.getLogger(__name__)

START = 0
END = -1

FALL, TRUE, FALSE, CALL, RETURN = "FallThrough", "CondTrue", "CondFalse", "Call", "Return"
_LABEL_ORDER = {FALL: 0, TRUE: 1, FALSE: 2, CALL: 3, RETURN: 4}

NodeKey = tuple  # (function name, node id)


@dataclass(frozen=True)
class CfgNode:
    function: str
    node_id: int
    kind: str  # "Start" | "End" | "Stmt"

    @property
    def key(self) -> NodeKey:
        return (self.function, self.node_id)


@dataclass(frozen=True)
class CfgEdge:
    tail: NodeKey
    head: NodeKey
    label: str


@dataclass
class Cfg:
    nodes: list
    edges: list
    entry_function: str
    contract: N.ContractDef
    statements: dict = field(default_factory=dict)  # NodeKey -> Stmt ("params" for binding node)
    warnings: list = field(default_factory=list)
    unreachable: set = field(default_factory=set)

    def __post_init__(self):
        self._succ: dict = {}
        self._pred: dict = {}
        for e in self.edges:
            self._succ.setdefault(e.tail, []).append(e)
            self._pred.setdefault(e.head, []).append(e)
        self.functions = {fn.name: fn for fn in self.contract.functions}

    def successors(self, key: NodeKey, intra: bool = True) -> list:
        """Out-edges of ``key``; ``intra`` drops Call/Return arcs."""
        edges = self._succ.get(key, [])
        if intra:
            return [e for e in edges if e.label not in (CALL, RETURN)]
        return list(edges)

    def predecessors(self, key: NodeKey, intra: bool = True) -> list:
        edges = self._pred.get(key, [])
        if intra:
            return [e for e in edges if e.label not in (CALL, RETURN)]
        return list(edges)

    def function_nodes(self, function: str) -> list:
        return [n for n in self.nodes if n.function == function]

    def statement(self, key: NodeKey):
        return self.statements.get(key)

    def out_edge(self, key: NodeKey, label: str) -> CfgEdge:
        for e in self._succ.get(key, []):
            if e.label == label:
                return e
        raise KeyError((key, label))

    def reachable_functions(self, entry: str | None = None) -> list:
        """Functions transitively callable from ``entry``, in declaration order."""
        entry = entry or self.entry_function
        seen = {entry}
        stack = [entry]
        while stack:
            fn = stack.pop()
            for stmt in N.walk_statements(self.functions[fn].body):
                if isinstance(stmt, N.Call) and stmt.callee not in seen:
                    seen.add(stmt.callee)
                    stack.append(stmt.callee)
        return [fn.name for fn in self.contract.functions if fn.name in seen]


def default_entry(contract: N.ContractDef) -> str:
    """First declared function that no other function calls."""
    called = set()
    for fn in contract.functions:
        for stmt in N.walk_statements(fn.body):
            if isinstance(stmt, N.Call) and stmt.callee != fn.name:
                called.add(stmt.callee)
    for fn in contract.functions:
        if fn.name not in called:
            return fn.name
    return contract.functions[0].name


def select_contract(unit: N.SourceUnit, entry: str | None = None) -> N.ContractDef:
    if entry is not None:
        found = unit.find_function(entry)
        if found is None:
            raise CfgError(f"no function named {entry!r}")
        return found[0]
    return unit.contracts[0]


class _Builder:
    def __init__(self, contract: N.ContractDef):
        self.contract = contract
        self.names = {fn.name for fn in contract.functions}
        self.nodes: list[CfgNode] = []
        self.edges: list[CfgEdge] = []
        self.statements: dict = {}
        self.warnings: list[str] = []

    def edge(self, tail, head, label):
        self.edges.append(CfgEdge(tail, head, label))

    def function(self, fn: N.FunctionDef) -> None:
        name = fn.name
        start, end = (name, START), (name, END)
        self.nodes.append(CfgNode(name, START, "Start"))
        if fn.param_node is not None:
            self.nodes.append(CfgNode(name, fn.param_node, "Stmt"))
            self.statements[(name, fn.param_node)] = "params"
        for stmt in N.walk_statements(fn.body):
            self.nodes.append(CfgNode(name, stmt.id, "Stmt"))
            self.statements[(name, stmt.id)] = stmt
        self.nodes.append(CfgNode(name, END, "End"))

        self.fn = fn
        body_entry = self.block(fn.body, end)
        if fn.param_node is not None:
            self.edge(start, (name, fn.param_node), FALL)
            self.edge((name, fn.param_node), body_entry, FALL)
        else:
            self.edge(start, body_entry, FALL)
        if not fn.body:
            self.warnings.append(f"function {name!r} has an empty body")

    def block(self, body: list, follow: NodeKey) -> NodeKey:
        """Wire ``body`` so that it falls through to ``follow``; return its entry."""
        for stmt in reversed(body):
            follow = self.stmt(stmt, follow)
        return follow

    def stmt(self, s: N.Stmt, follow: NodeKey) -> NodeKey:
        name = self.fn.name
        key = (name, s.id)
        end = (name, END)
        if isinstance(s, N.If):
            self.edge(key, self.block(s.then_body, follow), TRUE)
            self.edge(key, self.block(s.else_body, follow), FALSE)
        elif isinstance(s, N.While):
            self.edge(key, self.block(s.body, key), TRUE)
            self.edge(key, follow, FALSE)
        elif isinstance(s, N.Require):
            self.edge(key, follow, TRUE)
            self.edge(key, end, FALSE)
        elif isinstance(s, N.Return):
            self.edge(key, end, FALL)
        elif isinstance(s, N.Call):
            if s.callee not in self.names:
                raise CfgError(f"{name}:{s.id}: call to undefined function {s.callee!r}")
            self.edge(key, follow, FALL)
            self.edge(key, (s.callee, START), CALL)
            self.edge((s.callee, END), key, RETURN)
        else:
            self.edge(key, follow, FALL)
        return key


def build_cfg(unit: N.SourceUnit, entry: str | None = None) -> Cfg:
    """Build the contract CFG for a type-resolved unit.

    ``entry`` selects both the contract and the function under test; by
    default the first contract and its first uncalled function are used.
    """
    contract = select_contract(unit, entry)
    if not contract.functions:
        raise CfgError(f"contract {contract.name!r} has no functions")
    builder = _Builder(contract)
    for fn in contract.functions:
        builder.function(fn)

    order = {fn.name: i for i, fn in enumerate(contract.functions)}

    def node_rank(key):
        fn, nid = key
        # Start first, End last within a function
        return (order[fn], 1 if nid == START else (3 if nid == END else 2), nid)

    edges = sorted(set(builder.edges),
                   key=lambda e: (node_rank(e.tail), _LABEL_ORDER[e.label], node_rank(e.head)))
    cfg = Cfg(builder.nodes, edges, entry or default_entry(contract), contract,
              builder.statements, builder.warnings)
    _flag_unreachable(cfg)
    for w in cfg.warnings:
        log.warning(w)
    return cfg


def _flag_unreachable(cfg: Cfg) -> None:
    for fn in cfg.contract.functions:
        seen = {(fn.name, START)}
        stack = [(fn.name, START)]
        while stack:
            for e in cfg.successors(stack.pop()):
                if e.head not in seen:
                    seen.add(e.head)
                    stack.append(e.head)
        for node in cfg.function_nodes(fn.name):
            if node.kind == "Stmt" and node.key not in seen:
                cfg.unreachable.add(node.key)
                cfg.warnings.append(f"{fn.name}:{node.node_id}: unreachable statement")


# -- DOT export ---------------------------------------------------------------

def node_label(cfg: Cfg, key: NodeKey) -> str:
    fn, nid = key
    if nid == START:
        return f"{fn}: start"
    if nid == END:
        return f"{fn}: end"
    stmt = cfg.statements[key]
    if stmt == "params":
        f = cfg.functions[fn]
        text = f"{fn}({', '.join(f'{p.type} {p.name}' for p in f.params)})"
    else:
        text = format_statement(stmt)
    return f"{fn} {nid}: {text}"


def _dot_id(key: NodeKey) -> str:
    fn, nid = key
    suffix = "start" if nid == START else "end" if nid == END else str(nid)
    return f'"{fn}:{suffix}"'


def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def cfg_to_dot(cfg: Cfg) -> str:
    lines = [f'digraph "{_escape(cfg.contract.name)}" {{', "    node [shape=box, fontname=monospace];"]
    for node in cfg.nodes:
        shape = ", shape=ellipse" if node.kind != "Stmt" else ""
        style = ", style=dashed" if node.key in cfg.unreachable else ""
        lines.append(f'    {_dot_id(node.key)} [label="{_escape(node_label(cfg, node.key))}"{shape}{style}];')
    for e in cfg.edges:
        attrs = "" if e.label == FALL else f' [label="{e.label}"]'
        lines.append(f"    {_dot_id(e.tail)} -> {_dot_id(e.head)}{attrs};")
    lines.append("}")
    return "\n".join(lines) + "\n"
