"""AST for the contract subset.

Source positions are excluded from equality so that two parses of
equivalent text compare equal regardless of layout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Union


@dataclass(frozen=True)
class IntType:
    signed: bool
    width_bits: int

    def __post_init__(self):
        if not 1 <= self.width_bits <= 256:
            raise ValueError(f"bad integer width {self.width_bits}")

    def __str__(self) -> str:
        return f"{'int' if self.signed else 'uint'}{self.width_bits}"

    @property
    def type_flag(self) -> int:
        return 1 if self.signed else 0

    @property
    def min_value(self) -> int:
        return -(1 << (self.width_bits - 1)) if self.signed else 0

    @property
    def max_value(self) -> int:
        if self.signed:
            return (1 << (self.width_bits - 1)) - 1
        return (1 << self.width_bits) - 1

    def contains(self, value: int) -> bool:
        return self.min_value <= value <= self.max_value

    def wrap(self, value: int) -> int:
        """Reduce an unbounded integer into this type's numeric range."""
        mask = (1 << self.width_bits) - 1
        value &= mask
        if self.signed and value >> (self.width_bits - 1):
            value -= 1 << self.width_bits
        return value

    def to_bits(self, value: int) -> int:
        """Two's-complement magnitude in [0, 2**width)."""
        return value & ((1 << self.width_bits) - 1)

    @classmethod
    def parse(cls, name: str) -> "IntType":
        signed = not name.startswith("u")
        digits = name[3:] if signed else name[4:]
        return cls(signed, int(digits) if digits else 256)


class BoolType:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "bool"

    __str__ = __repr__


BOOL = BoolType()
UINT256 = IntType(False, 256)


# -- expressions ------------------------------------------------------------

@dataclass(eq=True)
class Expr:
    line: int = field(default=0, compare=False, kw_only=True)
    col: int = field(default=0, compare=False, kw_only=True)
    type: object = field(default=None, compare=False, kw_only=True)


@dataclass(eq=True)
class IntLiteral(Expr):
    value: int


@dataclass(eq=True)
class BoolLiteral(Expr):
    value: bool


@dataclass(eq=True)
class VarRef(Expr):
    name: str


@dataclass(eq=True)
class Cast(Expr):
    target: IntType
    operand: Expr


@dataclass(eq=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(eq=True)
class Unary(Expr):
    op: str
    operand: Expr


ARITH_OPS = {"+", "-", "*", "/", "%"}
COMPARE_OPS = {"<", "<=", ">", ">=", "==", "!="}
LOGIC_OPS = {"&&", "||"}


def iter_var_refs(expr: Expr | None) -> Iterator[VarRef]:
    """VarRefs of an expression in left-to-right evaluation order."""
    if expr is None:
        return
    if isinstance(expr, VarRef):
        yield expr
    elif isinstance(expr, Cast):
        yield from iter_var_refs(expr.operand)
    elif isinstance(expr, Unary):
        yield from iter_var_refs(expr.operand)
    elif isinstance(expr, Binary):
        yield from iter_var_refs(expr.left)
        yield from iter_var_refs(expr.right)


# -- statements -------------------------------------------------------------

@dataclass(eq=True)
class VarDecl:
    name: str
    type: IntType
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(eq=True)
class Stmt:
    id: int = field(default=0, kw_only=True)
    line: int = field(default=0, compare=False, kw_only=True)
    col: int = field(default=0, compare=False, kw_only=True)


@dataclass(eq=True)
class VarDeclInit(Stmt):
    """Local declaration; ``init`` is None for a bare ``uint8 x;``."""

    decl: VarDecl
    init: Expr | None


@dataclass(eq=True)
class Assign(Stmt):
    target: str
    value: Expr


@dataclass(eq=True)
class If(Stmt):
    cond: Expr
    then_body: list
    else_body: list


@dataclass(eq=True)
class While(Stmt):
    cond: Expr
    body: list


@dataclass(eq=True)
class Require(Stmt):
    cond: Expr


@dataclass(eq=True)
class Return(Stmt):
    value: Expr | None


@dataclass(eq=True)
class Call(Stmt):
    """Intra-contract call, optionally storing the result.

    ``declares`` is set when the result initializes a new local
    (``uint8 r = f(x);``); ``target`` then names that local.
    """

    callee: str
    args: list
    target: str | None = None
    declares: VarDecl | None = None


Statement = Union[VarDeclInit, Assign, If, While, Require, Return, Call]


def walk_statements(body: list) -> Iterator[Stmt]:
    """Pre-order walk: a compound statement precedes its branches."""
    for stmt in body:
        yield stmt
        if isinstance(stmt, If):
            yield from walk_statements(stmt.then_body)
            yield from walk_statements(stmt.else_body)
        elif isinstance(stmt, While):
            yield from walk_statements(stmt.body)


# -- declarations -----------------------------------------------------------

@dataclass(eq=True)
class FunctionDef:
    name: str
    params: list
    returns: IntType | None
    body: list
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)

    @property
    def param_node(self) -> int | None:
        """Node id binding the parameters, present only when there are any."""
        return 1 if self.params else None

    @property
    def first_statement_id(self) -> int:
        return 2 if self.params else 1

    def statements(self) -> list:
        return list(walk_statements(self.body))

    def statement_map(self) -> dict:
        return {s.id: s for s in walk_statements(self.body)}


@dataclass(eq=True)
class StateVar:
    decl: VarDecl
    init: int = 0


@dataclass(eq=True)
class ContractDef:
    name: str
    state_vars: list
    functions: list
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)

    def function(self, name: str) -> FunctionDef | None:
        for fn in self.functions:
            if fn.name == name:
                return fn
        return None


@dataclass(eq=True)
class SourceUnit:
    contracts: list
    source_name: str = field(default="<input>", compare=False)

    def find_function(self, name: str) -> tuple[ContractDef, FunctionDef] | None:
        for contract in self.contracts:
            fn = contract.function(name)
            if fn is not None:
                return contract, fn
        return None
