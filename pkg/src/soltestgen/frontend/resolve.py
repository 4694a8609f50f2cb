"""Scope and type checking.

Integer operands of a binary operator must have the same type; width or
signedness changes need an explicit cast. Literals take the type their
context demands and default to uint256.
"""

from __future__ import annotations

import copy

from ..errors import TypeCheckError
from . import nodes as N


class _Scope:
    def __init__(self, state: dict[str, N.IntType]):
        self.state = state
        self.blocks: list[dict[str, N.IntType]] = []
        self.declared: set[str] = set()

    def lookup(self, name: str) -> N.IntType | None:
        for block in reversed(self.blocks):
            if name in block:
                return block[name]
        return self.state.get(name)

    def declare(self, decl: N.VarDecl) -> None:
        if decl.name in self.declared or decl.name in self.state:
            raise TypeCheckError(f"redeclaration of {decl.name!r}", decl.line, decl.col)
        self.declared.add(decl.name)
        self.blocks[-1][decl.name] = decl.type


class Resolver:
    def __init__(self, contract: N.ContractDef):
        self.contract = contract
        self.state: dict[str, N.IntType] = {}
        for sv in contract.state_vars:
            d = sv.decl
            if d.name in self.state:
                raise TypeCheckError(f"duplicate state variable {d.name!r}", d.line, d.col)
            if not d.type.contains(sv.init):
                raise TypeCheckError(f"initializer {sv.init} out of range for {d.type}", d.line, d.col)
            self.state[d.name] = d.type
        names = set()
        for fn in contract.functions:
            if fn.name in names:
                raise TypeCheckError(f"duplicate function {fn.name!r}", fn.line, fn.col)
            names.add(fn.name)
        self.functions = {fn.name: fn for fn in contract.functions}

    def resolve_function(self, fn: N.FunctionDef) -> None:
        scope = _Scope(self.state)
        scope.blocks.append({})
        for p in fn.params:
            scope.declare(p)
        self.fn = fn
        self.block(fn.body, scope)

    def block(self, body: list, scope: _Scope) -> None:
        scope.blocks.append({})
        for stmt in body:
            self.statement(stmt, scope)
        scope.blocks.pop()

    def statement(self, stmt: N.Stmt, scope: _Scope) -> None:
        if isinstance(stmt, N.VarDeclInit):
            if stmt.init is not None:
                self.expr(stmt.init, scope, stmt.decl.type)
            scope.declare(stmt.decl)
        elif isinstance(stmt, N.Assign):
            target = self.lookup(stmt.target, scope, stmt)
            self.expr(stmt.value, scope, target)
        elif isinstance(stmt, N.If):
            self.expr(stmt.cond, scope, N.BOOL)
            self.block(stmt.then_body, scope)
            self.block(stmt.else_body, scope)
        elif isinstance(stmt, N.While):
            self.expr(stmt.cond, scope, N.BOOL)
            self.block(stmt.body, scope)
        elif isinstance(stmt, N.Require):
            self.expr(stmt.cond, scope, N.BOOL)
        elif isinstance(stmt, N.Return):
            if stmt.value is not None:
                if self.fn.returns is None:
                    raise TypeCheckError(
                        f"function {self.fn.name!r} returns no value", stmt.line, stmt.col)
                self.expr(stmt.value, scope, self.fn.returns)
        elif isinstance(stmt, N.Call):
            callee = self.functions.get(stmt.callee)
            if callee is None:
                raise TypeCheckError(f"unknown function {stmt.callee!r}", stmt.line, stmt.col)
            if len(callee.params) != len(stmt.args):
                raise TypeCheckError(
                    f"{stmt.callee!r} expects {len(callee.params)} argument(s), got {len(stmt.args)}",
                    stmt.line, stmt.col)
            for arg, param in zip(stmt.args, callee.params):
                self.expr(arg, scope, param.type)
            if stmt.target is not None:
                if callee.returns is None:
                    raise TypeCheckError(
                        f"{stmt.callee!r} does not return a value", stmt.line, stmt.col)
                if stmt.declares is not None:
                    want = stmt.declares.type
                    scope.declare(stmt.declares)
                else:
                    want = self.lookup(stmt.target, scope, stmt)
                if want != callee.returns:
                    raise TypeCheckError(
                        f"cannot assign {callee.returns} result to {want} {stmt.target!r}",
                        stmt.line, stmt.col)
        else:  # pragma: no cover - parser never builds other kinds
            raise TypeCheckError(f"unknown statement {stmt!r}", stmt.line, stmt.col)

    def lookup(self, name: str, scope: _Scope, where) -> N.IntType:
        ty = scope.lookup(name)
        if ty is None:
            raise TypeCheckError(f"unknown identifier {name!r}", where.line, where.col)
        return ty

    # -- expressions ------------------------------------------------------

    def expr(self, e: N.Expr, scope: _Scope, expected=None):
        """Annotate ``e`` and check it against ``expected`` (None = any)."""
        ty = self.infer(e, scope, expected)
        if expected is not None and ty != expected:
            raise TypeCheckError(f"expected {expected}, found {ty}", e.line, e.col)
        return ty

    def infer(self, e: N.Expr, scope: _Scope, hint=None):
        if isinstance(e, N.IntLiteral):
            ty = hint if isinstance(hint, N.IntType) else N.UINT256
            if not ty.contains(e.value):
                raise TypeCheckError(f"literal {e.value} out of range for {ty}", e.line, e.col)
        elif isinstance(e, N.BoolLiteral):
            ty = N.BOOL
        elif isinstance(e, N.VarRef):
            ty = self.lookup(e.name, scope, e)
        elif isinstance(e, N.Cast):
            inner = self.infer(e.operand, scope, e.target if _is_literal(e.operand) else None)
            if inner is N.BOOL:
                raise TypeCheckError("cannot cast a boolean to an integer", e.line, e.col)
            ty = e.target
        elif isinstance(e, N.Unary):
            if e.op == "!":
                self.expr(e.operand, scope, N.BOOL)
                ty = N.BOOL
            else:
                ty = self.int_operand(e.operand, scope, hint if isinstance(hint, N.IntType) else None)
        elif isinstance(e, N.Binary):
            if e.op in N.LOGIC_OPS:
                self.expr(e.left, scope, N.BOOL)
                self.expr(e.right, scope, N.BOOL)
                ty = N.BOOL
            else:
                int_hint = hint if e.op in N.ARITH_OPS and isinstance(hint, N.IntType) else None
                operand = self.binary_operands(e, scope, int_hint)
                ty = operand if e.op in N.ARITH_OPS else N.BOOL
        else:  # pragma: no cover
            raise TypeCheckError(f"unknown expression {e!r}", e.line, e.col)
        e.type = ty
        return ty

    def int_operand(self, e: N.Expr, scope: _Scope, hint) -> N.IntType:
        ty = self.infer(e, scope, hint)
        if ty is N.BOOL:
            raise TypeCheckError("boolean used where an integer is required", e.line, e.col)
        return ty

    def binary_operands(self, e: N.Binary, scope: _Scope, hint) -> N.IntType:
        # a literal side adopts the other side's type
        left_lit = _is_literal(e.left)
        right_lit = _is_literal(e.right)
        if left_lit and not right_lit:
            rt = self.int_operand(e.right, scope, hint)
            self.int_operand(e.left, scope, rt)
            return rt
        lt = self.int_operand(e.left, scope, hint)
        rt = self.int_operand(e.right, scope, lt)
        if lt != rt:
            raise TypeCheckError(
                f"operands of {e.op!r} differ in type ({lt} vs {rt}); add an explicit cast",
                e.line, e.col)
        return lt


def _is_literal(e: N.Expr) -> bool:
    """True for expressions made only of literals, whose type is contextual."""
    if isinstance(e, N.IntLiteral):
        return True
    if isinstance(e, N.Unary) and e.op == "-":
        return _is_literal(e.operand)
    if isinstance(e, N.Binary) and e.op in N.ARITH_OPS:
        return _is_literal(e.left) and _is_literal(e.right)
    return False


def resolve_types(unit: N.SourceUnit) -> N.SourceUnit:
    """Return an annotated deep copy of ``unit``; the input is left untouched."""
    unit = copy.deepcopy(unit)
    seen = set()
    for contract in unit.contracts:
        if contract.name in seen:
            raise TypeCheckError(f"duplicate contract {contract.name!r}", contract.line, contract.col)
        seen.add(contract.name)
        resolver = Resolver(contract)
        for fn in contract.functions:
            resolver.resolve_function(fn)
    return unit
