"""Render an AST back to source text.

Sugar (``for``, ``+=``, ``++``) is printed in its desugared form, so
``parse(pretty_print(parse(src)))`` reproduces the same tree and ids.
"""

from __future__ import annotations

from . import nodes as N

_PREC = {"||": 1, "&&": 2, "==": 3, "!=": 3, "<": 4, "<=": 4, ">": 4, ">=": 4,
         "+": 5, "-": 5, "*": 6, "/": 6, "%": 6}


def format_expr(e: N.Expr, parent_prec: int = 0) -> str:
    if isinstance(e, N.IntLiteral):
        return str(e.value)
    if isinstance(e, N.BoolLiteral):
        return "true" if e.value else "false"
    if isinstance(e, N.VarRef):
        return e.name
    if isinstance(e, N.Cast):
        return f"{e.target}({format_expr(e.operand)})"
    if isinstance(e, N.Unary):
        inner = format_expr(e.operand, 7)
        # keep "-(-x)" and "-5" distinct from a folded literal
        if e.op == "-" and (inner.startswith("-") or isinstance(e.operand, N.IntLiteral)):
            inner = f"({inner})"
        return f"{e.op}{inner}"
    if isinstance(e, N.Binary):
        prec = _PREC[e.op]
        # left-associative: the right operand needs parens at equal precedence
        text = f"{format_expr(e.left, prec)} {e.op} {format_expr(e.right, prec + 1)}"
        return f"({text})" if prec < parent_prec else text
    raise TypeError(f"cannot format {e!r}")


def _format_body(body: list, indent: int, out: list[str]) -> None:
    pad = "    " * indent
    for s in body:
        if isinstance(s, N.VarDeclInit):
            init = "" if s.init is None else f" = {format_expr(s.init)}"
            out.append(f"{pad}{s.decl.type} {s.decl.name}{init};")
        elif isinstance(s, N.Assign):
            out.append(f"{pad}{s.target} = {format_expr(s.value)};")
        elif isinstance(s, N.If):
            out.append(f"{pad}if ({format_expr(s.cond)}) {{")
            _format_body(s.then_body, indent + 1, out)
            if s.else_body:
                out.append(f"{pad}}} else {{")
                _format_body(s.else_body, indent + 1, out)
            out.append(f"{pad}}}")
        elif isinstance(s, N.While):
            out.append(f"{pad}while ({format_expr(s.cond)}) {{")
            _format_body(s.body, indent + 1, out)
            out.append(f"{pad}}}")
        elif isinstance(s, N.Require):
            out.append(f"{pad}require({format_expr(s.cond)});")
        elif isinstance(s, N.Return):
            out.append(f"{pad}return{'' if s.value is None else ' ' + format_expr(s.value)};")
        elif isinstance(s, N.Call):
            call = f"{s.callee}({', '.join(format_expr(a) for a in s.args)})"
            if s.declares is not None:
                call = f"{s.declares.type} {s.target} = {call}"
            elif s.target is not None:
                call = f"{s.target} = {call}"
            out.append(f"{pad}{call};")


def format_statement(s: N.Stmt) -> str:
    """One-line header text of a statement, as shown in CFG labels."""
    if isinstance(s, N.If):
        return f"if ({format_expr(s.cond)})"
    if isinstance(s, N.While):
        return f"while ({format_expr(s.cond)})"
    out: list[str] = []
    _format_body([s], 0, out)
    return out[0]


def pretty_print(unit: N.SourceUnit) -> str:
    out: list[str] = []
    for contract in unit.contracts:
        out.append(f"contract {contract.name} {{")
        for sv in contract.state_vars:
            init = f" = {sv.init}" if sv.init else ""
            out.append(f"    {sv.decl.type} {sv.decl.name}{init};")
        for fn in contract.functions:
            params = ", ".join(f"{p.type} {p.name}" for p in fn.params)
            ret = f" returns ({fn.returns})" if fn.returns is not None else ""
            out.append(f"    function {fn.name}({params}) public{ret} {{")
            _format_body(fn.body, 2, out)
            out.append("    }")
        out.append("}")
    return "\n".join(out) + "\n"
