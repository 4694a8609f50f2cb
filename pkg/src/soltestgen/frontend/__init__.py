"""Lexing, parsing and type resolution for the contract subset."""

from __future__ import annotations

from pathlib import Path

from .lexer import Token, tokenize
from .nodes import (
    BOOL, Assign, Binary, BoolLiteral, Call, Cast, ContractDef, FunctionDef, If,
    IntLiteral, IntType, Require, Return, SourceUnit, StateVar, Unary, VarDecl,
    VarDeclInit, VarRef, While, iter_var_refs, walk_statements,
)
from .parser import parse_source
from .printer import format_expr, format_statement, pretty_print
from .resolve import resolve_types


def load_source(text: str, source_name: str = "<input>", narrow_widths: bool = False) -> SourceUnit:
    """Tokenize, parse and resolve ``text`` in one step."""
    return resolve_types(parse_source(tokenize(text, narrow_widths), source_name))


def load_file(path, narrow_widths: bool = False) -> SourceUnit:
    path = Path(path)
    return load_source(path.read_text(encoding="utf-8"), str(path), narrow_widths)


__all__ = [
    "BOOL", "Assign", "Binary", "BoolLiteral", "Call", "Cast", "ContractDef",
    "FunctionDef", "If", "IntLiteral", "IntType", "Require", "Return",
    "SourceUnit", "StateVar", "Token", "Unary", "VarDecl", "VarDeclInit",
    "VarRef", "While", "format_expr", "format_statement", "iter_var_refs",
    "load_file", "load_source", "parse_source", "pretty_print",
    "resolve_types", "tokenize", "walk_statements",
]
