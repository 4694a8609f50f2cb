"""Recursive-descent parser producing the AST in ``nodes``."""

from __future__ import annotations

from ..errors import ParseError
from . import nodes as N
from .lexer import Token, type_keyword_width

MODIFIERS = {"public", "private", "internal", "external", "view", "pure", "payable"}

COMPOUND_ASSIGN = {
    "PlusAssign": "+", "MinusAssign": "-", "StarAssign": "*",
    "SlashAssign": "/", "PercentAssign": "%",
}

# binary precedence levels, loosest first
BINARY_LEVELS = [
    {"OrOr": "||"},
    {"AndAnd": "&&"},
    {"EqEq": "==", "Ne": "!="},
    {"Lt": "<", "Le": "<=", "Gt": ">", "Ge": ">="},
    {"Plus": "+", "Minus": "-"},
    {"Star": "*", "Slash": "/", "Percent": "%"},
]


class Parser:
    def __init__(self, tokens: list[Token], source_name: str = "<input>"):
        self.tokens = tokens
        self.pos = 0
        self.source_name = source_name

    # -- token helpers ----------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, offset: int = 1) -> Token:
        idx = min(self.pos + offset, len(self.tokens) - 1)
        return self.tokens[idx]

    def at(self, kind: str, value: str | None = None) -> bool:
        t = self.tok
        return t.kind == kind and (value is None or t.value == value)

    def at_type(self) -> bool:
        return self.tok.kind == "Kw" and type_keyword_width(self.tok.value, True) is not None

    def next(self) -> Token:
        t = self.tok
        if t.kind != "EOF":
            self.pos += 1
        return t

    def expect(self, kind: str, value: str | None = None, what: str | None = None) -> Token:
        if not self.at(kind, value):
            expected = what or value or _describe(kind)
            found = self.tok.value or self.tok.kind
            raise ParseError(f"expected {expected!r}, found {found!r}", self.tok.line, self.tok.col)
        return self.next()

    def error(self, message: str) -> ParseError:
        return ParseError(message, self.tok.line, self.tok.col)

    # -- declarations -----------------------------------------------------

    def parse_unit(self) -> N.SourceUnit:
        contracts = []
        while not self.at("EOF"):
            contracts.append(self.parse_contract())
        if not contracts:
            raise self.error("expected at least one contract")
        return N.SourceUnit(contracts, source_name=self.source_name)

    def parse_contract(self) -> N.ContractDef:
        start = self.expect("Kw", "contract")
        name = self.expect("Ident", what="contract name").value
        self.expect("LBrace")
        state_vars, functions = [], []
        while not self.at("RBrace"):
            if self.at("Kw", "function"):
                functions.append(self.parse_function())
            elif self.at_type():
                state_vars.append(self.parse_state_var())
            else:
                raise self.error(f"unexpected {self.tok.value or self.tok.kind!r} in contract body")
        self.expect("RBrace")
        return N.ContractDef(name, state_vars, functions, start.line, start.col)

    def parse_type(self) -> N.IntType:
        if not self.at_type():
            raise self.error(f"expected integer type, found {self.tok.value or self.tok.kind!r}")
        return N.IntType.parse(self.next().value)

    def parse_state_var(self) -> N.StateVar:
        t = self.tok
        ty = self.parse_type()
        while self.at("Kw") and self.tok.value in MODIFIERS:
            self.next()
        name = self.expect("Ident", what="variable name").value
        init = 0
        if self.at("Assign"):
            self.next()
            negative = False
            if self.at("Minus"):
                self.next()
                negative = True
            init = int(self.expect("Lit", what="integer literal").value)
            init = -init if negative else init
        self.expect("Semi")
        return N.StateVar(N.VarDecl(name, ty, t.line, t.col), init)

    def parse_function(self) -> N.FunctionDef:
        start = self.expect("Kw", "function")
        name = self.expect("Ident", what="function name").value
        self.expect("LParen")
        params = []
        if not self.at("RParen"):
            while True:
                t = self.tok
                ty = self.parse_type()
                pname = self.expect("Ident", what="parameter name").value
                params.append(N.VarDecl(pname, ty, t.line, t.col))
                if not self.at("Comma"):
                    break
                self.next()
        self.expect("RParen")
        returns = None
        while self.at("Kw"):
            if self.tok.value in MODIFIERS:
                self.next()
            elif self.tok.value == "returns":
                self.next()
                self.expect("LParen")
                returns = self.parse_type()
                self.expect("RParen")
            else:
                break
        body = self.parse_block()
        fn = N.FunctionDef(name, params, returns, body, start.line, start.col)
        for idx, stmt in enumerate(N.walk_statements(body), start=fn.first_statement_id):
            stmt.id = idx
        return fn

    # -- statements -------------------------------------------------------

    def parse_block(self) -> list:
        self.expect("LBrace")
        body = []
        while not self.at("RBrace"):
            if self.at("EOF"):
                raise self.error("expected '}' before end of input")
            body.extend(self.parse_statement())
        self.expect("RBrace")
        return body

    def parse_body(self) -> list:
        """Either a braced block or a single statement."""
        if self.at("LBrace"):
            return self.parse_block()
        return self.parse_statement()

    def parse_statement(self) -> list:
        """Parse one source statement; ``for`` desugars into two."""
        t = self.tok
        pos = dict(line=t.line, col=t.col)
        if self.at("Kw", "if"):
            self.next()
            self.expect("LParen")
            cond = self.parse_expr()
            self.expect("RParen")
            then_body = self.parse_body()
            else_body = []
            if self.at("Kw", "else"):
                self.next()
                else_body = self.parse_body()
            return [N.If(cond, then_body, else_body, **pos)]
        if self.at("Kw", "while"):
            self.next()
            self.expect("LParen")
            cond = self.parse_expr()
            self.expect("RParen")
            return [N.While(cond, self.parse_body(), **pos)]
        if self.at("Kw", "for"):
            return self.parse_for()
        if self.at("Kw", "require"):
            self.next()
            self.expect("LParen")
            cond = self.parse_expr()
            self.expect("RParen")
            self.expect("Semi")
            return [N.Require(cond, **pos)]
        if self.at("Kw", "return"):
            self.next()
            value = None if self.at("Semi") else self.parse_expr()
            self.expect("Semi")
            return [N.Return(value, **pos)]
        stmt = self.parse_simple()
        self.expect("Semi")
        return [stmt]

    def parse_for(self) -> list:
        t = self.next()
        pos = dict(line=t.line, col=t.col)
        self.expect("LParen")
        out = []
        if not self.at("Semi"):
            out.append(self.parse_simple())
        self.expect("Semi")
        if self.at("Semi"):
            cond = N.BoolLiteral(True, **pos)
        else:
            cond = self.parse_expr()
        self.expect("Semi")
        update = None if self.at("RParen") else self.parse_simple()
        self.expect("RParen")
        body = self.parse_body()
        if update is not None:
            body = body + [update]
        out.append(N.While(cond, body, **pos))
        return out

    def parse_simple(self) -> N.Stmt:
        """Declaration, assignment or call, without the trailing ';'."""
        t = self.tok
        pos = dict(line=t.line, col=t.col)
        if self.at_type() and not self.peek().kind == "LParen":
            ty = self.parse_type()
            name_tok = self.expect("Ident", what="variable name")
            decl = N.VarDecl(name_tok.value, ty, t.line, t.col)
            if not self.at("Assign"):
                return N.VarDeclInit(decl, None, **pos)
            self.next()
            if self.at_call():
                callee, args = self.parse_call()
                return N.Call(callee, args, decl.name, decl, **pos)
            return N.VarDeclInit(decl, self.parse_expr(), **pos)
        if self.at("Ident"):
            if self.peek().kind == "LParen":
                callee, args = self.parse_call()
                return N.Call(callee, args, None, None, **pos)
            name = self.next().value
            ref = N.VarRef(name, **pos)
            if self.at("Assign"):
                self.next()
                if self.at_call():
                    callee, args = self.parse_call()
                    return N.Call(callee, args, name, None, **pos)
                return N.Assign(name, self.parse_expr(), **pos)
            if self.tok.kind in COMPOUND_ASSIGN:
                op = COMPOUND_ASSIGN[self.next().kind]
                return N.Assign(name, N.Binary(op, ref, self.parse_expr(), **pos), **pos)
            if self.at("PlusPlus") or self.at("MinusMinus"):
                op = "+" if self.next().kind == "PlusPlus" else "-"
                return N.Assign(name, N.Binary(op, ref, N.IntLiteral(1, **pos), **pos), **pos)
            raise self.error(f"expected assignment after {name!r}")
        raise self.error(f"unexpected {self.tok.value or self.tok.kind!r} at start of statement")

    def at_call(self) -> bool:
        return self.at("Ident") and self.peek().kind == "LParen"

    def parse_call(self) -> tuple[str, list]:
        callee = self.expect("Ident").value
        self.expect("LParen")
        args = []
        if not self.at("RParen"):
            while True:
                args.append(self.parse_expr())
                if not self.at("Comma"):
                    break
                self.next()
        self.expect("RParen")
        return callee, args

    # -- expressions ------------------------------------------------------

    def parse_expr(self, level: int = 0) -> N.Expr:
        if level == len(BINARY_LEVELS):
            return self.parse_unary()
        ops = BINARY_LEVELS[level]
        left = self.parse_expr(level + 1)
        while self.tok.kind in ops:
            t = self.next()
            right = self.parse_expr(level + 1)
            left = N.Binary(ops[t.kind], left, right, line=t.line, col=t.col)
        return left

    def parse_unary(self) -> N.Expr:
        t = self.tok
        if self.at("Minus") or self.at("Bang"):
            self.next()
            operand = self.parse_unary()
            if t.kind == "Minus" and isinstance(operand, N.IntLiteral) and operand.value >= 0:
                return N.IntLiteral(-operand.value, line=t.line, col=t.col)
            return N.Unary("-" if t.kind == "Minus" else "!", operand, line=t.line, col=t.col)
        return self.parse_primary()

    def parse_primary(self) -> N.Expr:
        t = self.tok
        pos = dict(line=t.line, col=t.col)
        if self.at("Lit"):
            self.next()
            return N.IntLiteral(int(t.value), **pos)
        if self.at("Kw", "true") or self.at("Kw", "false"):
            self.next()
            return N.BoolLiteral(t.value == "true", **pos)
        if self.at_type():
            target = self.parse_type()
            self.expect("LParen")
            operand = self.parse_expr()
            self.expect("RParen")
            return N.Cast(target, operand, **pos)
        if self.at("Ident"):
            if self.peek().kind == "LParen":
                raise self.error("calls are only allowed as statements")
            self.next()
            return N.VarRef(t.value, **pos)
        if self.at("LParen"):
            self.next()
            inner = self.parse_expr()
            self.expect("RParen")
            return inner
        raise self.error(f"expected expression, found {t.value or t.kind!r}")


def _describe(kind: str) -> str:
    from .lexer import PUNCT

    for text, k in PUNCT:
        if k == kind:
            return text
    return kind


def parse_source(tokens: list[Token], source_name: str = "<input>") -> N.SourceUnit:
    return Parser(tokens, source_name).parse_unit()
