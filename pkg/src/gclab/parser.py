"""Recursive-descent parsers for the three source languages.

Precedence, loosest to tightest: or, and, not, comparisons, + -,
* div mod, unary minus. Note that `not` binds looser than comparisons,
so `not x < y` reads as `not (x < y)`.

Parsing and checking are interleaved: every name is resolved against the
declarations in scope at the point of use and every expression is typed as
soon as it is built, so no parse ever returns an ill-typed tree and every
diagnostic carries a line and column.
"""

from __future__ import annotations

from .check import BUILTIN_NAMES, check_assign, check_declaration, type_of
from .errors import CheckError, ParseError
from .lexer import Token, tokenize
from .syntax import (
    ArrayRef, Assign, Await, BinOp, BoolLit, Builtin, ChoiceAssign,
    CspProcess, CspSystem, Declaration, Do, Expr, ExtGuard, Fail,
    GclProgram, GuardedCommand, If, IfElse, Input, IntLit, Output,
    ParSystem, RandomAssign, Skip, Stmt, UnaryOp, Var, While, seq,
)

_CMP_OPS = ("=", "!=", "<", "<=", ">", ">=")

# tokens that end a statement sequence
_SEQ_STOP = frozenset({
    "eof", "fi", "od", "[]", "end", "component", "epilogue", "else",
})


class _CspLoop:
    """Internal marker: an extended-guard do loop met while parsing a
    process body. Not a Stmt; it must sit in final position."""

    def __init__(self, arms: list[ExtGuard], io_positions: list[Token]):
        self.arms = arms
        self.io_positions = io_positions


class Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0
        self.decls: dict[str, Declaration] = {}
        self.decl_positions: dict[str, Token] = {}

    # -- token plumbing -----------------------------------------------------

    def peek(self, ahead: int = 0) -> Token:
        return self.toks[min(self.i + ahead, len(self.toks) - 1)]

    def at(self, kind: str) -> bool:
        return self.peek().kind == kind

    def advance(self) -> Token:
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def expect(self, kind: str, what: str | None = None) -> Token:
        t = self.peek()
        if t.kind != kind:
            shown = what or f"'{kind}'"
            found = t.text if t.kind != "eof" else "end of input"
            raise ParseError(f"expected {shown}, found {found!r}", t.line, t.col)
        return self.advance()

    def fail(self, message: str, tok: Token | None = None):
        t = tok or self.peek()
        raise ParseError(message, t.line, t.col)

    # -- error-position plumbing for the checker ----------------------------

    def _typed(self, e: Expr, tok: Token, want: str | None = None) -> Expr:
        try:
            t = type_of(e, self.decls)
        except CheckError as err:
            raise CheckError(err.message, tok.line, tok.col) from None
        if want is not None and t != want:
            raise CheckError(f"expected a {want} expression, got {t}", tok.line, tok.col)
        return e

    # -- declarations -------------------------------------------------------

    def parse_decls(self) -> tuple[Declaration, ...]:
        out: list[Declaration] = []
        while self.at("var"):
            self.advance()
            name_tok = self.expect("ident", "a variable name")
            name = name_tok.text
            if name in self.decls:
                raise CheckError(f"duplicate declaration of '{name}'",
                                 name_tok.line, name_tok.col)
            if name in BUILTIN_NAMES:
                raise CheckError(f"'{name}' is a builtin function name and cannot be declared",
                                 name_tok.line, name_tok.col)
            self.expect(":")
            if self.at("bool"):
                self.advance()
                kind, lo, hi = "bool", None, None
            else:
                self.expect("int", "'int' or 'bool'")
                if self.at("["):
                    self.advance()
                    lo = self._signed_int()
                    self.expect("..")
                    hi = self._signed_int()
                    self.expect("]")
                    kind = "int[]"
                else:
                    kind, lo, hi = "int", None, None
            init = None
            if self.at("="):
                self.advance()
                init = self._parse_initializer(kind)
            d = Declaration(name, kind, lo, hi, init)
            try:
                check_declaration(d)
            except CheckError as err:
                raise CheckError(err.message, name_tok.line, name_tok.col) from None
            self.decls[name] = d
            self.decl_positions[name] = name_tok
            out.append(d)
            self.expect(";")
        return tuple(out)

    def _signed_int(self) -> int:
        sign = 1
        if self.at("-"):
            self.advance()
            sign = -1
        t = self.expect("int", "an integer")
        return sign * int(t.text)

    def _parse_initializer(self, kind: str):
        if self.at("true") or self.at("false"):
            return self.advance().kind == "true"
        if self.at("["):
            self.advance()
            cells = [self._signed_int()]
            while self.at(","):
                self.advance()
                cells.append(self._signed_int())
            self.expect("]")
            return tuple(cells)
        return self._signed_int()

    # -- expressions ----------------------------------------------------

    def parse_expr(self) -> Expr:
        return self._parse_or()

    def _parse_or(self) -> Expr:
        e = self._parse_and()
        while self.at("or"):
            self.advance()
            e = BinOp("or", e, self._parse_and())
        return e

    def _parse_and(self) -> Expr:
        e = self._parse_not()
        while self.at("and"):
            self.advance()
            e = BinOp("and", e, self._parse_not())
        return e

    def _parse_not(self) -> Expr:
        if self.at("not"):
            self.advance()
            return UnaryOp("not", self._parse_not())
        return self._parse_cmp()

    def _parse_cmp(self) -> Expr:
        e = self._parse_add()
        if self.peek().kind in _CMP_OPS:
            op = self.advance().kind
            e = BinOp(op, e, self._parse_add())
        return e

    def _parse_add(self) -> Expr:
        e = self._parse_mul()
        while self.peek().kind in ("+", "-"):
            op = self.advance().kind
            e = BinOp(op, e, self._parse_mul())
        return e

    def _parse_mul(self) -> Expr:
        e = self._parse_unary()
        while self.peek().kind in ("*", "div", "mod"):
            op = self.advance().kind
            e = BinOp(op, e, self._parse_unary())
        return e

    def _parse_unary(self) -> Expr:
        if self.at("-"):
            self.advance()
            # a minus on an integer literal IS a negative literal; explicit
            # negation of a literal is written with parens, `-(2)`
            if self.at("int"):
                return IntLit(-int(self.advance().text))
            return UnaryOp("neg", self._parse_unary())
        return self._parse_atom()

    def _parse_atom(self) -> Expr:
        t = self.peek()
        if t.kind == "int":
            self.advance()
            return IntLit(int(t.text))
        if t.kind in ("true", "false"):
            self.advance()
            return BoolLit(t.kind == "true")
        if t.kind == "(":
            self.advance()
            e = self.parse_expr()
            self.expect(")")
            return e
        if t.kind == "ident":
            self.advance()
            name = t.text
            if self.at("("):
                if name not in BUILTIN_NAMES:
                    self.fail(f"'{name}' is not callable (only min/max are builtins)", t)
                self.advance()
                a = self.parse_expr()
                self.expect(",")
                b = self.parse_expr()
                self.expect(")")
                return Builtin(name, (a, b))
            if name in BUILTIN_NAMES:
                self.fail(f"builtin '{name}' used without arguments", t)
            if name not in self.decls:
                raise CheckError(f"undeclared identifier '{name}'", t.line, t.col)
            if self.at("["):
                self.advance()
                idx = self.parse_expr()
                self.expect("]")
                return ArrayRef(name, idx)
            return Var(name)
        self.fail(f"expected an expression, found {t.text or 'end of input'!r}", t)

    def typed_expr(self, want: str | None = None) -> Expr:
        tok = self.peek()
        return self._typed(self.parse_expr(), tok, want)

    # -- statements -----------------------------------------------------

    def parse_stmt_seq(self, fragment: str = "gcl") -> Stmt:
        stmts = [self.parse_stmt(fragment)]
        while self.at(";"):
            self.advance()
            stmts.append(self.parse_stmt(fragment))
        return seq(stmts)

    def parse_stmt(self, fragment: str = "gcl") -> Stmt:
        t = self.peek()
        if t.kind == "skip":
            self.advance()
            return Skip()
        if t.kind in ("abort", "fail"):
            if fragment == "par":
                self.fail("the parallel fragment has no abort/fail", t)
            self.advance()
            return Fail(t.kind)
        if t.kind == "if":
            if fragment == "par":
                return self._parse_if_then_else()
            return self._parse_guarded(If, "fi")
        if t.kind == "do":
            if fragment == "par":
                self.fail("the parallel fragment allows only while/if; no do-od loops", t)
            return self._parse_guarded(Do, "od")
        if t.kind == "while":
            if fragment != "par":
                self.fail("'while' belongs to the parallel fragment; use do-od", t)
            return self._parse_while()
        if t.kind == "await":
            if fragment != "par":
                self.fail("'await' belongs to the parallel fragment", t)
            self.advance()
            return Await(self.typed_expr("bool"))
        if t.kind == "ident":
            return self._parse_assignment(fragment)
        self.fail(f"expected a statement, found {t.text or 'end of input'!r}", t)

    def _parse_guarded(self, node, closer: str) -> Stmt:
        self.advance()
        arms = [self._parse_arm()]
        while self.at("[]"):
            self.advance()
            arms.append(self._parse_arm())
        self.expect(closer, f"'[]' or '{closer}'")
        return node(tuple(arms))

    def _parse_arm(self) -> GuardedCommand:
        guard = self.typed_expr("bool")
        if self.at(";"):
            self.fail("i/o commands are allowed only in the guards of a process main loop")
        self.expect("->")
        body = self.parse_stmt_seq("gcl")
        return GuardedCommand(guard, body)

    def _parse_if_then_else(self) -> Stmt:
        self.expect("if")
        cond = self.typed_expr("bool")
        self.expect("then")
        then_branch = self.parse_stmt_seq("par")
        if self.at("else"):
            self.advance()
            else_branch = self.parse_stmt_seq("par")
        else:
            else_branch = Skip()
        self.expect("fi")
        return IfElse(cond, then_branch, else_branch)

    def _parse_while(self) -> Stmt:
        self.expect("while")
        cond = self.typed_expr("bool")
        self.expect("do")
        body = self.parse_stmt_seq("par")
        self.expect("od")
        return While(cond, body)

    def _parse_assignment(self, fragment: str) -> Stmt:
        start = self.peek()
        targets = [self._parse_target()]
        while self.at(","):
            self.advance()
            targets.append(self._parse_target())
        if self.peek().kind in ("?", "!"):
            self.fail("i/o commands are allowed only in the guards of a process main loop")
        self.expect(":=")
        if self.at("?"):
            self.advance()
            if fragment == "par":
                self.fail("random assignment is not part of the parallel fragment", start)
            return RandomAssign(self._scalar_target_name(targets, start))
        if self.at("choice"):
            self.advance()
            if fragment == "par":
                self.fail("choice assignment is not part of the parallel fragment", start)
            self.expect("(")
            bound = self.typed_expr("int")
            self.expect(")")
            return ChoiceAssign(self._scalar_target_name(targets, start), bound)
        values = [self.parse_expr()]
        while self.at(","):
            self.advance()
            values.append(self.parse_expr())
        if len(values) != len(targets):
            raise CheckError(
                f"{len(targets)} target(s) but {len(values)} value(s)",
                start.line, start.col)
        node = Assign(tuple(targets), tuple(values))
        try:
            check_assign(node, self.decls)
        except CheckError as err:
            raise CheckError(err.message, start.line, start.col) from None
        return node

    def _scalar_target_name(self, targets, start: Token) -> str:
        if len(targets) != 1 or not isinstance(targets[0], Var):
            raise CheckError("'?' and choice assign to a single integer scalar",
                             start.line, start.col)
        name = targets[0].name
        if self.decls[name].kind != "int":
            raise CheckError(f"'{name}' must be an integer scalar",
                             start.line, start.col)
        return name

    def _parse_target(self) -> Expr:
        t = self.expect("ident", "an assignment target")
        name = t.text
        if name not in self.decls:
            if self.peek().kind in ("?", "!"):
                self.fail("i/o commands are allowed only in the guards of a process main loop", t)
            raise CheckError(f"undeclared identifier '{name}'", t.line, t.col)
        if self.at("["):
            self.advance()
            idx = self.parse_expr()
            self.expect("]")
            return self._typed(ArrayRef(name, idx), t)
        return Var(name)


# ---------------------------------------------------------------------------
# Whole-file entry points
# ---------------------------------------------------------------------------

def parse_gcl(text: str) -> GclProgram:
    """Parse and check a guarded-commands program."""
    p = Parser(text)
    decls = p.parse_decls()
    body = p.parse_stmt_seq("gcl")
    p.expect("eof", "';' or end of program")
    return GclProgram(decls, body)


def parse_csp(text: str) -> CspSystem:
    """Parse and check a system of communicating processes.

    A process is `process NAME <decls> <stmts> end`; the final statement
    may be the communication loop, a do-od whose guards all have the
    `B ; io ->` shape. Variable names must be disjoint across processes.
    """
    p = Parser(text)
    processes: list[CspProcess] = []
    decl_owner: dict[str, tuple[str, Token]] = {}
    proc_positions: dict[str, Token] = {}
    io_refs: list[tuple[str, Token, str]] = []  # (peer, position, owning process)
    while p.at("process"):
        p.advance()
        name_tok = p.expect("ident", "a process name")
        pname = name_tok.text
        if pname in proc_positions:
            raise CheckError(f"duplicate process name '{pname}'",
                             name_tok.line, name_tok.col)
        proc_positions[pname] = name_tok
        p.decls = {}
        p.decl_positions = {}
        decls = p.parse_decls()
        for d in decls:
            pos = p.decl_positions[d.name]
            if d.name in decl_owner:
                other, _ = decl_owner[d.name]
                raise CheckError(
                    f"variable '{d.name}' already declared in process {other}; "
                    f"process variables must be disjoint",
                    pos.line, pos.col)
            decl_owner[d.name] = (pname, pos)
        init, loop, io_pos = _parse_process_body(p)
        for tok, peer in io_pos:
            io_refs.append((peer, tok, pname))
        processes.append(CspProcess(pname, decls, init, loop))
        p.expect("end")
    p.expect("eof", "'process' or end of file")
    if not processes:
        raise ParseError("a system needs at least one process", 1, 1)
    names = {pr.name for pr in processes}
    for peer, tok, owner in io_refs:
        if peer not in names:
            raise CheckError(f"unknown peer process '{peer}'", tok.line, tok.col)
        if peer == owner:
            raise CheckError(f"process '{owner}' cannot communicate with itself",
                             tok.line, tok.col)
    return CspSystem(tuple(processes))


def _parse_process_body(p: Parser):
    """Statements up to `end`; an extended-guard do loop, if present,
    must be last. Returns (init stmt, loop arms, io positions)."""
    stmts: list[Stmt] = []
    loop: tuple[ExtGuard, ...] = ()
    io_positions: list[tuple[Token, str]] = []
    if p.at("end"):
        return Skip(), loop, io_positions
    while True:
        if p.at("do") and _is_extended_do(p):
            arms, io_positions = _parse_csp_loop(p)
            loop = tuple(arms)
            if p.at(";"):
                p.fail("the communication loop must be the final statement of the process")
            break
        stmts.append(p.parse_stmt("gcl"))
        if p.at(";"):
            p.advance()
            continue
        break
    return seq(stmts), loop, io_positions


def _is_extended_do(p: Parser) -> bool:
    """Lookahead: does this do-loop's first guard contain `; io`?
    Scans to the matching arrow at nesting depth zero."""
    depth = 0
    j = p.i + 1
    while j < len(p.toks):
        k = p.toks[j].kind
        if k == "(":
            depth += 1
        elif k == ")":
            depth -= 1
        elif depth == 0 and k == ";":
            return True
        elif depth == 0 and k in ("->", "od", "eof"):
            return False
        j += 1
    return False


def _parse_csp_loop(p: Parser):
    p.expect("do")
    arms: list[ExtGuard] = []
    io_positions: list[tuple[Token, str]] = []
    while True:
        cond = p.typed_expr("bool")
        p.expect(";", "';' and an i/o command after the boolean guard part")
        io_tok = p.expect("ident", "a peer process name")
        if p.at("!"):
            p.advance()
            expr_tok = p.peek()
            expr = p._typed(p.parse_expr(), expr_tok)
            io: Input | Output = Output(io_tok.text, expr)
        elif p.at("?"):
            p.advance()
            tgt = p.expect("ident", "a target variable")
            if tgt.text not in p.decls:
                raise CheckError(f"undeclared identifier '{tgt.text}'", tgt.line, tgt.col)
            if p.decls[tgt.text].is_array:
                raise CheckError("an input target must be a scalar", tgt.line, tgt.col)
            io = Input(io_tok.text, tgt.text)
        else:
            p.fail("expected '!' or '?' in the i/o command")
        io_positions.append((io_tok, io_tok.text))
        p.expect("->")
        body = p.parse_stmt_seq("gcl")
        arms.append(ExtGuard(cond, io, body))
        if p.at("[]"):
            p.advance()
            continue
        p.expect("od", "'[]' or 'od'")
        break
    return arms, io_positions


def parse_par(text: str) -> ParSystem:
    """Parse and check a shared-variable parallel program:
    declarations, optional `init`, one or more `component ... end`
    blocks, optional `epilogue`."""
    p = Parser(text)
    decls = p.parse_decls()
    init: Stmt = Skip()
    if p.at("init"):
        p.advance()
        init = p.parse_stmt_seq("gcl")
    components: list[Stmt] = []
    while p.at("component"):
        p.advance()
        components.append(p.parse_stmt_seq("par"))
        p.expect("end")
    if not components:
        p.fail("expected at least one 'component' block")
    epilogue: Stmt = Skip()
    if p.at("epilogue"):
        p.advance()
        epilogue = p.parse_stmt_seq("gcl")
    p.expect("eof", "'component', 'epilogue' or end of file")
    return ParSystem(decls, init, tuple(components), epilogue)
