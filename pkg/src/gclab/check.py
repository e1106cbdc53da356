"""Type and invariant checking over already-built syntax trees.

The parsers call these helpers inline (attaching source positions); the
same functions revalidate programs produced by the transformations, where
errors carry no position.
"""

from __future__ import annotations

from typing import Mapping

from .errors import CheckError
from .syntax import (
    ARITH_OPS, EQ_OPS, LOGIC_OPS, ORDER_OPS,
    ArrayRef, Assign, Await, BinOp, BoolLit, Builtin, ChoiceAssign,
    Declaration, Do, Expr, Fail, GclProgram, If, IfElse, IntLit,
    RandomAssign, Seq, Skip, Stmt, UnaryOp, Var, While,
)

BUILTIN_NAMES = ("min", "max")

DeclMap = Mapping[str, Declaration]


def decl_map(decls: tuple[Declaration, ...]) -> dict[str, Declaration]:
    """Name -> declaration table; rejects duplicates and reserved names."""
    table: dict[str, Declaration] = {}
    for d in decls:
        if d.name in table:
            raise CheckError(f"duplicate declaration of '{d.name}'")
        if d.name in BUILTIN_NAMES:
            raise CheckError(f"'{d.name}' is a builtin function name and cannot be declared")
        table[d.name] = d
    return table


def check_declaration(d: Declaration) -> None:
    if d.is_array:
        if d.lo is None or d.hi is None or d.lo > d.hi:
            raise CheckError(f"array '{d.name}' needs bounds lo..hi with lo <= hi")
        if d.init is not None:
            if isinstance(d.init, tuple):
                size = d.hi - d.lo + 1
                if len(d.init) != size:
                    raise CheckError(
                        f"array '{d.name}' initializer has {len(d.init)} cells, expected {size}")
            elif not isinstance(d.init, int) or isinstance(d.init, bool):
                raise CheckError(f"array '{d.name}' initializer must be integer cells")
    elif d.kind == "int":
        if d.init is not None and (isinstance(d.init, bool) or not isinstance(d.init, int)):
            raise CheckError(f"'{d.name}': int initializer required")
    elif d.kind == "bool":
        if d.init is not None and not isinstance(d.init, bool):
            raise CheckError(f"'{d.name}': bool initializer required")
    else:
        raise CheckError(f"'{d.name}': unknown kind {d.kind!r}")


def type_of(e: Expr, decls: DeclMap) -> str:
    """Type of an expression: 'int' or 'bool'. Raises CheckError."""
    if isinstance(e, IntLit):
        return "int"
    if isinstance(e, BoolLit):
        return "bool"
    if isinstance(e, Var):
        d = decls.get(e.name)
        if d is None:
            raise CheckError(f"undeclared identifier '{e.name}'")
        if d.is_array:
            raise CheckError(f"array '{e.name}' used without an index")
        return d.kind
    if isinstance(e, ArrayRef):
        d = decls.get(e.name)
        if d is None:
            raise CheckError(f"undeclared identifier '{e.name}'")
        if not d.is_array:
            raise CheckError(f"'{e.name}' is a scalar, not an array")
        if type_of(e.index, decls) != "int":
            raise CheckError(f"index of '{e.name}' must be an integer")
        return "int"
    if isinstance(e, UnaryOp):
        t = type_of(e.operand, decls)
        if e.op == "neg":
            if t != "int":
                raise CheckError("unary '-' needs an integer operand")
            return "int"
        if e.op == "not":
            if t != "bool":
                raise CheckError("'not' needs a boolean operand")
            return "bool"
        raise CheckError(f"unknown unary operator {e.op!r}")
    if isinstance(e, BinOp):
        lt = type_of(e.left, decls)
        rt = type_of(e.right, decls)
        if e.op in ARITH_OPS:
            if lt != "int" or rt != "int":
                raise CheckError(f"'{e.op}' needs integer operands")
            return "int"
        if e.op in ORDER_OPS:
            if lt != "int" or rt != "int":
                raise CheckError(f"'{e.op}' compares integers")
            return "bool"
        if e.op in EQ_OPS:
            if lt != rt:
                raise CheckError(f"'{e.op}' compares values of the same type")
            return "bool"
        if e.op in LOGIC_OPS:
            if lt != "bool" or rt != "bool":
                raise CheckError(f"'{e.op}' needs boolean operands")
            return "bool"
        raise CheckError(f"unknown operator {e.op!r}")
    if isinstance(e, Builtin):
        if e.func not in BUILTIN_NAMES:
            raise CheckError(f"unknown builtin '{e.func}'")
        if len(e.args) != 2:
            raise CheckError(f"'{e.func}' takes exactly two arguments")
        for a in e.args:
            if type_of(a, decls) != "int":
                raise CheckError(f"'{e.func}' needs integer arguments")
        return "int"
    raise CheckError(f"unknown expression node {type(e).__name__}")


def _target_key(t: Expr) -> tuple:
    """Syntactic identity of an assignment target; identical keys are
    rejected as statically aliased."""
    if isinstance(t, Var):
        return ("scalar", t.name)
    if isinstance(t, ArrayRef):
        return ("cell", t.name, t.index)
    raise CheckError("assignment target must be a variable or an array cell")


def check_assign(s: Assign, decls: DeclMap) -> None:
    if not s.targets or len(s.targets) != len(s.values):
        raise CheckError("parallel assignment needs equally many targets and values")
    seen: set[tuple] = set()
    for t in s.targets:
        key = _target_key(t)
        if key in seen:
            raise CheckError("parallel assignment targets must be distinct locations")
        seen.add(key)
        # two scalar targets with the same name are caught above; an array
        # cell target also collides with itself only on an identical index
    names = {k[1] for k in seen if k[0] == "scalar"}
    for k in seen:
        if k[0] == "cell" and k[1] in names:
            raise CheckError("parallel assignment targets must be distinct locations")
    for t, v in zip(s.targets, s.values):
        tt = type_of(t, decls)
        vt = type_of(v, decls)
        if tt != vt:
            raise CheckError(f"cannot assign {vt} value to {tt} target")


def _check_int_scalar_target(name: str, decls: DeclMap, what: str) -> None:
    d = decls.get(name)
    if d is None:
        raise CheckError(f"undeclared identifier '{name}'")
    if d.kind != "int":
        raise CheckError(f"{what} target '{name}' must be an integer scalar")


def check_stmt(s: Stmt, decls: DeclMap, fragment: str = "gcl") -> None:
    """Validate a statement. `fragment` is 'gcl' (guarded commands only)
    or 'par' (skip/assign/if-then-else/while/await only)."""
    if isinstance(s, (Skip, Fail)):
        if fragment == "par" and isinstance(s, Fail):
            raise CheckError("fail/abort is not part of the parallel fragment")
        return
    if isinstance(s, Assign):
        check_assign(s, decls)
        return
    if isinstance(s, RandomAssign):
        if fragment == "par":
            raise CheckError("random assignment is not part of the parallel fragment")
        _check_int_scalar_target(s.target, decls, "random assignment")
        return
    if isinstance(s, ChoiceAssign):
        if fragment == "par":
            raise CheckError("choice assignment is not part of the parallel fragment")
        _check_int_scalar_target(s.target, decls, "choice assignment")
        if type_of(s.bound, decls) != "int":
            raise CheckError("choice bound must be an integer expression")
        return
    if isinstance(s, Seq):
        for sub in s.stmts:
            check_stmt(sub, decls, fragment)
        return
    if isinstance(s, (If, Do)):
        if fragment == "par":
            raise CheckError("guarded commands are not part of the parallel fragment")
        if not s.arms:
            raise CheckError("alternative/repetitive command needs at least one guard")
        for arm in s.arms:
            if type_of(arm.guard, decls) != "bool":
                raise CheckError("guard must be boolean")
            check_stmt(arm.body, decls, fragment)
        return
    if isinstance(s, IfElse):
        if fragment != "par":
            raise CheckError("if-then-else belongs to the parallel fragment only")
        if type_of(s.cond, decls) != "bool":
            raise CheckError("condition must be boolean")
        check_stmt(s.then_branch, decls, fragment)
        check_stmt(s.else_branch, decls, fragment)
        return
    if isinstance(s, While):
        if fragment != "par":
            raise CheckError("while belongs to the parallel fragment only")
        if type_of(s.cond, decls) != "bool":
            raise CheckError("condition must be boolean")
        check_stmt(s.body, decls, fragment)
        return
    if isinstance(s, Await):
        if fragment != "par":
            raise CheckError("await belongs to the parallel fragment only")
        if type_of(s.cond, decls) != "bool":
            raise CheckError("await condition must be boolean")
        return
    raise CheckError(f"unknown statement node {type(s).__name__}")


def check_program(p: GclProgram) -> None:
    """Full revalidation of a guarded-commands program."""
    table = decl_map(p.decls)
    for d in p.decls:
        check_declaration(d)
    check_stmt(p.body, table, "gcl")
