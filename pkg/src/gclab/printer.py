"""Round-tripping pretty-printers.

`parse_gcl(render(p))` is structurally equal to `p`, and likewise for the
CSP and parallel renderers. Parentheses are emitted only where precedence
demands them; guard order is preserved exactly (selection among guards is
nondeterministic, but reporting and transformation are order-stable).
"""

from __future__ import annotations

from .syntax import (
    ArrayRef, Assign, Await, BinOp, BoolLit, Builtin, ChoiceAssign,
    CspSystem, Declaration, Do, Expr, Fail, GclProgram, If, IfElse, Input,
    IntLit, Output, ParSystem, RandomAssign, Seq, Skip, Stmt, UnaryOp, Var,
    While,
)

# precedence levels, loose to tight; mirrors the parser
_PREC = {"or": 1, "and": 2, "not": 3,
         "=": 4, "!=": 4, "<": 4, "<=": 4, ">": 4, ">=": 4,
         "+": 5, "-": 5, "*": 6, "div": 6, "mod": 6, "neg": 7}
_ATOM = 9
_NONASSOC = frozenset({"=", "!=", "<", "<=", ">", ">=" })


def _prec(e: Expr) -> int:
    if isinstance(e, BinOp):
        return _PREC[e.op]
    if isinstance(e, UnaryOp):
        return _PREC[e.op]
    return _ATOM


def render_expr(e: Expr) -> str:
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, ArrayRef):
        return f"{e.name}[{render_expr(e.index)}]"
    if isinstance(e, Builtin):
        return f"{e.func}({render_expr(e.args[0])}, {render_expr(e.args[1])})"
    if isinstance(e, UnaryOp):
        if e.op == "not":
            inner = render_expr(e.operand)
            if _prec(e.operand) < _PREC["not"]:
                inner = f"({inner})"
            return f"not {inner}"
        inner = render_expr(e.operand)
        # parenthesize anything not tighter than unary minus, and also a
        # literal operand: bare `-2` reparses as the negative literal
        if _prec(e.operand) <= _PREC["neg"] or isinstance(e.operand, IntLit):
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(e, BinOp):
        # binary operators parse left-associatively (comparisons do not
        # chain), so an equal-precedence right child always needs parens
        # for the reparse to rebuild the identical tree
        my = _PREC[e.op]
        left = render_expr(e.left)
        right = render_expr(e.right)
        if _prec(e.left) < my or (e.op in _NONASSOC and _prec(e.left) == my):
            left = f"({left})"
        if _prec(e.right) <= my:
            right = f"({right})"
        return f"{left} {e.op} {right}"
    raise ValueError(f"cannot render {type(e).__name__}")


def render_decl(d: Declaration) -> str:
    if d.is_array:
        head = f"var {d.name}: int[{d.lo}..{d.hi}]"
    else:
        head = f"var {d.name}: {d.kind}"
    if d.init is not None:
        if isinstance(d.init, bool):
            head += " = " + ("true" if d.init else "false")
        elif isinstance(d.init, tuple):
            head += " = [" + ", ".join(str(c) for c in d.init) + "]"
        else:
            head += f" = {d.init}"
    return head + ";"


def _indent(text: str, pad: str = "  ") -> str:
    return "\n".join(pad + line for line in text.split("\n"))


def render_stmt(s: Stmt) -> str:
    if isinstance(s, Skip):
        return "skip"
    if isinstance(s, Fail):
        return s.keyword
    if isinstance(s, Assign):
        lhs = ", ".join(render_expr(t) for t in s.targets)
        rhs = ", ".join(render_expr(v) for v in s.values)
        return f"{lhs} := {rhs}"
    if isinstance(s, RandomAssign):
        return f"{s.target} := ?"
    if isinstance(s, ChoiceAssign):
        return f"{s.target} := choice({render_expr(s.bound)})"
    if isinstance(s, Seq):
        return ";\n".join(render_stmt(sub) for sub in s.stmts)
    if isinstance(s, (If, Do)):
        opener, closer = ("if", "fi") if isinstance(s, If) else ("do", "od")
        lines = []
        for k, arm in enumerate(s.arms):
            lead = opener if k == 0 else "[]"
            lines.append(f"{lead} {render_expr(arm.guard)} ->")
            lines.append(_indent(render_stmt(arm.body)))
        lines.append(closer)
        return "\n".join(lines)
    if isinstance(s, IfElse):
        out = f"if {render_expr(s.cond)} then\n{_indent(render_stmt(s.then_branch))}"
        if not isinstance(s.else_branch, Skip):
            out += f"\nelse\n{_indent(render_stmt(s.else_branch))}"
        return out + "\nfi"
    if isinstance(s, While):
        return (f"while {render_expr(s.cond)} do\n"
                f"{_indent(render_stmt(s.body))}\nod")
    if isinstance(s, Await):
        return f"await {render_expr(s.cond)}"
    raise ValueError(f"cannot render {type(s).__name__}")


def render_stmt_inline(s: Stmt) -> str:
    """Single-line rendering, used for transition labels and residue keys."""
    return " ".join(part.strip() for part in render_stmt(s).split("\n"))


def render(p: GclProgram) -> str:
    """Concrete text of a guarded-commands program (trailing newline)."""
    parts = [render_decl(d) for d in p.decls]
    parts.append(render_stmt(p.body))
    return "\n".join(parts) + "\n"


def render_csp(sys: CspSystem) -> str:
    blocks = []
    for proc in sys.processes:
        lines = [f"process {proc.name}"]
        for d in proc.decls:
            lines.append("  " + render_decl(d))
        if not isinstance(proc.init, Skip) or not proc.loop:
            init_text = _indent(render_stmt(proc.init))
            lines.append(init_text + (";" if proc.loop else ""))
        for k, g in enumerate(proc.loop):
            lead = "do" if k == 0 else "[]"
            io = render_io(g.io)
            lines.append(f"  {lead} {render_expr(g.cond)} ; {io} ->")
            lines.append(_indent(render_stmt(g.body), "      "))
        if proc.loop:
            lines.append("  od")
        lines.append("end")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def render_io(io: Input | Output) -> str:
    if isinstance(io, Input):
        return f"{io.peer} ? {io.target}"
    return f"{io.peer} ! {render_expr(io.expr)}"


def render_par(sys: ParSystem) -> str:
    lines = [render_decl(d) for d in sys.decls]
    if not isinstance(sys.init, Skip):
        lines.append("init")
        lines.append(_indent(render_stmt(sys.init)))
    for comp in sys.components:
        lines.append("component")
        lines.append(_indent(render_stmt(comp)))
        lines.append("end")
    if not isinstance(sys.epilogue, Skip):
        lines.append("epilogue")
        lines.append(_indent(render_stmt(sys.epilogue)))
    return "\n".join(lines) + "\n"
