"""Shared-variable parallel fragment: control-flow labeling, direct
interleaving semantics, and the control-variable translation.

Each sequential component is cut into atomic actions, one per control
transfer: a guard evaluation (true and false branches of while/if heads,
await) or a single assignment. The translation introduces one control
variable per component and lists every action as a guarded command of a
single loop; a final alternative command aborts unless every component
sits at its exit, which turns a deadlock of the original program into a
failure.
"""

from __future__ import annotations

import string
from dataclasses import dataclass

from .engine import (
    Expansion, ExplorationReport, Failed, GraphSearch, Limits, Terminated,
    explore_statement,
)
from .errors import CheckError, EvalError
from .state import State, apply_parallel_assign, eval_expr, initial_state
from .syntax import (
    Assign, Await, BinOp, Declaration, Do, Expr, GclProgram,
    GuardedCommand, If, IfElse, IntLit, ParSystem, Seq, Skip, Stmt, Var,
    While, conj, not_, seq, stmt_names,
)
from .printer import render_stmt_inline


@dataclass(frozen=True, slots=True)
class AtomicAction:
    """One control transfer: from `source`, when `guard` holds (None =
    always), perform `effect` (None = none) and move to `target`.
    Labels are indices into LabeledComponent.labels."""

    source: int
    guard: Expr | None
    effect: Stmt | None
    target: int

    def describe(self, names: tuple[str, ...]) -> str:
        parts = [f"{names[self.source]}->{names[self.target]}"]
        if self.guard is not None:
            from .printer import render_expr
            parts.append(f"when {render_expr(self.guard)}")
        if self.effect is not None:
            parts.append(render_stmt_inline(self.effect))
        return " ".join(parts)


@dataclass(frozen=True, slots=True)
class LabeledComponent:
    """Control-flow graph of one component. `labels` names the control
    points in allocation order; the exit label is always last and has no
    outgoing action."""

    actions: tuple[AtomicAction, ...]
    entry: int
    exit: int
    labels: tuple[str, ...]


def _label_name(k: int) -> str:
    letters = string.ascii_lowercase
    return letters[k] if k < len(letters) else f"l{k}"


_EXIT = -1  # placeholder for the component exit while wiring


def label_component(component: Stmt) -> LabeledComponent:
    """Cut a sequential component into atomic actions.

    Control points are labelled in syntactic order (a while head before
    its body, an if head before its branches); the component exit gets
    the final label. A single assignment yields two labels and one
    action; `await B` yields one guarded, effect-free action.
    """
    counter = [0]
    actions: list[AtomicAction] = []

    def alloc() -> int:
        counter[0] += 1
        return counter[0] - 1

    def wire(s: Stmt, entry: int, exit_: int) -> None:
        if isinstance(s, Skip):
            actions.append(AtomicAction(entry, None, None, exit_))
        elif isinstance(s, Assign):
            actions.append(AtomicAction(entry, None, s, exit_))
        elif isinstance(s, Await):
            actions.append(AtomicAction(entry, s.cond, None, exit_))
        elif isinstance(s, Seq):
            cur = entry
            for sub in s.stmts[:-1]:
                nxt = alloc()
                wire(sub, cur, nxt)
                cur = nxt
            wire(s.stmts[-1], cur, exit_)
        elif isinstance(s, While):
            body_entry = alloc()
            actions.append(AtomicAction(entry, s.cond, None, body_entry))
            actions.append(AtomicAction(entry, not_(s.cond), None, exit_))
            wire(s.body, body_entry, entry)
        elif isinstance(s, IfElse):
            then_entry = alloc()
            else_entry = alloc()
            actions.append(AtomicAction(entry, s.cond, None, then_entry))
            actions.append(AtomicAction(entry, not_(s.cond), None, else_entry))
            wire(s.then_branch, then_entry, exit_)
            wire(s.else_branch, else_entry, exit_)
        else:
            raise CheckError(f"{type(s).__name__} is outside the parallel fragment")

    entry = alloc()
    wire(component, entry, _EXIT)
    exit_ = alloc()
    actions = [AtomicAction(a.source, a.guard, a.effect,
                            exit_ if a.target == _EXIT else a.target)
               for a in actions]
    labels = tuple(_label_name(k) for k in range(counter[0]))
    return LabeledComponent(tuple(actions), entry, exit_, labels)


def label_components(sys: ParSystem) -> list[LabeledComponent]:
    return [label_component(c) for c in sys.components]


def control_variable_names(sys: ParSystem) -> list[str]:
    """Fresh cv names, one per component."""
    taken = {d.name for d in sys.decls}
    for stmt in (sys.init, sys.epilogue) + sys.components:
        stmt_names(stmt, taken)
    n = len(sys.components)
    for prefix in ("cv", "cvv", "cvvv"):
        names = [f"{prefix}{k + 1}" for k in range(n)]
        if not any(nm in taken for nm in names):
            return names
    raise CheckError("no fresh control-variable names available")


def translate_par(sys: ParSystem) -> GclProgram:
    """Flatten the parallel composition into one guarded-commands program.

    init; cv_i := entry_i; a single loop with one guarded command per
    atomic action (guard `cv_i = source [and action guard]`, body
    `[effect;] cv_i := target`); then `if /\\ cv_i = exit_i -> skip fi`
    (failing exactly on deadlock) and the epilogue. Control points are
    encoded as small integers; label_component fixes the numbering.
    """
    comps = label_components(sys)
    cvs = control_variable_names(sys)
    decls = sys.decls + tuple(Declaration(nm, "int") for nm in cvs)

    stmts: list[Stmt] = []
    if not isinstance(sys.init, Skip):
        stmts.append(sys.init)
    stmts.append(Assign(tuple(Var(nm) for nm in cvs),
                        tuple(IntLit(c.entry) for c in comps)))

    arms = []
    for nm, comp in zip(cvs, comps):
        for act in comp.actions:
            guard: Expr = BinOp("=", Var(nm), IntLit(act.source))
            if act.guard is not None:
                guard = BinOp("and", guard, act.guard)
            move: Stmt = Assign((Var(nm),), (IntLit(act.target),))
            body = move if act.effect is None else seq([act.effect, move])
            arms.append(GuardedCommand(guard, body))
    stmts.append(Do(tuple(arms)))

    done = conj([BinOp("=", Var(nm), IntLit(c.exit))
                 for nm, c in zip(cvs, comps)])
    stmts.append(If((GuardedCommand(done, Skip()),)))
    if not isinstance(sys.epilogue, Skip):
        stmts.append(sys.epilogue)
    return GclProgram(decls, seq(stmts))


def label_table(sys: ParSystem) -> str:
    """Human-readable label/integer table matching translate_par's
    control-variable encoding, as comment lines."""
    comps = label_components(sys)
    cvs = control_variable_names(sys)
    lines = []
    for nm, comp in zip(cvs, comps):
        pairs = " ".join(f"{lab}={k}" for k, lab in enumerate(comp.labels))
        lines.append(f"# {nm}: {pairs} (entry {comp.labels[comp.entry]}, "
                     f"exit {comp.labels[comp.exit]})")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Direct interleaving semantics
# ---------------------------------------------------------------------------

def run_par_direct(sys: ParSystem, s0: State | None = None,
                   lim: Limits = Limits()) -> ExplorationReport:
    """Explore the interleavings of the labelled components directly,
    without translating.

    At every step any component with an enabled action advances by that
    one action. When all components sit at their exits the epilogue runs
    and the run terminates properly; a configuration where some component
    is unfinished but nothing can move is a deadlock failure.
    """
    if s0 is None:
        s0 = initial_state(sys.decls)
    comps = label_components(sys)
    by_source = []
    for comp in comps:
        table: dict[int, list[AtomicAction]] = {}
        for act in comp.actions:
            table.setdefault(act.source, []).append(act)
        by_source.append(table)
    exits = tuple(c.exit for c in comps)

    counts = [0, 0, 0]
    sub_outcomes: list = []

    def absorb(rep: ExplorationReport, sink: list) -> list[State]:
        finals = []
        for o in rep.outcomes:
            if isinstance(o, Terminated):
                finals.append(o.state)
            else:
                sink.append(o)
        counts[0] += rep.configs
        counts[1] += rep.edges
        counts[2] += max(rep.paths - len(finals), 0)
        return sorted(finals, key=lambda st: st.canonical())

    starts = absorb(explore_statement(sys.init, s0, lim), sub_outcomes)

    # nodes are (cvs, state) while running and ("done", state) after the
    # epilogue; the latter are terminal
    def expand(node) -> Expansion:
        cvs, s = node
        if cvs == exits:
            fin: list = []
            outs = absorb(explore_statement(sys.epilogue, s, lim), fin)
            trans = [(f"epilogue#{k}", ("done", sf)) for k, sf in enumerate(outs)]
            return Expansion(transitions=trans, side_outcomes=fin)
        trans = []
        extra: list = []
        for ci, comp in enumerate(comps):
            for act in by_source[ci].get(cvs[ci], ()):
                if act.guard is not None:
                    try:
                        if not eval_expr(act.guard, s):
                            continue
                    except EvalError as e:
                        return Expansion(failure=(e.reason, e.detail, s))
                s2 = s
                if act.effect is not None:
                    try:
                        s2 = _exec_effect(act.effect, s)
                    except EvalError as e:
                        extra.append(Failed(e.reason, s, e.detail))
                        continue
                cvs2 = cvs[:ci] + (act.target,) + cvs[ci + 1:]
                label = f"c{ci + 1}:{comp.labels[act.source]}->{comp.labels[act.target]}"
                trans.append((label, (cvs2, s2)))
        if not trans and not extra:
            return Expansion(failure=("deadlock", _stuck_detail(cvs, comps), s))
        return Expansion(transitions=trans, side_outcomes=extra)

    def expand_node(node) -> Expansion:
        if node[0] == "done":
            return Expansion(final=node[1])
        return expand(node)

    search = GraphSearch(lim, expand_node,
                         lambda nd: f"{nd[0]} @ {nd[1].canonical()}",
                         lambda nd: nd[1] if nd[0] == "done" else None)
    entries = tuple(c.entry for c in comps)
    for s in starts:
        search.run((entries, s))
    for o in sub_outcomes:
        search.record(o)
        search.paths += 1
    rep = search.report()
    return ExplorationReport(rep.outcomes, rep.configs + counts[0],
                             rep.edges + counts[1], rep.paths + counts[2],
                             lim)


def _exec_effect(effect: Stmt, s: State) -> State:
    if isinstance(effect, Skip):
        return s
    if isinstance(effect, Assign):
        values = tuple(eval_expr(v, s) for v in effect.values)
        return apply_parallel_assign(effect.targets, values, s)
    raise CheckError(f"effect {type(effect).__name__} is not atomic")


def _stuck_detail(cvs, comps) -> str:
    waiting = [f"component {k + 1} at {comp.labels[cvs[k]]}"
               for k, comp in enumerate(comps) if cvs[k] != comp.exit]
    return "; ".join(waiting)
