"""Direct semantics of the communication fragment and its translation
into a single guarded-commands loop.

Processes communicate only through the i/o commands in their main-loop
guards. A matching input/output pair whose boolean guard parts both hold
can be passed jointly; the communication acts as an assignment of the
output expression to the input target, after which both guard bodies run.
The translation lists one guarded command per matching pair; the final
states of properly terminating runs agree with the translated program's
terminal states that satisfy the all-guards-false condition.
"""

from __future__ import annotations

from dataclasses import dataclass

from .check import decl_map, type_of
from .engine import (
    Expansion, ExplorationReport, Failed, GraphSearch, Limits, Terminated,
    explore_statement,
)
from .errors import CheckError, EvalError
from .state import State, apply_parallel_assign, eval_expr, initial_state
from .syntax import (
    Assign, BinOp, CspSystem, Do, Expr, GclProgram, GuardedCommand, If,
    Input, IoCommand, Output, Skip, Stmt, Var, conj, not_, seq,
)


@dataclass(frozen=True, slots=True, order=True)
class CorrespondencePair:
    """Indices (process i, guard j) and (process r, guard s) of a matching
    input/output pair with i < r."""

    i: int
    j: int
    r: int
    s: int


def _io_type(io: IoCommand, decls) -> str:
    if isinstance(io, Input):
        return decls[io.target].kind
    return type_of(io.expr, decls)


def correspondence_pairs(sys: CspSystem) -> set[CorrespondencePair]:
    """All (i, j, r, s) with i < r whose i/o commands correspond: one
    input and one output, each naming the other's process, same value
    type."""
    decls = decl_map(sys.all_decls())
    names = [p.name for p in sys.processes]
    out: set[CorrespondencePair] = set()
    for i, pi in enumerate(sys.processes):
        for r in range(i + 1, len(sys.processes)):
            pr = sys.processes[r]
            for j, gi in enumerate(pi.loop):
                for s, gr in enumerate(pr.loop):
                    a, b = gi.io, gr.io
                    if isinstance(a, Input) == isinstance(b, Input):
                        continue
                    if a.peer != names[r] or b.peer != names[i]:
                        continue
                    if _io_type(a, decls) != _io_type(b, decls):
                        continue
                    out.add(CorrespondencePair(i, j, r, s))
    return out


def eff(a1: IoCommand, a2: IoCommand) -> Stmt:
    """Joint effect of a matching pair: the assignment target := value.
    Symmetric in its arguments."""
    if isinstance(a1, Input) and isinstance(a2, Output):
        return Assign((Var(a1.target),), (a2.expr,))
    if isinstance(a1, Output) and isinstance(a2, Input):
        return Assign((Var(a2.target),), (a1.expr,))
    raise CheckError("i/o commands do not correspond: need one input and one output")


def term_condition(sys: CspSystem) -> Expr:
    """Conjunction of the negated boolean guard parts of every process;
    separates proper termination from deadlock after translation."""
    parts = []
    for p in sys.processes:
        for g in p.loop:
            parts.append(not_(g.cond))
    return conj(parts)


def translate_csp(sys: CspSystem) -> GclProgram:
    """One guarded-commands program equivalent to the whole system.

    Process initializations run in order, then a single repetitive
    command offers one arm per corresponding pair: both boolean parts as
    the guard; the communication assignment followed by both bodies as
    the command. With no corresponding pairs the loop is dropped. No new
    variables are introduced.
    """
    decls = sys.all_decls()
    inits = [p.init for p in sys.processes if not isinstance(p.init, Skip)]
    arms = []
    for pair in sorted(correspondence_pairs(sys)):
        gi = sys.processes[pair.i].loop[pair.j]
        gr = sys.processes[pair.r].loop[pair.s]
        guard = BinOp("and", gi.cond, gr.cond)
        body = seq([eff(gi.io, gr.io), gi.body, gr.body])
        arms.append(GuardedCommand(guard, body))
    stmts: list[Stmt] = list(inits)
    if arms:
        stmts.append(Do(tuple(arms)))
    return GclProgram(decls, seq(stmts))


def translate_csp_checked(sys: CspSystem) -> GclProgram:
    """Translation followed by `if TERM -> skip fi`, turning any deadlock
    of the original system into an explicit failure."""
    base = translate_csp(sys)
    check = If((GuardedCommand(term_condition(sys), Skip()),))
    return GclProgram(base.decls, seq([base.body, check]))


# ---------------------------------------------------------------------------
# Direct semantics
# ---------------------------------------------------------------------------

def run_csp(sys: CspSystem, s0: State | None = None,
            lim: Limits = Limits()) -> ExplorationReport:
    """Exhaustive exploration of the system's own semantics.

    Initializations run to completion first (process variables are
    disjoint, so their order cannot matter; any internal nondeterminism
    still branches). Then, repeatedly, any corresponding pair whose
    boolean parts both hold communicates and runs both guard bodies to
    completion as one atomic joint step. Termination is proper when every
    boolean guard part of every process is false; a stuck configuration
    with some guard still true is a deadlock failure.
    """
    decls = sys.all_decls()
    if s0 is None:
        s0 = initial_state(decls)
    pairs = sorted(correspondence_pairs(sys))
    guards = [[(g.cond, g.io, g.body) for g in p.loop] for p in sys.processes]

    counts = [0, 0, 0]  # configs, edges, paths from sub-explorations

    def absorb(rep: ExplorationReport, sink: list) -> list[State]:
        """Collect a sub-exploration: non-terminal outcomes go to `sink`,
        terminal states come back sorted."""
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

    init_outcomes: list = []
    states = [s0]
    for p in sys.processes:
        nxt: list[State] = []
        for s in states:
            nxt.extend(absorb(explore_statement(p.init, s, lim), init_outcomes))
        seen = {}
        for s in nxt:
            seen.setdefault(s.canonical(), s)
        states = [seen[k] for k in sorted(seen)]

    def final_of(s: State) -> State | None:
        try:
            for row in guards:
                for cond, _, _ in row:
                    if eval_expr(cond, s):
                        return None
        except EvalError:
            return None  # expand() reports the failure
        return s

    def expand(s: State) -> Expansion:
        try:
            enabled = [[bool(eval_expr(cond, s)) for cond, _, _ in row]
                       for row in guards]
        except EvalError as e:
            return Expansion(failure=(e.reason, e.detail, s))
        trans: list[tuple[str, State]] = []
        extra: list = []
        attempted = False
        for pair in pairs:
            if not (enabled[pair.i][pair.j] and enabled[pair.r][pair.s]):
                continue
            attempted = True
            _, ioi, bi = guards[pair.i][pair.j]
            _, ior, br = guards[pair.r][pair.s]
            comm = eff(ioi, ior)
            try:
                values = tuple(eval_expr(v, s) for v in comm.values)
                s1 = apply_parallel_assign(comm.targets, values, s)
            except EvalError as e:
                extra.append(Failed(e.reason, s, e.detail))
                continue
            k = 0
            for sm in absorb(explore_statement(bi, s1, lim), extra):
                for sf in absorb(explore_statement(br, sm, lim), extra):
                    label = f"comm({pair.i},{pair.j},{pair.r},{pair.s})#{k}"
                    trans.append((label, sf))
                    k += 1
        if not attempted:
            # guards are live somewhere (final_of said no) but no pair matches
            return Expansion(failure=("deadlock", "no corresponding pair enabled", s))
        return Expansion(transitions=trans, side_outcomes=extra)

    search = GraphSearch(lim, expand, lambda s: s.canonical(), final_of)
    for s in states:
        search.run(s)
    for o in init_outcomes:
        search.record(o)
        search.paths += 1
    rep = search.report()
    return ExplorationReport(rep.outcomes, rep.configs + counts[0],
                             rep.edges + counts[1], rep.paths + counts[2],
                             lim)
