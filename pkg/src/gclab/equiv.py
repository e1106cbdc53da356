"""Equivalences over finite labelled transition systems: strong
bisimilarity, may/must testing, stable failures and refinement.

An Lts has a finite alphabet of visible labels plus the reserved internal
label `tau`. Tests are Ltss with success-marked states; a process passes
a test by reaching success in some (may) or every (must) maximal
computation of their synchronous product, where visible labels
synchronize and internal moves of either side go alone.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .errors import CheckError, ParseError

TAU = "tau"


@dataclass(frozen=True)
class Lts:
    states: tuple[str, ...]
    alphabet: tuple[str, ...]  # visible labels only
    transitions: tuple[tuple[str, str, str], ...]
    init: str
    success: frozenset[str] = frozenset()

    def __post_init__(self):
        known = set(self.states)
        if self.init not in known:
            raise CheckError(f"initial state '{self.init}' not declared")
        if TAU in self.alphabet:
            raise CheckError("'tau' is reserved for internal moves")
        labels = set(self.alphabet) | {TAU}
        for (src, lab, dst) in self.transitions:
            if src not in known or dst not in known:
                raise CheckError(f"transition {src} -{lab}-> {dst} uses unknown state")
            if lab not in labels:
                raise CheckError(f"label '{lab}' not in the alphabet")
        if not self.success <= known:
            raise CheckError("success marks an unknown state")

    # -- derived views ------------------------------------------------------

    def moves(self) -> dict[str, dict[str, set[str]]]:
        """state -> label -> successor set."""
        out: dict[str, dict[str, set[str]]] = {s: {} for s in self.states}
        for (src, lab, dst) in self.transitions:
            out[src].setdefault(lab, set()).add(dst)
        return out

    def reachable(self) -> set[str]:
        mv = self.moves()
        seen = {self.init}
        todo = deque([self.init])
        while todo:
            s = todo.popleft()
            for dsts in mv[s].values():
                for d in dsts:
                    if d not in seen:
                        seen.add(d)
                        todo.append(d)
        return seen


# ---------------------------------------------------------------------------
# Text format
# ---------------------------------------------------------------------------

def parse_lts(text: str) -> Lts:
    """Line format: `alphabet a b c`, `states s1 s2 ...`, `init s`,
    `trans s a t` (label `tau` allowed), `success s`; `#` comments."""
    alphabet: list[str] = []
    states: list[str] = []
    init: str | None = None
    trans: list[tuple[str, str, str]] = []
    success: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kw, args = parts[0], parts[1:]
        if kw == "alphabet":
            alphabet.extend(args)
        elif kw == "states":
            states.extend(args)
        elif kw == "init":
            if len(args) != 1:
                raise ParseError("init needs exactly one state", lineno, 1)
            init = args[0]
        elif kw == "trans":
            if len(args) != 3:
                raise ParseError("trans needs: source label target", lineno, 1)
            trans.append((args[0], args[1], args[2]))
        elif kw == "success":
            success.update(args)
        else:
            raise ParseError(f"unknown directive {kw!r}", lineno, 1)
    if init is None:
        raise ParseError("missing init line", 1, 1)
    try:
        return Lts(tuple(states), tuple(alphabet), tuple(trans), init,
                   frozenset(success))
    except CheckError as e:
        raise CheckError(e.message, 1, 1) from None


def format_lts(l: Lts) -> str:
    lines = ["alphabet " + " ".join(l.alphabet),
             "states " + " ".join(l.states),
             f"init {l.init}"]
    lines += [f"trans {s} {a} {t}" for (s, a, t) in l.transitions]
    lines += [f"success {s}" for s in sorted(l.success)]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Strong bisimilarity by partition refinement
# ---------------------------------------------------------------------------

def _partition(p: Lts, q: Lts) -> dict[str, int]:
    """Coarsest strong bisimulation partition of the disjoint union;
    returns block ids keyed by tagged state names ('0:s' and '1:s')."""
    mv: dict[str, dict[str, set[str]]] = {}
    for tag, l in (("0", p), ("1", q)):
        for s, row in l.moves().items():
            mv[f"{tag}:{s}"] = {lab: {f"{tag}:{d}" for d in dsts}
                                for lab, dsts in row.items()}
    block = {s: 0 for s in mv}
    while True:
        sigs: dict[tuple, int] = {}
        nxt: dict[str, int] = {}
        for s, row in sorted(mv.items()):
            sig = (block[s],
                   tuple(sorted((lab, tuple(sorted({block[d] for d in dsts})))
                                for lab, dsts in row.items())))
            if sig not in sigs:
                sigs[sig] = len(sigs)
            nxt[s] = sigs[sig]
        if nxt == block:
            return block
        block = nxt


def bisimilar(p: Lts, q: Lts) -> bool:
    """Strong bisimilarity of the initial states (`tau` treated as an
    ordinary label)."""
    block = _partition(p, q)
    return block[f"0:{p.init}"] == block[f"1:{q.init}"]


def bisimilar_witness(p: Lts, q: Lts) -> tuple[str, str, str] | None:
    """None when bisimilar; otherwise a distinguishing (p-state, q-state,
    label): a pair reached by matching moves from the initial states where
    one side moves on the label into some class the other cannot match
    (or cannot move on it at all)."""
    block = _partition(p, q)
    if block[f"0:{p.init}"] == block[f"1:{q.init}"]:
        return None
    pmv, qmv = p.moves(), q.moves()
    labels = sorted(set(p.alphabet) | set(q.alphabet) | {TAU})

    # breadth-first over state pairs along shared labels, hunting for a
    # pair where a label is available on one side only; that mirrors the
    # usual narrative of a failed simulation attempt
    start = (p.init, q.init)
    seen = {start}
    todo = deque([start])
    fallback: tuple[str, str, str] | None = None
    while todo:
        u, v = todo.popleft()
        for lab in labels:
            un = pmv[u].get(lab, set())
            vn = qmv[v].get(lab, set())
            if (un and not vn) or (vn and not un):
                return (u, v, lab)
            if fallback is None and block[f"0:{u}"] != block[f"1:{v}"]:
                ublocks = {block[f"0:{x}"] for x in un}
                vblocks = {block[f"1:{x}"] for x in vn}
                if ublocks != vblocks:
                    fallback = (u, v, lab)
            for x in sorted(un):
                for y in sorted(vn):
                    if (x, y) not in seen:
                        seen.add((x, y))
                        todo.append((x, y))
    return fallback or (p.init, q.init, labels[0])


# ---------------------------------------------------------------------------
# Synchronous product and testing
# ---------------------------------------------------------------------------

def _product_moves(proc: Lts, test: Lts):
    """Transition function of the synchronous product: shared visible
    labels synchronize, internal moves interleave."""
    pmv, tmv = proc.moves(), test.moves()

    def succ(node: tuple[str, str]) -> list[tuple[str, str]]:
        s, t = node
        out = []
        for d in sorted(pmv[s].get(TAU, ())):
            out.append((d, t))
        for d in sorted(tmv[t].get(TAU, ())):
            out.append((s, d))
        for lab in sorted(set(pmv[s]) & set(tmv[t]) - {TAU}):
            for ds in sorted(pmv[s][lab]):
                for dt in sorted(tmv[t][lab]):
                    out.append((ds, dt))
        return out

    return succ


def _require_test(test: Lts) -> None:
    if not test.success:
        raise CheckError("a test needs at least one success state")


def may_pass(proc: Lts, test: Lts) -> bool:
    """Does some maximal product computation visit a success state?
    Equivalent to reachability of a success-marked product node."""
    _require_test(test)
    succ = _product_moves(proc, test)
    start = (proc.init, test.init)
    seen = {start}
    todo = deque([start])
    while todo:
        node = todo.popleft()
        if node[1] in test.success:
            return True
        for nxt in succ(node):
            if nxt not in seen:
                seen.add(nxt)
                todo.append(nxt)
    return False


def must_pass(proc: Lts, test: Lts) -> bool:
    """Does every maximal product computation visit a success state?

    False exactly when the success-avoiding part of the product contains
    a reachable deadlock or a reachable cycle (an infinite computation
    that never meets success).
    """
    return must_witness(proc, test) is None


def must_witness(proc: Lts, test: Lts) -> tuple[str, tuple[str, str]] | None:
    """None when the process must pass; otherwise ('stuck'|'cycle', pair)
    naming a deadlocked or cycling product node that avoids success."""
    _require_test(test)
    succ = _product_moves(proc, test)
    start = (proc.init, test.init)
    if start[1] in test.success:
        return None
    # iterative DFS over non-success nodes; a back edge is a cycle
    color: dict[tuple[str, str], int] = {start: 1}  # 1 gray, 2 black
    stack: list[tuple[tuple[str, str], list, int]] = []
    first_moves = succ(start)
    if not first_moves:
        return ("stuck", start)
    stack.append((start, first_moves, 0))
    while stack:
        node, moves, idx = stack[-1]
        if idx >= len(moves):
            stack.pop()
            color[node] = 2
            continue
        stack[-1] = (node, moves, idx + 1)
        nxt = moves[idx]
        if nxt[1] in test.success:
            continue  # success visited: this branch is fine
        c = color.get(nxt)
        if c == 1:
            return ("cycle", nxt)
        if c == 2:
            continue
        nxt_moves = succ(nxt)
        if not nxt_moves:
            return ("stuck", nxt)
        color[nxt] = 1
        stack.append((nxt, nxt_moves, 0))
    return None


# ---------------------------------------------------------------------------
# Stable failures and refinement
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Failure:
    """A trace and a set of visible labels refusable in some stable state
    reachable after it."""

    trace: tuple[str, ...]
    refusal: frozenset[str]

    def sort_key(self) -> tuple:
        return (len(self.trace), self.trace, tuple(sorted(self.refusal)))

    def describe(self) -> str:
        t = ",".join(self.trace) if self.trace else ""
        r = ",".join(sorted(self.refusal))
        return f"(<{t}>, {{{r}}})"


class DivergenceError(Exception):
    """The failures model used here covers divergence-free systems only;
    raised with the offending internal cycle."""

    def __init__(self, cycle: list[str]):
        self.cycle = cycle
        super().__init__("divergent: internal cycle " + " -> ".join(cycle))


def _check_divergence_free(l: Lts) -> None:
    mv = l.moves()
    reach = l.reachable()
    color: dict[str, int] = {}
    trail: list[str] = []

    def dfs(s: str):
        color[s] = 1
        trail.append(s)
        for d in sorted(mv[s].get(TAU, ())):
            c = color.get(d)
            if c == 1:
                cycle = trail[trail.index(d):] + [d]
                raise DivergenceError(cycle)
            if c is None:
                dfs(d)
        trail.pop()
        color[s] = 2

    for s in sorted(reach):
        if s not in color:
            dfs(s)


def _tau_closure(states: set[str], mv) -> frozenset[str]:
    seen = set(states)
    todo = deque(states)
    while todo:
        s = todo.popleft()
        for d in mv[s].get(TAU, ()):
            if d not in seen:
                seen.add(d)
                todo.append(d)
    return frozenset(seen)


def max_refusals(l: Lts, depth: int) -> dict[tuple[str, ...], list[frozenset[str]]]:
    """trace -> maximal refusal sets (one per stable state shape reached
    after the trace). Downward closure is left implicit."""
    _check_divergence_free(l)
    mv = l.moves()
    sigma = set(l.alphabet)
    out: dict[tuple[str, ...], list[frozenset[str]]] = {}
    start = _tau_closure({l.init}, mv)
    frontier: dict[tuple[str, ...], frozenset[str]] = {(): start}
    for _ in range(depth + 1):
        nxt: dict[tuple[str, ...], frozenset[str]] = {}
        for trace, states in sorted(frontier.items()):
            refs = set()
            for s in states:
                if mv[s].get(TAU):
                    continue  # unstable
                refs.add(frozenset(sigma - set(mv[s])))
            # keep only subset-maximal refusals
            maxima = [r for r in refs
                      if not any(r < other for other in refs)]
            if maxima:
                out[trace] = sorted(maxima, key=sorted)
            if len(trace) < depth:
                for lab in sorted(sigma):
                    targets = set()
                    for s in states:
                        targets |= mv[s].get(lab, set())
                    if targets:
                        nxt[trace + (lab,)] = _tau_closure(targets, mv)
        frontier = nxt
        if not frontier:
            break
    return out


def failures(p: Lts, depth: int) -> set[Failure]:
    """All failures with trace length up to `depth`: pairs of a trace and
    a refusal set held in some stable state after it. Refusal sets are
    expanded to all subsets of the maximal ones, so keep alphabets small.
    """
    out: set[Failure] = set()
    for trace, maxima in max_refusals(p, depth).items():
        for m in maxima:
            members = sorted(m)
            for mask in range(1 << len(members)):
                sub = frozenset(members[k] for k in range(len(members))
                                if mask >> k & 1)
                out.add(Failure(trace, sub))
    return out


def refines(p: Lts, q: Lts, depth: int) -> bool:
    """failures(p) subset of failures(q) up to the given trace depth.

    Conclusive for acyclic systems once depth exceeds both state counts;
    for cyclic systems it is a bounded check at the stated depth.
    """
    return refinement_counterexample(p, q, depth) is None


def refinement_counterexample(p: Lts, q: Lts, depth: int) -> Failure | None:
    """A failure of p that q does not have, or None."""
    pf = max_refusals(p, depth)
    qf = max_refusals(q, depth)
    for trace in sorted(pf):
        covers = qf.get(trace, [])
        for m in pf[trace]:
            if not any(m <= c for c in covers):
                # shrink to an informative witness: drop labels q can
                # also refuse, as long as the remainder stays uncovered
                best = m
                for c in covers:
                    reduced = m - c
                    if (reduced and len(reduced) < len(best)
                            and not any(reduced <= c2 for c2 in covers)):
                        best = reduced
                return Failure(trace, best)
    return None
