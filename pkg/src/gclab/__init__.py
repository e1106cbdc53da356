"""Workbench for Dijkstra's guarded commands language and its neighbors.

Parse and render three small languages (guarded commands, a fragment of
communicating processes, a shared-variable parallel fragment), execute
guarded-commands programs under demonic, erratic, angelic and fair
disciplines, compile fairness and concurrency away by source-to-source
transformation, and compare finite processes by bisimilarity, may/must
testing and failures refinement.
"""

from .check import check_program
from .csp import (
    CorrespondencePair, correspondence_pairs, eff, run_csp, term_condition,
    translate_csp, translate_csp_checked,
)
from .engine import (
    BoundExceeded, Config, Divergent, ExplorationReport, Failed, Limits,
    Outcome, Terminated, explore_demonic, explore_statement, make_config,
    replay, run_erratic, solve_angelic, step,
)
from .equiv import (
    DivergenceError, Failure, Lts, bisimilar, bisimilar_witness, failures,
    format_lts, may_pass, must_pass, must_witness, parse_lts,
    refinement_counterexample, refines,
)
from .errors import CheckError, EvalError, ParseError, SourceError
from .fairness import (
    FairnessError, FixpointError, FixpointInstance, OneLevelProgram,
    chaotic_iteration_program, format_fixpoint, is_one_level_nondeterministic,
    kleene_lfp, one_level_of, parse_fixpoint, run_fair, run_fair_traced,
    transform_wf,
)
from .par import (
    AtomicAction, LabeledComponent, label_component, label_table,
    run_par_direct, translate_par,
)
from .parser import parse_csp, parse_gcl, parse_par
from .printer import render, render_csp, render_expr, render_par, render_stmt
from .state import State, apply_parallel_assign, eval_expr, initial_state
from .syntax import (
    CspSystem, Declaration, GclProgram, GuardedCommand, ParSystem, Stmt,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
