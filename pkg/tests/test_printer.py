import pytest
from hypothesis import given, settings, strategies as st

from gclab.check import check_program
from gclab.fairness import transform_wf
from gclab.parser import parse_csp, parse_gcl, parse_par
from gclab.printer import render, render_csp, render_expr, render_par
from gclab.syntax import (
    ArrayRef, Assign, BinOp, BoolLit, Builtin, Declaration, GclProgram,
    IntLit, UnaryOp, Var,
)

from conftest import CORPUS, corpus_text

GCL_FILES = sorted(p.name for p in CORPUS.glob("*.gcl"))
CSP_FILES = sorted(p.name for p in CORPUS.glob("*.csp"))
PAR_FILES = sorted(p.name for p in CORPUS.glob("*.par"))


@pytest.mark.parametrize("name", GCL_FILES)
def test_gcl_round_trip(name):
    p = parse_gcl(corpus_text(name))
    assert parse_gcl(render(p)) == p


@pytest.mark.parametrize("name", CSP_FILES)
def test_csp_round_trip(name):
    s = parse_csp(corpus_text(name))
    assert parse_csp(render_csp(s)) == s


@pytest.mark.parametrize("name", PAR_FILES)
def test_par_round_trip(name):
    s = parse_par(corpus_text(name))
    assert parse_par(render_par(s)) == s


def test_transform_output_reparses_and_rechecks():
    p = parse_gcl(corpus_text("goon.gcl"))
    t = transform_wf(p)
    check_program(t)
    again = parse_gcl(render(t))
    assert again == t
    check_program(again)


def test_guard_order_preserved():
    src = "var x: int;\nif x > 0 -> skip [] x < 5 -> skip [] x = 2 -> skip fi"
    p = parse_gcl(src)
    guards = [render_expr(arm.guard) for arm in p.body.arms]
    assert guards == ["x > 0", "x < 5", "x = 2"]


# ---------------------------------------------------------------------------
# Expression round trips over generated trees
# ---------------------------------------------------------------------------

_INT_DECLS = (Declaration("x", "int"), Declaration("y", "int"),
              Declaration("flag", "bool"), Declaration("a", "int[]", 0, 3))


def int_exprs(depth):
    if depth == 0:
        return st.one_of(
            st.integers(min_value=-99, max_value=99).map(IntLit),
            st.sampled_from([Var("x"), Var("y")]),
        )
    sub = int_exprs(depth - 1)
    return st.one_of(
        sub,
        st.tuples(st.sampled_from(["+", "-", "*", "div", "mod"]), sub, sub)
          .map(lambda t: BinOp(t[0], t[1], t[2])),
        sub.map(lambda e: UnaryOp("neg", e)),
        st.tuples(st.sampled_from(["min", "max"]), sub, sub)
          .map(lambda t: Builtin(t[0], (t[1], t[2]))),
        sub.map(lambda e: ArrayRef("a", e)),
    )


def bool_exprs(depth):
    ints = int_exprs(depth)
    base = st.one_of(
        st.booleans().map(BoolLit),
        st.just(Var("flag")),
        st.tuples(st.sampled_from(["=", "!=", "<", "<=", ">", ">="]), ints, ints)
          .map(lambda t: BinOp(t[0], t[1], t[2])),
    )
    if depth == 0:
        return base
    sub = bool_exprs(depth - 1)
    return st.one_of(
        base,
        st.tuples(st.sampled_from(["and", "or"]), sub, sub)
          .map(lambda t: BinOp(t[0], t[1], t[2])),
        sub.map(lambda e: UnaryOp("not", e)),
    )


@settings(max_examples=300, deadline=None)
@given(bool_exprs(3))
def test_expression_render_parse_identity(expr):
    prog = GclProgram(_INT_DECLS + (Declaration("b", "bool"),),
                      Assign((Var("b"),), (expr,)))
    text = render(prog)
    assert parse_gcl(text) == prog


@settings(max_examples=300, deadline=None)
@given(int_exprs(4))
def test_int_expression_render_parse_identity(expr):
    prog = GclProgram(_INT_DECLS, Assign((Var("x"),), (expr,)))
    assert parse_gcl(render(prog)) == prog
