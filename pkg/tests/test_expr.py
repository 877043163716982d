import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import graphonlab.expr as ex
from graphonlab import evaluate


def test_parse_simple_product():
    ast = ex.parse("x*y")
    assert isinstance(ast, ex.Bin) and ast.op == "*"
    assert isinstance(ast.left, ex.Var) and ast.left.name == "x"
    assert isinstance(ast.right, ex.Var) and ast.right.name == "y"


def test_parse_minmax_kernel():
    ast = ex.parse("min(x,y)*(1-max(x,y))")
    assert ex.eval_ast(ast, 0.5, 0.5) == pytest.approx(0.25, abs=1e-15)


def test_unknown_identifier_offset():
    with pytest.raises(ex.ExprNameError) as err:
        ex.parse("x*z")
    assert err.value.offset == 2
    assert err.value.name == "z"


def test_eval_examples():
    assert ex.eval_ast(ex.parse("1/2"), 0.9, 0.1) == 0.5
    assert ex.eval_ast(ex.parse("x^2"), 0.3, 0.0) == pytest.approx(0.09, abs=1e-15)
    with pytest.raises(ex.ExprEvalError):
        ex.eval_ast(ex.parse("sqrt(x-1)"), 0.5, 0.5)
    with pytest.raises(ex.ExprEvalError):
        ex.eval_ast(ex.parse("1/(x-x)"), 0.5, 0.5)


def test_power_is_right_associative():
    assert ex.eval_ast(ex.parse("2^3^2"), 0.0, 0.0) == 512.0


def test_unary_minus_binds_tighter_than_power():
    assert ex.eval_ast(ex.parse("-2^2"), 0.0, 0.0) == 4.0


def test_functions_and_arity():
    assert ex.eval_ast(ex.parse("abs(-3)"), 0.0, 0.0) == 3.0
    assert ex.eval_ast(ex.parse("exp(0)"), 0.0, 0.0) == 1.0
    assert ex.eval_ast(ex.parse("sqrt(4)"), 0.0, 0.0) == 2.0
    assert ex.eval_ast(ex.parse("min(x, y)"), 0.2, 0.7) == 0.2
    with pytest.raises(ex.ExprSyntaxError):
        ex.parse("min(x)")
    with pytest.raises(ex.ExprSyntaxError):
        ex.parse("abs(x, y)")


@pytest.mark.parametrize("bad, offset", [
    ("x*", 2),
    ("(x", 2),
    ("x )", 2),
    ("", 0),
    ("x + + y", 4),
    ("1 2", 2),
])
def test_syntax_errors_carry_offsets(bad, offset):
    with pytest.raises(ex.ExprSyntaxError) as err:
        ex.parse(bad)
    assert err.value.offset == offset


def test_unexpected_character():
    with pytest.raises(ex.ExprSyntaxError) as err:
        ex.parse("x ? y")
    assert err.value.offset == 2


def test_unparse_disambiguates_grammar_slots():
    assert ex.unparse(ex.parse("(x^y)^x")) == "(x^y)^x"
    assert ex.unparse(ex.parse("-(x^2)")) == "-(x^2)"
    assert ex.unparse(ex.parse("-x^2")) == "-x^2"
    assert ex.unparse(ex.parse("x/(y*x)")) == "x / (y * x)"
    assert ex.unparse(ex.parse("(x+y)*x")) == "(x + y) * x"


_leaf = st.one_of(
    st.builds(ex.Num, st.floats(0.0, 4.0, allow_nan=False).map(lambda v: round(v, 3))),
    st.builds(ex.Var, st.sampled_from(["x", "y"])),
)


def _node(children):
    return st.one_of(
        st.builds(ex.Bin, st.sampled_from(["+", "-", "*", "/", "^"]), children, children),
        st.builds(ex.Unary, st.just("-"), children),
        st.builds(lambda f, a: ex.Call(f, (a,)), st.sampled_from(["abs", "exp", "sqrt"]), children),
        st.builds(lambda f, a, b: ex.Call(f, (a, b)), st.sampled_from(["min", "max"]),
                  children, children),
    )


_ast = st.recursive(_leaf, _node, max_leaves=12)


@given(ast=_ast, x=st.floats(0.01, 0.99), y=st.floats(0.01, 0.99))
@settings(max_examples=120, deadline=None)
def test_unparse_parse_roundtrip_evaluates_identically(ast, x, y):
    text = ex.unparse(ast)
    reparsed = ex.parse(text)
    try:
        expected = ex.eval_ast(ast, x, y)
        failed = False
    except ex.ExprEvalError:
        failed = True
    if failed:
        with pytest.raises(ex.ExprEvalError):
            ex.eval_ast(reparsed, x, y)
        return
    got = ex.eval_ast(reparsed, x, y)
    if math.isinf(expected):
        assert got == expected
    else:
        assert got == pytest.approx(expected, abs=1e-15, rel=1e-15)


_soup = st.text(
    alphabet=list("xy0123456789+-*/^(), .minmaxabsexpsqrt_e"),
    max_size=24,
)


@given(source=_soup)
@settings(max_examples=300, deadline=None)
def test_parser_never_crashes_on_token_soup(source):
    try:
        ex.parse(source)
    except (ex.ExprSyntaxError, ex.ExprNameError):
        pass


def test_symmetrize_examples():
    half_sum = ex.symmetrize(ex.parse("x"))
    assert evaluate(half_sum, 0.2, 0.8) == pytest.approx(0.5, abs=1e-15)

    unchanged = ex.symmetrize(ex.parse("x*y"))
    assert evaluate(unchanged, 0.3, 0.9) == pytest.approx(0.27, abs=1e-15)

    mixed = ex.symmetrize(ex.parse("x^2*y"))
    assert evaluate(mixed, 0.2, 0.8) == pytest.approx(0.08, abs=1e-15)


def test_symmetrize_is_bit_symmetric():
    w = ex.symmetrize(ex.parse("x^2*y + exp(x)/3"))
    for x, y in [(0.1, 0.9), (0.37, 0.82), (0.5, 0.25)]:
        assert evaluate(w, x, y) == evaluate(w, y, x)
