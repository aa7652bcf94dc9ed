from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sllab import exprparse as ep


def test_parse_variable():
    assert ep.parse("x") == ep.Var("x")


def test_decaying_weight_at_zero_and_one():
    e = ep.parse("(3*abs(x)+1)^(-4/3)")
    assert ep.evaluate(e, 0.0) == 1.0
    assert ep.evaluate(e, 1.0) == pytest.approx(4 ** (-4 / 3), rel=1e-15)
    assert ep.evaluate(e, 1.0) == pytest.approx(0.15749013, abs=1e-8)


def test_rational_potential_vanishes_at_origin():
    e = ep.parse("6*(x^4-6*abs(x))/((abs(x)^3+3)^2)")
    assert ep.evaluate(e, 0.0) == 0.0


def test_sqrt_of_four_and_negative():
    e = ep.parse("sqrt(x)")
    assert ep.evaluate(e, 4.0) == 2.0
    with pytest.raises(ep.ExprDomainError) as info:
        ep.evaluate(e, -1.0)
    assert info.value.argument == -1.0
    assert "sqrt" in info.value.subexpr


@pytest.mark.parametrize("text, x", [("log(x)", 0.0), ("1/x", 0.0), ("x^(1/2)", -2.0)])
def test_domain_errors(text, x):
    with pytest.raises(ep.ExprDomainError):
        ep.evaluate(ep.parse(text), x)


def test_precedence_and_associativity():
    assert ep.evaluate(ep.parse("2^3^2"), 0) == 512.0
    assert ep.evaluate(ep.parse("-2^2"), 0) == -4.0
    assert ep.evaluate(ep.parse("8/4/2"), 0) == 1.0
    assert ep.evaluate(ep.parse("1-2-3"), 0) == -4.0
    assert ep.evaluate(ep.parse("2*3+4*5"), 0) == 26.0
    assert ep.evaluate(ep.parse("2^-1"), 0) == 0.5


def test_syntax_error_offset():
    with pytest.raises(ep.ExprSyntaxError) as info:
        ep.parse("1 + * 2")
    assert info.value.offset == 4


def test_unknown_function_and_second_variable():
    with pytest.raises(ep.ExprNameError):
        ep.parse("tan(x)")
    with pytest.raises(ep.ExprNameError):
        ep.parse("x + y")
    with pytest.raises(ep.ExprNameError):
        ep.parse("s", var="x")


def test_empty_text_rejected():
    with pytest.raises(ep.ExprSyntaxError):
        ep.parse("   ")


def test_pi_constant_and_functions():
    assert ep.evaluate(ep.parse("cos(pi)"), 0) == -1.0
    assert ep.evaluate(ep.parse("sign(x)*atan(1)"), -3.0) == pytest.approx(-math.pi / 4)
    assert ep.free_variable(ep.parse("2*pi")) is None


def test_function_wrapper_arrays():
    f = ep.Function("x^2+1")
    assert f(2.0) == 5.0
    np.testing.assert_array_equal(f(np.array([0.0, 1.0, 3.0])), [1.0, 2.0, 10.0])
    assert f == ep.Function("x ^ 2 + 1")
    assert hash(f) == hash(ep.Function("x^2+1"))


# -- properties --------------------------------------------------------------

_leaves = st.one_of(
    st.floats(min_value=0, max_value=1e6, allow_nan=False).map(ep.Num),
    st.just(ep.Var("x")),
    st.just(ep.Const("pi")),
)


def _extend(children):
    return st.one_of(
        children.map(ep.Neg),
        st.tuples(st.sampled_from("+-*/^"), children, children).map(lambda t: ep.BinOp(*t)),
        st.tuples(st.sampled_from(sorted(ep.FUNCTIONS)), children).map(lambda t: ep.Call(*t)),
    )


asts = st.recursive(_leaves, _extend, max_leaves=12)


@settings(max_examples=300, deadline=None)
@given(asts)
def test_print_parse_round_trip(e):
    assert ep.parse(ep.to_text(e), var="x") == e


@settings(max_examples=300, deadline=None)
@given(asts, st.floats(min_value=-5, max_value=5, allow_nan=False))
def test_round_trip_evaluates_identically(e, x):
    try:
        expected = ep.evaluate(e, x)
    except (ep.ExprDomainError, OverflowError):
        return
    got = ep.evaluate(ep.parse(ep.to_text(e), var="x"), x)
    assert got == expected or (math.isnan(got) and math.isnan(expected))


@settings(max_examples=300, deadline=None)
@given(asts, st.data())
def test_unbalanced_parentheses_rejected(e, data):
    text = "(" + ep.to_text(e) + ")"
    k = data.draw(st.integers(min_value=0, max_value=len(text) - 1))
    while text[k] not in "()":
        k = (k + 1) % len(text)
    broken = text[:k] + text[k + 1:]
    with pytest.raises(ep.ExprSyntaxError):
        ep.parse(broken, var="x")


@settings(max_examples=200, deadline=None)
@given(st.text(alphabet="x1+-*/^() ", min_size=1, max_size=20))
def test_random_text_parses_or_raises_cleanly(text):
    if text.count("(") != text.count(")"):
        with pytest.raises(ep.ExprSyntaxError):
            ep.parse(text, var="x")
        return
    try:
        ep.parse(text, var="x")
    except ep.ExprSyntaxError:
        pass
