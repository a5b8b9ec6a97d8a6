"""Expression module: parser, symbolic derivatives, jets, error reporting."""
import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from conftest import central_d1, central_d2, draw_sample, gen_source
from grtsurf.expr import (Add, Const, Div, EvalError, Mul, Neg, ParseError,
                          Pow, Sub, UnknownIdentifierError, Var, differentiate,
                          eval_jet2, evaluate, parse_expr, simplify, unparse)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

def test_parse_variable_identity():
    assert parse_expr("z", "z") == Var()


def test_parse_profile_polynomial_structure():
    node = parse_expr("t^2+t+1", "t")
    assert node == Add(Add(Pow(Var(), 2), Var()), Const(complex(1.0)))


def test_parse_reports_offset_and_expected():
    with pytest.raises(ParseError) as err:
        parse_expr("2*+z", "z")
    assert err.value.offset == 2
    assert "number" in err.value.expected


def test_parse_same_source_same_tree():
    a = parse_expr("exp(z^2)-3*z/(1+z)", "z")
    b = parse_expr("exp(z^2)-3*z/(1+z)", "z")
    assert a == b


def test_parse_precedence_and_associativity():
    assert parse_expr("1-2-3", "z") == Sub(Sub(Const(1 + 0j), Const(2 + 0j)),
                                           Const(3 + 0j))
    assert parse_expr("2*z^2", "z") == Mul(Const(2 + 0j), Pow(Var(), 2))
    assert parse_expr("-z^2", "z") == Neg(Pow(Var(), 2))
    assert parse_expr("1/2/z", "z") == Div(Div(Const(1 + 0j), Const(2 + 0j)), Var())


def test_parse_numbers():
    assert parse_expr("2e3", "z") == Const(2000 + 0j)
    assert parse_expr("1.5e-2", "z") == Const(0.015 + 0j)
    assert parse_expr("0.25", "z") == Const(0.25 + 0j)


def test_parse_constants():
    assert parse_expr("i", "z") == Const(1j)
    assert parse_expr("pi", "z") == Const(complex(math.pi))
    assert parse_expr("e", "t") == Const(complex(math.e))


def test_parse_whitespace_insignificant():
    assert parse_expr(" t ^ 2 + t + 1 ", "t") == parse_expr("t^2+t+1", "t")


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifierError):
        parse_expr("z+w", "z")


def test_i_rejected_in_real_context():
    with pytest.raises(UnknownIdentifierError):
        parse_expr("t+i", "t", real=True)
    # fine in the complex context
    parse_expr("z+i", "z")


def test_unknown_function():
    with pytest.raises(UnknownIdentifierError):
        parse_expr("tan(z)", "z")


def test_function_requires_parenthesis():
    with pytest.raises(ParseError):
        parse_expr("exp z", "z")


def test_unclosed_parenthesis():
    with pytest.raises(ParseError):
        parse_expr("(z+1", "z")


def test_trailing_input_rejected():
    with pytest.raises(ParseError):
        parse_expr("z z", "z")


def test_exponent_must_be_integer_literal():
    with pytest.raises(ParseError):
        parse_expr("z^-2", "z")
    with pytest.raises(ParseError):
        parse_expr("z^2.5", "z")
    with pytest.raises(ParseError):
        parse_expr("z^z", "z")
    # no chained exponents in the grammar
    with pytest.raises(ParseError):
        parse_expr("z^2^3", "z")


# ---------------------------------------------------------------------------
# Differentiation
# ---------------------------------------------------------------------------

def test_derivative_of_variable():
    assert differentiate(parse_expr("z", "z")) == Const(1 + 0j)


def test_derivative_of_square():
    assert differentiate(parse_expr("z^2", "z")) == parse_expr("2*z", "z")


def test_exp_fixed_point():
    node = parse_expr("exp(z)", "z")
    assert differentiate(node) == node


def test_derivative_table():
    cases = {
        "log(t)": "1/t",
        "sin(t)": "cos(t)",
        "cos(t)": "-sin(t)",
        "sinh(t)": "cosh(t)",
        "cosh(t)": "sinh(t)",
        "t^2+t+1": "2*t+1",
    }
    for src, expected in cases.items():
        assert differentiate(parse_expr(src, "t")) == parse_expr(expected, "t")


def test_second_derivative_constant():
    d2 = differentiate(differentiate(parse_expr("t^2+t+1", "t")))
    assert d2 == Const(2 + 0j)


def test_differentiation_total_over_nested_trees():
    node = parse_expr("exp(cos(z^3)/(1+z^2))-log(2+sinh(z))", "z")
    d = node
    for _ in range(3):
        d = differentiate(d)  # must not raise, output stays differentiable


# ---------------------------------------------------------------------------
# Jets
# ---------------------------------------------------------------------------

def test_jet_square_at_complex_point():
    jet = eval_jet2(parse_expr("z^2", "z"), 1 + 1j)
    assert jet.value == 2j
    assert jet.d1 == 2 + 2j
    assert jet.d2 == 2 + 0j


def test_jet_exp_at_zero():
    jet = eval_jet2(parse_expr("exp(z)", "z"), 0j)
    assert jet.value == jet.d1 == jet.d2 == 1 + 0j


def test_jet_profile_at_zero_with_fd_crosscheck():
    node = parse_expr("t^2+t+1", "t")
    jet = eval_jet2(node, 0.0, variable="t")
    assert (jet.value, jet.d1, jet.d2) == (1.0, 1.0, 2.0)
    fd1 = central_d1(node, 0.0, "t", h=1e-5)
    assert abs(jet.d1 - fd1) <= 1e-6 * (1 + abs(jet.d1))
    fd2 = central_d2(node, 0.0, "t")
    assert abs(jet.d2 - fd2) <= 1e-6 * (1 + abs(jet.d2))


def test_division_by_zero_names_subexpression():
    node = parse_expr("1/(z-1)", "z")
    with pytest.raises(EvalError) as err:
        eval_jet2(node, 1 + 0j)
    assert "1/(z-1)" in str(err.value)
    assert err.value.point == 1 + 0j


def test_log_branch_cut():
    node = parse_expr("log(z)", "z")
    with pytest.raises(EvalError):
        eval_jet2(node, 0j)
    with pytest.raises(EvalError):
        eval_jet2(node, complex(-1.0, 0.0))
    # off the cut the principal branch is fine
    jet = eval_jet2(node, complex(-1.0, 1e-9))
    assert math.isfinite(jet.value.real)


def test_log_real_domain():
    node = parse_expr("log(t)", "t")
    with pytest.raises(EvalError):
        eval_jet2(node, 0.0, variable="t")
    with pytest.raises(EvalError):
        eval_jet2(node, -2.0, variable="t")
    assert eval_jet2(node, 1.0, variable="t").value == 0.0


def test_overflow_is_an_error_not_inf():
    node = parse_expr("exp(t)", "t")
    with pytest.raises(EvalError):
        eval_jet2(node, 1e4, variable="t")


def test_complex_constant_rejected_in_real_evaluation():
    node = parse_expr("i*z", "z")
    with pytest.raises(EvalError):
        eval_jet2(node, 0.5, variable="z")


# ---------------------------------------------------------------------------
# Unparse round trip
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("src", [
    "z", "t^2+t+1", "cos(t)", "sinh(t)", "exp(z)", "z^2", "1-2-3",
    "-z^2", "2*z/(1+z^2)", "exp(2*log(z))", "1/2/z", "z-(1-z)",
    "-(z+1)", "(z+1)^3*exp(-z)",
])
def test_parse_unparse_parse_identity(src):
    first = parse_expr(src, "z" if "z" in src else "t")
    var = "z" if "z" in src else "t"
    again = parse_expr(unparse(first, var), var)
    assert first == again


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**48), st.booleans())
def test_parse_unparse_parse_identity_generated(seed, real):
    rng = random.Random(seed)
    src = gen_source(rng, depth=rng.randint(1, 3), real=real)
    var = "t" if real else "z"
    first = parse_expr(src, var, real=real)
    assert parse_expr(unparse(first, var), var, real=real) == first


# ---------------------------------------------------------------------------
# Properties: jets vs symbolic derivatives vs finite differences
# ---------------------------------------------------------------------------

@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**48), st.booleans())
def test_jet_matches_symbolic_derivative(seed, real):
    rng = random.Random(seed)
    src, node, point = draw_sample(rng, real=real)
    var = "t" if real else "z"
    jet = eval_jet2(node, point, variable=var)
    d1 = evaluate(differentiate(node), point, variable=var)
    d2 = evaluate(differentiate(differentiate(node)), point, variable=var)
    assert abs(jet.d1 - d1) <= 1e-9 * (1 + abs(d1))
    assert abs(jet.d2 - d2) <= 1e-9 * (1 + abs(d2))


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**48), st.booleans())
def test_first_derivative_matches_finite_difference(seed, real):
    rng = random.Random(seed)
    src, node, point = draw_sample(rng, real=real)
    var = "t" if real else "z"
    jet = eval_jet2(node, point, variable=var)
    fd = central_d1(node, point, var)
    assert abs(jet.d1 - fd) <= 1e-6 * (1 + abs(jet.d1)), src


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**48), st.booleans())
def test_second_derivative_matches_difference_stencil(seed, real):
    # the second-difference stencil uses a coarser step: at h = 1e-5 its
    # roundoff floor (eps*|e|/h^2) would exceed the comparison tolerance
    rng = random.Random(seed)
    src, node, point = draw_sample(rng, real=real)
    var = "t" if real else "z"
    jet = eval_jet2(node, point, variable=var)
    fd = central_d2(node, point, var)
    assert abs(jet.d2 - fd) <= 1e-6 * (1 + abs(jet.d2)), src


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**48))
def test_cauchy_riemann(seed):
    rng = random.Random(seed)
    src, node, point = draw_sample(rng, real=False)
    h = 1e-5
    du1 = (evaluate(node, point + h) - evaluate(node, point - h)) / (2 * h)
    du2 = (evaluate(node, point + 1j * h) - evaluate(node, point - 1j * h)) / (2 * h)
    assert abs(du2 - 1j * du1) <= 1e-8 * (1 + abs(du1)), src


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**48), st.booleans())
def test_simplify_preserves_value(seed, real):
    rng = random.Random(seed)
    src, node, point = draw_sample(rng, real=real)
    var = "t" if real else "z"
    a = evaluate(node, point, variable=var)
    b = evaluate(simplify(node), point, variable=var)
    assert abs(a - b) <= 1e-12 * (1 + abs(a))
