import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slantlab.errors import ArityError, EvaluationDomainError, ExprSyntaxError, UnknownIdentifierError
from slantlab.exprmap import eval_jet1, eval_jet2, eval_vector_map, evaluate, parse, pretty

VARS = ["x1", "x2"]


def _py(src, x):
    """Oracle: evaluate the same text with Python's own arithmetic."""
    env = {"x1": x[0], "x2": x[1], "pi": math.pi}
    env.update({f: getattr(math, f) for f in ("sin", "cos", "tan", "exp", "log", "sqrt", "atan")})
    return eval(src.replace("^", "**"), {"__builtins__": {}}, env)


leaf = st.sampled_from(["x1", "x2", "2", "0.5", "pi"])


def _combine(children):
    binary = st.tuples(children, st.sampled_from(["+", "-", "*"]), children).map(
        lambda t: f"({t[0]} {t[1]} {t[2]})")
    power = st.tuples(children, st.integers(0, 3)).map(lambda t: f"({t[0]})^{t[1]}")
    call = st.tuples(st.sampled_from(["sin", "cos", "atan"]), children).map(lambda t: f"{t[0]}({t[1]})")
    neg = children.map(lambda s: f"-{s}")
    return binary | power | call | neg


expressions = st.recursive(leaf, _combine, max_leaves=8)
points = st.tuples(st.floats(-2, 2), st.floats(-2, 2))


class TestParsing:
    @pytest.mark.parametrize("src, x, want", [
        ("1 + 2*3", [0, 0], 7.0),
        ("2^3", [0, 0], 8.0),
        ("-x1^2", [3, 0], -9.0),
        ("x1 - x2 - 1", [5, 1], 3.0),
        ("x1 / x2 / 2", [8, 2], 2.0),
        ("2 ** 2", [0, 0], 4.0),
        ("sin(pi/2)", [0, 0], 1.0),
        ("1e-3 * x1", [2, 0], 2e-3),
    ])
    def test_values(self, src, x, want):
        assert evaluate(parse(src, VARS), x) == pytest.approx(want, rel=1e-15)

    @given(expressions, points)
    @settings(max_examples=200, deadline=None)
    def test_matches_python(self, src, x):
        want = _py(src, x)
        got = evaluate(parse(src, VARS), list(x))
        assert got == pytest.approx(want, rel=1e-12, abs=1e-12)

    @given(expressions)
    @settings(max_examples=200, deadline=None)
    def test_pretty_round_trip(self, src):
        e = parse(src, VARS)
        again = parse(pretty(e), VARS)
        assert pretty(again) == pretty(e)
        x = [0.3, -0.7]
        assert evaluate(again, x) == evaluate(e, x)

    def test_location_reported(self):
        with pytest.raises(ExprSyntaxError) as err:
            parse("x1 +\n  * x2", VARS)
        assert (err.value.line, err.value.column) == (2, 3)

    @pytest.mark.parametrize("src, exc", [
        ("x3 + 1", UnknownIdentifierError),
        ("foo(x1)", UnknownIdentifierError),
        ("sin(x1, x2)", ArityError),
        ("sin()", ArityError),
        ("(x1 + 2", ExprSyntaxError),
        ("x1 +", ExprSyntaxError),
        ("", ExprSyntaxError),
        ("x1 $ 2", ExprSyntaxError),
    ])
    def test_errors(self, src, exc):
        with pytest.raises(exc):
            parse(src, VARS)

    def test_free_variables_and_constness(self):
        e = parse("x2*sin(pi)", VARS)
        assert e.nparams == 2
        assert not e.is_constant()
        assert parse("pi/6", VARS).is_constant()


class TestDomain:
    @pytest.mark.parametrize("src, x", [
        ("log(x1)", [-1.0, 0.0]),
        ("sqrt(x1)", [-0.5, 0.0]),
        ("1/x2", [1.0, 0.0]),
    ])
    def test_outside_domain(self, src, x):
        with pytest.raises(EvaluationDomainError):
            evaluate(parse(src, VARS), x)


class TestJets:
    def test_product_rule(self):
        j = eval_jet2(parse("x1^2*x2", VARS), [3.0, 2.0])
        assert j.value == 18.0
        np.testing.assert_allclose(j.gradient, [12.0, 9.0])
        np.testing.assert_allclose(j.hessian, [[4.0, 6.0], [6.0, 0.0]])

    def test_composition(self):
        x = np.array([0.4, 1.1])
        j = eval_jet2(parse("exp(sin(x1*x2))", VARS), x)
        s, c = math.sin(x[0] * x[1]), math.cos(x[0] * x[1])
        d1 = math.exp(s) * c
        np.testing.assert_allclose(j.gradient, [d1 * x[1], d1 * x[0]], rtol=1e-14)
        d2 = math.exp(s) * (c * c - s)
        want = np.array([[d2 * x[1] ** 2, d2 * x[0] * x[1] + d1],
                         [d2 * x[0] * x[1] + d1, d2 * x[0] ** 2]])
        np.testing.assert_allclose(j.hessian, want, rtol=1e-13)

    @given(expressions, points)
    @settings(max_examples=100, deadline=None)
    def test_against_differences(self, src, x):
        e = parse(src, VARS)
        x = np.array(x)
        j = eval_jet2(e, x)
        h = 1e-5
        for i in range(2):
            d = np.zeros(2)
            d[i] = h
            g = (evaluate(e, x + d) - evaluate(e, x - d)) / (2 * h)
            H = (eval_jet1(e, x + d)[1] - eval_jet1(e, x - d)[1]) / (2 * h)
            scale = max(1.0, abs(j.gradient).max(), abs(j.hessian).max())
            assert abs(g - j.gradient[i]) <= 1e-5 * scale
            assert np.abs(H - j.hessian[:, i]).max() <= 1e-5 * scale

    def test_hessian_symmetric(self):
        j = eval_jet2(parse("tan(x1*x2) + x1/(1 + x2^2)", VARS), [0.2, 0.3])
        np.testing.assert_array_equal(j.hessian, j.hessian.T)

    def test_vector_map_shapes(self):
        comps = [parse(s, VARS) for s in ("x1", "x1*x2", "cos(x2)")]
        v, J, H = eval_vector_map(comps, [1.0, 2.0])
        assert v.shape == (3,) and J.shape == (3, 2) and H.shape == (3, 2, 2)
        _, J1, H1 = eval_vector_map(comps, [1.0, 2.0], order=1)
        assert H1 is None
        np.testing.assert_array_equal(J, J1)
