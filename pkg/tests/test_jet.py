"""(u, r, θ, φ) チャート上の2階ジェットのテスト"""

import math
import operator

import numpy as np
import pytest

from jet import (
    PHI,
    R,
    THETA,
    U,
    Jet2,
    Point4,
    coordinate_index,
    coordinate_jets,
    cos,
    evaluate,
    exp,
    jet_binary,
    jet_const,
    jet_coord,
    jet_unary,
    ln,
    pow_real,
    sin,
    sqrt,
    tan,
)
from utils import InvalidInputError, SingularEvaluationError


def composite(p: Point4) -> Jet2:
    u, r, theta, phi = coordinate_jets(p)
    return exp(sin(u) * r) / (r * r + theta) + cos(phi) * theta


def composite_value(u, r, theta, phi) -> float:
    return math.exp(math.sin(u) * r) / (r * r + theta) + math.cos(phi) * theta


class TestPoint4:
    """チャート上の点の定義域検査"""

    def test_rejects_small_r(self):
        with pytest.raises(InvalidInputError):
            Point4(0.0, 0.0, 1.0, 0.0)

    def test_rejects_theta_at_pole(self):
        with pytest.raises(InvalidInputError):
            Point4(0.0, 1.0, 0.0, 0.0)
        with pytest.raises(InvalidInputError):
            Point4(0.0, 1.0, math.pi, 0.0)

    def test_rejects_non_finite(self):
        with pytest.raises(InvalidInputError):
            Point4(float("nan"), 1.0, 1.0, 0.0)

    def test_shifted(self):
        p = Point4(1.0, 2.0, 1.0, 0.5).shifted(R, 0.25)
        assert p.as_tuple() == (1.0, 2.25, 1.0, 0.5)

    def test_coordinate_index(self):
        assert coordinate_index("θ") == THETA
        assert coordinate_index("phi") == PHI
        with pytest.raises(InvalidInputError):
            coordinate_index(4)
        with pytest.raises(InvalidInputError):
            coordinate_index("t")


class TestJetArithmetic:
    """2階までの Leibniz 則と商の微分"""

    def test_coordinate_jet(self, point):
        jet = jet_coord(U, point)
        assert jet.value == point.u
        np.testing.assert_array_equal(jet.grad, [1.0, 0.0, 0.0, 0.0])
        np.testing.assert_array_equal(jet.hess, np.zeros((4, 4)))

    def test_product(self, point):
        jet = jet_coord(U, point) * jet_coord(R, point)
        assert jet.value == pytest.approx(2.0)
        np.testing.assert_allclose(jet.grad, [2.0, 1.0, 0.0, 0.0])
        assert jet.hess[U, R] == jet.hess[R, U] == 1.0
        assert jet.hess[U, U] == 0.0

    def test_scalar_operands_both_sides(self, point):
        r = jet_coord(R, point)
        assert (3.0 - r).value == pytest.approx(1.0)
        assert (np.float64(2.0) * r).value == pytest.approx(4.0)
        assert (1.0 / r).grad[R] == pytest.approx(-0.25)

    def test_division_by_zero_value(self):
        with pytest.raises(SingularEvaluationError):
            jet_const(1.0) / jet_const(0.0)
        with pytest.raises(SingularEvaluationError):
            jet_const(1.0) / 0.0

    def test_unknown_operation(self):
        with pytest.raises(InvalidInputError):
            jet_binary("pow", jet_const(1.0), jet_const(2.0))
        with pytest.raises(InvalidInputError):
            jet_unary("atan", jet_const(1.0))

    def test_matches_finite_differences(self, point):
        jet = composite(point)
        h = 1e-6
        x = point.as_tuple()
        assert jet.value == pytest.approx(composite_value(*x), rel=1e-14)
        for k in range(4):
            plus, minus = list(x), list(x)
            plus[k] += h
            minus[k] -= h
            numeric = (composite_value(*plus) - composite_value(*minus)) / (2 * h)
            assert jet.grad[k] == pytest.approx(numeric, abs=1e-6)

        step = 1e-5
        for k in range(4):
            numeric = (composite(point.shifted(k, step)).grad - composite(point.shifted(k, -step)).grad) / (2 * step)
            np.testing.assert_allclose(jet.hess[k], numeric, atol=1e-5)

    def test_hessian_symmetric_and_read_only(self, point):
        jet = composite(point)
        np.testing.assert_array_equal(jet.hess, jet.hess.T)
        with pytest.raises(ValueError):
            jet.grad[0] = 1.0


class TestJetUnary:
    """連鎖律と定義域のエラー"""

    def test_sin_cos(self, point):
        theta = jet_coord(THETA, point)
        s = sin(theta)
        assert s.grad[THETA] == pytest.approx(math.cos(point.theta))
        assert s.hess[THETA, THETA] == pytest.approx(-math.sin(point.theta))
        c = cos(theta)
        assert c.grad[THETA] == pytest.approx(-math.sin(point.theta))

    def test_tan_pole(self):
        p = Point4(0.0, 1.0, math.pi / 2, 0.0)
        with pytest.raises(SingularEvaluationError):
            tan(jet_coord(THETA, p))

    def test_tan_derivative(self):
        p = Point4(0.0, 1.0, math.pi / 4, 0.0)
        t = tan(jet_coord(THETA, p))
        assert t.value == pytest.approx(1.0)
        assert t.grad[THETA] == pytest.approx(2.0)
        assert t.hess[THETA, THETA] == pytest.approx(4.0)

    def test_domain_errors(self):
        with pytest.raises(SingularEvaluationError):
            sqrt(jet_const(-1.0))
        with pytest.raises(SingularEvaluationError):
            ln(jet_const(0.0))
        with pytest.raises(SingularEvaluationError):
            exp(jet_const(1000.0))

    def test_negative_integer_power(self):
        p = Point4(2.0, 1.0, 1.0, 0.0)
        jet = jet_coord(U, p) ** -2
        assert jet.value == pytest.approx(0.25)
        assert jet.grad[U] == pytest.approx(-0.25)
        assert jet.hess[U, U] == pytest.approx(0.375)

    def test_zero_to_negative_power(self):
        with pytest.raises(SingularEvaluationError):
            jet_const(0.0) ** -1

    def test_real_power(self):
        p = Point4(0.0, 4.0, 1.0, 0.0)
        r = jet_coord(R, p)
        half = r ** 0.5
        assert half.value == pytest.approx(2.0)
        assert half.grad[R] == pytest.approx(0.25)
        assert half.hess[R, R] == pytest.approx(-1.0 / 32.0)

        integral = pow_real(r, 2.0)
        squared = r ** 2
        assert integral.value == squared.value
        np.testing.assert_array_equal(integral.grad, squared.grad)

    def test_real_power_of_negative_base(self):
        with pytest.raises(SingularEvaluationError):
            pow_real(jet_const(-2.0), 0.5)


class TestConstants:
    """定数ジェットとスカラー場の評価"""

    def test_non_finite_constant(self):
        with pytest.raises(InvalidInputError):
            jet_const(float("nan"))
        with pytest.raises(InvalidInputError):
            jet_const(math.inf)
        with pytest.raises(InvalidInputError):
            jet_const(True)

    def test_non_finite_jet(self):
        with pytest.raises(SingularEvaluationError):
            Jet2(math.inf, np.zeros(4), np.zeros((4, 4)))

    def test_evaluate_attaches_point(self, point):
        def singular(p):
            return jet_const(1.0) / jet_const(0.0)

        with pytest.raises(SingularEvaluationError) as excinfo:
            evaluate(singular, point)
        assert excinfo.value.point == point
        assert str(point) in str(excinfo.value)


def random_points(rng, count):
    """u ∈ [0, 2], r ∈ [1, 3], θ ∈ [0.2, 2.8], φ ∈ [-1, 1] の一様乱数点"""
    return [
        Point4(rng.uniform(0.0, 2.0), rng.uniform(1.0, 3.0), rng.uniform(0.2, 2.8), rng.uniform(-1.0, 1.0))
        for _ in range(count)
    ]


def assert_matches_differences(field, value, p, step=1e-5, rtol=1e-6):
    """勾配は値の中心差分、ヘッセ行列は勾配の中心差分と比べる"""
    jet = field(p)
    x = np.array(p.as_tuple())
    assert jet.value == pytest.approx(value(x), rel=1e-12, abs=1e-12)
    for k in range(4):
        e = np.zeros(4)
        e[k] = step
        numeric = (value(x + e) - value(x - e)) / (2 * step)
        assert jet.grad[k] == pytest.approx(numeric, rel=rtol, abs=rtol)
        numeric_hess = (field(p.shifted(k, step)).grad - field(p.shifted(k, -step)).grad) / (2 * step)
        np.testing.assert_allclose(jet.hess[k], numeric_hess, rtol=rtol, atol=rtol)


def random_factors(rng):
    """乱数係数の因子 a と、値が 0.6 以上に保たれる因子 b（ジェット版と値版）"""
    c = rng.uniform(-1.0, 1.0, size=4)
    d = rng.uniform(-0.5, 0.5, size=3)

    def a_jet(p):
        u, r, theta, phi = coordinate_jets(p)
        return c[0] + c[1] * u * r + c[2] * sin(theta) * phi + c[3] * r * r

    def a_value(x):
        u, r, theta, phi = x
        return c[0] + c[1] * u * r + c[2] * math.sin(theta) * phi + c[3] * r * r

    def b_jet(p):
        u, r, theta, phi = coordinate_jets(p)
        return 3.0 + d[0] * cos(u) + d[1] * phi + d[2] * theta / r

    def b_value(x):
        u, r, theta, phi = x
        return 3.0 + d[0] * math.cos(u) + d[1] * phi + d[2] * theta / r

    return (a_jet, a_value), (b_jet, b_value)


def chain_argument(p):
    u, r, theta, _ = coordinate_jets(p)
    return 0.2 + 0.3 * r + 0.1 * u * sin(theta)


def chain_argument_value(x):
    u, r, theta, _ = x
    return 0.2 + 0.3 * r + 0.1 * u * math.sin(theta)


UNARY_CASES = {
    "sin": (sin, math.sin),
    "cos": (cos, math.cos),
    "tan": (tan, math.tan),
    "exp": (exp, math.exp),
    "sqrt": (sqrt, math.sqrt),
    "ln": (ln, math.log),
    "pow_int[3]": (lambda a: jet_unary("pow_int", a, 3), lambda v: v ** 3),
    "pow_int[-2]": (lambda a: jet_unary("pow_int", a, -2), lambda v: v ** -2),
}


class TestRandomizedRules:
    """乱数点での Leibniz 則・商の微分・連鎖律と差分の照合"""

    @pytest.mark.parametrize("op", ["mul", "div"])
    def test_leibniz_and_quotient(self, rng, op):
        combine = operator.mul if op == "mul" else operator.truediv
        for p in random_points(rng, 20):
            (a_jet, a_value), (b_jet, b_value) = random_factors(rng)
            assert_matches_differences(
                lambda q: combine(a_jet(q), b_jet(q)),
                lambda x: combine(a_value(x), b_value(x)),
                p,
            )

    @pytest.mark.parametrize("name", list(UNARY_CASES))
    def test_chain_rule(self, rng, name):
        jet_op, value_op = UNARY_CASES[name]
        # 引数は [0.5, 1.3] に収まり、どの演算でも定義域の内側
        for p in random_points(rng, 100):
            assert_matches_differences(
                lambda q: jet_op(chain_argument(q)),
                lambda x: value_op(chain_argument_value(x)),
                p,
            )

    def test_internal_results_are_symmetric_and_read_only(self, rng):
        for p in random_points(rng, 10):
            (a_jet, _), (b_jet, _) = random_factors(rng)
            jet = sin(a_jet(p) / b_jet(p)) - exp(-0.1 * a_jet(p))
            np.testing.assert_array_equal(jet.hess, jet.hess.T)
            assert not jet.grad.flags.writeable
            assert not jet.hess.flags.writeable

    def test_non_finite_result_of_operation(self):
        big = jet_const(1e308)
        with pytest.raises(SingularEvaluationError):
            big * big
