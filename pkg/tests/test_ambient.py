import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from slantlab.ambient import (
    STRUCTURES,
    ambient_variables,
    apply,
    rotated_basis,
    standard_basis,
    structure_residuals,
)
from slantlab.errors import DimensionError, DomainError
from slantlab.exprmap import parse


def qmul(a, b):
    a0, a1, a2, a3 = a
    b0, b1, b2, b3 = b
    return np.array([
        a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
        a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
        a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
        a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
    ])


UNITS = {"I": (0, 1, 0, 0), "J": (0, 0, 1, 0), "K": (0, 0, 0, 1)}


class TestStandardBasis:
    @pytest.mark.parametrize("m", [1, 2, 3, 4])
    def test_relations_exact(self, m):
        b = standard_basis(m)
        assert all(v == 0.0 for v in structure_residuals(*b.at()).values())

    def test_action_on_coordinates(self):
        I, J, K = standard_basis(1).at()
        e = np.eye(4)
        np.testing.assert_array_equal(I @ e[0], e[1])
        np.testing.assert_array_equal(J @ e[0], e[2])
        np.testing.assert_array_equal(K @ e[0], e[3])

    @given(arrays(float, 4, elements=st.floats(-10, 10)))
    def test_left_multiplication(self, v):
        b = standard_basis(1)
        for R in STRUCTURES:
            np.testing.assert_allclose(b.matrix(R) @ v, qmul(UNITS[R], v), atol=1e-12)

    def test_block_diagonal(self):
        I = standard_basis(2).matrix("I")
        assert not I[:4, 4:].any() and not I[4:, :4].any()
        np.testing.assert_array_equal(I[:4, :4], I[4:, 4:])

    @pytest.mark.parametrize("m", [0, -1, 1.5])
    def test_bad_m(self, m):
        with pytest.raises(DimensionError):
            standard_basis(m)

    def test_parallel(self):
        assert standard_basis(1).is_parallel


class TestRotatedBasis:
    def test_constant_rotation(self):
        f = parse("pi/6", ambient_variables(4))
        b = rotated_basis(standard_basis(1), f)
        assert b.is_parallel
        I, J, K = standard_basis(1).at()
        Ib, Jb, Kb = b.at(np.zeros(4))
        c, s = math.cos(math.pi / 6), math.sin(math.pi / 6)
        np.testing.assert_allclose(Ib, c * I - s * J)
        np.testing.assert_allclose(Jb, s * I + c * J)
        np.testing.assert_array_equal(Kb, K)

    @settings(max_examples=50, deadline=None)
    @given(arrays(float, 8, elements=st.floats(-3, 3)))
    def test_relations_pointwise(self, p):
        f = parse("pi/4*(1 + sin(y1 + y5*y6))", ambient_variables(8))
        b = rotated_basis(standard_basis(2), f)
        assert not b.is_parallel
        assert max(structure_residuals(*b.at(p)).values()) < 1e-12

    def test_angle_out_of_range(self):
        b = rotated_basis(standard_basis(1), parse("y1", ambient_variables(4)))
        with pytest.raises(DomainError):
            b.at(np.array([2.0, 0, 0, 0]))

    def test_degenerate_flag(self):
        b = rotated_basis(standard_basis(1), parse("y1", ambient_variables(4)))
        assert b.is_degenerate_at(np.zeros(4))
        assert not b.is_degenerate_at(np.array([0.5, 0, 0, 0]))

    def test_wrong_variable_count(self):
        with pytest.raises(DimensionError):
            rotated_basis(standard_basis(2), parse("y1", ambient_variables(4)))

    def test_point_required(self):
        b = rotated_basis(standard_basis(1), parse("y1", ambient_variables(4)))
        with pytest.raises(DimensionError):
            b.at()

    def test_callable_rotation(self):
        b = rotated_basis(standard_basis(1), lambda p: 0.3)
        assert not b.is_parallel
        assert b.angle_at(np.zeros(4)) == 0.3


class TestApply:
    def test_shape_checked(self):
        with pytest.raises(DimensionError):
            apply(standard_basis(1), "I", None, np.zeros(8))

    def test_squares_to_minus_one(self):
        b = standard_basis(2)
        v = np.arange(8.0)
        for R in STRUCTURES:
            np.testing.assert_array_equal(apply(b, R, None, apply(b, R, None, v)), -v)
