import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from slantlab import catalog
from slantlab.ambient import standard_basis
from slantlab.errors import ContractViolation, DimensionError, DomainError, ImmersionDegeneracyError
from slantlab.geometry import (
    ImmersionChart,
    complete_normal_frame,
    frame_at,
    gram_schmidt,
    normal_connection,
    normal_field,
    second_fundamental_form,
    sff_norm_squared,
    shape_operator,
)


class TestGramSchmidt:
    @settings(max_examples=60, deadline=None)
    @given(arrays(float, (6, 3), elements=st.floats(-5, 5)))
    def test_factorisation(self, A):
        if np.linalg.svd(A, compute_uv=False)[-1] < 1e-3:
            return
        Q, R = gram_schmidt(A)
        np.testing.assert_allclose(Q.T @ Q, np.eye(3), atol=1e-12)
        np.testing.assert_allclose(Q @ R, A, atol=1e-10)
        assert np.all(np.diag(R) > 0)
        assert np.allclose(R, np.triu(R))

    def test_dependent_columns(self):
        A = np.array([[1.0, 2.0], [0.0, 0.0], [1.0, 2.0]])
        with pytest.raises(ValueError):
            gram_schmidt(A)

    def test_normal_completion(self):
        E, _ = gram_schmidt(np.array([[1.0, 1.0], [1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]))
        N = complete_normal_frame(E)
        B = np.column_stack([E, N])
        np.testing.assert_allclose(B.T @ B, np.eye(4), atol=1e-14)

    def test_hypersurface_of_full_rank(self):
        assert complete_normal_frame(np.eye(4)).shape == (4, 0)


class TestChart:
    def test_validation(self):
        b = standard_basis(1)
        with pytest.raises(DimensionError):
            ImmersionChart.from_strings(["x1"], ["x1", "0", "0"], [(0, 1)], b)
        with pytest.raises(DimensionError):
            ImmersionChart.from_strings(["x1"], ["x1", "0", "0", "0"], [(0, 1), (0, 1)], b)
        with pytest.raises(DomainError):
            ImmersionChart.from_strings(["x1"], ["x1", "0", "0", "0"], [(1, 0)], b)

    def test_grid(self):
        c = catalog.build("slant_plane")
        pts = c.grid(4)
        assert len(pts) == 16
        assert all(c.contains(p) for p in pts)
        assert min(p[0] for p in pts) == pytest.approx(0.125)
        with pytest.raises(ValueError):
            c.grid(1)

    def test_degenerate_immersion(self):
        c = ImmersionChart.from_strings(["x1", "x2"], ["x1", "x1", "0", "0"], [(0, 1)] * 2,
                                        standard_basis(1))
        with pytest.raises(ImmersionDegeneracyError):
            frame_at(c, [0.5, 0.5])


class TestSecondFundamentalForm:
    def test_flat_chart(self):
        pg = second_fundamental_form(catalog.build("example_7_5"), [0.3] * 4)
        assert sff_norm_squared(pg) == 0.0

    def test_round_sphere(self):
        c = catalog.build("sphere_patch")
        pg = second_fundamental_form(c, [0.5, 0.9])
        E = pg.tangent_frame
        for i in range(2):
            for j in range(2):
                want = -pg.p if i == j else np.zeros(4)
                np.testing.assert_allclose(pg.h(E[:, i], E[:, j]), want, atol=1e-12)
        np.testing.assert_allclose(pg.mean_curvature, -pg.p, atol=1e-12)
        assert sff_norm_squared(pg) == pytest.approx(2.0)

    def test_cylinder_direction(self):
        pg = second_fundamental_form(catalog.build("cylinder"), [0.4, 0.2])
        X = np.array([-math.sin(0.4), math.cos(0.4), 0, 0])
        np.testing.assert_allclose(pg.h(X, X), [-math.cos(0.4), -math.sin(0.4), 0, 0], atol=1e-12)
        np.testing.assert_allclose(pg.h(X, [0, 0, 1.0, 0]), 0.0, atol=1e-12)

    def test_weingarten_duality(self):
        c = catalog.build("mobius_graph")
        x = np.array([1.0, 0.5, 0.4, 0.1])
        pg = second_fundamental_form(c, x)
        rng = np.random.default_rng(0)
        Z = pg.normal_frame @ rng.standard_normal(pg.normal_frame.shape[1])
        X, Y = (pg.tangent_frame @ rng.standard_normal((4, 2))).T
        assert pg.shape(Z, X) @ Y == pytest.approx(pg.h(X, Y) @ Z, abs=1e-12)
        A = shape_operator(pg, Z)
        np.testing.assert_array_equal(A, A.T)

    def test_shape_operator_rejects_tangent(self):
        pg = second_fundamental_form(catalog.build("sphere_patch"), [0.5, 0.5])
        with pytest.raises(ContractViolation):
            shape_operator(pg, pg.tangent_frame[:, 0])


class TestNormalConnection:
    def test_position_on_sphere(self):
        # on the unit sphere the position vector is normal and parallel in the normal bundle
        c = catalog.build("sphere_patch")
        Z = normal_field(c, lambda p: p)
        out = normal_connection(c, np.array([0.6, 0.7]), np.array([1.0, 0.3]), Z)
        np.testing.assert_allclose(out, 0.0, atol=1e-9)

    def test_rejects_tangent_field(self):
        c = catalog.build("sphere_patch")
        with pytest.raises(ContractViolation):
            normal_connection(c, np.array([0.6, 0.7]), np.array([1.0, 0.0]),
                              lambda y: c.jacobian(y)[:, 0])
