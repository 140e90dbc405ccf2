import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slantlab import calculus, catalog
from slantlab.calculus import TangentField, affine_field, coordinate_field, lie_bracket, random_field
from slantlab.geometry import point_geometry
from slantlab.report import PASS, SKIPPED


class TestLieBracket:
    def test_coordinate_example(self):
        X = coordinate_field(0, 2)
        Y = TangentField(lambda x: np.array([0.0, x[0]]))
        np.testing.assert_allclose(lie_bracket(X, Y, np.array([0.3, 0.4])), [0.0, 1.0], atol=1e-10)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1))
    def test_affine_fields(self, seed):
        rng = np.random.default_rng(seed)
        a, c = rng.standard_normal((2, 3))
        B, D = rng.standard_normal((2, 3, 3))
        x = rng.standard_normal(3)
        got = lie_bracket(affine_field(a, B), affine_field(c, D), x)
        want = D @ (a + B @ x) - B @ (c + D @ x)
        np.testing.assert_allclose(got, want, atol=1e-8)

    def test_antisymmetric(self):
        rng = np.random.default_rng(3)
        X, Y = random_field(rng, 3), random_field(rng, 3)
        x = np.array([0.1, 0.2, 0.3])
        np.testing.assert_allclose(lie_bracket(X, Y, x), -lie_bracket(Y, X, x), atol=1e-12)


class TestLeviCivita:
    @pytest.fixture(params=["sphere_patch", "mobius_graph", "coupled_semi_slant"])
    def setting(self, request):
        chart = catalog.build(request.param)
        x = chart.grid(2)[0]
        rng = np.random.default_rng(11)
        return chart, x, [random_field(rng, chart.n) for _ in range(3)]

    def test_torsion_free(self, setting):
        chart, x, (X, Y, _) = setting
        pg = point_geometry(chart, x)
        nXY, hXY = calculus.covariant_derivative(chart, X, Y, x, pg)
        nYX, hYX = calculus.covariant_derivative(chart, Y, X, x, pg)
        bracket = pg.jacobian @ lie_bracket(X, Y, x)
        np.testing.assert_allclose(nXY - nYX, bracket, atol=1e-7)
        np.testing.assert_allclose(hXY, hYX, atol=1e-7)

    def test_metric_compatible(self, setting):
        chart, x, (X, Y, Z) = setting
        pg = point_geometry(chart, x)

        def inner(y):
            return Y.ambient(chart, y) @ Z.ambient(chart, y)

        lhs = calculus.directional(inner, x, X(x))
        nY, _ = calculus.covariant_derivative(chart, X, Y, x, pg)
        nZ, _ = calculus.covariant_derivative(chart, X, Z, x, pg)
        rhs = nY @ Z.ambient(chart, x) + Y.ambient(chart, x) @ nZ
        assert lhs == pytest.approx(rhs, abs=1e-7)

    def test_normal_part_is_h(self, setting):
        chart, x, (X, Y, _) = setting
        pg = point_geometry(chart, x)
        _, h = calculus.covariant_derivative(chart, X, Y, x, pg)
        np.testing.assert_allclose(h, pg.h(X.ambient(chart, x), Y.ambient(chart, x)), atol=1e-9)


class TestStructureIdentities:
    @pytest.mark.parametrize("name", ["sphere_patch", "mobius_graph"])
    def test_covariant_identities(self, name):
        chart = catalog.build(name)
        entries = calculus.covariant_identities_check(chart, chart.grid(2)[:3], np.random.default_rng(0))
        assert all(e.status == PASS for e in entries)
        assert max(e.residual for e in entries) < 1e-6

    def test_residual_keys(self):
        chart = catalog.build("mobius_graph")
        x = chart.grid(2)[5]
        rng = np.random.default_rng(1)
        X, Y = random_field(rng, 4), random_field(rng, 4)
        Z = calculus.polynomial_normal_field(chart, rng)
        res = calculus.covariant_identity_residuals(chart, x, X, Y, Z, "J")
        assert set(res) >= {"nabla_phi", "d_omega", "tangent_of_RZ", "normal_of_RZ"}
        assert max(res.values()) < 1e-6

    def test_rotated_basis_skipped(self):
        chart = catalog.build("example_7_6")
        entries = calculus.covariant_identities_check(chart, chart.grid(2)[:1], np.random.default_rng(0))
        assert entries[0].status == SKIPPED

    @pytest.mark.parametrize("name", ["cylinder", "sphere3", "semi_slant_product"])
    def test_gauss_weingarten(self, name):
        chart = catalog.build(name)
        entries = calculus.gauss_weingarten_check(chart, chart.grid(2)[:3], np.random.default_rng(2))
        assert all(e.status == PASS for e in entries)


@pytest.fixture(scope="module")
def coupled():
    chart = catalog.build("coupled_semi_slant")
    return chart, chart.grid(2)[:2]


class TestIntegrability:
    def test_d1_integrable(self, coupled):
        entries = calculus.integrability_check_d1(*coupled)
        assert all(e.status == PASS and "integrable" in e.labels for e in entries)

    def test_d2_not_integrable(self, coupled):
        for e in calculus.integrability_check_d2(*coupled):
            assert e.status == PASS
            assert "non-integrable" in e.labels
            assert e.detail["direct"] > 1.0
            assert e.detail["identity"] < 1e-8

    def test_foliations(self, coupled):
        d1 = calculus.foliation_check(coupled[0], coupled[1], "d1")
        d2 = calculus.foliation_check(coupled[0], coupled[1], "d2")
        assert all("totally-geodesic" in e.labels for e in d1)
        assert all("not-totally-geodesic" in e.labels for e in d2)
        assert all(e.status == PASS for e in d1 + d2)

    def test_product_is_integrable(self):
        chart = catalog.build("semi_slant_product")
        pts = chart.grid(2)[:2]
        for e in calculus.integrability_check_d1(chart, pts) + calculus.integrability_check_d2(chart, pts):
            assert e.status == PASS and "integrable" in e.labels

    def test_rotated_chart_labelled(self):
        chart = catalog.build("example_7_6")
        entries = calculus.integrability_check_d1(chart, chart.grid(2)[:1])
        assert entries[0].status == PASS
        assert "basis-not-parallel" in entries[0].labels


class TestUmbilic:
    @pytest.mark.parametrize("name, umbilic", [("sphere_patch", True), ("sphere3", True),
                                               ("circle", True), ("cylinder", False)])
    def test_labels(self, name, umbilic):
        chart = catalog.build(name)
        entries = calculus.umbilic_check(chart, chart.grid(2)[:2])
        assert all(e.status == PASS for e in entries)
        assert all(("umbilic" in e.labels) == umbilic for e in entries)

    def test_lemma_components(self):
        chart = catalog.build("sphere3")
        e = calculus.umbilic_check(chart, chart.grid(2)[:1])[0]
        assert max(e.detail["I"].values()) < 1e-12


class TestKahlerForm:
    def test_omega_antisymmetric(self):
        chart = catalog.build("mobius_graph")
        W = calculus.omega_form(chart, chart.grid(2)[0], "K")
        np.testing.assert_allclose(W, -W.T, atol=1e-14)

    @pytest.mark.parametrize("name", ["sphere_patch", "mobius_graph"])
    def test_closed(self, name):
        chart = catalog.build(name)
        entries = calculus.kahler_form_check(chart, chart.grid(2)[:3], np.random.default_rng(4))
        assert all(e.status == PASS for e in entries)
        assert max(e.residual for e in entries) < 1e-6

    def test_rotated_basis_not_closed(self):
        chart = catalog.build("example_7_6")
        e = calculus.kahler_form_check(chart, chart.grid(2)[:1], np.random.default_rng(0))[0]
        assert e.status == SKIPPED
        assert e.detail["d_omega"] > 1.0

    def test_exact_form_on_flat_chart(self):
        # Omega of a linear chart has constant coefficients, so dOmega vanishes
        chart = catalog.build("slant_plane")
        X, Y, Z = (coordinate_field(i % 2, 2) for i in range(3))
        assert abs(calculus.d_omega_form(chart, np.array([0.4, 0.6]), "I", X, Y, Z)) < 1e-9
