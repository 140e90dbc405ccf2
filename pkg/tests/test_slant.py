import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slantlab import catalog, slant
from slantlab.ambient import STRUCTURES, standard_basis
from slantlab.geometry import ImmersionChart
from slantlab.report import NON_CONFORMING, PASS, SKIPPED


def linear_chart(vectors, name="linear"):
    """Chart x -> sum x_i v_i for the given ambient vectors."""
    vectors = np.asarray(vectors, dtype=float)
    n, N = vectors.shape
    params = [f"x{i + 1}" for i in range(n)]
    comps = [" + ".join(f"({float(vectors[i, k])!r})*x{i + 1}" for i in range(n)) for k in range(N)]
    return ImmersionChart.from_strings(params, comps, [(0.0, 1.0)] * n, standard_basis(N // 4), name)


def two_angle_chart(a, b):
    e = np.eye(8)
    return linear_chart([e[0], math.cos(a) * e[1] + math.sin(a) * e[2],
                         e[4], math.cos(b) * e[5] + math.sin(b) * e[6]])


class TestSlantPlane:
    @settings(max_examples=40, deadline=None)
    @given(st.floats(0.05, math.pi / 2 - 0.05))
    def test_angles(self, alpha):
        pa = slant.analyze(catalog.build("slant_plane", alpha=alpha), [0.5, 0.5])
        assert pa.theta["I"] == pytest.approx(alpha, abs=1e-10)
        assert pa.theta["J"] == pytest.approx(math.pi / 2 - alpha, abs=1e-10)
        assert pa.theta["K"] == pytest.approx(math.pi / 2, abs=1e-10)
        assert pa.almost_h_slant

    def test_pi_over_three(self):
        pa = slant.analyze(catalog.build("slant_plane"), [0.2, 0.9])
        assert abs(pa.theta["I"] - math.pi / 3) <= 1e-10

    def test_slant_angle_direction_free(self):
        pa = slant.analyze(catalog.build("slant_plane", alpha=0.4), [0.5, 0.5])
        sa = pa.structures["I"]
        for t in np.linspace(0, math.pi, 7):
            assert slant.slant_angle(sa, [math.cos(t), math.sin(t)]) == pytest.approx(0.4, abs=1e-12)
        with pytest.raises(ValueError):
            slant.slant_angle(sa, [1.0, 1.0])


class TestClassification:
    def test_linear_4fold_labels(self):
        pa = slant.analyze(catalog.build("example_7_5"), [0.5] * 4)
        sas = pa.structures
        assert sas["I"].label == slant.SEMI_INVARIANT and sas["I"].d1_dim == 2
        assert sas["J"].label == slant.SLANT and sas["J"].d1_dim == 0
        assert sas["K"].label == slant.SEMI_INVARIANT and sas["K"].d1_dim == 2
        assert "almost-h-semi-invariant" in pa.labels
        assert not pa.proper

    def test_rotated_6fold(self):
        pa = slant.analyze(catalog.build("example_7_6", f="pi/6"), [0.5] * 6)
        assert pa.h_semi_slant
        assert all(pa.structures[R].d1_dim == 4 for R in STRUCTURES)
        assert pa.structures["I"].label == slant.SEMI_SLANT
        assert pa.structures["K"].label == slant.SEMI_INVARIANT
        assert all(pa.structures[R].mu_dim == 0 for R in STRUCTURES)

    def test_quaternionic_plane_is_invariant(self):
        pa = slant.analyze(linear_chart(np.eye(4)), [0.5] * 4)
        assert all(pa.structures[R].label == slant.INVARIANT for R in STRUCTURES)
        assert pa.theta == {"I": 0.0, "J": 0.0, "K": 0.0}
        assert "h-slant" in pa.labels and "split-ambiguous" in pa.labels

    def test_two_clusters_are_non_conforming(self):
        pa = slant.analyze(two_angle_chart(0.3, 1.0), [0.5] * 4)
        assert pa.structures["I"].label == slant.NON_CONFORMING
        assert "non-conforming" in pa.labels

    def test_equal_angles_conform(self):
        pa = slant.analyze(two_angle_chart(0.7, 0.7), [0.5] * 4)
        assert pa.structures["I"].label == slant.SLANT
        assert pa.theta["I"] == pytest.approx(0.7, abs=1e-12)

    def test_cluster_tolerance(self):
        chart = two_angle_chart(0.7, 0.7 + 1e-5)
        assert slant.analyze(chart, [0.5] * 4).structures["I"].label == slant.NON_CONFORMING
        assert slant.analyze(chart, [0.5] * 4, cluster_tol=1e-3).structures["I"].label == slant.SLANT


def random_subspace(rng, n, N):
    return np.linalg.qr(rng.standard_normal((N, n)))[0].T


class TestIdentities:
    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10 ** 6), st.integers(1, 7))
    def test_tensor_identities_random(self, seed, n):
        rng = np.random.default_rng(seed)
        chart = linear_chart(random_subspace(rng, n, 8))
        pa = slant.analyze(chart, [0.5] * n)
        for R in STRUCTURES:
            res = slant.tensor_identity_residuals(pa.structures[R])
            assert max(res.values()) < 1e-12

    @pytest.mark.parametrize("name", ["coupled_semi_slant", "mobius_graph", "example_7_6", "sphere3"])
    def test_bilinear_and_distributions(self, name):
        chart = catalog.underlying_chart(catalog.build(name))
        for x in chart.grid(2)[:6]:
            pa = slant.analyze(chart, x)
            for R in STRUCTURES:
                sa = pa.structures[R]
                assert max(slant.bilinear_residuals(sa).values()) < 1e-10
                assert max(slant.distribution_residuals(sa).values()) < 1e-10

    def test_orthogonality_preservation(self):
        chart = catalog.build("coupled_semi_slant")
        entries = slant.orthogonality_preservation_check(chart, chart.grid(2)[:4], np.random.default_rng(0))
        assert all(e.status == PASS for e in entries)


class TestGridChecks:
    def test_constancy_labels(self):
        plane = catalog.build("slant_plane")
        summary = slant.check_pointwise_constancy(plane, plane.grid(3))[-1]
        assert summary.labels == ["globally-constant"]
        sphere = catalog.build("sphere_patch")
        summary = slant.check_pointwise_constancy(sphere, sphere.grid(3))[-1]
        assert summary.labels == ["pointwise-varying"]

    def test_non_conforming_entries(self):
        chart = two_angle_chart(0.3, 1.0)
        entries = slant.check_pointwise_constancy(chart, chart.grid(2)[:2])
        assert [e.status for e in entries[:-1]] == [NON_CONFORMING] * 2

    @pytest.mark.parametrize("name, constant", [("slant_plane", True), ("sphere_patch", False),
                                                ("mobius_graph", False)])
    def test_constancy_criterion(self, name, constant):
        chart = catalog.build(name)
        entries = slant.constancy_criterion_check(chart, chart.grid(2))
        assert all(e.status == PASS for e in entries)
        detail = entries[-1].detail
        assert all(d["criterion_zero"] == d["theta_constant"] for d in detail.values())
        assert all(d["theta_constant"] for d in detail.values()) == constant

    def test_constancy_gradient_identity(self):
        # A_{wY} phi Y - A_{w phi Y} Y = 1/2 |Y|^2 grad cos^2 theta on a curved proper chart
        chart = catalog.build("sphere_patch")
        entries = slant.constancy_criterion_check(chart, chart.grid(3), identity_tol=1e-7)
        assert all(e.status == PASS for e in entries[:-1])

    def test_rotated_basis_skips_identity(self):
        chart = catalog.build("example_7_6")
        entries = slant.constancy_criterion_check(chart, chart.grid(2)[:2])
        assert {e.status for e in entries[:-1]} == {SKIPPED}

    def test_conformal_scale(self):
        chart = catalog.build("mobius_graph")
        entries = slant.conformal_invariance_check(chart, chart.grid(2)[:4], lambda p: 0.1 * p[0] ** 2)
        assert all(e.status == PASS for e in entries)

    def test_metric_matters_when_not_conformal(self):
        chart = catalog.build("slant_plane")
        G = np.diag([1.0, 4.0, 1.0, 1.0])
        alt = slant.analyze_with_metric(chart, [0.5, 0.5], G)
        assert alt["I"].theta != pytest.approx(math.pi / 3, abs=1e-3)
