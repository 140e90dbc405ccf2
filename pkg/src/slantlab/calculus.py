"""Covariant derivatives, brackets and the differential identities.

Tangent fields are given by their coordinate coefficients u(x), so that the
ambient field is X = Jac(x) u(x). Derivatives of fields built from frames or
structures use central differences with step 1e-5 on top of exact second
derivatives of the immersion.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .ambient import STRUCTURES
from .geometry import FD_STEP, ImmersionChart, directional, frame_at, point_geometry
from .report import FAIL, PASS, Entry, judge, skip
from .slant import CLUSTER_TOL, analyze, mu_basis, theta_dict

FOLIATION_MIN_THETA = 1e-3


@dataclass(frozen=True)
class TangentField:
    """Tangent field X = sum_a u_a(x) d_a Phi given by its coefficients."""

    coeffs: Callable
    step: float = FD_STEP

    def __call__(self, x):
        return np.asarray(self.coeffs(np.asarray(x, dtype=float)), dtype=float)

    def ambient(self, chart, x):
        return chart.jacobian(x) @ self(x)


def coordinate_field(i, n):
    e = np.zeros(n)
    e[i] = 1.0
    return TangentField(lambda x: e)


def affine_field(a, B):
    """Coefficients a + B x."""
    a = np.asarray(a, dtype=float)
    B = np.asarray(B, dtype=float)
    return TangentField(lambda x: a + B @ x)


def random_field(rng, n, scale=0.5):
    """Smooth random field with affine and quadratic coefficient terms."""
    a = rng.standard_normal(n)
    B = scale * rng.standard_normal((n, n))
    Cq = 0.25 * scale * rng.standard_normal((n, n))

    def u(x):
        return a + B @ x + Cq @ (x * x)

    return TangentField(u)


class FrameCache:
    """Memo of frames and distribution projectors at stencil points.

    Difference quotients of several fields revisit the same parameter
    points; the cache keys on the exact bytes of the point.
    """

    def __init__(self, chart, cluster_tol=CLUSTER_TOL):
        self.chart = chart
        self.cluster_tol = cluster_tol
        self._frames = {}
        self._analyses = {}

    def frame(self, y):
        key = np.asarray(y, dtype=float).tobytes()
        if key not in self._frames:
            self._frames[key] = frame_at(self.chart, y)
        return self._frames[key]

    def analysis(self, y):
        key = np.asarray(y, dtype=float).tobytes()
        if key not in self._analyses:
            self._analyses[key] = analyze(self.chart, y, self.cluster_tol, pg=self.frame(y))
        return self._analyses[key]


def ambient_tangent_field(chart, fn, cache=None):
    """Tangent field from an ambient-vector-valued function of the parameters."""

    def u(x):
        jac = cache.frame(x).jacobian if cache is not None else chart.jacobian(x)
        return np.linalg.lstsq(jac, fn(x), rcond=None)[0]

    return TangentField(u)


def distribution_field(chart, which, part, c, cluster_tol=CLUSTER_TOL, cache=None):
    """Field P_D(x) Jac(x) c for the D1 or D2 distribution of structure ``which``."""
    c = np.asarray(c, dtype=float)
    cache = cache if cache is not None else FrameCache(chart, cluster_tol)

    def fn(x):
        pa = cache.analysis(x)
        return pa.ambient_projector(which, part) @ (pa.pg.jacobian @ c)

    return ambient_tangent_field(chart, fn, cache)


def distribution_frame_fields(chart, pa, which, part, cluster_tol=CLUSTER_TOL, cache=None):
    """Fields extending an orthonormal basis of D1 or D2 at the analysed point."""
    cache = cache if cache is not None else FrameCache(chart, cluster_tol)
    sa = pa.structures[which]
    V = sa.d1_basis if part == "d1" else sa.d2_basis
    vecs = pa.pg.tangent_frame @ V
    fields = []
    for k in range(vecs.shape[1]):
        c = pa.pg.coords(vecs[:, k])
        fields.append(distribution_field(chart, which, part, c, cluster_tol, cache))
    return fields, vecs


# ---------------------------------------------------------------------------
# Derivatives
# ---------------------------------------------------------------------------


def lie_bracket(X: TangentField, Y: TangentField, x, step=FD_STEP):
    """Coefficients of [X, Y] = X(v) - Y(u) by central differences."""
    x = np.asarray(x, dtype=float)
    u, v = X(x), Y(x)
    return directional(Y, x, u, step) - directional(X, x, v, step)


def ambient_derivative(chart, X: TangentField, Y: TangentField, x, pg=None, step=FD_STEP):
    """Flat derivative of the ambient field Y along X (exact second derivatives)."""
    pg = pg if pg is not None else point_geometry(chart, np.asarray(x, dtype=float))
    u, v = X(x), Y(x)
    dv = directional(Y, x, u, step)
    return np.einsum("kab,a,b->k", pg.hessians, u, v) + pg.jacobian @ dv


def covariant_derivative(chart, X, Y, x, pg=None):
    """(nabla_X Y, h(X, Y)) as ambient vectors."""
    pg = pg if pg is not None else point_geometry(chart, np.asarray(x, dtype=float))
    d = ambient_derivative(chart, X, Y, x, pg)
    return pg.tangent_projector @ d, pg.normal_projector @ d


def derivative_of(fn, X: TangentField, x, step=FD_STEP):
    """Flat derivative of an ambient vector field ``fn(x)`` along X."""
    return directional(fn, x, X(x), step)


def structure_field(chart, which, vector_fn, part, cache=None):
    """Ambient field y -> (tangent or normal part of) R(p(y)) vector_fn(y)."""

    def fn(y):
        fg = cache.frame(y) if cache is not None else frame_at(chart, y)
        R = chart.basis.matrix(which, fg.p)
        w = R @ vector_fn(y)
        P = fg.tangent_projector if part == "t" else fg.normal_projector
        return P @ w

    return fn


def _ambient(chart, X, cache=None):
    if cache is not None:
        return lambda y: cache.frame(y).jacobian @ X(y)
    return lambda y: chart.jacobian(y) @ X(y)


def nabla_phi(chart, X, Y, x, which, pg=None, cache=None):
    """(nabla_X phi_R) Y = nabla_X (phi_R Y) - phi_R nabla_X Y."""
    pg = pg if pg is not None else point_geometry(chart, x)
    R = chart.basis.matrix(which, pg.p)
    phiY = structure_field(chart, which, _ambient(chart, Y, cache), "t", cache)
    first = pg.tangent_projector @ derivative_of(phiY, X, x)
    nabla_XY, _ = covariant_derivative(chart, X, Y, x, pg)
    return first - pg.tangent_projector @ R @ nabla_XY


def d_omega(chart, X, Y, x, which, pg=None, cache=None):
    """(D_X omega_R) Y = D_X (omega_R Y) - omega_R nabla_X Y."""
    pg = pg if pg is not None else point_geometry(chart, x)
    R = chart.basis.matrix(which, pg.p)
    omegaY = structure_field(chart, which, _ambient(chart, Y, cache), "n", cache)
    first = pg.normal_projector @ derivative_of(omegaY, X, x)
    nabla_XY, _ = covariant_derivative(chart, X, Y, x, pg)
    return first - pg.normal_projector @ R @ nabla_XY


def covariant_identity_residuals(chart, x, X, Y, Z, which, pg=None, cache=None):
    """Residual norms of the four structure-derivative identities.

    ``Z`` is a normal field given as a function of the parameters.
    """
    x = np.asarray(x, dtype=float)
    pg = pg if pg is not None else point_geometry(chart, x)
    cache = cache if cache is not None else FrameCache(chart)
    R = chart.basis.matrix(which, pg.p)
    Pt, Pn = pg.tangent_projector, pg.normal_projector
    Xa, Ya = pg.jacobian @ X(x), pg.jacobian @ Y(x)
    z = np.asarray(Z(x), dtype=float)

    def phi(v):
        return Pt @ R @ v

    def omega(v):
        return Pn @ R @ v

    hXY = pg.h(Xa, Ya)
    lhs1 = nabla_phi(chart, X, Y, x, which, pg, cache)
    rhs1 = pg.shape(omega(Ya), Xa) + Pt @ R @ hXY
    lhs2 = d_omega(chart, X, Y, x, which, pg, cache)
    rhs2 = -pg.h(Xa, phi(Ya)) + Pn @ R @ hXY

    dZ = derivative_of(Z, X, x)
    DZ = Pn @ dZ
    BZ = Pt @ R @ z
    CZ = Pn @ R @ z
    AZX = pg.shape(z, Xa)
    nabla_BZ = Pt @ derivative_of(structure_field(chart, which, Z, "t", cache), X, x)
    D_CZ = Pn @ derivative_of(structure_field(chart, which, Z, "n", cache), X, x)
    lhs3 = -phi(AZX) + Pt @ R @ DZ
    rhs3 = nabla_BZ - pg.shape(CZ, Xa)
    lhs4 = -omega(AZX) + Pn @ R @ DZ
    rhs4 = pg.h(Xa, BZ) + D_CZ
    weingarten = dZ + AZX - DZ
    return {
        "nabla_phi": float(np.linalg.norm(lhs1 - rhs1)),
        "d_omega": float(np.linalg.norm(lhs2 - rhs2)),
        "tangent_of_RZ": float(np.linalg.norm(lhs3 - rhs3)),
        "normal_of_RZ": float(np.linalg.norm(lhs4 - rhs4)),
        "weingarten": float(np.linalg.norm(weingarten)),
    }


def polynomial_normal_field(chart, rng, scale=0.5):
    """Normal field: projection of a random affine ambient field."""
    N = chart.dim_ambient
    a = rng.standard_normal(N)
    B = scale * rng.standard_normal((N, N))

    def Z(y):
        fg = frame_at(chart, y)
        return fg.normal_projector @ (a + B @ fg.p)

    return Z


def covariant_identities_check(chart, points, rng, tol=1e-5, fields=2):
    entries = []
    parallel = chart.basis.is_parallel
    for k, x in enumerate(points):
        if not parallel:
            entries.append(skip("covariant_identities", k, "basis not parallel"))
            continue
        if chart.n == chart.dim_ambient:
            entries.append(skip("covariant_identities", k, "no normal directions"))
            continue
        pg = point_geometry(chart, x)
        cache = FrameCache(chart)
        worst = {}
        for _ in range(fields):
            X = random_field(rng, chart.n)
            Y = random_field(rng, chart.n)
            Z = polynomial_normal_field(chart, rng)
            for R in STRUCTURES:
                res = covariant_identity_residuals(chart, x, X, Y, Z, R, pg, cache)
                for key, val in res.items():
                    worst[key] = max(worst.get(key, 0.0), val)
        entries.append(judge("covariant_identities", k, max(worst.values()), tol, detail=worst))
    return entries


# ---------------------------------------------------------------------------
# Gauss / Weingarten consistency
# ---------------------------------------------------------------------------


def gauss_weingarten_check(chart, points, rng, tol=1e-6):
    """Second fundamental form against independent difference quotients.

    * h(X, Y) equals the normal part of the difference quotient of the
      ambient field Y along X;
    * <A_Z X, Y> = <h(X, Y), Z>;
    * |h|^2 is unchanged by an orthogonal re-mixing of the tangent frame.
    """
    entries = []
    for k, x in enumerate(points):
        pg = point_geometry(chart, x)
        X = random_field(rng, chart.n)
        Y = random_field(rng, chart.n)
        Ya = _ambient(chart, Y)
        dY = derivative_of(Ya, X, x)
        Xa, Yv = pg.jacobian @ X(x), pg.jacobian @ Y(x)
        gauss = np.linalg.norm(pg.normal_projector @ dY - pg.h(Xa, Yv))
        nabla, _ = covariant_derivative(chart, X, Y, x, pg)
        gauss_t = np.linalg.norm(pg.tangent_projector @ dY - nabla)
        shape = 0.0
        if pg.normal_frame.shape[1]:
            Z = pg.normal_frame @ rng.standard_normal(pg.normal_frame.shape[1])
            shape = abs(pg.shape(Z, Xa) @ Yv - pg.h(Xa, Yv) @ Z)
        Q, _ = np.linalg.qr(rng.standard_normal((chart.n, chart.n)))
        E2 = pg.tangent_frame @ Q
        h2 = np.einsum("ai,bj,abk->ijk", Q, Q, pg.h_tensor)
        frame_change = abs(np.sum(h2 ** 2) - np.sum(pg.h_tensor ** 2))
        detail = {"gauss_normal": float(gauss), "gauss_tangent": float(gauss_t),
                  "shape_duality": float(shape), "frame_independence": float(frame_change),
                  "frame_orthonormal": float(np.abs(E2.T @ E2 - np.eye(chart.n)).max())}
        entries.append(judge("gauss_weingarten", k, max(detail.values()), tol, detail=detail))
    return entries


# ---------------------------------------------------------------------------
# Integrability and foliations
# ---------------------------------------------------------------------------


def _integrability_terms(chart, X, Y, x, which, pg, cache=None):
    """Normal and tangential parts of R[X, Y] assembled from phi, omega, h, A, D."""
    R = chart.basis.matrix(which, pg.p)
    Pt, Pn = pg.tangent_projector, pg.normal_projector
    Xa, Ya = pg.jacobian @ X(x), pg.jacobian @ Y(x)
    phiX, phiY = Pt @ R @ Xa, Pt @ R @ Ya
    omX, omY = Pn @ R @ Xa, Pn @ R @ Ya
    phiY_f = structure_field(chart, which, _ambient(chart, Y, cache), "t", cache)
    phiX_f = structure_field(chart, which, _ambient(chart, X, cache), "t", cache)
    omY_f = structure_field(chart, which, _ambient(chart, Y, cache), "n", cache)
    omX_f = structure_field(chart, which, _ambient(chart, X, cache), "n", cache)
    normal = (pg.h(Xa, phiY) - pg.h(Ya, phiX)
              + Pn @ derivative_of(omY_f, X, x) - Pn @ derivative_of(omX_f, Y, x))
    tangential = (Pt @ derivative_of(phiY_f, X, x) - Pt @ derivative_of(phiX_f, Y, x)
                  + pg.shape(omX, Ya) - pg.shape(omY, Xa))
    return normal, tangential


def _shared_d1_required(pa):
    if "non-conforming" in pa.labels:
        return "not pointwise slant here"
    if not pa.h_semi_slant:
        return "D1 differs between I, J, K"
    return ""


def integrability_check(chart, points, part, tol=1e-6, cluster_tol=CLUSTER_TOL):
    """Integrability of D1 (part="d1") or D2 (part="d2") by brackets and by criterion.

    For each point and each structure R the direct residual is the norm of the
    complementary component of [X, Y] over pairs of frame fields; the
    criterion residual is assembled from phi, omega, h, A and D. A point
    passes when the two agree on integrability for all three R (and so the
    three criteria agree with each other).
    """
    name = f"integrability_{part}"
    entries = []
    for k, x in enumerate(points):
        pa = analyze(chart, x, cluster_tol)
        reason = _shared_d1_required(pa)
        if reason:
            entries.append(skip(name, k, reason, labels=list(pa.labels), theta=theta_dict(pa)))
            continue
        pg = pa.pg
        other = "d2" if part == "d1" else "d1"
        sa = pa.structures["I"]
        dims = {"d1": sa.d1_dim, "d2": sa.d2_dim}
        if dims[part] < 2 or dims[other] == 0:
            entries.append(Entry(name, k, PASS, 0.0, tol, labels=list(pa.labels) + ["integrable"],
                                 theta=theta_dict(pa), reason="criterion vacuous"))
            continue
        cache = FrameCache(chart, cluster_tol)
        fields, _ = distribution_frame_fields(chart, pa, "I", part, cluster_tol, cache)
        P_other = pa.ambient_projector("I", other)
        direct = 0.0
        crit = {R: 0.0 for R in STRUCTURES}
        ident = 0.0
        for X, Y in itertools.combinations(fields, 2):
            br = pg.jacobian @ lie_bracket(X, Y, x)
            d = float(np.linalg.norm(P_other @ br))
            direct = max(direct, d)
            for R in STRUCTURES:
                normal, tangential = _integrability_terms(chart, X, Y, x, R, pg, cache)
                if part == "d1":
                    c = math.hypot(np.linalg.norm(normal), np.linalg.norm(P_other @ tangential))
                else:
                    c = float(np.linalg.norm(P_other @ tangential))
                crit[R] = max(crit[R], c)
                ident = max(ident, abs(c - d))
        verdicts = [c <= tol for c in crit.values()]
        direct_ok = direct <= tol
        agree = all(v == direct_ok for v in verdicts)
        labels = list(pa.labels) + ["integrable" if direct_ok else "non-integrable"]
        if not chart.basis.is_parallel:
            labels.append("basis-not-parallel")
        status = PASS if agree else FAIL
        entries.append(Entry(name, k, status, max(direct, *crit.values()), tol, labels=labels,
                             theta=theta_dict(pa),
                             detail={"direct": direct, "criterion": crit, "identity": ident}))
    return entries


def integrability_check_d1(chart, points, tol=1e-6, cluster_tol=CLUSTER_TOL):
    return integrability_check(chart, points, "d1", tol, cluster_tol)


def integrability_check_d2(chart, points, tol=1e-6, cluster_tol=CLUSTER_TOL):
    return integrability_check(chart, points, "d2", tol, cluster_tol)


def foliation_check(chart, points, part, tol=1e-5, cluster_tol=CLUSTER_TOL):
    """Totally geodesic foliation test for D1 or D2 with the sin^2 identity.

    For D1: sin^2(t) <nabla_X Y, Z> = -<h(X,Y), w phi Z> + <h(X,RY), w Z>.
    For D2: sin^2(t) <nabla_Z W, X> = <w phi W, h(Z,X)> - <w W, h(Z,RX)>.
    """
    name = f"foliation_{part}"
    entries = []
    for k, x in enumerate(points):
        pa = analyze(chart, x, cluster_tol)
        reason = _shared_d1_required(pa)
        if reason:
            entries.append(skip(name, k, reason, labels=list(pa.labels), theta=theta_dict(pa)))
            continue
        thetas = [pa.structures[R].theta for R in STRUCTURES]
        if min(thetas) < FOLIATION_MIN_THETA:
            entries.append(skip(name, k, "a slant function vanishes (precondition)",
                                labels=list(pa.labels), theta=theta_dict(pa)))
            continue
        pg = pa.pg
        Pt, Pn = pg.tangent_projector, pg.normal_projector
        other = "d2" if part == "d1" else "d1"
        sa = pa.structures["I"]
        if min(sa.d1_dim, sa.d2_dim) == 0:
            entries.append(Entry(name, k, PASS, 0.0, tol, labels=list(pa.labels) + ["totally-geodesic"],
                                 theta=theta_dict(pa), reason="complementary distribution is trivial"))
            continue
        fields, vecs = distribution_frame_fields(chart, pa, "I", part, cluster_tol,
                                                 FrameCache(chart, cluster_tol))
        others = pg.tangent_frame @ pa.structures["I"].__getattribute__(f"{other}_basis")
        direct = 0.0
        crit = {R: 0.0 for R in STRUCTURES}
        ident = 0.0
        for X in fields:
            for Y in fields:
                nab, _ = covariant_derivative(chart, X, Y, x, pg)
                Xa, Ya = pg.jacobian @ X(x), pg.jacobian @ Y(x)
                for j in range(others.shape[1]):
                    Zv = others[:, j]
                    g = float(nab @ Zv)
                    direct = max(direct, abs(g))
                    for R in STRUCTURES:
                        Rm = chart.basis.matrix(R, pg.p)
                        s2 = math.sin(pa.structures[R].theta) ** 2
                        if part == "d1":
                            rhs = (-pg.h(Xa, Ya) @ (Pn @ Rm @ (Pt @ Rm @ Zv))
                                   + pg.h(Xa, Rm @ Ya) @ (Pn @ Rm @ Zv))
                        else:
                            # X plays Z, Y plays W, Zv plays X in the D2 identity
                            rhs = ((Pn @ Rm @ (Pt @ Rm @ Ya)) @ pg.h(Xa, Zv)
                                   - (Pn @ Rm @ Ya) @ pg.h(Xa, Rm @ Zv))
                        crit[R] = max(crit[R], abs(rhs))
                        ident = max(ident, abs(s2 * g - rhs))
        agree = all((c <= tol) == (direct <= tol) for c in crit.values())
        labels = list(pa.labels) + ["totally-geodesic" if direct <= tol else "not-totally-geodesic"]
        status = PASS if (agree and ident <= tol) else FAIL
        entries.append(Entry(name, k, status, ident, tol, labels=labels, theta=theta_dict(pa),
                             detail={"direct": direct, "criterion": crit, "identity": ident}))
    return entries


# ---------------------------------------------------------------------------
# Umbilicity
# ---------------------------------------------------------------------------


def umbilic_check(chart, points, tol=1e-6, cluster_tol=CLUSTER_TOL):
    entries = []
    for k, x in enumerate(points):
        pa = analyze(chart, x, cluster_tol)
        pg = pa.pg
        n = chart.n
        H = pg.mean_curvature
        defect = 0.0
        for i in range(n):
            for j in range(n):
                target = H if i == j else 0.0
                defect = max(defect, float(np.linalg.norm(pg.h_tensor[i, j] - target)))
        if defect > tol:
            entries.append(Entry("umbilic", k, PASS, defect, tol, labels=list(pa.labels) + ["not-umbilic"],
                                 theta=theta_dict(pa), reason="not totally umbilic; lemma checks skipped"))
            continue
        detail = {}
        worst = 0.0
        for R in STRUCTURES:
            sa = pa.structures[R]
            if not sa.conforming:
                continue
            if sa.d1_dim == 0:
                # the argument pairs two D1 vectors; with D1 = 0 it says nothing
                detail[R] = "not applicable: invariant distribution is trivial"
                continue
            Nf = pg.normal_frame
            Hn = Nf.T @ H
            M = mu_basis(sa)
            mu_part = float(np.linalg.norm(M.T @ Hn)) if M.size else 0.0
            W1 = sa.omega @ sa.d1_basis
            d1_part = float(np.linalg.norm(W1.T @ Hn)) if W1.size else 0.0
            detail[R] = {"mu_component": mu_part, "omega_d1_component": d1_part}
            worst = max(worst, mu_part, d1_part)
        zero_theta = any(pa.structures[R].theta == 0.0 for R in STRUCTURES
                         if pa.structures[R].theta is not None)
        if zero_theta:
            hn = math.sqrt(float(np.sum(pg.h_tensor ** 2)))
            detail["h_norm"] = hn
            worst = max(worst, hn)
        entries.append(judge("umbilic", k, max(worst, defect), tol,
                             labels=list(pa.labels) + ["umbilic"], theta=theta_dict(pa), detail=detail))
    return entries


# ---------------------------------------------------------------------------
# Fundamental 2-forms
# ---------------------------------------------------------------------------


def omega_form(chart, x, which):
    """Matrix of Omega_R(X, Y) = <phi_R X, Y> in the coordinate basis."""
    p, jac, _ = chart.evaluate(x, order=1)
    R = chart.basis.matrix(which, p)
    return jac.T @ R.T @ jac


def _omega_value(chart, which, A: TangentField, B: TangentField):
    def f(y):
        return float(A(y) @ omega_form(chart, y, which) @ B(y))
    return f


def d_omega_form(chart, x, which, X, Y, Z, step=FD_STEP):
    """Six-term exterior derivative of Omega_R on three tangent fields."""
    x = np.asarray(x, dtype=float)
    Om = omega_form(chart, x, which)
    d = (directional(_omega_value(chart, which, Y, Z), x, X(x), step)
         - directional(_omega_value(chart, which, X, Z), x, Y(x), step)
         + directional(_omega_value(chart, which, X, Y), x, Z(x), step))
    XY = lie_bracket(X, Y, x, step)
    XZ = lie_bracket(X, Z, x, step)
    YZ = lie_bracket(Y, Z, x, step)
    d -= XY @ Om @ Z(x)
    d += XZ @ Om @ Y(x)
    d -= YZ @ Om @ X(x)
    return float(d)


def kahler_form_check(chart, points, rng, triples=3, tol=1e-4, cluster_tol=CLUSTER_TOL):
    """Closedness and non-degeneracy of Omega_R on proper almost h-slant charts."""
    entries = []
    for k, x in enumerate(points):
        pa = analyze(chart, x, cluster_tol)
        labels = list(pa.labels)
        d_values = []
        for _ in range(triples):
            X, Y, Z = (random_field(rng, chart.n) for _ in range(3))
            for R in STRUCTURES:
                d_values.append(d_omega_form(chart, x, R, X, Y, Z))
        res = max(abs(v) for v in d_values)
        if not chart.basis.is_parallel:
            entries.append(skip("kahler_form_closed", k, "basis not parallel",
                                labels=labels, theta=theta_dict(pa), detail={"d_omega": res}))
            continue
        if not (pa.almost_h_slant and pa.proper):
            entries.append(skip("kahler_form_closed", k, "not proper pointwise almost h-slant here",
                                labels=labels, theta=theta_dict(pa), detail={"d_omega": res}))
            continue
        nondeg = 0.0
        for R in STRUCTURES:
            sa = pa.structures[R]
            smin = np.linalg.svd(sa.phi, compute_uv=False).min()
            nondeg = max(nondeg, math.cos(sa.theta) * (1 - 1e-6) - smin)
        detail = {"d_omega": res, "nondegeneracy_shortfall": max(0.0, nondeg)}
        status = PASS if (res <= tol and nondeg <= 0) else FAIL
        entries.append(Entry("kahler_form_closed", k, status, res, tol, labels=labels,
                             theta=theta_dict(pa), detail=detail))
    return entries
