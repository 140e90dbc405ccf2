"""Decomposition of the structures along a submanifold and slant angles.

For a structure R and tangent/normal frames E, N at a point:

    phi = E^T R E     omega = N^T R E     b = E^T R N     c = N^T R N

The symmetric matrix S = phi^T phi = -phi^2 has eigenvalue 1 on the
R-invariant part D1 and cos^2(theta) on the slant part D2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, Optional

import numpy as np

from .ambient import STRUCTURES
from .geometry import ImmersionChart, PointGeometry, directional, point_geometry
from .report import FAIL, NON_CONFORMING, PASS, Entry, judge, skip

CLUSTER_TOL = 1e-6
RANK_TOL = 1e-8
# projector agreement used to decide that the three D1 distributions coincide
SHARED_D1_TOL = 1e-8

INVARIANT = "invariant"
SLANT = "slant"
SEMI_SLANT = "semi-slant"
SEMI_INVARIANT = "semi-invariant"


@dataclass(frozen=True)
class SlantAnalysis:
    which: str
    phi: np.ndarray
    omega: np.ndarray
    b: np.ndarray
    c: np.ndarray
    eigenvalues: Optional[np.ndarray] = None
    eigenvectors: Optional[np.ndarray] = None
    d1_projector: Optional[np.ndarray] = None
    d2_projector: Optional[np.ndarray] = None
    d1_basis: Optional[np.ndarray] = None
    d2_basis: Optional[np.ndarray] = None
    theta: Optional[float] = None
    spread: float = 0.0
    mu_dim: Optional[int] = None
    label: str = ""
    notes: tuple = ()

    @property
    def n(self):
        return self.phi.shape[0]

    @property
    def d1_dim(self):
        return 0 if self.d1_basis is None else self.d1_basis.shape[1]

    @property
    def d2_dim(self):
        return 0 if self.d2_basis is None else self.d2_basis.shape[1]

    @property
    def conforming(self):
        return self.label != NON_CONFORMING


def decompose(pg: PointGeometry, basis, which: str) -> SlantAnalysis:
    R = basis.matrix(which, pg.p)
    E, N = pg.tangent_frame, pg.normal_frame
    return SlantAnalysis(which, E.T @ R @ E, N.T @ R @ E, E.T @ R @ N, N.T @ R @ N)


def slant_angle(sa: SlantAnalysis, X) -> float:
    """Angle between R X and the tangent space for a unit frame vector X."""
    X = np.asarray(X, dtype=float)
    if abs(np.linalg.norm(X) - 1.0) > 1e-10:
        raise ValueError("slant_angle expects a unit vector")
    return math.acos(min(1.0, max(0.0, float(np.linalg.norm(sa.phi @ X)))))


def _clusters(values, tol):
    groups = [[0]]
    for k in range(1, len(values)):
        if values[k] - values[k - 1] > tol:
            groups.append([k])
        else:
            groups[-1].append(k)
    return groups


def split_distributions(sa: SlantAnalysis, cluster_tol: float = CLUSTER_TOL) -> SlantAnalysis:
    """Cluster the spectrum of -phi^2 into D1 (eigenvalue 1) and D2."""
    n = sa.n
    S = sa.phi.T @ sa.phi
    S = 0.5 * (S + S.T)
    w, V = np.linalg.eigh(S)
    notes = []
    groups = _clusters(w, cluster_tol) if n else []
    d1_idx = []
    if groups and w[groups[-1][-1]] >= 1.0 - cluster_tol:
        d1_idx = groups.pop()
    rest = [k for g in groups for k in g]
    V1 = V[:, d1_idx]
    V2 = V[:, rest]
    theta = None
    spread = 0.0
    if not rest:
        label = INVARIANT
        theta = 0.0 if n else None
        if n:
            notes.append("split ambiguous: every direction is R-invariant")
    elif len(groups) == 1:
        lam = float(np.mean(w[rest]))
        spread = float(w[rest[-1]] - w[rest[0]])
        theta = math.acos(math.sqrt(min(1.0, max(0.0, lam))))
        if lam < cluster_tol:
            theta = math.pi / 2
        if not d1_idx:
            label = SLANT
        elif theta == math.pi / 2:
            label = SEMI_INVARIANT
        else:
            label = SEMI_SLANT
        if len(rest) % 2 == 1 and theta < math.pi / 2:
            notes.append(f"odd-dimensional slant cluster ({len(rest)})")
    else:
        label = NON_CONFORMING
        spread = float(w[rest[-1]] - w[rest[0]])
        notes.append(f"{len(groups)} eigenvalue clusters below 1")
    omega_d2 = sa.omega @ V2
    if omega_d2.size:
        sv = np.linalg.svd(omega_d2, compute_uv=False)
        rank = int(np.sum(sv > RANK_TOL))
    else:
        rank = 0
    mu_dim = sa.omega.shape[0] - rank
    return replace(
        sa,
        eigenvalues=w,
        eigenvectors=V,
        d1_projector=V1 @ V1.T,
        d2_projector=V2 @ V2.T,
        d1_basis=V1,
        d2_basis=V2,
        theta=theta,
        spread=spread,
        mu_dim=mu_dim,
        label=label,
        notes=tuple(notes),
    )


def mu_basis(sa: SlantAnalysis) -> np.ndarray:
    """Orthonormal basis (normal-frame coordinates) of the complement of omega(D2)."""
    k = sa.omega.shape[0]
    if k == 0:
        return np.zeros((0, 0))
    W = sa.omega @ sa.d2_basis
    if W.size:
        U, s, _ = np.linalg.svd(W, full_matrices=True)
        r = int(np.sum(s > RANK_TOL))
        return U[:, r:]
    return np.eye(k)


@dataclass(frozen=True)
class PointAnalysis:
    """Geometry plus the three slant analyses at one parameter point."""

    pg: PointGeometry
    structures: Dict[str, SlantAnalysis]
    labels: tuple
    degenerate_rotation: bool = False

    @property
    def theta(self):
        return {R: self.structures[R].theta for R in STRUCTURES}

    def ambient_projector(self, which, part):
        sa = self.structures[which]
        P = sa.d1_projector if part == "d1" else sa.d2_projector
        E = self.pg.tangent_frame
        return E @ P @ E.T

    @property
    def almost_h_slant(self):
        return all(sa.label in (SLANT, INVARIANT) for sa in self.structures.values())

    @property
    def h_semi_slant(self):
        return "h-semi-slant" in self.labels

    @property
    def proper(self):
        return "proper" in self.labels


def chart_labels(pg, analyses, degenerate=False):
    labels = []
    sas = [analyses[R] for R in STRUCTURES]
    if any(not sa.conforming for sa in sas):
        labels.append("non-conforming")
    else:
        E = pg.tangent_frame
        projs = [E @ sa.d1_projector @ E.T for sa in sas]
        shared = all(np.abs(projs[0] - P).max() <= SHARED_D1_TOL for P in projs[1:])
        thetas = [sa.theta for sa in sas]
        equal = all(abs(t - thetas[0]) <= 1e-8 for t in thetas)
        if all(sa.label in (SLANT, INVARIANT) for sa in sas):
            labels.append("almost-h-slant")
            if equal:
                labels.append("h-slant")
        else:
            labels.append("almost-h-semi-slant")
        if shared:
            labels.append("h-semi-slant")
            if equal and sas[0].d1_dim > 0 and sas[0].d2_dim > 0:
                labels.append("strictly-h-semi-slant")
        if all(t < math.pi / 2 for t in thetas):
            labels.append("proper")
        if all(t == math.pi / 2 for t in thetas):
            labels.append("h-semi-invariant" if shared else "almost-h-semi-invariant")
    if any(sa.label == INVARIANT and sa.n > 0 for sa in sas):
        labels.append("split-ambiguous")
    for sa in sas:
        labels.append(f"{sa.which}:{sa.label}")
    if degenerate:
        labels.append("degenerate-rotation")
    return tuple(labels)


def analyze(chart: ImmersionChart, x, cluster_tol: float = CLUSTER_TOL, pg=None) -> PointAnalysis:
    pg = pg if pg is not None else point_geometry(chart, x)
    analyses = {R: split_distributions(decompose(pg, chart.basis, R), cluster_tol)
                for R in STRUCTURES}
    degenerate = chart.basis.is_degenerate_at(pg.p)
    return PointAnalysis(pg, analyses, chart_labels(pg, analyses, degenerate), degenerate)


def theta_dict(pa: PointAnalysis):
    return {R: pa.structures[R].theta for R in STRUCTURES}


# ---------------------------------------------------------------------------
# Residual helpers
# ---------------------------------------------------------------------------


def tensor_identity_residuals(sa: SlantAnalysis) -> Dict[str, float]:
    """Residuals of the algebraic identities that follow from R^2 = -1."""
    n, k = sa.phi.shape[0], sa.omega.shape[0]
    res = {
        "phi2+b_omega": np.abs(sa.phi @ sa.phi + sa.b @ sa.omega + np.eye(n)).max() if n else 0.0,
        "c2+omega_b": np.abs(sa.c @ sa.c + sa.omega @ sa.b + np.eye(k)).max() if k else 0.0,
        "omega_phi+c_omega": np.abs(sa.omega @ sa.phi + sa.c @ sa.omega).max() if n * k else 0.0,
        "b_c+phi_b": np.abs(sa.b @ sa.c + sa.phi @ sa.b).max() if n * k else 0.0,
    }
    return {key: float(v) for key, v in res.items()}


def bilinear_residuals(sa: SlantAnalysis) -> Dict[str, float]:
    """<phi X, phi Y> - cos^2 <X, Y> and <omega X, omega Y> - sin^2 <X, Y> on D2."""
    V2 = sa.d2_basis
    if V2 is None or V2.shape[1] == 0 or sa.theta is None:
        return {"phi": 0.0, "omega": 0.0}
    m = V2.shape[1]
    c2 = math.cos(sa.theta) ** 2
    s2 = math.sin(sa.theta) ** 2
    P = sa.phi @ V2
    W = sa.omega @ V2
    return {
        "phi": float(np.abs(P.T @ P - c2 * np.eye(m)).max()),
        "omega": float(np.abs(W.T @ W - s2 * np.eye(m)).max()) if W.size else 0.0,
    }


def distribution_residuals(sa: SlantAnalysis) -> Dict[str, float]:
    """phi(D1) = D1, omega(D1) = 0, B(normal) in D2 and R-invariance of mu."""
    P1, P2 = sa.d1_projector, sa.d2_projector
    res = {
        "phi_d1_in_d1": float(np.abs(P2 @ sa.phi @ P1).max()) if sa.n else 0.0,
        "omega_d1": float(np.abs(sa.omega @ P1).max()) if sa.omega.size else 0.0,
        "b_in_d2": float(np.abs(P1 @ sa.b).max()) if sa.b.size else 0.0,
        "phi_d2_in_d2": float(np.abs(P1 @ sa.phi @ P2).max()) if sa.n else 0.0,
    }
    M = mu_basis(sa)
    if M.size:
        Pmu = M @ M.T
        CM = sa.c @ M
        res["mu_invariant"] = float(np.abs(CM - Pmu @ CM).max())
        res["mu_isometry"] = float(np.abs(CM.T @ CM - np.eye(M.shape[1])).max())
    else:
        res["mu_invariant"] = 0.0
        res["mu_isometry"] = 0.0
    return res


# ---------------------------------------------------------------------------
# Grid checks
# ---------------------------------------------------------------------------


def check_pointwise_constancy(chart, points, tol=CLUSTER_TOL, global_tol=1e-8, cluster_tol=CLUSTER_TOL):
    """Direction-independence of theta at each point, and constancy across points."""
    entries = []
    thetas = {R: [] for R in STRUCTURES}
    for k, x in enumerate(points):
        pa = analyze(chart, x, cluster_tol)
        labels = list(pa.labels)
        if any(not sa.conforming for sa in pa.structures.values()):
            spread = max(sa.spread for sa in pa.structures.values())
            entries.append(Entry("pointwise_constancy", k, NON_CONFORMING, spread, tol,
                                 labels=labels, theta=theta_dict(pa),
                                 reason="not pointwise slant at this point"))
            continue
        spread = max(sa.spread for sa in pa.structures.values())
        for R in STRUCTURES:
            thetas[R].append(pa.structures[R].theta)
        entries.append(judge("pointwise_constancy", k, spread, tol, labels=labels, theta=theta_dict(pa)))
    variation = {R: (max(v) - min(v)) if v else 0.0 for R, v in thetas.items()}
    worst = max(variation.values()) if variation else 0.0
    summary = Entry(
        "pointwise_constancy", None, PASS, worst, global_tol,
        labels=["globally-constant" if worst <= global_tol else "pointwise-varying"],
        detail={"theta_variation": variation},
    )
    entries.append(summary)
    return entries


def analyze_with_metric(chart, x, G, cluster_tol=CLUSTER_TOL):
    """Slant analyses computed with the ambient inner product ``G`` at p."""
    p, jac, _ = chart.evaluate(x, order=1)
    gram = jac.T @ G @ jac
    L = np.linalg.cholesky(gram)
    E = jac @ np.linalg.inv(L).T  # E^T G E = Id
    out = {}
    for R in STRUCTURES:
        Rm = chart.basis.matrix(R, p)
        phi = E.T @ G @ Rm @ E
        empty = np.zeros((0, phi.shape[0]))
        sa = SlantAnalysis(R, phi, empty, empty.T, np.zeros((0, 0)))
        out[R] = split_distributions(sa, cluster_tol)
    return out


def conformal_invariance_check(chart, points, scale: Callable, tol=1e-10, cluster_tol=CLUSTER_TOL):
    """Slant angles under the scaled metric e^{2f} g against the unscaled ones.

    ``scale`` maps an ambient point to f.
    """
    entries = []
    N = chart.dim_ambient
    for k, x in enumerate(points):
        base = analyze_with_metric(chart, x, np.eye(N), cluster_tol)
        p = chart.point(x)
        G = math.exp(2.0 * float(scale(p))) * np.eye(N)
        scaled = analyze_with_metric(chart, x, G, cluster_tol)
        pa = analyze(chart, x, cluster_tol)
        res = 0.0
        for R in STRUCTURES:
            t0, t1, t2 = base[R].theta, scaled[R].theta, pa.structures[R].theta
            if t0 is None or t1 is None:
                if (t0 is None) != (t1 is None):
                    res = math.inf
                continue
            res = max(res, abs(t1 - t0), abs(t1 - t2))
            if base[R].label != scaled[R].label:
                res = math.inf
        entries.append(judge("conformal_invariance", k, res, tol,
                             theta={R: scaled[R].theta for R in STRUCTURES}))
    return entries


def orthogonality_preservation_check(chart, points, rng, pairs=4, tol=1e-9, cluster_tol=CLUSTER_TOL):
    """<phi X, phi Y> = 0 for orthogonal X, Y taken inside D1 or inside D2."""
    entries = []
    for k, x in enumerate(points):
        pa = analyze(chart, x, cluster_tol)
        res = 0.0
        for R in STRUCTURES:
            sa = pa.structures[R]
            if not sa.conforming:
                continue
            for V in (sa.d1_basis, sa.d2_basis):
                if V.shape[1] < 2:
                    continue
                for _ in range(pairs):
                    a = rng.standard_normal(V.shape[1])
                    b = rng.standard_normal(V.shape[1])
                    b -= (a @ b) / (a @ a) * a
                    X, Y = V @ a, V @ b
                    X /= np.linalg.norm(X)
                    Y /= np.linalg.norm(Y)
                    res = max(res, abs((sa.phi @ X) @ (sa.phi @ Y)))
        entries.append(judge("orthogonality_preservation", k, res, tol, theta=theta_dict(pa)))
    return entries


def theta_field(chart, which, cluster_tol=CLUSTER_TOL):
    def f(x):
        sa = split_distributions(decompose(point_geometry(chart, x), chart.basis, which), cluster_tol)
        return math.cos(sa.theta) ** 2 if sa.theta is not None else math.nan
    return f


def constancy_vectors(pa: PointAnalysis, which):
    """A_{omega Y} phi Y - A_{omega phi Y} Y for each tangent frame vector Y."""
    pg = pa.pg
    E = pg.tangent_frame
    R = pa.structures[which]
    Nf = pg.normal_frame
    out = []
    for i in range(E.shape[1]):
        Y = E[:, i]
        phiY = E @ (R.phi[:, i])
        omegaY = Nf @ (R.omega[:, i])
        omegaphiY = Nf @ (R.omega @ R.phi[:, i])
        out.append(pg.shape(omegaY, phiY) - pg.shape(omegaphiY, Y))
    return np.array(out)


def constancy_criterion_check(chart, points, tol=1e-6, identity_tol=1e-5, cluster_tol=CLUSTER_TOL):
    """Shape-operator criterion for constant slant functions.

    At each point the vectors A_{wY} phiY - A_{w phiY} Y are compared with
    (1/2)|Y|^2 grad cos^2(theta) (gradient by central differences); the
    summary entry checks that "criterion vanishes on the grid" agrees with
    "theta is constant on the grid".
    """
    entries = []
    max_vec = {R: 0.0 for R in STRUCTURES}
    values = {R: [] for R in STRUCTURES}
    parallel = chart.basis.is_parallel
    for k, x in enumerate(points):
        pa = analyze(chart, x, cluster_tol)
        if not pa.almost_h_slant:
            entries.append(skip("constancy_criterion", k, "not pointwise almost h-slant here",
                                labels=list(pa.labels), theta=theta_dict(pa)))
            continue
        pg = pa.pg
        G = pg.metric
        worst = 0.0
        for R in STRUCTURES:
            vecs = constancy_vectors(pa, R)
            max_vec[R] = max(max_vec[R], float(np.abs(vecs).max()) if vecs.size else 0.0)
            values[R].append(math.cos(pa.structures[R].theta) ** 2)
            if not parallel:
                continue
            f = theta_field(chart, R, cluster_tol)
            grad = np.array([directional(f, x, np.eye(chart.n)[a]) for a in range(chart.n)])
            grad_amb = pg.jacobian @ np.linalg.solve(G, grad)
            worst = max(worst, float(np.abs(vecs - 0.5 * grad_amb[None, :]).max()))
        if parallel:
            entries.append(judge("constancy_criterion", k, worst, identity_tol,
                                 theta=theta_dict(pa), labels=list(pa.labels)))
        else:
            entries.append(skip("constancy_criterion", k, "basis not parallel; gradient identity not applicable",
                                theta=theta_dict(pa), labels=list(pa.labels)))
    detail = {}
    agree = True
    for R in STRUCTURES:
        variation = (max(values[R]) - min(values[R])) if values[R] else 0.0
        crit_zero = max_vec[R] <= tol
        const = variation <= tol
        detail[R] = {"criterion_max": max_vec[R], "cos2_variation": variation,
                     "criterion_zero": crit_zero, "theta_constant": const}
        agree = agree and (crit_zero == const)
    summary = Entry("constancy_criterion", None, PASS if agree else FAIL,
                    max(max_vec.values()), tol, detail=detail)
    entries.append(summary)
    return entries
