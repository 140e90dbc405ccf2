"""Warped products B x_f F: chart-level identities and a frame-level model.

A :class:`WarpedChart` is an immersion whose parameters split into base
coordinates b and fiber coordinates t, with induced metric g_B + f(b)^2 g_F.
:class:`FrameLevelInstance` models the adapted frame at a single point of a
warped h-semi-slant submanifold (base = invariant part, fiber = slant part,
no invariant normal directions) and expands |h|^2 explicitly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .ambient import STRUCTURES, rotated_basis, standard_basis
from .calculus import TangentField, ambient_derivative
from .geometry import directional
from .errors import WarpedStructureError
from .exprmap import Expression, eval_jet2, parse
from .geometry import ImmersionChart, point_geometry
from .report import FAIL, PASS, SKIPPED, Entry, judge, skip
from .slant import CLUSTER_TOL, analyze, theta_dict

BLOCK_TOL = 1e-8
FIBER_TOL = 1e-6
SUBSPACE_TOL = 1e-6
TRIVIAL_TOL = 1e-10


@dataclass(frozen=True)
class WarpedChart:
    """Combined chart Phi(b, t) with its base and fiber charts and the warp f(b).

    The first ``n_base`` parameters of ``chart`` are the base coordinates; the
    base and fiber charts use the same parameter names.
    """

    chart: ImmersionChart
    base_chart: ImmersionChart
    fiber_chart: ImmersionChart
    warp: Expression
    name: str = ""

    def __post_init__(self):
        nb, nf = self.base_chart.n, self.fiber_chart.n
        if nb + nf != self.chart.n:
            raise WarpedStructureError(f"base ({nb}) and fiber ({nf}) do not add up to {self.chart.n}")
        if tuple(self.chart.params[:nb]) != tuple(self.base_chart.params):
            raise WarpedStructureError("base parameters must lead the combined parameter list")
        if tuple(self.chart.params[nb:]) != tuple(self.fiber_chart.params):
            raise WarpedStructureError("fiber parameters must follow the base parameters")
        if self.warp.nparams != nb:
            raise WarpedStructureError("warp must be a function of the base parameters")

    @property
    def n_base(self):
        return self.base_chart.n

    @property
    def n_fiber(self):
        return self.fiber_chart.n

    @property
    def n1(self):
        """Quaternionic dimension of the base (meaningful when TB is invariant)."""
        return self.n_base // 4

    @property
    def n2(self):
        return self.n_fiber // 2

    def split(self, x):
        x = np.asarray(x, dtype=float)
        return x[: self.n_base], x[self.n_base:]

    def warp_jet(self, x):
        b, _ = self.split(x)
        return eval_jet2(self.warp, b)

    def ln_warp_gradient(self, x):
        """Coordinate gradient of ln f on M (zero in fiber directions)."""
        jet = self.warp_jet(x)
        g = np.zeros(self.chart.n)
        g[: self.n_base] = jet.gradient / jet.value
        return g

    def grid(self, resolution):
        return self.chart.grid(resolution)

    def block_defects(self, x):
        """(cross block, base block, fiber block) deviations of the induced metric."""
        b, t = self.split(x)
        G = self.chart.jacobian(x).T @ self.chart.jacobian(x)
        nb = self.n_base
        f = self.warp_jet(x).value
        if f <= 0:
            raise WarpedStructureError(f"warp is not positive ({f!r}) at x={np.asarray(x).tolist()}")
        Gb = self.base_chart.jacobian(b)
        Gf = self.fiber_chart.jacobian(t)
        cross = np.abs(G[:nb, nb:]).max() if nb and self.n_fiber else 0.0
        base = np.abs(G[:nb, :nb] - Gb.T @ Gb).max()
        fiber = np.abs(G[nb:, nb:] - f * f * (Gf.T @ Gf)).max()
        return float(cross), float(base), float(fiber)

    def verify(self, points):
        """Raise :class:`WarpedStructureError` at the first point breaking the warped form."""
        for x in points:
            cross, base, fiber = self.block_defects(x)
            if cross > BLOCK_TOL or base > FIBER_TOL or fiber > FIBER_TOL:
                raise WarpedStructureError(
                    f"metric is not of warped form at x={np.asarray(x).tolist()} "
                    f"(cross {cross:.2e}, base {base:.2e}, fiber {fiber:.2e})")
        return True

    def is_trivial(self, points):
        return all(np.linalg.norm(self.warp_jet(x).gradient) <= TRIVIAL_TOL for x in points)


def make_warped(params_b, params_t, components, base_components, fiber_components, warp, domain,
                basis, name=""):
    chart = ImmersionChart.from_strings(list(params_b) + list(params_t), components, domain, basis,
                                        name=name)
    nb = len(params_b)
    base = ImmersionChart.from_strings(params_b, base_components, domain[:nb], basis, name=f"{name}:B")
    fib = ImmersionChart.from_strings(params_t, fiber_components, domain[nb:], basis, name=f"{name}:F")
    return WarpedChart(chart, base, fib, parse(str(warp), params_b), name)


# ---------------------------------------------------------------------------
# Catalog warped charts and non-existence candidates
# ---------------------------------------------------------------------------


def warped_exp():
    return make_warped(["b1"], ["t1"],
                       ["exp(b1)*cos(t1)", "exp(b1)*sin(t1)", "b1", "0"],
                       ["exp(b1)", "0", "b1", "0"], ["cos(t1)", "sin(t1)", "0", "0"],
                       "exp(b1)", [(-0.5, 0.5), (0.0, 1.0)], standard_basis(1), "warped_exp")


def warped_revolution():
    return make_warped(["b1", "b2"], ["t1"],
                       ["b1*cos(t1)", "b1*sin(t1)", "b2", "b1*b2/2"],
                       ["b1", "0", "b2", "b1*b2/2"], ["cos(t1)", "sin(t1)", "0", "0"],
                       "b1", [(0.5, 1.5), (-0.5, 0.5), (0.0, 1.0)], standard_basis(1),
                       "warped_revolution")


def warped_trivial():
    """Invariant 4-plane times a plane at equal angles to I, J, K, constant warp."""
    r = repr(1 / math.sqrt(3))
    tilt = ["t1", f"{r}*t2", f"{r}*t2", f"{r}*t2"]
    b = ["b1", "b2", "b3", "b4"]
    return make_warped(b, ["t1", "t2"], tilt + b, ["0"] * 4 + b, tilt + ["0"] * 4,
                       "1", [(0.2, 1.2)] * 6, standard_basis(2), "warped_trivial")


def _slant_base(alpha):
    c, s = repr(math.cos(alpha)), repr(math.sin(alpha))
    return ["b1", f"b2*{c}", f"b2*{s}", "0"]


def candidate_trivial(alpha=math.pi / 3):
    """Slant plane times an invariant 4-plane, constant warp."""
    base = _slant_base(alpha)
    t = ["t1", "t2", "t3", "t4"]
    return make_warped(["b1", "b2"], t, base + t, base + ["0"] * 4, ["0"] * 4 + t, "1",
                       [(0.0, 1.0)] * 6, standard_basis(2), "candidate_trivial")


def candidate_scaled(alpha=math.pi / 3):
    """Slant plane times an invariant 4-plane scaled by f(b) = 1 + b1^2."""
    base = _slant_base(alpha)
    t = ["t1", "t2", "t3", "t4"]
    f = "(1 + b1^2)"
    return make_warped(["b1", "b2"], t, base + [f"{f}*{v}" for v in t], base + ["0"] * 4,
                       ["0"] * 4 + t, f, [(0.2, 1.0), (0.0, 1.0)] + [(0.2, 1.0)] * 4,
                       standard_basis(2), "candidate_scaled")


def candidate_spherical(alpha=math.pi / 3):
    """Slant plane times a 3-sphere patch of radius f(b) = 1 + b1^2."""
    base = _slant_base(alpha)
    sphere = ["cos(t1)*cos(t2)", "cos(t1)*sin(t2)", "sin(t1)*cos(t3)", "sin(t1)*sin(t3)"]
    f = "(1 + b1^2)"
    # the base is the slice t = 0 so that df^2 is part of its metric
    return make_warped(["b1", "b2"], ["t1", "t2", "t3"], base + [f"{f}*{v}" for v in sphere],
                       base + [f, "0", "0", "0"], ["0"] * 4 + sphere, f,
                       [(0.2, 1.0), (0.0, 1.0), (0.3, 1.2), (0.0, 1.0), (0.0, 1.0)],
                       standard_basis(2), "candidate_spherical")


# ---------------------------------------------------------------------------
# Warp identities
# ---------------------------------------------------------------------------


def _christoffel_action(pg, a, b):
    """Coordinates of nabla_{d_a} d_b."""
    return pg.coords(pg.tangent_projector @ pg.hessians[:, a, b])


def warp_hessian(wc: WarpedChart, x, pg=None):
    """Hess f in base coordinates via the induced connection."""
    pg = pg if pg is not None else point_geometry(wc.chart, x)
    jet = wc.warp_jet(x)
    nb = wc.n_base
    grad = np.zeros(wc.chart.n)
    grad[:nb] = jet.gradient
    H = np.array(jet.hessian, dtype=float)
    for a in range(nb):
        for c in range(nb):
            H[a, c] -= _christoffel_action(pg, a, c) @ grad
    return H


def gauss_sectional(pg, X, Y):
    """Sectional curvature of span(X, Y) from the Gauss equation in flat space."""
    num = pg.h(X, X) @ pg.h(Y, Y) - pg.h(X, Y) @ pg.h(X, Y)
    den = (X @ X) * (Y @ Y) - (X @ Y) ** 2
    return float(num / den)


def _base_frame_fields(wc):
    """Orthonormal base frame fields (Gram-Schmidt of base coordinate fields)."""
    nb = wc.n_base

    def frame_coeffs(x):
        G = wc.chart.jacobian(x).T @ wc.chart.jacobian(x)
        Gb = G[:nb, :nb]
        L = np.linalg.cholesky(Gb)
        C = np.linalg.inv(L).T
        out = np.zeros((wc.chart.n, nb))
        out[:nb] = C
        return out

    return [TangentField(lambda x, i=i: frame_coeffs(x)[:, i]) for i in range(nb)]


def laplacian(wc, x, pg=None):
    """Delta f = -trace_B Hess f (coordinate route)."""
    pg = pg if pg is not None else point_geometry(wc.chart, x)
    nb = wc.n_base
    Gb = pg.metric[:nb, :nb]
    return -float(np.trace(np.linalg.solve(Gb, warp_hessian(wc, x, pg))))


def laplacian_by_frame(wc, x, pg=None):
    """Delta f = sum_i ((nabla_{e_i} e_i) f - e_i^2 f) with difference quotients."""
    pg = pg if pg is not None else point_geometry(wc.chart, x)
    nb = wc.n_base

    def df(y):
        g = np.zeros(wc.chart.n)
        g[:nb] = wc.warp_jet(y).gradient
        return g

    total = 0.0
    for e in _base_frame_fields(wc):
        nab = pg.coords(pg.tangent_projector @ ambient_derivative(wc.chart, e, e, x, pg))
        ef = lambda y, e=e: float(df(y) @ e(y))
        total += float(df(x) @ nab) - float(directional(ef, x, e(x)))
    return total


def warp_identities_check(wc: WarpedChart, points, tol=1e-4, curvature_tol=1e-3):
    wc.verify(points)
    entries = []
    nb, n = wc.n_base, wc.chart.n
    for k, x in enumerate(points):
        pg = point_geometry(wc.chart, x)
        f = wc.warp_jet(x).value
        dln = wc.ln_warp_gradient(x)
        conn = 0.0
        curv = 0.0
        for a in range(nb):
            Xa = pg.jacobian[:, a]
            Ha = warp_hessian(wc, x, pg)[a, a]
            for c in range(nb, n):
                Vc = pg.jacobian[:, c]
                nab = pg.tangent_projector @ pg.hessians[:, a, c]
                r = np.linalg.norm(nab - dln[a] * Vc) / (np.linalg.norm(Xa) * np.linalg.norm(Vc))
                conn = max(conn, float(r))
                K = gauss_sectional(pg, Xa, Vc)
                curv = max(curv, abs(K + Ha / (f * (Xa @ Xa))))
        lap = laplacian(wc, x, pg)
        lap_frame = laplacian_by_frame(wc, x, pg)
        # sum over an orthonormal base frame of K(e_i ^ V) for each fiber direction V
        E = pg.jacobian[:, :nb] @ np.linalg.inv(np.linalg.cholesky(pg.metric[:nb, :nb])).T
        ksum = 0.0
        for c in range(nb, n):
            s = sum(gauss_sectional(pg, E[:, i], pg.jacobian[:, c]) for i in range(nb))
            ksum = max(ksum, abs(s - lap / f))
        detail = {"connection": conn, "sectional": curv, "laplacian": abs(lap - lap_frame),
                  "curvature_sum": ksum}
        ok = conn <= tol and max(curv, detail["laplacian"], ksum) <= curvature_tol
        entries.append(Entry("warp_identities", k, PASS if ok else FAIL, conn, tol, detail=detail))
    return entries


# ---------------------------------------------------------------------------
# Section-6 hypotheses and lemmas
# ---------------------------------------------------------------------------


def _subspace_gap(P, Q):
    return float(np.abs(P - Q).max())


def warped_hypotheses(wc, x, cluster_tol=CLUSTER_TOL):
    """Analysis at x plus the reason the lemma hypotheses fail ('' if they hold)."""
    pa = analyze(wc.chart, x, cluster_tol)
    if not pa.h_semi_slant:
        return pa, "not pointwise h-semi-slant with a shared invariant part"
    if not pa.proper:
        return pa, "not proper"
    nb = wc.n_base
    jac = pa.pg.jacobian
    Qb, _ = np.linalg.qr(jac[:, :nb])
    Qf, _ = np.linalg.qr(jac[:, nb:])
    if _subspace_gap(Qb @ Qb.T, pa.ambient_projector("I", "d1")) > SUBSPACE_TOL:
        return pa, "TB is not the invariant distribution"
    if _subspace_gap(Qf @ Qf.T, pa.ambient_projector("I", "d2")) > SUBSPACE_TOL:
        return pa, "TF is not the slant distribution"
    return pa, ""


def _dln(wc, pg, x):
    """Ambient gradient of ln f on M: d ln f(v) = grad . v for tangent v."""
    g = wc.ln_warp_gradient(x)
    return pg.jacobian @ np.linalg.solve(pg.metric, g)


def warped_lemma_residuals(wc, x, which, pa=None):
    """The five symmetry / shape-operator identities at x for structure ``which``."""
    pa = pa if pa is not None else analyze(wc.chart, x)
    pg = pa.pg
    nb = wc.n_base
    R = wc.chart.basis.matrix(which, pg.p)
    Pt, Pn = pg.tangent_projector, pg.normal_projector
    theta = pa.structures[which].theta
    c2 = math.cos(theta) ** 2
    grad = _dln(wc, pg, x)
    Xs, _ = np.linalg.qr(pg.jacobian[:, :nb])
    Vs, _ = np.linalg.qr(pg.jacobian[:, nb:])
    phi = lambda v: Pt @ R @ v
    om = lambda v: Pn @ R @ v
    res = {"6.1": 0.0, "6.2": 0.0, "6.3": 0.0, "6.4": 0.0, "6.5": 0.0}
    for X in Xs.T:
        RX = R @ X
        dX, dRX = grad @ X, grad @ RX
        for V in Vs.T:
            for W in Vs.T:
                a = pg.shape(om(V), W) @ X - pg.shape(om(W), V) @ X
                res["6.1"] = max(res["6.1"], abs(a))
                lhs = pg.shape(om(phi(W)), V) @ X
                rhs = -dRX * (phi(W) @ V) - dX * c2 * (V @ W)
                res["6.2"] = max(res["6.2"], abs(lhs - rhs))
                lhs = pg.shape(om(W), V) @ RX
                rhs = dX * (W @ V) + dRX * (V @ phi(W))
                res["6.3"] = max(res["6.3"], abs(lhs - rhs))
                lhs = pg.h(X, V) @ om(W)
                rhs = -dRX * (V @ W) + dX * (V @ phi(W))
                res["6.5"] = max(res["6.5"], abs(lhs - rhs))
        for Y in Xs.T:
            for V in Vs.T:
                res["6.4"] = max(res["6.4"], abs(pg.h(X, Y) @ om(V)))
    return res


def warped_lemmas_check(wc, points, tol=1e-4, cluster_tol=CLUSTER_TOL):
    wc.verify(points)
    entries = []
    for k, x in enumerate(points):
        pa, reason = warped_hypotheses(wc, x, cluster_tol)
        if reason:
            entries.append(skip("warped_lemmas", k, f"hypotheses not met: {reason}",
                                labels=list(pa.labels), theta=theta_dict(pa)))
            continue
        detail = {R: warped_lemma_residuals(wc, x, R, pa) for R in STRUCTURES}
        worst = max(v for d in detail.values() for v in d.values())
        labels = list(pa.labels)
        if wc.is_trivial([x]):
            labels.append("trivial-warp")
        entries.append(judge("warped_lemmas", k, worst, tol, labels=labels, theta=theta_dict(pa),
                             detail=detail))
    return entries


def inequality_check(wc, points, tol=1e-6, minimal_tol=1e-5, cluster_tol=CLUSTER_TOL):
    wc.verify(points)
    entries = []
    trivial = wc.is_trivial(points)
    for k, x in enumerate(points):
        pa, reason = warped_hypotheses(wc, x, cluster_tol)
        if not reason and trivial:
            reason = "trivial warp (a non-trivial warping function is required)"
        if not reason and any(pa.structures[R].theta == 0.0 for R in STRUCTURES):
            reason = "a slant function vanishes"
        if not reason and any(pa.structures[R].mu_dim for R in STRUCTURES):
            reason = "invariant normal part is non-zero"
        if reason:
            entries.append(skip("warped_inequality", k, reason, labels=list(pa.labels),
                                theta=theta_dict(pa)))
            continue
        pg = pa.pg
        grad = _dln(wc, pg, x)
        lhs = float(np.sum(pg.h_tensor ** 2))
        detail = {}
        worst = -math.inf
        for R in STRUCTURES:
            th = pa.structures[R].theta
            rhs = 4 * wc.n2 * (1 / math.sin(th) ** 2 + 1 / math.tan(th) ** 2) * float(grad @ grad)
            detail[R] = {"lhs": lhs, "rhs": rhs, "gap": lhs - rhs}
            worst = max(worst, rhs - lhs)
        labels = list(pa.labels)
        status = PASS if worst <= tol else FAIL
        if all(abs(d["gap"]) < tol for d in detail.values()):
            nb = wc.n_base
            Vs, _ = np.linalg.qr(pg.jacobian[:, nb:])
            fib = max(np.linalg.norm(pg.h(V, W)) for V in Vs.T for W in Vs.T)
            detail["fiber_h"] = float(fib)
            detail["mean_curvature"] = float(np.linalg.norm(pg.mean_curvature))
            if fib > tol:
                status = FAIL
            if detail["mean_curvature"] < minimal_tol:
                labels.append("minimal")
        entries.append(Entry("warped_inequality", k, status, max(worst, 0.0), tol, labels=labels,
                             theta=theta_dict(pa), detail=detail))
    return entries


# ---------------------------------------------------------------------------
# Frame-level model
# ---------------------------------------------------------------------------

# partner structure S with R S = T used to tilt the fiber planes
_PARTNER = {"I": ("J", "K"), "J": ("K", "I"), "K": ("I", "J")}


@dataclass(frozen=True)
class FrameLevelInstance:
    """Adapted frame data at one point of a warped h-semi-slant submanifold.

    ``grad_lnf`` lists the components of grad(ln f) in the base frame
    (e_1..e_n1, I e_1..I e_n1, J e_1.., K e_1..); ``fiber_h_coeffs[i][j][k]``
    is <h(f_i, f_j), w_k>.
    """

    theta: float
    n1: int
    n2: int
    grad_lnf: np.ndarray
    fiber_h_coeffs: np.ndarray
    which: str = "I"

    def __post_init__(self):
        if not 0.0 < self.theta < math.pi / 2:
            raise ValueError("theta must lie strictly inside (0, pi/2)")
        if self.n1 < 1 or self.n2 < 1:
            raise ValueError("n1 and n2 must be positive")
        g = np.asarray(self.grad_lnf, dtype=float)
        c = np.asarray(self.fiber_h_coeffs, dtype=float)
        if g.shape != (4 * self.n1,):
            raise ValueError(f"grad_lnf must have length {4 * self.n1}")
        if c.shape != (2 * self.n2,) * 3:
            raise ValueError(f"fiber_h_coeffs must have shape {(2 * self.n2,) * 3}")
        if np.abs(c - c.transpose(1, 0, 2)).max() > 0:
            raise ValueError("fiber_h_coeffs must be symmetric in the first two indices")
        if self.which not in STRUCTURES:
            raise ValueError(f"unknown structure {self.which!r}")
        object.__setattr__(self, "grad_lnf", g)
        object.__setattr__(self, "fiber_h_coeffs", c)


def random_instance(rng, n1_max=2, n2_max=3, zero_coeffs=False):
    n1 = int(rng.integers(1, n1_max + 1))
    n2 = int(rng.integers(1, n2_max + 1))
    theta = float(rng.uniform(0.1, 1.4))
    grad = rng.standard_normal(4 * n1)
    c = np.zeros((2 * n2,) * 3) if zero_coeffs else rng.standard_normal((2 * n2,) * 3)
    c = 0.5 * (c + c.transpose(1, 0, 2))
    which = STRUCTURES[int(rng.integers(0, 3))]
    return FrameLevelInstance(theta, n1, n2, grad, c, which)


@dataclass
class AdaptedFrame:
    R: np.ndarray
    base: np.ndarray
    fiber: np.ndarray
    normal: np.ndarray
    tangent_projector: np.ndarray = field(repr=False, default=None)
    normal_projector: np.ndarray = field(repr=False, default=None)


def adapted_frame(inst: FrameLevelInstance) -> AdaptedFrame:
    """Explicit vectors in R^{4(n1+n2)} realising the adapted frame."""
    m = inst.n1 + inst.n2
    basis = standard_basis(m)
    mats = dict(zip(STRUCTURES, basis.at()))
    R = mats[inst.which]
    S = mats[_PARTNER[inst.which][0]]
    N = 4 * m
    unit = np.eye(N)
    firsts = [unit[:, 4 * i] for i in range(inst.n1)]
    base = np.column_stack(firsts + [mats[Q] @ e for Q in STRUCTURES for e in firsts])
    c, s = math.cos(inst.theta), math.sin(inst.theta)
    u = [unit[:, 4 * (inst.n1 + j)] for j in range(inst.n2)]
    fiber = np.column_stack(u + [c * (R @ v) + s * (S @ v) for v in u])
    T = np.column_stack([base, fiber])
    Pt = T @ T.T
    Pn = np.eye(N) - Pt
    normal = np.column_stack([(Pn @ R @ fiber[:, k]) / s for k in range(fiber.shape[1])])
    return AdaptedFrame(R, base, fiber, normal, Pt, Pn)


def frame_level_h(inst: FrameLevelInstance, fr: Optional[AdaptedFrame] = None):
    """h on the adapted tangent frame (base vectors first) as an (n, n, N) array."""
    fr = fr if fr is not None else adapted_frame(inst)
    R, Pt = fr.R, fr.tangent_projector
    nb, nf = fr.base.shape[1], fr.fiber.shape[1]
    N = fr.base.shape[0]
    grad = fr.base @ inst.grad_lnf
    csc = 1.0 / math.sin(inst.theta)
    H = np.zeros((nb + nf, nb + nf, N))
    for i in range(nb):
        e = fr.base[:, i]
        de, dRe = grad @ e, grad @ (R @ e)
        for j in range(nf):
            fj = fr.fiber[:, j]
            v = np.zeros(N)
            for k in range(nf):
                fk = fr.fiber[:, k]
                coeff = csc * (-dRe * (fj @ fk) + de * (fj @ (Pt @ R @ fk)))
                v += coeff * fr.normal[:, k]
            H[i, nb + j] = v
            H[nb + j, i] = v
    for i in range(nf):
        for j in range(nf):
            H[nb + i, nb + j] = fr.normal @ inst.fiber_h_coeffs[i, j]
    return H


def frame_level_expansion(inst: FrameLevelInstance):
    """(|h|^2, 4 n2 (csc^2 + cot^2) |grad ln f|^2, gap) from the explicit frame."""
    H = frame_level_h(inst)
    lhs = float(np.sum(H ** 2))
    th = inst.theta
    rhs = 4 * inst.n2 * (1 / math.sin(th) ** 2 + 1 / math.tan(th) ** 2) * float(inst.grad_lnf @ inst.grad_lnf)
    return lhs, rhs, lhs - rhs


def adapted_frame_defect(inst: FrameLevelInstance):
    """Deviation of (base, fiber, normal) from an orthonormal basis."""
    fr = adapted_frame(inst)
    A = np.column_stack([fr.base, fr.fiber, fr.normal])
    return float(np.abs(A.T @ A - np.eye(A.shape[1])).max())


def quaternionic_frame(n1):
    """Frame (e_i, I e_i, J e_i, K e_i) of R^{4 n1} and the three structures."""
    basis = standard_basis(n1)
    mats = dict(zip(STRUCTURES, basis.at()))
    unit = np.eye(4 * n1)
    firsts = [unit[:, 4 * i] for i in range(n1)]
    E = np.column_stack(firsts + [mats[Q] @ e for Q in STRUCTURES for e in firsts])
    return E, mats


def orthogonality_sums(v, n1, which):
    """(sum <R e_i, v><e_i, v>, sum <R e_i, v>^2 - |v|^2, sum <e_i, v>^2 - |v|^2)."""
    E, mats = quaternionic_frame(n1)
    R = mats[which]
    v = np.asarray(v, dtype=float)
    a = (R @ E).T @ v
    b = E.T @ v
    return float(a @ b), float(a @ a - v @ v), float(b @ b - v @ v)


def frame_level_check(rng, count=1000, tol=1e-10):
    """Random instances: gap >= 0 and gap equal to the fiber sum of squares."""
    entries = []
    worst = 0.0
    negative = 0
    for _ in range(count):
        inst = random_instance(rng)
        lhs, rhs, gap = frame_level_expansion(inst)
        worst = max(worst, abs(gap - float(np.sum(inst.fiber_h_coeffs ** 2))))
        negative += gap < -tol
    ok = worst <= tol and negative == 0
    entries.append(Entry("frame_level_oracle", None, PASS if ok else FAIL, worst, tol,
                         detail={"instances": count, "negative_gaps": negative}))
    worked = FrameLevelInstance(math.pi / 4, 1, 1, np.array([1.0, 0, 0, 0]), np.zeros((2, 2, 2)))
    lhs, _, _ = frame_level_expansion(worked)
    entries.append(judge("frame_level_oracle", 0, abs(lhs - 12.0), 1e-12, detail={"lhs": lhs}))
    return entries


def orthogonality_check(rng, count=1000, tol=1e-12):
    entries = []
    for idx, n1 in enumerate((1, 2)):
        worst = 0.0
        for _ in range(count):
            v = rng.standard_normal(4 * n1)
            for R in STRUCTURES:
                worst = max(worst, *(abs(t) for t in orthogonality_sums(v, n1, R)))
        entries.append(judge("orthogonality_sums", idx, worst, tol, detail={"n1": n1}))
    return entries


# ---------------------------------------------------------------------------
# Non-existence probe
# ---------------------------------------------------------------------------


def candidate_flags(wc: WarpedChart, points, cluster_tol=CLUSTER_TOL):
    """Hypothesis violations of a candidate with slant base and invariant fiber."""
    flags = []
    if wc.is_trivial(points):
        flags.append("trivial warp")
    try:
        wc.verify(points)
    except WarpedStructureError as exc:
        flags.append(f"metric not warped: {exc}")
    nb = wc.n_base
    for x in points:
        pa = analyze(wc.chart, x, cluster_tol)
        if not pa.h_semi_slant:
            flags.append("no shared invariant distribution")
            break
        jac = pa.pg.jacobian
        Qb, _ = np.linalg.qr(jac[:, :nb])
        Qf, _ = np.linalg.qr(jac[:, nb:])
        if _subspace_gap(Qf @ Qf.T, pa.ambient_projector("I", "d1")) > SUBSPACE_TOL:
            flags.append("TF is not the invariant distribution")
            break
        if _subspace_gap(Qb @ Qb.T, pa.ambient_projector("I", "d2")) > SUBSPACE_TOL:
            flags.append("TB is not the slant distribution")
            break
    return flags


def nonexistence_probe(candidates, resolution=2):
    """Every candidate must violate at least one hypothesis; none is a counterexample."""
    if not candidates:
        return [skip("nonexistence_probe", None, "no candidates")]
    entries = []
    for k, wc in enumerate(candidates):
        pts = wc.grid(resolution)
        flags = candidate_flags(wc, pts)
        status = PASS if flags else FAIL
        reason = "" if flags else "candidate satisfies every hypothesis checked"
        entries.append(Entry("nonexistence_probe", k, status, labels=[wc.name], reason=reason,
                             detail={"flags": flags}))
    return entries
