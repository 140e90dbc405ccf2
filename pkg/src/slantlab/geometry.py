"""Pointwise extrinsic geometry of an immersion into R^{4m}."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .ambient import QuaternionicBasis
from .errors import ContractViolation, DimensionError, DomainError, ImmersionDegeneracyError
from .exprmap import Expression, eval_vector_map, parse

RANK_RATIO = 1e-8
COMPLETION_REJECT = 1e-8
FD_STEP = 1e-5


@dataclass(frozen=True)
class ImmersionChart:
    """A map from a parameter box into R^{4m} with a quaternionic basis."""

    params: tuple
    components: tuple
    domain: tuple
    basis: QuaternionicBasis
    name: str = ""

    def __post_init__(self):
        n, N = len(self.params), len(self.components)
        if N != self.basis.dim_ambient:
            raise DimensionError(f"{N} components for ambient dimension {self.basis.dim_ambient}")
        if n > N:
            raise DimensionError(f"{n} parameters exceed ambient dimension {N}")
        if len(self.domain) != n:
            raise DimensionError(f"domain has {len(self.domain)} intervals for {n} parameters")
        for lo, hi in self.domain:
            if not lo < hi:
                raise DomainError(f"empty interval [{lo}, {hi}] in domain")

    @classmethod
    def from_strings(cls, params, components, domain, basis, name=""):
        params = tuple(params)
        comps = tuple(parse(c, params) if isinstance(c, str) else c for c in components)
        dom = tuple((float(lo), float(hi)) for lo, hi in domain)
        return cls(params, comps, dom, basis, name)

    @property
    def n(self):
        return len(self.params)

    @property
    def dim_ambient(self):
        return self.basis.dim_ambient

    def evaluate(self, x, order=2):
        return eval_vector_map(self.components, x, order=order)

    def point(self, x):
        return self.evaluate(x, order=0)[0]

    def jacobian(self, x):
        return self.evaluate(x, order=1)[1]

    def contains(self, x):
        return all(lo <= xi <= hi for xi, (lo, hi) in zip(x, self.domain))

    def grid(self, resolution):
        """Cell-centred tensor grid with ``resolution`` points per axis.

        Points sit half a cell away from the boundary so that difference
        stencils stay inside the parameter box.
        """
        if resolution < 2:
            raise ValueError("grid resolution must be at least 2")
        axes = [lo + (np.arange(resolution) + 0.5) * (hi - lo) / resolution
                for lo, hi in self.domain]
        return [np.array(p) for p in itertools.product(*axes)]


def gram_schmidt(columns, tol=1e-12):
    """Modified Gram-Schmidt with one re-orthogonalisation pass.

    Returns ``(Q, R)`` with ``columns = Q @ R``, R upper triangular with a
    positive diagonal. Raises ``ValueError`` when a column is (numerically)
    dependent on its predecessors.
    """
    A = np.array(columns, dtype=float)
    N, n = A.shape
    Q = np.zeros((N, n))
    R = np.zeros((n, n))
    for j in range(n):
        v = A[:, j].copy()
        for _ in range(2):
            for i in range(j):
                c = Q[:, i] @ v
                R[i, j] += c
                v -= c * Q[:, i]
        norm = np.linalg.norm(v)
        if norm <= tol * max(1.0, np.linalg.norm(A[:, j])) or norm == 0.0:
            raise ValueError(f"column {j} is linearly dependent")
        R[j, j] = norm
        Q[:, j] = v / norm
    return Q, R


def complete_normal_frame(E, reject=COMPLETION_REJECT):
    """Orthonormal basis of the complement of span(E).

    Candidates are the standard basis vectors in index order; a candidate
    whose residual after projection is below ``reject`` is skipped.
    """
    N, n = E.shape
    basis = [E[:, i] for i in range(n)]
    normals = []
    for k in range(N):
        if len(normals) == N - n:
            break
        v = np.zeros(N)
        v[k] = 1.0
        for _ in range(2):
            for q in basis + normals:
                v -= (q @ v) * q
        norm = np.linalg.norm(v)
        if norm < reject:
            continue
        normals.append(v / norm)
    if len(normals) != N - n:
        raise ValueError("failed to complete the normal frame")
    if not normals:
        return np.zeros((N, 0))
    return np.column_stack(normals)


@dataclass(frozen=True)
class PointGeometry:
    """Snapshot of the extrinsic geometry at one parameter point.

    ``h_tensor[i, j]`` is the normal vector h(e_i, e_j) in the orthonormal
    tangent frame; ``h_coord[a, b]`` the same for coordinate fields.
    ``frame_from_coord`` is the upper-triangular R with jacobian = E R.
    """

    x: np.ndarray
    p: np.ndarray
    jacobian: np.ndarray
    tangent_frame: np.ndarray
    normal_frame: np.ndarray
    tangent_projector: np.ndarray
    normal_projector: np.ndarray
    frame_from_coord: np.ndarray
    hessians: Optional[np.ndarray] = None
    h_coord: Optional[np.ndarray] = None
    h_tensor: Optional[np.ndarray] = None
    mean_curvature: Optional[np.ndarray] = None

    @property
    def n(self):
        return self.tangent_frame.shape[1]

    @property
    def metric(self):
        return self.jacobian.T @ self.jacobian

    def coords(self, v):
        """Coordinate-field coefficients of a tangent ambient vector."""
        return np.linalg.lstsq(self.jacobian, v, rcond=None)[0]

    def h(self, X, Y):
        """h(X, Y) for ambient tangent vectors X, Y."""
        a = self.tangent_frame.T @ X
        b = self.tangent_frame.T @ Y
        return np.einsum("i,j,ijk->k", a, b, self.h_tensor)

    def shape(self, Z, X):
        """A_Z X as an ambient tangent vector."""
        A = shape_operator(self, Z)
        return self.tangent_frame @ (A @ (self.tangent_frame.T @ X))


def _frames(chart, x, p, jac, hess):
    s = np.linalg.svd(jac, compute_uv=False)
    ratio = s[-1] / s[0] if s[0] > 0 else 0.0
    if ratio < RANK_RATIO:
        raise ImmersionDegeneracyError(x, ratio)
    E, R = gram_schmidt(jac)
    Nf = complete_normal_frame(E)
    Pt = E @ E.T
    Pn = Nf @ Nf.T
    return dict(x=np.array(x, dtype=float), p=p, jacobian=jac, tangent_frame=E,
                normal_frame=Nf, tangent_projector=Pt, normal_projector=Pn,
                frame_from_coord=R, hessians=hess)


def frame_at(chart: ImmersionChart, x) -> PointGeometry:
    """Frames and projectors at ``x`` (no second-order data)."""
    p, jac, _ = chart.evaluate(x, order=1)
    return PointGeometry(**_frames(chart, x, p, jac, None))


def second_fundamental_form(chart: ImmersionChart, x) -> PointGeometry:
    """Frames plus second fundamental form and mean curvature at ``x``."""
    p, jac, hess = chart.evaluate(x, order=2)
    data = _frames(chart, x, p, jac, hess)
    Pn = data["normal_projector"]
    # hess has shape (N, n, n); h_coord[a, b] = Pn d_a d_b Phi
    h_coord = np.einsum("kl,lab->abk", Pn, hess)
    Rinv = np.linalg.inv(data["frame_from_coord"])
    h_frame = np.einsum("ai,bj,abk->ijk", Rinv, Rinv, h_coord)
    h_frame = 0.5 * (h_frame + h_frame.transpose(1, 0, 2))
    H = np.einsum("iik->k", h_frame) / h_frame.shape[0]
    return PointGeometry(**data, h_coord=h_coord, h_tensor=h_frame, mean_curvature=H)


point_geometry = second_fundamental_form


def shape_operator(pg: PointGeometry, Z, tol=1e-8) -> np.ndarray:
    """Matrix of A_Z in the tangent frame: (A_Z)_ij = <h(e_i, e_j), Z>."""
    Z = np.asarray(Z, dtype=float)
    tangential = np.linalg.norm(pg.tangent_projector @ Z)
    if tangential > tol * max(1.0, np.linalg.norm(Z)):
        raise ContractViolation(f"vector is not normal (tangential part {tangential:.3e})")
    A = pg.h_tensor @ Z
    return 0.5 * (A + A.T)


def sff_norm_squared(pg: PointGeometry) -> float:
    return float(np.sum(pg.h_tensor ** 2))


def directional(fn: Callable, x, u, step=FD_STEP):
    """Central difference of ``fn`` at ``x`` along parameter direction ``u``."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    return (np.asarray(fn(x + step * u)) - np.asarray(fn(x - step * u))) / (2.0 * step)


def normal_connection(chart: ImmersionChart, x, X, Z: Callable, step=FD_STEP, tol=1e-6):
    """D_X Z for a normal field ``Z`` given as a function of the parameters.

    ``X`` is the tangent direction as coordinate-field coefficients.
    """
    x = np.asarray(x, dtype=float)
    X = np.asarray(X, dtype=float)
    for y in (x, x + step * X, x - step * X):
        Pt = frame_at(chart, y).tangent_projector
        z = np.asarray(Z(y), dtype=float)
        if np.linalg.norm(Pt @ z) > tol * max(1.0, np.linalg.norm(z)):
            raise ContractViolation(f"field is not normal near x={x.tolist()}")
    dZ = directional(Z, x, X, step)
    return frame_at(chart, x).normal_projector @ dZ


def normal_field(chart: ImmersionChart, ambient_field: Callable):
    """Normal field obtained by projecting an ambient field onto TM^perp."""

    def Z(y):
        pg = frame_at(chart, y)
        return pg.normal_projector @ np.asarray(ambient_field(pg.p), dtype=float)

    return Z
