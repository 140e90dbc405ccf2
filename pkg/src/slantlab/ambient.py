"""Hyperkähler structures on flat R^{4m}.

Coordinates are written y1..y4m in documentation (1-based) and stored
0-based: ambient index ``k`` holds ``y_{k+1}``. Within each 4-block the
standard structures act as left multiplication by the quaternion units
i, j, k on ``y_{4b+1} + y_{4b+2} i + y_{4b+3} j + y_{4b+4} k``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .errors import DimensionError, DomainError
from .exprmap import Expression, evaluate

STRUCTURES = ("I", "J", "K")

# Columns are images of the block basis vectors; entry [r, c] is the
# coefficient of y_{r+1} in R(d/dy_{c+1}).
_BLOCK = {
    "I": np.array(
        [[0, -1, 0, 0],
         [1, 0, 0, 0],
         [0, 0, 0, -1],
         [0, 0, 1, 0]], dtype=float),
    "J": np.array(
        [[0, 0, -1, 0],
         [0, 0, 0, 1],
         [1, 0, 0, 0],
         [0, -1, 0, 0]], dtype=float),
    "K": np.array(
        [[0, 0, 0, -1],
         [0, 0, -1, 0],
         [0, 1, 0, 0],
         [1, 0, 0, 0]], dtype=float),
}

ScalarField = Union[Expression, Callable[[np.ndarray], float]]

# sin f or cos f below this marks a degenerate rotated structure
DEGENERATE_EPS = 1e-9


@dataclass(frozen=True)
class QuaternionicBasis:
    """A triple (I, J, K) on R^{4m}, optionally rotated pointwise.

    With ``rotation`` set to a scalar field f, the structures at a point p are
    ``(cos f I - sin f J, sin f I + cos f J, K)`` with f evaluated at p.
    """

    dim_ambient: int
    I: np.ndarray
    J: np.ndarray
    K: np.ndarray
    rotation: Optional[ScalarField] = None

    @property
    def m(self):
        return self.dim_ambient // 4

    @property
    def is_parallel(self):
        """True when the structures are constant on R^{4m}."""
        if self.rotation is None:
            return True
        if isinstance(self.rotation, Expression):
            return self.rotation.is_constant()
        return False

    def angle_at(self, point):
        if self.rotation is None:
            return 0.0
        point = np.asarray(point, dtype=float)
        if isinstance(self.rotation, Expression):
            f = evaluate(self.rotation, point)
        else:
            f = float(self.rotation(point))
        if not (0.0 <= f <= math.pi / 2):
            raise DomainError(f"rotation angle {f!r} outside [0, pi/2] at {point.tolist()}")
        return f

    def is_degenerate_at(self, point):
        """Flag rotation angles at which sin f or cos f nearly vanish."""
        if self.rotation is None:
            return False
        f = self.angle_at(point)
        return min(abs(math.sin(f)), abs(math.cos(f))) < DEGENERATE_EPS

    def at(self, point=None):
        """Return the three matrices (I, J, K) at ``point``."""
        if self.rotation is None:
            return self.I, self.J, self.K
        if point is None:
            raise DimensionError("a point is required for a rotated basis")
        f = self.angle_at(point)
        c, s = math.cos(f), math.sin(f)
        return c * self.I - s * self.J, s * self.I + c * self.J, self.K

    def matrix(self, which, point=None):
        return self.at(point)[STRUCTURES.index(which)]


def standard_basis(m: int) -> QuaternionicBasis:
    """The block structures on R^{4m}, entries in {-1, 0, 1}."""
    if not isinstance(m, (int, np.integer)) or m < 1:
        raise DimensionError(f"m must be a positive integer, got {m!r}")
    mats = {name: np.kron(np.eye(m), block) for name, block in _BLOCK.items()}
    return QuaternionicBasis(4 * m, mats["I"], mats["J"], mats["K"])


def rotated_basis(base: QuaternionicBasis, f: ScalarField) -> QuaternionicBasis:
    """Rotate (I, J) by the pointwise angle ``f``; K is unchanged.

    ``f`` is an expression over y1..y4m or a callable of the ambient point.
    Values outside [0, pi/2] raise :class:`DomainError` when evaluated.
    """
    if base.rotation is not None:
        raise ValueError("base basis is already rotated")
    if isinstance(f, Expression) and f.nparams != base.dim_ambient:
        raise DimensionError(
            f"rotation field has {f.nparams} variables, ambient dimension is {base.dim_ambient}"
        )
    return QuaternionicBasis(base.dim_ambient, base.I, base.J, base.K, rotation=f)


def ambient_variables(dim):
    return [f"y{k + 1}" for k in range(dim)]


def apply(basis: QuaternionicBasis, which: str, point, v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (basis.dim_ambient,):
        raise DimensionError(f"vector of shape {v.shape}, expected ({basis.dim_ambient},)")
    if point is not None and np.shape(point) != (basis.dim_ambient,):
        raise DimensionError(f"point of shape {np.shape(point)}, expected ({basis.dim_ambient},)")
    return basis.matrix(which, point) @ v


def structure_residuals(I, J, K):
    """Largest entrywise violation of the quaternion and orthogonality relations."""
    eye = np.eye(I.shape[0])
    res = {}
    res["square"] = max(np.abs(R @ R + eye).max() for R in (I, J, K))
    res["product"] = max(
        np.abs(I @ J - K).max(), np.abs(J @ I + K).max(),
        np.abs(J @ K - I).max(), np.abs(K @ J + I).max(),
        np.abs(K @ I - J).max(), np.abs(I @ K + J).max(),
    )
    res["orthogonal"] = max(np.abs(R.T @ R - eye).max() for R in (I, J, K))
    return res
