"""Numeric kernel: golden-ratio constants, projection bases, convex predicates.

Everything downstream projects the 5-d integer lattice through the two
matrices built here: D (5x2) maps to the tiling plane, W (5x3) to the
orthogonal space that carries the acceptance windows.  All arithmetic is
double precision with a single absolute tolerance ``eps`` for boundary
decisions.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import PolygonError

#: golden ratio p = (sqrt(5)+1)/2, satisfying p**2 = p + 1
PHI = (np.sqrt(5.0) + 1.0) / 2.0

#: fivefold rotation angle 2*pi/5
THETA = 2.0 * np.pi / 5.0

#: default absolute tolerance for boundary / singularity decisions
DEFAULT_EPS = 1e-9


@dataclass(frozen=True)
class GoldenConstants:
    """Golden ratio and the powers of its inverse used by the frequency formulas."""

    p: float = PHI
    p_inv: float = 1.0 / PHI
    p_inv2: float = PHI ** -2
    p_inv3: float = PHI ** -3
    p_inv4: float = PHI ** -4
    theta: float = THETA


@dataclass(frozen=True)
class ProjectionBasis:
    """Row generators of the tiling plane and its 3-d orthogonal space.

    Row j of ``D`` is d_j = (cos j*theta, sin j*theta); row j of ``W`` is
    w_j = (cos 2j*theta, sin 2j*theta, 1) = (d_{2j}, 1).  The two column
    spaces are orthogonal: D^T W = 0.
    """

    D: np.ndarray  # (5, 2)
    W: np.ndarray  # (5, 3)

    @property
    def d(self) -> np.ndarray:
        """The five plane generators as rows."""
        return self.D

    @property
    def w(self) -> np.ndarray:
        """The five space generators as rows."""
        return self.W


def make_basis() -> ProjectionBasis:
    """Build the standard fivefold projection basis."""
    j = np.arange(5)
    D = np.column_stack([np.cos(j * THETA), np.sin(j * THETA)])
    W = np.column_stack([np.cos(2 * j * THETA), np.sin(2 * j * THETA), np.ones(5)])
    D.setflags(write=False)
    W.setflags(write=False)
    return ProjectionBasis(D=D, W=W)


def project_2d(k, basis: ProjectionBasis) -> np.ndarray:
    """Map a 5-d lattice point to the tiling plane: sum_j k_j d_j."""
    return np.asarray(k, dtype=float) @ basis.D


def project_3d(k, basis: ProjectionBasis) -> np.ndarray:
    """Map a 5-d lattice point to 3-space: sum_j k_j w_j.

    The z component equals the coordinate sum (the index) exactly, because
    every w_j has third component 1.
    """
    return np.asarray(k, dtype=float) @ basis.W


class Region(enum.Enum):
    INSIDE = "inside"
    OUTSIDE = "outside"
    BOUNDARY = "boundary"


def polygon_halfplanes(polygon: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Outward unit normals and offsets of a CCW convex polygon.

    A point x is strictly inside iff normals @ x < offsets componentwise.
    """
    poly = np.asarray(polygon, dtype=float)
    if poly.ndim != 2 or poly.shape[0] < 3 or poly.shape[1] != 2:
        raise PolygonError(f"need at least 3 plane vertices, got shape {poly.shape}")
    edges = np.roll(poly, -1, axis=0) - poly
    lengths = np.hypot(edges[:, 0], edges[:, 1])
    if np.any(lengths <= 0):
        raise PolygonError("degenerate polygon edge of zero length")
    # rotate each CCW edge by -90 degrees to point outward
    normals = np.column_stack([edges[:, 1], -edges[:, 0]]) / lengths[:, None]
    offsets = np.einsum("ij,ij->i", normals, poly)
    return normals, offsets


def point_in_convex_polygon(pt, polygon, eps: float = DEFAULT_EPS) -> Region:
    """Classify a point against a convex CCW polygon with tolerance eps.

    INSIDE means strictly interior by more than eps, BOUNDARY within eps of
    an edge, OUTSIDE otherwise.
    """
    normals, offsets = polygon_halfplanes(polygon)
    d_max = float(np.max(normals @ np.asarray(pt, dtype=float) - offsets))
    if d_max < -eps:
        return Region.INSIDE
    if d_max > eps:
        return Region.OUTSIDE
    return Region.BOUNDARY


def points_in_convex_polygon(pts: np.ndarray, normals: np.ndarray,
                             offsets: np.ndarray, eps: float) -> np.ndarray:
    """Vectorized classification: +1 inside, 0 outside, -1 boundary-within-eps."""
    d_max = np.max(pts @ normals.T - offsets, axis=1)
    status = np.zeros(len(pts), dtype=np.int8)
    status[d_max < -eps] = 1
    status[np.abs(d_max) <= eps] = -1
    return status


@dataclass(frozen=True)
class Tolerance:
    """Absolute tolerance wrapper so call sites can't pass a bare misplaced float."""

    eps: float = DEFAULT_EPS

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
