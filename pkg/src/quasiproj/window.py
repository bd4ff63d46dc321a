"""Acceptance geometry: the projected 5-cube, its windows, and acceptance tests.

The 32 vertices of the 5-d unit cube project to a 20-faced polytope (a
rhombic icosahedron) in the 3-d orthogonal space and to a regular decagon
in the tiling plane.  A 5-d integer point is a tiling vertex iff its
orthogonal projection falls strictly inside the slice window V_I of the
polytope at height I - c; it is a 3-d lattice point iff its plane
projection falls strictly inside the decagon.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull

from .errors import (ConsistencyError, DegenerateWindowError, EmptyWindowError,
                     SingularityError)
from .geometry import (DEFAULT_EPS, PHI, ProjectionBasis, make_basis,
                       points_in_convex_polygon, polygon_halfplanes)

# the 32 vertices of the 5-d unit cube, in the fixed order used throughout:
# one point of index 0, then five of index 1, ten of index 2, ten of index 3,
# five of index 4, and the all-ones point of index 5
CUBE_VERTICES = np.array([
    (0, 0, 0, 0, 0),
    (1, 0, 0, 0, 0), (0, 0, 0, 1, 0), (0, 1, 0, 0, 0), (0, 0, 0, 0, 1), (0, 0, 1, 0, 0),
    (1, 0, 0, 1, 0), (0, 1, 0, 1, 0), (0, 1, 0, 0, 1), (0, 0, 1, 0, 1), (1, 0, 1, 0, 0),
    (1, 1, 0, 0, 0), (0, 0, 0, 1, 1), (0, 1, 1, 0, 0), (1, 0, 0, 0, 1), (0, 0, 1, 1, 0),
    (1, 1, 0, 0, 1), (0, 0, 1, 1, 1), (1, 1, 1, 0, 0), (1, 0, 0, 1, 1), (0, 1, 1, 1, 0),
    (1, 1, 0, 1, 0), (0, 1, 0, 1, 1), (0, 1, 1, 0, 1), (1, 0, 1, 0, 1), (1, 0, 1, 1, 0),
    (1, 1, 0, 1, 1), (0, 1, 1, 1, 1), (1, 1, 1, 0, 1), (1, 0, 1, 1, 1), (1, 1, 1, 1, 0),
    (1, 1, 1, 1, 1),
], dtype=np.int64)
CUBE_VERTICES.setflags(write=False)

#: cube vertices whose 3-d projections are hull vertices of the polytope
HULL_INDICES = tuple(range(0, 11)) + tuple(range(21, 32))
#: cube vertices projecting strictly inside the polytope (and onto the
#: decagon hull in the plane)
INTERIOR_INDICES = tuple(range(11, 21))


@dataclass(frozen=True)
class GridShift:
    """The five real grid offsets gamma_j and their sum c, normalized to [0, 1)."""

    gamma: np.ndarray
    c: float

    def __post_init__(self):
        g = np.asarray(self.gamma, dtype=float)
        if g.shape != (5,):
            raise ValueError(f"gamma must have 5 components, got shape {g.shape}")
        g = g.copy()
        g.setflags(write=False)
        object.__setattr__(self, "gamma", g)
        if not (0.0 <= self.c < 1.0):
            raise ValueError(f"c must lie in [0, 1), got {self.c}")


def normalize_shift(gamma) -> GridShift:
    """Reduce the shift sum into [0, 1) by relabeling the first grid family.

    Subtracting an integer n from gamma_0 relabels k_0 -> k_0 + n and leaves
    the generated pattern unchanged, so only the fractional part of the sum
    matters.
    """
    g = np.array(gamma, dtype=float)
    if g.shape != (5,):
        raise ValueError(f"gamma must have 5 components, got shape {g.shape}")
    total = g.sum()
    g[0] -= np.floor(total)
    c = g.sum()
    # guard against float roundup at the top of the interval
    if c >= 1.0:
        g[0] -= 1.0
        c = g.sum()
    return GridShift(gamma=g, c=max(c, 0.0))


def random_shift(c: float, seed: int) -> GridShift:
    """Draw gamma_1..gamma_4 uniformly and fix gamma_0 so the sum is exactly c."""
    if not (0.0 <= c < 1.0):
        raise ValueError(f"c must lie in [0, 1), got {c}")
    rng = np.random.default_rng(seed)
    g = np.empty(5)
    g[1:] = rng.uniform(0.0, 1.0, 4)
    g[0] = c - g[1:].sum()
    return GridShift(gamma=g, c=c)


# ---------------------------------------------------------------------------
# polytope P (3-d window) and decagon Q (2-d window)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PolytopeP:
    """Hull data of the 3-d window: 22 vertices, 40 edges, 20 rhombic faces."""

    projections: np.ndarray        # (32, 3) images of all cube vertices
    hull_cube_indices: np.ndarray  # (22,) cube-vertex index of each hull vertex
    vertices: np.ndarray           # (22, 3)
    edges: np.ndarray              # (40, 2) indices into vertices
    face_normals: np.ndarray       # (20, 3) outward unit normals
    face_offsets: np.ndarray       # (20,)
    face_loops: tuple              # 20 vertex-index loops, CCW seen from outside
    interior_points: np.ndarray    # (10, 3) images of the interior cube vertices


def _merge_hull_faces(hull: ConvexHull, angle_tol: float, offset_tol: float):
    """Group Qhull simplices into maximal coplanar faces."""
    eqs = hull.equations  # rows (normal, -offset) with outward normal
    n = len(eqs)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if find(i) == find(j):
                continue
            cos = float(np.dot(eqs[i, :3], eqs[j, :3]))
            if cos > np.cos(angle_tol) and abs(eqs[i, 3] - eqs[j, 3]) < offset_tol:
                parent[find(j)] = find(i)

    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def _order_face_loop(points: np.ndarray, idx: list[int], normal: np.ndarray) -> tuple:
    """Order coplanar vertices CCW as seen from the outward normal side."""
    pts = points[idx]
    centroid = pts.mean(axis=0)
    # in-plane orthonormal frame
    a = np.zeros(3)
    a[np.argmin(np.abs(normal))] = 1.0
    u = np.cross(normal, a)
    u /= np.linalg.norm(u)
    v = np.cross(normal, u)
    rel = pts - centroid
    ang = np.arctan2(rel @ v, rel @ u)
    order = np.argsort(ang)
    loop = [idx[i] for i in order]
    # right-handed check: cross of first two edges must point along the normal
    e1 = points[loop[1]] - points[loop[0]]
    e2 = points[loop[2]] - points[loop[1]]
    if np.dot(np.cross(e1, e2), normal) < 0:
        loop.reverse()
    return tuple(loop)


def build_polytope_P(basis: ProjectionBasis | None = None,
                     eps: float = DEFAULT_EPS) -> PolytopeP:
    """Project the 5-cube into 3-space and extract the hull combinatorics.

    Raises ConsistencyError unless the hull has exactly 22 vertices, 40
    edges and 20 faces.
    """
    basis = basis or make_basis()
    proj = CUBE_VERTICES.astype(float) @ basis.W
    hull = ConvexHull(proj)

    hull_cube = np.sort(hull.vertices)
    if len(hull_cube) != 22:
        raise ConsistencyError(f"expected 22 hull vertices, got {len(hull_cube)}")

    vertices = proj[hull_cube]
    remap = {int(ci): vi for vi, ci in enumerate(hull_cube)}

    groups = _merge_hull_faces(hull, angle_tol=1e-6, offset_tol=max(eps, 1e-9))
    if len(groups) != 20:
        raise ConsistencyError(f"expected 20 faces after coplanar merge, got {len(groups)}")

    loops = []
    normals = np.empty((20, 3))
    offsets = np.empty(20)
    for fi, grp in enumerate(groups):
        normal = hull.equations[grp[0], :3]
        members = sorted({int(v) for s in grp for v in hull.simplices[s]})
        loop_cube = _order_face_loop(proj, members, normal)
        loops.append(tuple(remap[c] for c in loop_cube))
        normals[fi] = normal
        offsets[fi] = -hull.equations[grp[0], 3]

    edge_set = set()
    for loop in loops:
        for a, b in zip(loop, loop[1:] + loop[:1]):
            edge_set.add((min(a, b), max(a, b)))
    if len(edge_set) != 40:
        raise ConsistencyError(f"expected 40 edges, got {len(edge_set)}")
    if 22 - 40 + 20 != 2:  # Euler check, here for the reader
        raise ConsistencyError("Euler characteristic violated")

    # canonical face order: by (min z of loop, angle of centroid)
    def face_key(i):
        loop = loops[i]
        pts = vertices[list(loop)]
        cen = pts.mean(axis=0)
        return (round(pts[:, 2].min(), 9), round(float(np.arctan2(cen[1], cen[0])), 9))

    order = sorted(range(20), key=face_key)
    loops = tuple(loops[i] for i in order)
    normals = normals[order]
    offsets = offsets[order]

    edges = np.array(sorted(edge_set), dtype=np.int64)
    interior = proj[list(INTERIOR_INDICES)]
    for arr in (proj, vertices, edges, normals, offsets, interior):
        arr.setflags(write=False)
    return PolytopeP(projections=proj, hull_cube_indices=hull_cube,
                     vertices=vertices, edges=edges, face_normals=normals,
                     face_offsets=offsets, face_loops=loops,
                     interior_points=interior)


@dataclass(frozen=True)
class DecagonQ:
    """Plane window: regular decagon of circumradius p with 22 interior images."""

    projections: np.ndarray      # (32, 2) images of all cube vertices
    vertices: np.ndarray         # (10, 2) hull, CCW
    interior_points: np.ndarray  # (22, 2) the non-hull images
    inner_decagon: np.ndarray    # (10, 2) hull of the radius-1/p images, CCW
    triangles: np.ndarray        # (10, 3, 2) fan (origin, v_i, v_{i+1})

    def __post_init__(self):
        n, o = polygon_halfplanes(self.vertices)
        object.__setattr__(self, "_normals", n)
        object.__setattr__(self, "_offsets", o)
        ni, oi = polygon_halfplanes(self.inner_decagon)
        object.__setattr__(self, "_inner_normals", ni)
        object.__setattr__(self, "_inner_offsets", oi)


def _ccw_by_angle(points: np.ndarray) -> np.ndarray:
    ang = np.arctan2(points[:, 1], points[:, 0])
    return points[np.argsort(ang)]


def build_decagon_Q(basis: ProjectionBasis | None = None,
                    eps: float = DEFAULT_EPS) -> DecagonQ:
    """Project the 5-cube into the tiling plane.

    The ten interior cube vertices of the polytope map to the decagon hull;
    the 22 remaining images land at radii 0, 1 and 1/p.  The hull of the
    radius-1/p images is the inner decagon whose points are the tips of 3-d
    unit cells.
    """
    basis = basis or make_basis()
    proj = CUBE_VERTICES.astype(float) @ basis.D
    hull = ConvexHull(proj)
    hull_idx = set(int(v) for v in hull.vertices)
    if len(hull_idx) != 10:
        raise ConsistencyError(f"expected a 10-vertex hull, got {len(hull_idx)}")
    if hull_idx != set(INTERIOR_INDICES):
        raise ConsistencyError("decagon hull is not the interior cube-vertex set")

    vertices = _ccw_by_angle(proj[sorted(hull_idx)])
    interior = proj[[i for i in range(32) if i not in hull_idx]]

    radii = np.linalg.norm(interior, axis=1)
    inner_mask = np.abs(radii - 1.0 / PHI) < max(eps, 1e-9)
    if int(inner_mask.sum()) != 10:
        raise ConsistencyError(f"expected 10 radius-1/p points, got {int(inner_mask.sum())}")
    inner = _ccw_by_angle(interior[inner_mask])

    tri = np.zeros((10, 3, 2))
    tri[:, 1, :] = inner
    tri[:, 2, :] = np.roll(inner, -1, axis=0)

    for arr in (proj, vertices, interior, inner, tri):
        arr.setflags(write=False)
    return DecagonQ(projections=proj, vertices=vertices, interior_points=interior,
                    inner_decagon=inner, triangles=tri)


# ---------------------------------------------------------------------------
# slice windows V_I
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SliceWindow:
    """Cross-section of the polytope at height I - c: the window for index I."""

    index: int
    height: float
    polygon: np.ndarray  # (5 or 10, 2) CCW

    def __post_init__(self):
        n, o = polygon_halfplanes(self.polygon)
        object.__setattr__(self, "normals", n)
        object.__setattr__(self, "offsets", o)

    @property
    def area(self) -> float:
        p = self.polygon
        q = np.roll(p, -1, axis=0)
        return 0.5 * float(np.sum(p[:, 0] * q[:, 1] - q[:, 0] * p[:, 1]))


def slice_window(P: PolytopeP, index: int, c: float,
                 eps: float = DEFAULT_EPS) -> SliceWindow:
    """Clip the polytope faces against the plane z = index - c.

    Collects face/plane intersection segments, deduplicates endpoints within
    eps and orders them by angle.  The result is a pentagon near the tips
    and a decagon through the middle of the polytope.
    """
    if not 1 <= index <= 5:
        raise ValueError(f"index must be in [1, 5], got {index}")
    if not 0.0 <= c < 1.0:
        raise ValueError(f"c must lie in [0, 1), got {c}")
    h = index - c
    if h <= -eps or h >= 5.0 + eps:
        raise EmptyWindowError(f"slice height {h} outside the polytope span [0, 5]")
    if abs(h) <= eps or abs(h - 5.0) <= eps:
        raise DegenerateWindowError(
            f"slice at height {h} degenerates to a tip (index {index}, c = {c})")

    pts: list[np.ndarray] = []
    for loop in P.face_loops:
        zs = P.vertices[list(loop), 2]
        m = len(loop)
        for i in range(m):
            a, b = loop[i], loop[(i + 1) % m]
            za, zb = zs[i], zs[(i + 1) % m]
            if abs(za - h) <= eps:
                pts.append(P.vertices[a, :2])
            if (za - h) * (zb - h) < 0:
                t = (h - za) / (zb - za)
                pts.append((1 - t) * P.vertices[a, :2] + t * P.vertices[b, :2])
    if not pts:
        raise EmptyWindowError(f"no face crosses height {h}")

    arr = np.array(pts)
    # eps-dedup, then angular order around the centroid
    uniq: list[np.ndarray] = []
    for p in arr:
        if not any(np.max(np.abs(p - q)) <= max(eps, 1e-9) for q in uniq):
            uniq.append(p)
    poly = np.array(uniq)
    cen = poly.mean(axis=0)
    ang = np.arctan2(poly[:, 1] - cen[1], poly[:, 0] - cen[0])
    poly = poly[np.argsort(ang)]
    if len(poly) not in (5, 10):
        raise ConsistencyError(
            f"slice window at height {h} has {len(poly)} vertices, expected 5 or 10")
    poly.setflags(write=False)
    return SliceWindow(index=index, height=h, polygon=poly)


@dataclass(frozen=True)
class WindowSet:
    """The five index windows for one value of c (V_5 is absent when c = 0)."""

    c: float
    eps: float
    slices: dict
    degenerate_top: bool


def build_windows(P: PolytopeP, c: float, eps: float = DEFAULT_EPS) -> WindowSet:
    slices = {}
    degenerate_top = c < eps
    top = 4 if degenerate_top else 5
    for index in range(1, top + 1):
        slices[index] = slice_window(P, index, c, eps)
    return WindowSet(c=c, eps=eps, slices=slices, degenerate_top=degenerate_top)


# ---------------------------------------------------------------------------
# acceptance tests
# ---------------------------------------------------------------------------

class Acceptance(enum.Enum):
    ACCEPT = "accept"
    REJECT = "reject"
    SINGULAR = "singular"


@dataclass(frozen=True)
class AcceptResult:
    status: Acceptance
    vertex: np.ndarray | None = None
    index: int | None = None


def w_test_points(labels: np.ndarray, shift: GridShift,
                  basis: ProjectionBasis) -> np.ndarray:
    """Orthogonal-space xy test points sum_j (k_j - gamma_j) d_{2j} for 2-d acceptance."""
    return (np.asarray(labels, dtype=float) - shift.gamma) @ basis.W[:, :2]


def d_test_points(labels: np.ndarray, shift: GridShift,
                  basis: ProjectionBasis) -> np.ndarray:
    """Plane test points sum_j (k_j - gamma_j) d_j for 3-d acceptance."""
    return (np.asarray(labels, dtype=float) - shift.gamma) @ basis.D


def accept_2d_bulk(labels: np.ndarray, shift: GridShift, wset: WindowSet,
                   basis: ProjectionBasis) -> np.ndarray:
    """Vectorized 2-d acceptance: +1 accept, 0 reject, -1 singular."""
    labels = np.atleast_2d(np.asarray(labels, dtype=np.int64))
    idx = labels.sum(axis=1)
    pts = w_test_points(labels, shift, basis)
    status = np.zeros(len(labels), dtype=np.int8)
    for index in range(1, 6):
        m = idx == index
        if not np.any(m):
            continue
        if index == 5 and wset.degenerate_top:
            r = np.linalg.norm(pts[m], axis=1)
            sub = np.zeros(int(m.sum()), dtype=np.int8)
            sub[r <= wset.eps] = -1
            status[m] = sub
            continue
        win = wset.slices[index]
        status[m] = points_in_convex_polygon(pts[m], win.normals, win.offsets, wset.eps)
    return status


def accept_2d(k, shift: GridShift, wset: WindowSet,
              basis: ProjectionBasis | None = None) -> AcceptResult:
    """Mesh-condition test for one 5-d point; Accept carries the tiling vertex."""
    basis = basis or make_basis()
    k = np.asarray(k, dtype=np.int64)
    status = accept_2d_bulk(k[None, :], shift, wset, basis)[0]
    if status == -1:
        return AcceptResult(Acceptance.SINGULAR)
    if status == 0:
        return AcceptResult(Acceptance.REJECT)
    return AcceptResult(Acceptance.ACCEPT, vertex=k.astype(float) @ basis.D,
                        index=int(k.sum()))


def accept_3d_bulk(labels: np.ndarray, shift: GridShift, Q: DecagonQ,
                   basis: ProjectionBasis, eps: float = DEFAULT_EPS) -> np.ndarray:
    """Vectorized 3-d acceptance against the decagon window."""
    labels = np.atleast_2d(np.asarray(labels, dtype=np.int64))
    pts = d_test_points(labels, shift, basis)
    return points_in_convex_polygon(pts, Q._normals, Q._offsets, eps)


def accept_3d(k, shift: GridShift, Q: DecagonQ,
              basis: ProjectionBasis | None = None,
              eps: float = DEFAULT_EPS) -> AcceptResult:
    """Decagon-window test for one 5-d point; Accept carries the 3-d lattice point."""
    basis = basis or make_basis()
    k = np.asarray(k, dtype=np.int64)
    status = accept_3d_bulk(k[None, :], shift, Q, basis, eps)[0]
    if status == -1:
        return AcceptResult(Acceptance.SINGULAR)
    if status == 0:
        return AcceptResult(Acceptance.REJECT)
    return AcceptResult(Acceptance.ACCEPT, vertex=k.astype(float) @ basis.W,
                        index=int(k.sum()))


def point_in_inner_decagon(pt: np.ndarray, Q: DecagonQ,
                           eps: float = DEFAULT_EPS) -> int:
    """+1 strictly inside the inner decagon, 0 outside, -1 within eps of its edge."""
    return int(points_in_convex_polygon(np.atleast_2d(pt),
                                        Q._inner_normals, Q._inner_offsets, eps)[0])


# ---------------------------------------------------------------------------
# label-box enumeration
#
# For an accepted label, k_j - gamma_j - lambda_j is an exact projection of a
# plane (or space) point onto generator j, so consecutive residuals satisfy
# the linear three-term relations of the generators:
#   2-d:  r_{j+1} = r_j / p - r_{j-1}            (d_{j-1} + d_{j+1} = d_j / p)
#   3-d:  r_3 = r_0 + r_1/p - r_2/p,  r_4 = -r_0/p + r_1/p + r_2
# With lambda in [0, 1] this confines each successive coordinate to an
# interval of width < 4, so only two coordinates (three in 3-d) are free.
# Candidate supersets below use a one-step safety margin on each side.
# ---------------------------------------------------------------------------

_PINV = 1.0 / PHI


def _offsets_grid(base: np.ndarray, n: int) -> np.ndarray:
    """base (...,) -> candidates (..., n) = floor(base) - 1 + {0..n-1}."""
    return np.floor(base).astype(np.int64)[..., None] + np.arange(-1, n - 1, dtype=np.int64)


def enumerate_accepted_2d(radius: int, shift: GridShift, wset: WindowSet,
                          basis: ProjectionBasis | None = None,
                          threads: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """All accepted labels in the box [-radius, radius]^5, sorted lexicographically.

    Returns (labels (N,5) int64, tiling vertices (N,2)).  Raises
    SingularityError if any candidate test point lies within eps of a window
    boundary.
    """
    basis = basis or make_basis()
    g = shift.gamma
    M = int(radius)
    k1 = np.arange(-M, M + 1, dtype=np.int64)

    def process(k0: int) -> np.ndarray:
        K0 = np.full_like(k1, k0)
        lo2 = _PINV * (k1 - g[1] - 1.0) - (K0 - g[0]) + g[2]
        K2 = _offsets_grid(lo2, 6)                      # (n1, 6)
        K1b = np.broadcast_to(k1[:, None], K2.shape)
        K0b = np.broadcast_to(K0[:, None], K2.shape)
        lo3 = _PINV * (K2 - g[2] - 1.0) - (K1b - g[1]) + g[3]
        K3 = _offsets_grid(lo3, 6)                      # (n1, 6, 6)
        K2b = np.broadcast_to(K2[..., None], K3.shape)
        lo4 = _PINV * (K3 - g[3] - 1.0) - (K2b - g[2]) + g[4]
        K4 = _offsets_grid(lo4, 6)                      # (n1, 6, 6, 6)

        shape = K4.shape
        cand = np.empty(shape + (5,), dtype=np.int64)
        cand[..., 0] = k0
        cand[..., 1] = np.broadcast_to(k1[:, None, None, None], shape)
        cand[..., 2] = np.broadcast_to(K2[..., None, None], shape)
        cand[..., 3] = np.broadcast_to(K3[..., None], shape)
        cand[..., 4] = K4
        cand = cand.reshape(-1, 5)

        s = cand.sum(axis=1)
        keep = (np.abs(cand).max(axis=1) <= M) & (s >= 1) & (s <= 5)
        cand = cand[keep]
        if len(cand) == 0:
            return cand
        status = accept_2d_bulk(cand, shift, wset, basis)
        if np.any(status == -1):
            bad = cand[status == -1][0]
            raise SingularityError(
                f"label {tuple(int(x) for x in bad)} lands within eps of a window "
                f"boundary for gamma={tuple(shift.gamma)}; perturb the shift")
        return cand[status == 1]

    chunks = _run_chunks(process, range(-M, M + 1), threads)
    labels = np.vstack([c for c in chunks if len(c)]) if chunks else np.empty((0, 5), np.int64)
    labels = labels[np.lexsort(labels.T[::-1])]
    return labels, labels.astype(float) @ basis.D


def enumerate_accepted_3d(radius: int, shift: GridShift, Q: DecagonQ,
                          basis: ProjectionBasis | None = None,
                          eps: float = DEFAULT_EPS,
                          threads: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """All 3-d accepted labels in the box [-radius, radius]^5, sorted; with points."""
    basis = basis or make_basis()
    g = shift.gamma
    M = int(radius)
    k12 = np.arange(-M, M + 1, dtype=np.int64)
    K1, K2 = np.meshgrid(k12, k12, indexing="ij")

    def process(k0: int) -> np.ndarray:
        K0 = np.full_like(K1, k0)
        lo3 = (K0 - g[0] - 1.0) + _PINV * (K1 - g[1] - 1.0) - _PINV * (K2 - g[2]) + g[3]
        K3 = _offsets_grid(lo3, 7)                      # (n, n, 7)
        K2b = np.broadcast_to(K2[..., None], K3.shape)
        K1b = np.broadcast_to(K1[..., None], K3.shape)
        lo4 = -_PINV * (K0[..., None] - g[0]) + _PINV * (K1b - g[1] - 1.0) + (K2b - g[2] - 1.0) + g[4]
        K4 = _offsets_grid(lo4, 7)                      # (n, n, 7, 7)

        shape = K4.shape
        cand = np.empty(shape + (5,), dtype=np.int64)
        cand[..., 0] = k0
        cand[..., 1] = np.broadcast_to(K1[..., None, None], shape)
        cand[..., 2] = np.broadcast_to(K2[..., None, None], shape)
        cand[..., 3] = np.broadcast_to(K3[..., None], shape)
        cand[..., 4] = K4
        cand = cand.reshape(-1, 5)

        cand = cand[np.abs(cand).max(axis=1) <= M]
        if len(cand) == 0:
            return cand
        status = accept_3d_bulk(cand, shift, Q, basis, eps)
        if np.any(status == -1):
            bad = cand[status == -1][0]
            raise SingularityError(
                f"label {tuple(int(x) for x in bad)} lands within eps of the decagon "
                f"boundary for gamma={tuple(shift.gamma)}; perturb the shift")
        return cand[status == 1]

    chunks = _run_chunks(process, range(-M, M + 1), threads)
    labels = np.vstack([c for c in chunks if len(c)]) if chunks else np.empty((0, 5), np.int64)
    labels = labels[np.lexsort(labels.T[::-1])]
    return labels, labels.astype(float) @ basis.W


def _run_chunks(fn, keys, threads: int) -> list:
    """Run fn over keys, optionally in a thread pool; results keep key order."""
    keys = list(keys)
    if threads <= 1:
        return [fn(k) for k in keys]
    from concurrent.futures import ThreadPoolExecutor
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, keys))
