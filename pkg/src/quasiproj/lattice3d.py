"""3-d quasiperiodic lattice: tips, 26-atom unit cells, and cell overlaps.

Lattice points are the 5-d integer points whose plane test point falls in
the decagon window.  Points whose test point falls in the inner decagon are
tips: each carries a translated copy of the 22-vertex polytope as a unit
cell holding 26 atoms (22 hull sites plus 4 interior).  Neighboring cells
overlap in one of two convex polyhedra, a 6-faced J or a 12-faced K, and
each tip falls in one of five overlap classes with c-independent
frequencies.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, HalfspaceIntersection, QhullError

from .errors import CensusViolationError, ConsistencyError, SingularityError
from .geometry import DEFAULT_EPS, PHI, ProjectionBasis, make_basis
from .window import (CUBE_VERTICES, HULL_INDICES, DecagonQ, GridShift,
                     PolytopeP, d_test_points, enumerate_accepted_3d,
                     points_in_convex_polygon)

#: volume below which an intersection counts as a touch, not an overlap;
#: realized J/K overlaps have volume > 0.05, float noise sits below 1e-12
VOLUME_FLOOR = 1e-12

#: overlap classes keyed by (neighbor count, K count, J count)
OVERLAP_SIGNATURES = {
    (4, 0, 4): "A1",
    (5, 1, 4): "A23",
    (4, 1, 3): "A46",
    (5, 2, 3): "A57",
    (6, 2, 4): "A8",
}

#: relative class frequencies 1 : p^-3 : p^-2 : p^-3 : (p^-2 + p^-4)/2
_RAW_RATIOS = {
    "A1": 1.0,
    "A23": PHI ** -3,
    "A46": PHI ** -2,
    "A57": PHI ** -3,
    "A8": 0.5 * (PHI ** -2 + PHI ** -4),
}
ANALYTIC_CLASS_FREQUENCIES = {
    label: value / sum(_RAW_RATIOS.values()) for label, value in _RAW_RATIOS.items()
}


@dataclass(frozen=True)
class Lattice3:
    """Accepted labels in a box with their 3-d points and lookup structures."""

    labels: np.ndarray  # (N, 5) int64, sorted
    points: np.ndarray  # (N, 3)
    radius: int

    def __post_init__(self):
        index = {tuple(int(x) for x in row): i for i, row in enumerate(self.labels)}
        object.__setattr__(self, "label_index", index)
        layers: dict[int, np.ndarray] = {}
        z = self.labels.sum(axis=1)
        for zv in np.unique(z):
            layers[int(zv)] = np.flatnonzero(z == zv)
        object.__setattr__(self, "_layers", layers)

    def __contains__(self, label) -> bool:
        return tuple(int(x) for x in label) in self.label_index

    def layer(self, z: int) -> np.ndarray:
        """Row indices of lattice points with coordinate sum z."""
        return self._layers.get(int(z), np.empty(0, dtype=np.int64))


def build_lattice3(radius: int, shift: GridShift, Q: DecagonQ,
                   basis: ProjectionBasis | None = None,
                   eps: float = DEFAULT_EPS, threads: int = 1) -> Lattice3:
    basis = basis or make_basis()
    labels, points = enumerate_accepted_3d(radius, shift, Q, basis, eps, threads)
    return Lattice3(labels=labels, points=points, radius=radius)


def find_tips(lat: Lattice3, shift: GridShift, Q: DecagonQ,
              basis: ProjectionBasis | None = None,
              eps: float = DEFAULT_EPS) -> np.ndarray:
    """Labels whose plane test point falls strictly inside the inner decagon.

    Every tip is connected to all ten unit neighbors and anchors a unit cell.
    """
    basis = basis or make_basis()
    pts = d_test_points(lat.labels, shift, basis)
    status = points_in_convex_polygon(pts, Q._inner_normals, Q._inner_offsets, eps)
    if np.any(status == -1):
        bad = lat.labels[status == -1][0]
        raise SingularityError(
            f"label {tuple(int(x) for x in bad)} lies within eps of the inner "
            "decagon boundary; perturb the shift")
    return lat.labels[status == 1]


def tip_triangle(tip_label, shift: GridShift, Q: DecagonQ,
                 basis: ProjectionBasis | None = None,
                 eps: float = DEFAULT_EPS) -> int:
    """Which of the ten inner-decagon triangles holds this tip's test point."""
    basis = basis or make_basis()
    pt = d_test_points(np.asarray(tip_label)[None, :], shift, basis)[0]
    for t in range(10):
        tri = Q.triangles[t]
        status = points_in_convex_polygon(pt[None, :], *_triangle_halfplanes(tri), eps)
        if status[0] == 1:
            return t
    raise SingularityError(
        f"tip test point {tuple(pt)} lies on a triangle boundary of the inner decagon")


def _triangle_halfplanes(tri: np.ndarray):
    from .geometry import polygon_halfplanes
    return polygon_halfplanes(tri)


def interior_atoms(tip_label, lat: Lattice3, P: PolytopeP,
                   eps: float = DEFAULT_EPS) -> np.ndarray:
    """The lattice points strictly inside the cell anchored at a tip.

    Sweeps the stored lattice layer by layer; exactly four atoms must turn
    up, anything else is a geometry or tolerance failure.
    """
    tip_label = np.asarray(tip_label, dtype=np.int64)
    tip_point = lat.points[lat.label_index[tuple(int(x) for x in tip_label)]]
    z0 = int(tip_label.sum())
    found = []
    for dz in range(1, 5):
        rows = lat.layer(z0 + dz)
        if len(rows) == 0:
            continue
        rel = lat.points[rows] - tip_point
        inside = np.max(rel @ P.face_normals.T - P.face_offsets, axis=1) < -eps
        found.extend(rows[inside].tolist())
    if len(found) != 4:
        raise ConsistencyError(
            f"cell at {tuple(int(x) for x in tip_label)} has {len(found)} interior "
            "atoms, expected 4")
    return lat.labels[sorted(found)]


@dataclass(frozen=True)
class CellInstance:
    """One 26-atom unit cell: a translated polytope anchored at a tip."""

    tip_label: np.ndarray       # (5,)
    tip_point: np.ndarray       # (3,)
    hull_atoms: np.ndarray      # (22, 5) labels on the translated hull
    interior_atoms: np.ndarray  # (4, 5) labels strictly inside


def cell_instance(tip_label, lat: Lattice3, P: PolytopeP,
                  eps: float = DEFAULT_EPS) -> CellInstance:
    """Assemble a tip's cell, checking all 26 atoms are lattice points."""
    tip_label = np.asarray(tip_label, dtype=np.int64)
    key = tuple(int(x) for x in tip_label)
    if key not in lat.label_index:
        raise ValueError(f"{key} is not a lattice point")
    hull_atoms = tip_label[None, :] + CUBE_VERTICES[list(HULL_INDICES)]
    missing = [a for a in hull_atoms if tuple(int(x) for x in a) not in lat.label_index]
    if missing:
        raise ConsistencyError(
            f"cell at {key}: {len(missing)} hull atoms are not lattice points "
            "(is the tip too close to the enumeration boundary?)")
    inner = interior_atoms(tip_label, lat, P, eps)
    return CellInstance(tip_label=tip_label,
                        tip_point=lat.points[lat.label_index[key]],
                        hull_atoms=hull_atoms, interior_atoms=inner)


# ---------------------------------------------------------------------------
# convex intersections of neighboring cells
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OverlapShape:
    volume: float
    faces: int

    @property
    def overlapping(self) -> bool:
        return self.volume > VOLUME_FLOOR


_EMPTY_OVERLAP = OverlapShape(volume=0.0, faces=0)


def convex_intersection(offset, P: PolytopeP, eps: float = DEFAULT_EPS) -> OverlapShape:
    """Intersection of the polytope with a translated copy of itself.

    Runs a Chebyshev-center LP over the 40 face half-spaces; when the
    intersection is solid, reports its volume and the face count after
    merging coincident planes.
    """
    offset = np.asarray(offset, dtype=float)
    A = np.vstack([P.face_normals, P.face_normals])
    b = np.concatenate([P.face_offsets, P.face_offsets + P.face_normals @ offset])

    res = linprog(c=[0.0, 0.0, 0.0, -1.0],
                  A_ub=np.column_stack([A, np.ones(len(A))]), b_ub=b,
                  bounds=[(None, None)] * 3 + [(0, None)], method="highs")
    if not res.success or res.x[3] < 1e-7:
        return _EMPTY_OVERLAP
    center = res.x[:3]

    try:
        hs = HalfspaceIntersection(np.column_stack([A, -b]), center)
        hull = ConvexHull(hs.intersections)
    except QhullError:
        return _EMPTY_OVERLAP

    # count distinct supporting planes that actually carry a 2-d facet
    planes: list[tuple[np.ndarray, float]] = []
    for normal, off in zip(A, b):
        if not any(np.dot(normal, n2) > 1.0 - 1e-9 and abs(off - o2) < max(eps, 1e-9)
                   for n2, o2 in planes):
            planes.append((normal, off))
    verts = hs.intersections
    faces = 0
    for normal, off in planes:
        on_plane = np.abs(verts @ normal - off) < 1e-7
        if int(on_plane.sum()) >= 3:
            faces += 1
    return OverlapShape(volume=float(hull.volume), faces=faces)


@dataclass(frozen=True)
class OverlapTable:
    """Cached cell intersections for every feasible tip-to-tip 5-d offset."""

    offsets: tuple         # candidate 5-d offsets as tuples
    shapes: dict           # offset tuple -> OverlapShape


def build_overlap_table(P: PolytopeP, basis: ProjectionBasis | None = None,
                        eps: float = DEFAULT_EPS) -> OverlapTable:
    """Precompute intersections for all offsets two tips can realize.

    Both tips have plane test points inside the inner decagon (radius 1/p),
    so the plane offset is below 2/p; overlap further needs |dz| <= 4 and an
    xy offset below the diameter 2p.  That confines the 5-d offset to
    {-2..2}^5, a finite set computed once; results are shift-independent.
    """
    basis = basis or make_basis()
    rng = np.arange(-2, 3, dtype=np.int64)
    grid = np.stack(np.meshgrid(*([rng] * 5), indexing="ij"), axis=-1).reshape(-1, 5)
    grid = grid[np.any(grid != 0, axis=1)]

    plane = grid.astype(float) @ basis.D
    space = grid.astype(float) @ basis.W
    feasible = ((np.linalg.norm(plane, axis=1) < 2.0 / PHI + 1e-9)
                & (np.abs(space[:, 2]) <= 4)
                & (np.linalg.norm(space[:, :2], axis=1) < 2.0 * PHI + 1e-9))
    offsets = grid[feasible]

    shapes = {}
    for m, off3 in zip(offsets, offsets.astype(float) @ basis.W):
        shapes[tuple(int(x) for x in m)] = convex_intersection(off3, P, eps)
    return OverlapTable(offsets=tuple(shapes.keys()), shapes=shapes)


@dataclass(frozen=True)
class OverlapClass:
    label: str
    neighbors: int
    k_shares: int
    j_shares: int


def classify_overlap(tip_label, tip_set: set, table: OverlapTable) -> OverlapClass:
    """Count overlapping neighbor cells and map (neighbors, K, J) to its class.

    Requires every tip within reach of this one to be present in tip_set.
    """
    tip = tuple(int(x) for x in np.asarray(tip_label))
    neighbors = 0
    k_shares = 0
    j_shares = 0
    for m in table.offsets:
        other = (tip[0] + m[0], tip[1] + m[1], tip[2] + m[2],
                 tip[3] + m[3], tip[4] + m[4])
        if other not in tip_set:
            continue
        shape = table.shapes[m]
        if not shape.overlapping:
            continue
        neighbors += 1
        if shape.faces == 12:
            k_shares += 1
        elif shape.faces == 6:
            j_shares += 1
        else:
            raise CensusViolationError(
                f"overlap of {tip} and {other} has {shape.faces} faces, expected 6 or 12")
    sig = (neighbors, k_shares, j_shares)
    if sig not in OVERLAP_SIGNATURES:
        raise CensusViolationError(
            f"tip {tip} has overlap signature {sig}, outside the five known classes")
    return OverlapClass(label=OVERLAP_SIGNATURES[sig], neighbors=neighbors,
                        k_shares=k_shares, j_shares=j_shares)


def shared_atom_count(tip_a, tip_b, lat: Lattice3, P: PolytopeP,
                      eps: float = DEFAULT_EPS) -> int:
    """Number of atoms the two tips' 26-atom cells have in common.

    Overlapping neighbor cells share the lattice points inside their
    intersection; reported as a statistic only, no published values exist
    to assert against.
    """
    cells = [cell_instance(t, lat, P, eps) for t in (tip_a, tip_b)]
    sets = [
        {tuple(int(x) for x in a)
         for a in np.vstack([c.hull_atoms, c.interior_atoms])}
        for c in cells
    ]
    return len(sets[0] & sets[1])


@dataclass(frozen=True)
class OverlapCensus:
    c: float
    n_tips: int
    counts: dict      # class label -> count
    frequencies: dict  # class label -> empirical frequency
    analytic: dict    # class label -> analytic frequency
    shared_atoms: dict = None  # class label -> mean atoms shared with neighbors


def overlap_census(lat: Lattice3, shift: GridShift, Q: DecagonQ, P: PolytopeP,
                   basis: ProjectionBasis | None = None,
                   eps: float = DEFAULT_EPS, margin: int = 3,
                   table: OverlapTable | None = None,
                   shared_atom_sample: int = 0) -> OverlapCensus:
    """Classify every boundary-complete tip and tally the five overlap classes.

    With shared_atom_sample > 0, also reports the mean number of atoms a
    cell shares with its overlapping neighbors, averaged over that many
    sampled tips per class.
    """
    basis = basis or make_basis()
    table = table or build_overlap_table(P, basis, eps)
    tips = find_tips(lat, shift, Q, basis, eps)
    tip_set = {tuple(int(x) for x in row) for row in tips}
    inner = tips[np.abs(tips).max(axis=1) <= lat.radius - margin]

    counter: Counter = Counter()
    shared_sums: dict[str, list] = {lab: [] for lab in ANALYTIC_CLASS_FREQUENCIES}
    safe = lat.radius - margin - 2  # shared-atom cells need one more label ring
    for tip in inner:
        oc = classify_overlap(tip, tip_set, table)
        counter[oc.label] += 1
        if (shared_atom_sample and len(shared_sums[oc.label]) < shared_atom_sample
                and np.abs(tip).max() <= safe):
            for m in table.offsets:
                other = tuple(int(a + b) for a, b in zip(tip, m))
                if other in tip_set and table.shapes[m].overlapping:
                    shared_sums[oc.label].append(
                        shared_atom_count(tip, np.array(other), lat, P, eps))
    total = sum(counter.values())
    if total == 0:
        raise ValueError("no boundary-complete tips in the lattice box")
    freqs = {lab: counter.get(lab, 0) / total for lab in ANALYTIC_CLASS_FREQUENCIES}
    shared = None
    if shared_atom_sample:
        shared = {lab: (float(np.mean(v)) if v else float("nan"))
                  for lab, v in shared_sums.items()}
    return OverlapCensus(c=shift.c, n_tips=total,
                         counts={lab: counter.get(lab, 0) for lab in ANALYTIC_CLASS_FREQUENCIES},
                         frequencies=freqs,
                         analytic=dict(ANALYTIC_CLASS_FREQUENCIES),
                         shared_atoms=shared)
