"""Generalized Penrose tilings and 3-d quasiperiodic lattices from the 5-d lattice.

Two independent constructions of the same objects: the de Bruijn pentagrid
(grids and their dual meshes) and the cut-and-project window of acceptance
(the projected 5-cube).  The package builds both, cross-checks them, and
validates analytic vertex-type and cell-overlap frequencies against counts.
"""

from .geometry import (DEFAULT_EPS, PHI, THETA, GoldenConstants, ProjectionBasis,
                       Region, make_basis, point_in_convex_polygon, project_2d,
                       project_3d)
from .window import (Acceptance, AcceptResult, CUBE_VERTICES, DecagonQ, GridShift,
                     PolytopeP, SliceWindow, WindowSet, accept_2d, accept_3d,
                     build_decagon_Q, build_polytope_P, build_windows,
                     enumerate_accepted_2d, enumerate_accepted_3d,
                     normalize_shift, random_shift, slice_window)
from .pentagrid import (GridLine, Intersection, PentagridTiling,
                        enumerate_intersections, k_vector_2d, k_vector_3d,
                        rhombus_at, tiling_from_pentagrid)
from .tiling2d import (CENSUS, DirectedEdge, FrequencyReport, VertexType,
                       analytic_A, analytic_probability, census_support,
                       classify_vertex, edges_at, empirical_frequencies)
from .lattice3d import (ANALYTIC_CLASS_FREQUENCIES, CellInstance, Lattice3,
                        OverlapCensus, OverlapShape, build_lattice3,
                        build_overlap_table, cell_instance, classify_overlap,
                        convex_intersection, find_tips, interior_atoms,
                        overlap_census)

__version__ = "0.1.0"
