import numpy as np
import pytest

import quasiproj as qp
from quasiproj.errors import (DegenerateWindowError, EmptyWindowError,
                              PolygonError)
from quasiproj.geometry import Region, point_in_convex_polygon
from quasiproj.window import (CUBE_VERTICES, HULL_INDICES, INTERIOR_INDICES,
                              Acceptance, accept_2d, accept_3d,
                              enumerate_accepted_2d, enumerate_accepted_3d,
                              normalize_shift, random_shift, slice_window)

from helpers import mesh_margin_2d, mesh_margin_3d, mesh_solution_2d, polygon_area

P_GOLD = qp.PHI


# -- shifts ------------------------------------------------------------------

def test_normalize_shift_examples():
    s = normalize_shift([0, 0, 0, 0, 0])
    assert s.c == 0.0 and np.allclose(s.gamma, 0)

    s = normalize_shift([0.3, 0.3, 0.3, 0.3, 0.3])
    assert s.c == pytest.approx(0.5, abs=1e-12)
    assert s.gamma[0] == pytest.approx(-0.7, abs=1e-12)
    assert np.allclose(s.gamma[1:], 0.3)

    s = normalize_shift([0.2, 0.2, 0, 0, 0])
    assert s.c == pytest.approx(0.4, abs=1e-12)
    assert np.allclose(s.gamma, [0.2, 0.2, 0, 0, 0])


def test_normalize_shift_relabels_pattern(basis, windows_for):
    # normalization shifts gamma_0 by an integer n, which relabels k_0 -> k_0 + n;
    # the accepted pattern is unchanged up to that relabeling.  The LP oracle
    # handles the raw (un-normalized) shift directly.
    raw = np.array([1.7, 0.4, 0.1, 0.3, 0.2])
    s = normalize_shift(raw)
    n = int(np.floor(raw.sum()))
    assert s.c == pytest.approx(raw.sum() - n, abs=1e-12)
    ws = windows_for(s.c)

    class RawShift:
        gamma = raw
        c = s.c

    rng = np.random.default_rng(3)
    for _ in range(40):
        k = rng.integers(-3, 4, 5)
        k_raw = k.copy()
        k_raw[0] += n
        m_norm = mesh_margin_2d(k, s, basis)
        m_raw = mesh_margin_2d(k_raw, RawShift(), basis)
        assert m_norm == pytest.approx(m_raw, abs=1e-9)
        if abs(m_norm) > 1e-7:
            res = accept_2d(k, s, ws, basis)
            assert (res.status is Acceptance.ACCEPT) == (m_norm > 0)


def test_random_shift_sum_pinned():
    for seed in range(5):
        s = random_shift(0.37, seed)
        assert s.c == pytest.approx(0.37, abs=1e-12)
        assert s.gamma.sum() == pytest.approx(0.37, abs=1e-12)


# -- cube vertex table -------------------------------------------------------

def test_cube_vertex_table():
    assert CUBE_VERTICES.shape == (32, 5)
    assert len({tuple(r) for r in CUBE_VERTICES}) == 32
    assert set(np.unique(CUBE_VERTICES)) == {0, 1}
    sums = CUBE_VERTICES.sum(axis=1)
    assert sums[0] == 0
    assert all(sums[1:6] == 1)
    assert all(sums[6:16] == 2)
    assert all(sums[16:26] == 3)
    assert all(sums[26:31] == 4)
    assert sums[31] == 5


# -- polytope ----------------------------------------------------------------

def test_polytope_combinatorics(P):
    assert len(P.vertices) == 22
    assert len(P.edges) == 40
    assert len(P.face_loops) == 20
    assert 22 - 40 + 20 == 2
    assert np.allclose(P.projections[0], [0, 0, 0], atol=1e-12)
    assert np.allclose(P.projections[31], [0, 0, 5], atol=1e-12)


def test_polytope_closed_forms(P, basis):
    d = basis.D
    for j in range(5):
        assert np.allclose(P.projections[j + 1], [*d[j], 1], atol=1e-9)
        assert np.allclose(P.projections[j + 6], [*(d[j] + d[(j + 1) % 5]), 2], atol=1e-9)
        assert np.allclose(P.projections[j + 21],
                           [*(-d[(j - 2) % 5] - d[(j - 1) % 5]), 3], atol=1e-9)
        assert np.allclose(P.projections[j + 26], [*(-d[(j - 1) % 5]), 4], atol=1e-9)
        # interior ring
        assert np.allclose(P.projections[11 + j], [*(d[j] + d[(j + 2) % 5]), 2], atol=1e-9)
        assert np.allclose(P.projections[16 + j],
                           [*(-d[(j + 1) % 5] - d[(j - 1) % 5]), 3], atol=1e-9)


def test_polytope_interior_points_strictly_inside(P):
    for i in INTERIOR_INDICES:
        signed = P.face_normals @ P.projections[i] - P.face_offsets
        assert signed.max() < -1e-6, f"P_{i} not strictly inside"


def test_polytope_faces_are_unit_rhombi(P):
    for loop in P.face_loops:
        assert len(loop) == 4
        pts = P.vertices[list(loop)]
        edges = np.roll(pts, -1, axis=0) - pts
        lengths = np.linalg.norm(edges, axis=1)
        assert np.allclose(lengths, np.sqrt(2.0), atol=1e-9)  # |w_j| = sqrt(2)
        assert np.allclose(edges[0], -edges[2], atol=1e-9)
        assert np.allclose(edges[1], -edges[3], atol=1e-9)


def test_polytope_hull_vertex_set(P):
    assert set(P.hull_cube_indices.tolist()) == set(HULL_INDICES)


# -- decagon -----------------------------------------------------------------

def test_decagon_closed_forms(Q, basis):
    d = basis.D
    proj = Q.projections
    assert np.allclose(proj[0], 0, atol=1e-12)
    assert np.allclose(proj[31], 0, atol=1e-12)
    for j in range(5):
        assert np.allclose(proj[11 + j], -P_GOLD * d[(3 - 2 * j) % 5], atol=1e-9)
        assert np.allclose(proj[16 + j], P_GOLD * d[(5 - 2 * j) % 5], atol=1e-9)
        assert np.allclose(proj[j + 1], d[(5 - 2 * j) % 5], atol=1e-9)
        assert np.allclose(proj[26 + j], -d[(2 - 2 * j) % 5], atol=1e-9)
        assert np.allclose(proj[j + 6], d[(4 - 2 * j) % 5] / P_GOLD, atol=1e-9)
        assert np.allclose(proj[21 + j], -d[(3 - 2 * j) % 5] / P_GOLD, atol=1e-9)


def test_decagon_radii(Q):
    assert len(Q.vertices) == 10
    assert np.allclose(np.linalg.norm(Q.vertices, axis=1), P_GOLD, atol=1e-9)
    radii = np.sort(np.linalg.norm(Q.interior_points, axis=1))
    assert len(radii) == 22
    assert np.allclose(radii[:2], 0.0, atol=1e-9)
    assert np.allclose(radii[2:12], 1.0 / P_GOLD, atol=1e-9)
    assert np.allclose(radii[12:], 1.0, atol=1e-9)


def test_inner_decagon(Q):
    assert len(Q.inner_decagon) == 10
    assert np.allclose(np.linalg.norm(Q.inner_decagon, axis=1), 1 / P_GOLD, atol=1e-9)
    # the ten fan triangles tile the inner decagon
    tri_area = sum(polygon_area(t) for t in Q.triangles)
    assert tri_area == pytest.approx(polygon_area(Q.inner_decagon), abs=1e-9)
    for t in Q.triangles:
        assert polygon_area(t) > 0  # CCW and nondegenerate


# -- slice windows -----------------------------------------------------------

def test_slice_shapes_generic_c(P):
    ws = qp.build_windows(P, 0.5)
    assert [len(ws.slices[i].polygon) for i in range(1, 6)] == [5, 10, 10, 10, 5]
    assert not ws.degenerate_top


def test_slice_shapes_c_zero(P, basis):
    ws = qp.build_windows(P, 0.0)
    assert sorted(ws.slices) == [1, 2, 3, 4]
    assert all(len(ws.slices[i].polygon) == 5 for i in ws.slices)
    assert ws.degenerate_top
    # V_1 at c=0 is the pentagon spanned by the five plane generators
    v1 = ws.slices[1].polygon
    expect = basis.D[np.argsort(np.arctan2(basis.D[:, 1], basis.D[:, 0]))]
    assert np.allclose(v1, expect, atol=1e-9)
    with pytest.raises(DegenerateWindowError):
        slice_window(P, 5, 0.0)


def test_slice_window_errors(P):
    with pytest.raises(ValueError):
        slice_window(P, 0, 0.5)
    with pytest.raises(ValueError):
        slice_window(P, 6, 0.5)
    with pytest.raises(ValueError):
        slice_window(P, 3, 1.5)


def test_slice_windows_nest_in_shadow(P, Q):
    # the xy shadow of the polytope is the circumradius-p decagon
    for c in (0.0, 0.25, 0.5, 0.8):
        ws = qp.build_windows(P, c)
        for w in ws.slices.values():
            for pt in w.polygon:
                assert point_in_convex_polygon(pt, Q.vertices) is not Region.OUTSIDE


def test_slice_area_central_symmetry(P):
    # central symmetry of the polytope: V_I at c mirrors V_{6-I} at 1-c
    for c in (0.1, 0.25, 0.4, 0.6, 0.85):
        ws = qp.build_windows(P, c)
        wsm = qp.build_windows(P, 1.0 - c)
        for i in range(1, 6):
            assert ws.slices[i].area == pytest.approx(wsm.slices[6 - i].area, abs=1e-9)


# -- acceptance --------------------------------------------------------------

def test_accept_2d_trivial_rejects(P, basis, windows_for):
    shift = random_shift(0.5, 1)
    ws = windows_for(0.5)
    assert accept_2d([0, 0, 0, 0, 0], shift, ws, basis).status is Acceptance.REJECT
    assert accept_2d([2, 0, 0, 0, 0], shift, ws, basis).status is Acceptance.REJECT


def test_accept_2d_against_lp_oracle(P, basis, windows_for):
    shift = normalize_shift([0.1] * 5)
    ws = windows_for(shift.c)
    r = accept_2d([1, 0, 0, 0, 0], shift, ws, basis)
    m = mesh_margin_2d([1, 0, 0, 0, 0], shift, basis)
    assert (r.status is Acceptance.ACCEPT) == (m > 0)

    rng = np.random.default_rng(4)
    accepted, _ = enumerate_accepted_2d(3, shift, ws, basis)
    pool = [rng.integers(-3, 4, 5) for _ in range(200)]
    pool += [accepted[i] for i in rng.choice(len(accepted), 25, replace=False)]
    checked_accepts = 0
    for k in pool:
        res = accept_2d(k, shift, ws, basis)
        margin = mesh_margin_2d(k, shift, basis)
        if abs(margin) < 1e-7:
            continue  # boundary cases are Singular territory
        assert (res.status is Acceptance.ACCEPT) == (margin > 0), (k, margin)
        if res.status is Acceptance.ACCEPT:
            checked_accepts += 1
            assert res.index == k.sum()
            assert np.allclose(res.vertex, qp.project_2d(k, basis))
    assert checked_accepts >= 25


def test_accepted_labels_recover_unit_cube_lambda(P, basis, windows_for):
    # mesh condition: the recovered lambda lies strictly inside the unit cube
    shift = random_shift(0.5, 5)
    ws = windows_for(0.5)
    labels, _ = enumerate_accepted_2d(4, shift, ws, basis)
    rng = np.random.default_rng(6)
    for i in rng.choice(len(labels), size=25, replace=False):
        _, lam = mesh_solution_2d(labels[i], shift, basis)
        assert np.all(lam > 0) and np.all(lam < 1)


def test_accept_2d_singular_at_exact_zero_shift(P, basis, windows_for):
    # gamma = 0 puts the test point of e_0 exactly on a window vertex
    shift = normalize_shift([0.0] * 5)
    ws = windows_for(0.0)
    res = accept_2d([1, 0, 0, 0, 0], shift, ws, basis)
    assert res.status is Acceptance.SINGULAR


def test_accept_3d_examples(Q, basis):
    shift = normalize_shift([0.13, 0.07, 0.11, 0.05, 0.09])
    res = accept_3d([0, 0, 0, 0, 0], shift, Q, basis)
    assert res.status is Acceptance.ACCEPT
    assert np.allclose(res.vertex, [0, 0, 0])
    # the test point is tiny compared to the decagon inradius
    t = qp.window.d_test_points(np.zeros((1, 5)), shift, basis)[0]
    assert np.linalg.norm(t) < P_GOLD * np.cos(np.pi / 10)

    far = accept_3d([3, 0, 0, 0, 0], shift, Q, basis)
    assert far.status is Acceptance.REJECT
    t3 = qp.window.d_test_points(np.array([[3, 0, 0, 0, 0]]), shift, basis)[0]
    assert np.linalg.norm(t3) > P_GOLD


def test_accept_3d_translation_invariance(Q, basis):
    shift = random_shift(0.45, 9)
    ones = np.ones(5, dtype=np.int64)
    rng = np.random.default_rng(10)
    for _ in range(60):
        k = rng.integers(-6, 7, 5)
        r1 = accept_3d(k, shift, Q, basis)
        r2 = accept_3d(k + ones, shift, Q, basis)
        assert r1.status is r2.status
        if r1.status is Acceptance.ACCEPT:
            assert np.allclose(r2.vertex - r1.vertex, [0, 0, 5], atol=1e-9)


def test_accept_3d_against_lp_oracle(Q, basis):
    shift = random_shift(0.3, 12)
    rng = np.random.default_rng(13)
    for _ in range(150):
        k = rng.integers(-3, 4, 5)
        margin = mesh_margin_3d(k, shift, basis)
        if abs(margin) < 1e-7:
            continue
        res = accept_3d(k, shift, Q, basis)
        assert (res.status is Acceptance.ACCEPT) == (margin > 0), (k, margin)


# -- enumeration -------------------------------------------------------------

def test_chain_relations(basis):
    d, w = basis.D, basis.W
    pinv = 1 / P_GOLD
    for j in range(5):
        assert np.allclose(d[(j - 1) % 5] + d[(j + 1) % 5], pinv * d[j], atol=1e-12)
    assert np.allclose(w[3], w[0] + pinv * w[1] - pinv * w[2], atol=1e-12)
    assert np.allclose(w[4], -pinv * w[0] + pinv * w[1] + w[2], atol=1e-12)


def test_enumerate_2d_matches_naive(P, basis, windows_for):
    from itertools import product
    shift = random_shift(0.5, 7)
    ws = windows_for(0.5)
    M = 3
    naive = set()
    for k in product(range(-M, M + 1), repeat=5):
        if 1 <= sum(k) <= 5:
            if accept_2d(np.array(k), shift, ws, basis).status is Acceptance.ACCEPT:
                naive.add(k)
    chain, verts = enumerate_accepted_2d(M, shift, ws, basis)
    assert {tuple(r) for r in chain} == naive
    assert np.allclose(verts, chain.astype(float) @ basis.D)
    # sorted lexicographically
    assert np.array_equal(chain, chain[np.lexsort(chain.T[::-1])])


def test_enumerate_3d_matches_naive(Q, basis):
    from itertools import product
    shift = random_shift(0.31, 8)
    M = 2
    naive = set()
    for k in product(range(-M, M + 1), repeat=5):
        if accept_3d(np.array(k), shift, Q, basis).status is Acceptance.ACCEPT:
            naive.add(k)
    chain, _ = enumerate_accepted_3d(M, shift, Q, basis)
    assert {tuple(r) for r in chain} == naive


def test_enumerate_threads_deterministic(P, basis, windows_for):
    shift = random_shift(0.5, 7)
    ws = windows_for(0.5)
    l1, _ = enumerate_accepted_2d(6, shift, ws, basis, threads=1)
    l4, _ = enumerate_accepted_2d(6, shift, ws, basis, threads=4)
    assert np.array_equal(l1, l4)
