import json

import numpy as np
import pytest

import quasiproj as qp
from quasiproj.errors import ConfigError
from quasiproj.io import (RunConfig, TilingDocument, build_tiling_document,
                          cells_obj, frequency_csv, overlap_csv, render_svg,
                          resolve_shift, window_document, write_json,
                          write_text)
from quasiproj.lattice3d import OverlapCensus, cell_instance, find_tips
from quasiproj.tiling2d import FrequencyReport, FrequencyRow
from quasiproj.window import random_shift


def test_runconfig_json_roundtrip():
    cfg = RunConfig(mode="freq", c=0.25, gamma=[0.1, 0.2, -0.3, 0.15, 0.1],
                    seed=42, radius=30, tol=1e-10, threads=2, index=None,
                    out="x.csv", format="csv")
    assert RunConfig.from_json(cfg.to_json()) == cfg
    auto = RunConfig()
    assert RunConfig.from_json(auto.to_json()) == auto


def test_resolve_shift_explicit_vs_auto():
    explicit = resolve_shift(RunConfig(gamma=[0.1, 0.1, 0.1, 0.1, 0.1]))
    assert explicit.c == pytest.approx(0.5, abs=1e-12)
    auto1 = resolve_shift(RunConfig(c=0.3, seed=5))
    auto2 = resolve_shift(RunConfig(c=0.3, seed=5))
    assert np.array_equal(auto1.gamma, auto2.gamma)
    with pytest.raises(ConfigError):
        resolve_shift(RunConfig(gamma=[0.1, 0.2]))


def test_empty_document_svg():
    doc = TilingDocument(vertices=(), edges=())
    svg = render_svg(doc)
    assert svg.startswith("<?xml")
    assert "<svg" in svg and "</svg>" in svg
    assert "<path" not in svg


def test_single_edge_svg():
    doc = TilingDocument(
        vertices=(((0, 0, 0, 1, 0), 1, (0.0, 0.5)), ((1, 0, 0, 1, 0), 2, (1.0, 0.5))),
        edges=((0, 1, "1-2"),))
    svg = render_svg(doc)
    assert svg.count("<path") == 1
    assert 'stroke-dasharray="0.12 0.08"' in svg
    assert 'stroke-width="0.03"' in svg
    # y axis flipped
    assert "M 0 -0.5 L 1 -0.5" in svg


def test_svg_deterministic(basis, windows_for):
    shift = random_shift(0.5, 7)
    ws = windows_for(0.5)
    doc1 = build_tiling_document(6, shift, ws, basis)
    doc2 = build_tiling_document(6, shift, ws, basis)
    assert render_svg(doc1) == render_svg(doc2)
    # all four stroke classes appear in a decent patch
    svg = render_svg(doc1)
    for cls in ("0.12 0.08", 'stroke-width="0.08"', 'stroke-width="0.03"'):
        assert cls in svg


def test_document_edges_consistent(basis, windows_for):
    shift = random_shift(0.5, 7)
    doc = build_tiling_document(6, shift, windows_for(0.5), basis)
    labels = {v[0] for v in doc.vertices}
    assert len(labels) == len(doc.vertices)
    pos_ends = 0
    neg_ends = 0
    for (i, j, style) in doc.edges:
        vi, vj = doc.vertices[i], doc.vertices[j]
        assert vj[1] == vi[1] + 1  # stored in the positive direction
        assert style == f"{vi[1]}-{vj[1]}"
        # unit step in exactly one lattice coordinate
        diff = np.array(vj[0]) - np.array(vi[0])
        assert np.abs(diff).sum() == 1
        pos_ends += 1
        neg_ends += 1
    # handshake: every edge has one positive and one negative endpoint
    assert pos_ends == neg_ends == len(doc.edges)


def test_frequency_csv_format():
    rep = FrequencyReport(c=0.5, rows=(FrequencyRow(1, 5, 0, 1.0, 0.975, 39),),
                          n_vertices=40)
    text = frequency_csv(rep)
    lines = text.strip().split("\n")
    assert lines[0] == "I,n_pos,n_neg,analytic,empirical,count,abs_err"
    assert lines[1] == "1,5,0,1,0.975,39,0.025"
    assert lines[-1] == "# sum_analytic = 1"
    assert lines[-2] == "# n_vertices = 40"


def test_overlap_csv_format():
    census = OverlapCensus(
        c=0.2, n_tips=10,
        counts={"A1": 5, "A23": 1, "A46": 2, "A57": 1, "A8": 1},
        frequencies={"A1": 0.5, "A23": 0.1, "A46": 0.2, "A57": 0.1, "A8": 0.1},
        analytic=dict(qp.ANALYTIC_CLASS_FREQUENCIES))
    text = overlap_csv(census)
    lines = text.strip().split("\n")
    assert lines[0] == "class,neighbors,K,J,count,frequency,analytic_ratio"
    assert lines[1].startswith("A1,4,0,4,5,0.5,")
    assert lines[3].startswith("A46,4,1,3,2,0.2,")


def test_window_document_structure(P, Q, windows_for):
    doc = window_document(P, Q, windows_for(0.5))
    assert len(doc["polytope"]["vertices"]) == 22
    assert len(doc["polytope"]["edges"]) == 40
    assert len(doc["polytope"]["faces"]) == 20
    assert len(doc["decagon"]["vertices"]) == 10
    assert sorted(doc["slices"]) == ["1", "2", "3", "4", "5"]
    # polygons are CCW (positive shoelace)
    from helpers import polygon_area
    for s in doc["slices"].values():
        assert polygon_area(np.array(s["polygon"])) > 0
    # JSON-able and deterministic
    assert write_json(doc) == write_json(json.loads(write_json(doc)))


def test_cells_obj_dedupes_shared_vertices(P, Q, basis):
    shift = random_shift(0.5, 11)
    lat = qp.build_lattice3(8, shift, Q, basis)
    tips = find_tips(lat, shift, Q, basis)
    inner = tips[np.abs(tips).max(axis=1) <= 5]
    # find two tips one z-period apart: their cells share the touching tip
    tipset = {tuple(r) for r in inner}
    pair = None
    for t in inner:
        other = tuple(np.array(t) + 1)
        if other in tipset:
            pair = (t, np.array(other))
            break
    assert pair is not None
    cells = [cell_instance(t, lat, P) for t in pair]
    text = cells_obj(cells, P)
    n_v = text.count("\nv ")
    n_f = text.count("\nf ")
    assert n_f == 40  # 20 faces per cell
    assert n_v == 43  # 2 * 22 minus the shared touching vertex
    assert text.count("\no ") == 2


def test_write_text_error_names_path(tmp_path):
    bad = tmp_path / "no_such_dir" / "out.csv"
    with pytest.raises(ConfigError, match="no_such_dir"):
        write_text(str(bad), "hello")
    good = tmp_path / "out.csv"
    write_text(str(good), "hello")
    assert good.read_text() == "hello"
