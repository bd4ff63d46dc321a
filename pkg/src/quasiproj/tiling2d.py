"""Vertex typing and frequency statistics of generalized Penrose tilings.

An accepted vertex of index I has n "positive" edges toward index I+1
neighbors and n' "negative" edges toward index I-1 neighbors; the pair
[n, n']_I is its vertex type.  The analytic frequency of a type is
A_I[n, n'] / (5 p), with the A functions piecewise quadratic in the grid
shift sum c.  The full census holds 3 + 9 + 20 + 9 + 3 types.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import CensusViolationError, SingularityError
from .geometry import PHI, ProjectionBasis, make_basis
from .window import (Acceptance, GridShift, WindowSet, accept_2d,
                     accept_2d_bulk, enumerate_accepted_2d)

_P = PHI
_EDGE_STYLES = {(1, 2): "1-2", (2, 3): "2-3", (3, 4): "3-4", (4, 5): "4-5"}


class VertexType(NamedTuple):
    index: int
    n_pos: int
    n_neg: int


@dataclass(frozen=True)
class DirectedEdge:
    """Unit tiling edge from a vertex of index I to a neighbor of index I +- 1."""

    from_label: tuple
    to_label: tuple
    direction: np.ndarray  # +-d_m in the tiling plane
    sign: int              # +1: index increases, -1: index decreases
    style: str             # render class by the endpoint index pair


def edges_at(k, shift: GridShift, wset: WindowSet,
             basis: ProjectionBasis | None = None) -> list[DirectedEdge]:
    """All tiling edges at an accepted vertex, probing the ten unit neighbors."""
    basis = basis or make_basis()
    k = np.asarray(k, dtype=np.int64)
    here = accept_2d(k, shift, wset, basis)
    if here.status is Acceptance.SINGULAR:
        raise SingularityError(f"vertex {tuple(int(x) for x in k)} is singular")
    if here.status is not Acceptance.ACCEPT:
        raise ValueError(f"{tuple(int(x) for x in k)} is not an accepted vertex")
    index = here.index
    edges = []
    for m in range(5):
        for sign in (1, -1):
            k2 = k.copy()
            k2[m] += sign
            res = accept_2d(k2, shift, wset, basis)
            if res.status is Acceptance.SINGULAR:
                raise SingularityError(
                    f"neighbor {tuple(int(x) for x in k2)} is singular")
            if res.status is Acceptance.ACCEPT:
                pair = (min(index, index + sign), max(index, index + sign))
                edges.append(DirectedEdge(
                    from_label=tuple(int(x) for x in k),
                    to_label=tuple(int(x) for x in k2),
                    direction=sign * basis.D[m],
                    sign=sign,
                    style=_EDGE_STYLES[pair]))
    return edges


def classify_vertex(k, shift: GridShift, wset: WindowSet,
                    basis: ProjectionBasis | None = None) -> VertexType:
    """Vertex type [n_pos, n_neg]_I of an accepted vertex."""
    basis = basis or make_basis()
    edges = edges_at(k, shift, wset, basis)
    n_pos = sum(1 for e in edges if e.sign > 0)
    n_neg = len(edges) - n_pos
    index = int(np.sum(np.asarray(k)))
    vt = VertexType(index, n_pos, n_neg)
    if (n_pos, n_neg) not in CENSUS[index]:
        raise CensusViolationError(f"vertex type {vt} is outside the known census")
    return vt


def neighbor_counts(labels: np.ndarray, shift: GridShift, wset: WindowSet,
                    basis: ProjectionBasis) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized (n_pos, n_neg) for many accepted labels."""
    labels = np.asarray(labels, dtype=np.int64)
    n = len(labels)
    n_pos = np.zeros(n, dtype=np.int64)
    n_neg = np.zeros(n, dtype=np.int64)
    for m in range(5):
        for sign in (1, -1):
            nb = labels.copy()
            nb[:, m] += sign
            status = accept_2d_bulk(nb, shift, wset, basis)
            if np.any(status == -1):
                bad = nb[status == -1][0]
                raise SingularityError(
                    f"neighbor {tuple(int(x) for x in bad)} is singular")
            if sign > 0:
                n_pos += status == 1
            else:
                n_neg += status == 1
    return n_pos, n_neg


# ---------------------------------------------------------------------------
# analytic frequencies
#
# theta(x) below is the Heaviside step with theta(0) = 1.  Two formulas are
# two-branch with both branches nonzero at the shared breakpoint; these are
# evaluated with exclusive branches so the boundary value is the common
# (continuous) limit rather than the doubled sum.
# ---------------------------------------------------------------------------

def _H(x: float) -> float:
    return 1.0 if x >= 0.0 else 0.0


def _A1(n: int, n_neg: int, c: float) -> float:
    if n_neg != 0:
        return 0.0
    w = (1.0 - c) ** 2
    if n == 5:
        return 0.5 * (_P + 1 / _P) * _P ** -4 * w
    if n == 4:
        return 2.5 * _P ** -4 * w
    if n == 3:
        return 2.5 * _P ** -3 * w
    return 0.0


def _A2(n: int, n_neg: int, c: float) -> float:
    b = _P ** -2
    if (n, n_neg) == (5, 0):
        if c <= b:
            return 0.5 * (_P + 1 / _P) * (_P ** -3 + c) ** 2
        return 0.5 * (_P + 1 / _P) * _P ** -4 * (2.0 - c) ** 2
    if (n, n_neg) == (5, 1):
        return _H(b - c) * 2.5 * (_P ** -5 + c) * _P * (b - c)
    if (n, n_neg) == (5, 2):
        return _H(b - c) * 2.5 * (b - c) ** 2 / _P
    if (n, n_neg) == (4, 0):
        return _H(c - b) * 2.5 * (c - b) * ((1 - c) / _P + _P ** -3 * (2 - c))
    if (n, n_neg) == (4, 1):
        if c <= b:
            return 2.5 * c ** 2 / _P
        return 2.5 * _P ** -3 * (1 - c) ** 2
    if (n, n_neg) == (3, 2):
        return _H(b - c) * 2.5 * _P ** 2 * (b - c) ** 2
    if (n, n_neg) == (3, 1):
        return 5 * _P ** -2 * (1 - c) ** 2 - _H(b - c) * 5 * _P ** 2 * (b - c) ** 2
    if (n, n_neg) == (3, 0):
        return 2.5 * c ** 2 - _H(c - b) * 5 * (c - b) ** 2
    if (n, n_neg) == (2, 1):
        return 2.5 * (1 - c) ** 2 / _P
    return 0.0


def _A3_direct(n: int, n_neg: int, c: float) -> float:
    p = _P
    if (n, n_neg) == (0, 5):
        return _H(p ** -3 - c) * 0.5 * (p + 1 / p) * (p ** -3 - c) ** 2
    if (n, n_neg) == (1, 5):
        return _H(p ** -3 - c) * 2.5 * (p ** -3 - c) ** 2
    if (n, n_neg) == (2, 5):
        return (_H(p ** -2 - c) * 2.5 * p ** 2 * (p ** -2 - c) ** 2
                - _H(p ** -3 - c) * 5 * p ** 2 * (p ** -3 - c) ** 2)
    if (n, n_neg) == (3, 5):
        return _H(2 * p ** -3 - c) * (
            2.5 * c ** 2
            - _H(c - p ** -3) * 5 * p ** 2 * (c - p ** -3) ** 2
            + _H(c - p ** -2) * 5 * p ** 3 * (c - p ** -2) ** 2)
    if (n, n_neg) == (4, 5):
        return _H(c - p ** -3) * (
            _H(p ** -2 + p ** -4 - c) * 2.5 * p ** 3 * (p ** -2 + p ** -4 - c) ** 2
            - _H(2 * p ** -3 - c) * 5 * p ** 3 * (2 * p ** -3 - c) ** 2
            + _H(p ** -2 - c) * 5 * p ** 2 * (p ** -2 - c) ** 2)
    if (n, n_neg) == (5, 5):
        return _H(c - p ** -3) * (
            _H(2 * p ** -2 - c) * 0.5 * (p + 1 / p) * (2 * p ** -2 - c) ** 2
            - _H(p ** -2 + p ** -4 - c) * 2.5 * p ** 3 * (p ** -2 + p ** -4 - c) ** 2
            + _H(2 * p ** -3 - c) * 2.5 * p ** 3 * (2 * p ** -3 - c) ** 2)
    if (n, n_neg) == (3, 4):
        return _H(p ** -1 - c) * (
            2.5 * p ** -3 * c ** 2
            - _H(c - p ** -2) * 5 * p * (c - p ** -2) ** 2
            + _H(c - 2 * p ** -3) * 2.5 * p ** 3 * (c - 2 * p ** -3) ** 2)
    if (n, n_neg) == (4, 4):
        return _H(p ** -1 - c) * (
            _H(c - p ** -2) * 5 * (c - p ** -2) ** 2
            - _H(c - 2 * p ** -3) * 5 * p ** 3 * (c - 2 * p ** -3) ** 2
            + _H(c - p ** -2 - p ** -4) * 5 * p ** 3 * (c - p ** -2 - p ** -4) ** 2)
    if (n, n_neg) == (3, 3):
        return (5 * p ** -4 * (1 - c) ** 2
                - _H(p ** -1 - c) * 5 * p ** -1 * (p ** -1 - c) ** 2
                + _H(p ** -2 - c) * 5 * p ** -1 * (p ** -2 - c) ** 2)
    if (n, n_neg) == (2, 3):
        return (5 * p ** -3 * (1 - c) ** 2
                - _H(p ** -2 - c) * 2.5 * p ** -1 * (p ** -2 - c) ** 2)
    if (n, n_neg) == (2, 2):
        return 10 * c * (1 - c) / p
    if (n, n_neg) == (1, 2):
        return 2.5 * (1 - c) ** 2 / p
    return None  # not one of the twelve transcribed functions


_A3_TWELVE = ((0, 5), (1, 5), (2, 5), (3, 5), (4, 5), (5, 5),
              (3, 4), (4, 4), (3, 3), (2, 3), (2, 2), (1, 2))
_A3_MIRRORED = tuple((b, a) for (a, b) in _A3_TWELVE if a != b)

#: allowed vertex types per index (positive frequency for some c in [0, 1))
CENSUS = {
    1: {(5, 0), (4, 0), (3, 0)},
    2: {(5, 0), (5, 1), (5, 2), (4, 0), (4, 1), (3, 2), (3, 1), (3, 0), (2, 1)},
    3: set(_A3_TWELVE) | set(_A3_MIRRORED),
    4: {(0, 5), (1, 5), (2, 5), (0, 4), (1, 4), (2, 3), (1, 3), (0, 3), (1, 2)},
    5: {(0, 5), (0, 4), (0, 3)},
}


def analytic_A(index: int, n_pos: int, n_neg: int, c: float) -> float:
    """Frequency function A_I[n, n']; the probability of the type is A / (5 p).

    Types outside the census return 0.  The I = 5 column comes from I = 1 by
    c -> 1 - c, I = 4 from I = 2 with the edge counts swapped, and the eight
    untranscribed I = 3 functions from their mirrors, all per the same rule.
    """
    if not 1 <= index <= 5:
        raise ValueError(f"index must be in [1, 5], got {index}")
    if not 0.0 <= c < 1.0:
        raise ValueError(f"c must lie in [0, 1), got {c}")
    if not (0 <= n_pos <= 5 and 0 <= n_neg <= 5):
        raise ValueError(f"edge counts must be in [0, 5], got ({n_pos}, {n_neg})")
    if index == 1:
        return _A1(n_pos, n_neg, c)
    if index == 5:
        return _A1(n_neg, n_pos, 1.0 - c)
    if index == 2:
        return _A2(n_pos, n_neg, c)
    if index == 4:
        return _A2(n_neg, n_pos, 1.0 - c)
    direct = _A3_direct(n_pos, n_neg, c)
    if direct is not None:
        return direct
    mirrored = _A3_direct(n_neg, n_pos, 1.0 - c)
    return mirrored if mirrored is not None else 0.0


def analytic_probability(index: int, n_pos: int, n_neg: int, c: float) -> float:
    return analytic_A(index, n_pos, n_neg, c) / (5.0 * _P)


def census_support(c: float, tol: float = 1e-12) -> list[VertexType]:
    """All vertex types with positive analytic frequency at this c, sorted."""
    out = []
    for index in range(1, 6):
        for (n, n_neg) in sorted(CENSUS[index]):
            if analytic_A(index, n, n_neg, c) > tol:
                out.append(VertexType(index, n, n_neg))
    return out


# ---------------------------------------------------------------------------
# empirical statistics
# ---------------------------------------------------------------------------

class FrequencyRow(NamedTuple):
    index: int
    n_pos: int
    n_neg: int
    analytic: float
    empirical: float
    count: int


@dataclass(frozen=True)
class FrequencyReport:
    c: float
    rows: tuple
    n_vertices: int

    @property
    def analytic_total(self) -> float:
        return sum(r.analytic for r in self.rows)

    @property
    def max_abs_err(self) -> float:
        return max((abs(r.analytic - r.empirical) for r in self.rows), default=0.0)


def empirical_frequencies(radius: int, shift: GridShift, wset: WindowSet,
                          basis: ProjectionBasis | None = None,
                          margin: int = 2, threads: int = 1) -> FrequencyReport:
    """Classify every boundary-complete vertex in the label box and tally types.

    Vertices within `margin` label steps of the box edge are discarded so no
    neighborhood is truncated.  Raises CensusViolationError if a classified
    type falls outside the analytic support at this c.
    """
    basis = basis or make_basis()
    labels, _ = enumerate_accepted_2d(radius, shift, wset, basis, threads=threads)
    inner = np.abs(labels).max(axis=1) <= radius - margin
    labels = labels[inner]
    if len(labels) == 0:
        raise ValueError("label box too small: no boundary-complete vertices")

    n_pos, n_neg = neighbor_counts(labels, shift, wset, basis)
    index = labels.sum(axis=1)
    counts = Counter(zip(index.tolist(), n_pos.tolist(), n_neg.tolist()))

    total = len(labels)
    support = {(vt.index, vt.n_pos, vt.n_neg) for vt in census_support(shift.c)}
    for key in counts:
        if key[1:] not in CENSUS[key[0]]:
            raise CensusViolationError(
                f"observed type [{key[1]},{key[2]}]_{key[0]} is outside the census")
        if key not in support:
            raise CensusViolationError(
                f"observed type [{key[1]},{key[2]}]_{key[0]} has zero analytic "
                f"frequency at c={shift.c}")

    rows = []
    for (i, n, nn) in sorted(support | set(counts)):
        cnt = counts.get((i, n, nn), 0)
        rows.append(FrequencyRow(i, n, nn,
                                 analytic=analytic_probability(i, n, nn, shift.c),
                                 empirical=cnt / total, count=cnt))
    return FrequencyReport(c=shift.c, rows=tuple(rows), n_vertices=total)
