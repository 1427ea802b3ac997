"""Inductive Dirichlet prescription on the simplex boundary.

Each codimension-one face carries the (n-1)-dimensional solution in face
coordinates with the face-restricted metric: zeros for 1D faces, the
closed-form 2D solution for triangle faces, and a recursive numerical solve
above that.  Vertices are pinned to exactly 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exact2d import Solution2D
from .grid import ScalarField, SimplexGrid, build_grid
from .metric import FaceError, Metric, face_metric

# face-solution memo for the n >= 4 recursion, keyed on (m, N, metric fingerprint)
_face_cache: dict = {}


@dataclass(frozen=True)
class FaceChart:
    """Affine identification of one codimension-one face with the Delta_{n-1} grid.

    ``node_index[q]`` is the bulk-grid index of the face node whose face-grid
    index is q; the map is a bijection at equal subdivision N.
    """

    face: int
    face_grid: SimplexGrid
    node_index: np.ndarray
    metric: Metric


def face_chart(grid: SimplexGrid, metric: Metric, face: int) -> FaceChart:
    """Chart for face 0..n-1 (coordinate planes {x_j = 0}) or n (slanted)."""
    n, N = grid.n, grid.N
    if n < 2:
        raise FaceError("face charts need dimension >= 2")
    if not (0 <= face <= n):
        raise FaceError(f"invalid face {face!r} for dimension {n}")
    fgrid = build_grid(n - 1, N)
    if face < n:
        sel = np.flatnonzero(grid.nodes[:, face] == 0)
        proj = np.delete(grid.nodes[sel], face, axis=1)
    else:
        sel = np.flatnonzero(grid.nodes.sum(axis=1) == N)
        proj = grid.nodes[sel][:, : n - 1]
    fidx = fgrid.lookup(proj)
    if (fidx < 0).any() or len(sel) != fgrid.node_count:
        raise AssertionError("face chart is not a bijection")
    node_index = np.empty(fgrid.node_count, dtype=np.int64)
    node_index[fidx] = sel
    return FaceChart(face, fgrid, node_index, face_metric(metric, face))


def _face_solution_values(m: int, N: int, metric: Metric) -> np.ndarray:
    """Solution values of the m-dimensional problem on its own grid."""
    if m == 1:
        return np.zeros(N + 1)
    if m == 2:
        fgrid = build_grid(2, N)
        return np.asarray(Solution2D(metric).value(fgrid.coords))
    key = (m, N, metric.key())
    hit = _face_cache.get(key)
    if hit is not None:
        return hit
    from . import solver  # local import: solver consumes boundary data

    fgrid = build_grid(m, N)
    data = dirichlet_data(fgrid, metric)
    field, _ = solver.solve(fgrid, metric, data)
    _face_cache[key] = field.values
    return field.values


def dirichlet_data(grid: SimplexGrid, metric: Metric) -> ScalarField:
    """Boundary values on all non-interior nodes; interior left unset (NaN).

    Overlapping assignments (nodes shared by several faces) keep the first
    one, in face order 0..n; ``face_consistency`` measures the mismatch.
    """
    n = grid.n
    if metric.n != n:
        raise ValueError("metric dimension does not match the grid")
    vals = np.full(grid.node_count, np.nan)
    if n == 1:
        vals[grid.index((0,))] = 0.0
        vals[grid.index((grid.N,))] = 0.0
        return ScalarField(grid, vals)
    if n == 2:
        vals[~grid.interior_mask] = 0.0
        return ScalarField(grid, vals)
    for face in range(n + 1):
        chart = face_chart(grid, metric, face)
        fv = _face_solution_values(n - 1, grid.N, chart.metric)
        tgt = chart.node_index
        fresh = np.isnan(vals[tgt])
        vals[tgt[fresh]] = fv[fresh]
    vals[grid.vertex_indices()] = 0.0
    return ScalarField(grid, vals)


def face_consistency(grid: SimplexGrid, metric: Metric) -> float:
    """Max spread among per-face boundary assignments on shared nodes."""
    n = grid.n
    if n < 3:
        return 0.0
    spread = np.zeros(grid.node_count)
    lo = np.full(grid.node_count, np.inf)
    hi = np.full(grid.node_count, -np.inf)
    counts = np.zeros(grid.node_count, dtype=int)
    for face in range(n + 1):
        chart = face_chart(grid, metric, face)
        fv = _face_solution_values(n - 1, grid.N, chart.metric)
        tgt = chart.node_index
        lo[tgt] = np.minimum(lo[tgt], fv)
        hi[tgt] = np.maximum(hi[tgt], fv)
        counts[tgt] += 1
    shared = counts >= 2
    spread[shared] = hi[shared] - lo[shared]
    return float(spread.max(initial=0.0))
