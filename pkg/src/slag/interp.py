"""Piecewise-linear interpolation on the simplex lattice.

Each lattice cell is split into the standard n! simplices by sorting the
fractional coordinates (Kuhn triangulation); values are interpolated
barycentrically along the resulting vertex chain.  Works for scalar or
vector node data.
"""

from __future__ import annotations

import numpy as np

from .grid import PI, SimplexGrid

_W_TOL = 1e-9


class SimplexInterpolant:
    """Linear interpolant of node values over the triangulated lattice."""

    def __init__(self, grid: SimplexGrid, values: np.ndarray):
        values = np.asarray(values, dtype=float)
        if values.shape[0] != grid.node_count:
            raise ValueError("values must be indexed by grid nodes")
        self.grid = grid
        self.values = values

    def __call__(self, pts) -> np.ndarray:
        grid = self.grid
        n, N, h = grid.n, grid.N, grid.h
        pts = np.asarray(pts, dtype=float)
        scalar = pts.ndim == 1
        pts = np.atleast_2d(pts)
        b = pts / h
        if (b < -_W_TOL).any() or (b.sum(axis=1) > N + _W_TOL).any():
            bad = pts[(b < -_W_TOL).any(axis=1) | (b.sum(axis=1) > N + _W_TOL)][0]
            raise ValueError(f"point {bad} outside the simplex")
        b = np.clip(b, 0.0, N)
        z = np.floor(b).astype(np.int64)
        z = np.minimum(z, N - 1)  # keep the cell anchor inside
        f = b - z
        order = np.argsort(-f, axis=1, kind="stable")
        fs = np.take_along_axis(f, order, axis=1)
        # chain weights: 1 - f_(1), f_(1) - f_(2), ..., f_(n)
        w = np.empty((len(pts), n + 1))
        w[:, 0] = 1.0 - fs[:, 0]
        w[:, 1:n] = fs[:, : n - 1] - fs[:, 1:]
        w[:, n] = fs[:, n - 1]

        out_shape = (len(pts),) + self.values.shape[1:]
        out = np.zeros(out_shape)
        vertex = z.copy()
        rows = np.arange(len(pts))
        for step in range(n + 1):
            if step > 0:
                vertex[rows, order[:, step - 1]] += 1
            idx = grid.lookup(vertex)
            missing = idx < 0
            if missing.any():
                if (np.abs(w[missing, step]) > _W_TOL).any():
                    raise ValueError("interpolation cell leaves the grid")
                idx = np.where(missing, 0, idx)
                w[missing, step] = 0.0
            contrib = w[:, step]
            if self.values.ndim == 1:
                out += contrib * self.values[idx]
            else:
                out += contrib[:, None] * self.values[idx]
        return out[0] if scalar else out
