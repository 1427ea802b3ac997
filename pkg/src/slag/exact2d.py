"""Closed-form two-dimensional solution: potential, gradient, Hessian.

Ground truth for every higher-dimensional construction.  The potential on
the closed triangle {x1, x2 >= 0, x1 + x2 <= pi} is

    (F(x1) + F(x2) + F(pi - x1 - x2) - F(pi)) / s,

with F the log-sine integral and s = sqrt(g11*g22 - g12^2).  It vanishes on
the whole triangle boundary; the gradient and Hessian diverge there, so they
are defined on the open interior only.
"""

from __future__ import annotations

import numpy as np

from .logsine import PI, log_sin_integral
from .metric import Metric

_TOL = 1e-9

_F_PI = log_sin_integral(PI)


class DomainError(ValueError):
    """Point outside the (closed or open, as required) triangle."""


def _margins(x: np.ndarray) -> np.ndarray:
    # distance to the three edge constraint values x1, x2, pi - x1 - x2
    return np.stack([x[..., 0], x[..., 1], PI - x[..., 0] - x[..., 1]], axis=-1)


class Solution2D:
    """Explicit solution of the two-dimensional Dirichlet problem."""

    def __init__(self, metric: Metric):
        if metric.n != 2:
            raise ValueError("Solution2D requires a 2x2 metric")
        self.metric = metric
        g = metric.mat
        det = g[0, 0] * g[1, 1] - g[0, 1] ** 2
        self.detfac = float(np.sqrt(det))

    def value(self, x) -> float | np.ndarray:
        """Potential at x in the closed triangle; exactly 0.0 on the boundary."""
        pts = np.asarray(x, dtype=float)
        scalar = pts.ndim == 1
        pts = np.atleast_2d(pts)
        m = _margins(pts)
        if np.any(m.min(axis=-1) < -_TOL):
            bad = pts[m.min(axis=-1) < -_TOL][0]
            raise DomainError(f"point {bad} outside the closed triangle")
        clipped = np.clip(m, 0.0, PI)
        vals = (
            log_sin_integral(clipped[..., 0])
            + log_sin_integral(clipped[..., 1])
            + log_sin_integral(clipped[..., 2])
            - _F_PI
        ) / self.detfac
        # boundary values are exactly zero (reflection identity); pin them
        vals = np.where(m.min(axis=-1) <= 0.0, 0.0, vals)
        return float(vals[0]) if scalar else vals

    def gradient(self, x) -> np.ndarray:
        """Momenta (log(sin x_i / sin(x1+x2))) / s at interior points."""
        pts = np.asarray(x, dtype=float)
        scalar = pts.ndim == 1
        pts = np.atleast_2d(pts)
        m = _margins(pts)
        if np.any(m.min(axis=-1) <= 0.0):
            bad = pts[m.min(axis=-1) <= 0.0][0]
            raise DomainError(f"gradient diverges: point {bad} not interior")
        s = pts[..., 0] + pts[..., 1]
        log_sin_s = np.log(np.sin(s))
        out = np.stack(
            [
                np.log(np.sin(pts[..., 0])) - log_sin_s,
                np.log(np.sin(pts[..., 1])) - log_sin_s,
            ],
            axis=-1,
        ) / self.detfac
        return out[0] if scalar else out

    def hessian(self, x) -> np.ndarray:
        """Hessian at an interior point; detfac * hessian has determinant one."""
        pt = np.asarray(x, dtype=float)
        if pt.shape != (2,):
            raise ValueError("hessian takes a single point of shape (2,)")
        if min(pt[0], pt[1], PI - pt[0] - pt[1]) <= 0.0:
            raise DomainError(f"hessian diverges: point {pt} not interior")
        c1 = 1.0 / np.tan(pt[0])
        c2 = 1.0 / np.tan(pt[1])
        c12 = 1.0 / np.tan(pt[0] + pt[1])
        return np.array([[c1 - c12, -c12], [-c12, c2 - c12]]) / self.detfac
