"""Ambient metric data and the eigenvalue-arctan operator machinery.

The second-order operator acting on a symmetric matrix H is G @ H; it is
self-adjoint in the inner product induced by G^{-1}, so its spectrum is real
and is computed here through the congruent symmetric matrix A.T @ H @ A with
A @ A.T = G.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

_SYM_TOL = 1e-12


class FaceError(ValueError):
    """Invalid simplex face identifier."""


def _mirrored(mat: np.ndarray) -> np.ndarray:
    # upper triangle is authoritative; mirror it so storage is exactly symmetric
    upper = np.triu(mat)
    return upper + np.triu(mat, 1).T


def _require_symmetric(h: np.ndarray, what: str) -> np.ndarray:
    h = np.asarray(h, dtype=float)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"{what}: expected a square matrix, got shape {h.shape}")
    scale = max(1.0, float(np.abs(h).max()))
    if float(np.abs(h - h.T).max()) > _SYM_TOL * scale:
        raise ValueError(f"{what}: matrix is not symmetric")
    return h


@dataclass(frozen=True, eq=False)
class Metric:
    """Positive definite symmetric matrix defining the ambient structure."""

    n: int
    mat: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.mat, dtype=float)
        if m.shape != (self.n, self.n):
            raise ValueError(f"metric matrix shape {m.shape} != ({self.n}, {self.n})")
        m = _mirrored(m)
        eigs = np.linalg.eigvalsh(m)
        if eigs[0] <= 0.0:
            raise ValueError(f"metric not positive definite: min eigenvalue {eigs[0]:.3e}")
        m.flags.writeable = False
        object.__setattr__(self, "mat", m)

    @staticmethod
    def identity(n: int) -> "Metric":
        return Metric(n, np.eye(n))

    @cached_property
    def inv(self) -> np.ndarray:
        out = np.linalg.inv(self.mat)
        out = 0.5 * (out + out.T)
        out.flags.writeable = False
        return out

    @cached_property
    def chol(self) -> np.ndarray:
        out = np.linalg.cholesky(self.mat)
        out.flags.writeable = False
        return out

    def key(self) -> bytes:
        """Hashable fingerprint at 1e-14 granularity (for memoization)."""
        return np.round(self.mat, 14).tobytes() + bytes([self.n])


@dataclass(frozen=True)
class Phase:
    """Phase constant of the graph equation, |theta_hat| < n*pi/2."""

    n: int
    theta_hat: float

    def __post_init__(self):
        if not (-0.5 * self.n * np.pi < self.theta_hat < 0.5 * self.n * np.pi):
            raise ValueError(
                f"theta_hat {self.theta_hat} outside (-{self.n}pi/2, {self.n}pi/2)"
            )


def convex_branch_phase(n: int) -> float:
    """Phase of the convex branch used by the whole pipeline: (n-1)*pi/2."""
    return 0.5 * (n - 1) * np.pi


def normalize_metric(metric: Metric) -> np.ndarray:
    """Lower-triangular A with A @ A.T = G.

    The coordinate change x = A @ x_new carries the problem to the standard
    metric (convention fixed here: A, not A.T, multiplies the new
    coordinates).
    """
    return np.array(metric.chol)


def operator_spectrum(metric: Metric, hess: np.ndarray) -> np.ndarray:
    """Sorted eigenvalues of G @ H, via the symmetric congruence A.T @ H @ A."""
    h = _require_symmetric(hess, "operator_spectrum")
    if h.shape != (metric.n, metric.n):
        raise ValueError(f"hessian shape {h.shape} != metric dimension {metric.n}")
    a = metric.chol
    return np.linalg.eigvalsh(a.T @ h @ a)


def arctan_sum(metric: Metric, hess: np.ndarray) -> float:
    """Sum of arctan over the spectrum of G @ H; lies in (-n*pi/2, n*pi/2)."""
    return float(np.arctan(operator_spectrum(metric, hess)).sum())


def arctan_row_bound(a_mat: np.ndarray, psd_tol: float = 1e-12) -> tuple[float, float]:
    """(sum arctan eigs, sum arctan diagonal) of a PSD symmetric matrix.

    The first never exceeds the second (concavity of arctan on [0, inf));
    callers get both sides so the inequality itself stays a checkable fact.
    """
    a = _require_symmetric(a_mat, "arctan_row_bound")
    eigs = np.linalg.eigvalsh(a)
    if eigs[0] < -psd_tol:
        raise ValueError(
            f"arctan_row_bound: matrix not positive semidefinite "
            f"(eigenvalue {eigs[0]:.6e} < -{psd_tol:g})"
        )
    lhs = float(np.arctan(eigs).sum())
    rhs = float(np.arctan(np.diag(a)).sum())
    return lhs, rhs


def face_metric(metric: Metric, face: int) -> Metric:
    """Metric of the (n-1)-dimensional problem carried by a codimension-one face.

    Faces are indexed 0..n: face j < n is the coordinate plane {x_j = 0}
    (delete row/column j); face n is the slanted plane {sum x = pi},
    parametrized by s -> (s_1, ..., s_{n-1}, pi - sum s), whose pullback is
    G_kl - G_kn - G_nl + G_nn.
    """
    n = metric.n
    if n < 2:
        raise FaceError("face_metric requires dimension >= 2")
    if not isinstance(face, (int, np.integer)) or not (0 <= face <= n):
        raise FaceError(f"invalid face {face!r} for dimension {n}")
    g = metric.mat
    if face < n:
        keep = [i for i in range(n) if i != face]
        sub = g[np.ix_(keep, keep)]
    else:
        m = np.vstack([np.eye(n - 1), -np.ones(n - 1)])
        sub = m.T @ g @ m
    return Metric(n - 1, sub)
