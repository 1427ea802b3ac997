"""Damped Newton solution of the discrete arctan-Hessian Dirichlet problem.

At every interior node the equation is

    sum_i arctan(lambda_i(G @ H_h(u))) = theta_hat,

with H_h the second-difference Hessian and Dirichlet values eliminated.  The
Newton system is assembled sparsely from the phase linearization
trace(((G H)^2 + I)^{-1} G dH) and solved with a direct sparse
factorization; backtracking damps on the residual sup norm.  If Newton
stalls, explicit pseudo-time relaxation du/dt = residual re-enters the
basin.

Nodes adjacent to the boundary carry O(1/h) Hessian entries that saturate
the arctan, so the convergence norm is measured on the 2h-interior by
default (config ``resid_delta``); the full-interior norm is reported too.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .grid import ScalarField, SimplexGrid, build_grid
from .interp import SimplexInterpolant
from .metric import Metric, convex_branch_phase

PI = np.pi


@dataclass
class SolverConfig:
    tol_residual: float = 1e-10
    max_iters: int = 200
    backtrack_factor: float = 0.5
    max_backtracks: int = 40
    init: object = "supersolution"  # or a ScalarField with interior values
    resid_delta: float | None = None  # None -> 2h
    theta_hat: float | None = None  # None -> (n-1)*pi/2
    relax_steps: int = 4000

    def __post_init__(self):
        if self.tol_residual <= 0:
            raise ValueError("tol_residual must be positive")
        if not (0.0 < self.backtrack_factor < 1.0):
            raise ValueError("backtrack factor must lie in (0, 1)")


@dataclass
class SolveReport:
    iterations: int = 0
    residual_inf: float = np.inf
    residual_inf_full: float = np.inf
    hess_eig_min: float = np.nan
    hess_eig_max: float = np.nan
    branch_ok: bool = False
    converged: bool = False
    wall_time: float = 0.0
    fallback_steps: int = 0
    newton_ratios: list = field(default_factory=list)

    def as_text(self) -> str:
        lines = [
            f"iterations={self.iterations}",
            f"residual_inf={self.residual_inf:.17g}",
            f"residual_inf_full={self.residual_inf_full:.17g}",
            f"hess_eig_min={self.hess_eig_min:.17g}",
            f"hess_eig_max={self.hess_eig_max:.17g}",
            f"branch_ok={int(self.branch_ok)}",
            f"converged={int(self.converged)}",
            f"wall_time={self.wall_time:.6g}",
            f"fallback_steps={self.fallback_steps}",
        ]
        return "\n".join(lines) + "\n"


class SolveFailure(RuntimeError):
    """Non-convergence; carries the best iterate and its report."""

    def __init__(self, message: str, field: ScalarField, report: SolveReport):
        super().__init__(message)
        self.field = field
        self.report = report


class _Workspace:
    def __init__(self, grid: SimplexGrid, metric: Metric):
        self.grid = grid
        self.metric = metric
        self.stencil = grid.stencil()
        self.chol = metric.chol

    def phases(self, values: np.ndarray):
        """(phases, eigvals, hessians) over interior nodes."""
        h = self.stencil.hessians(values)
        a = self.chol
        b = np.einsum("pi,kpq,qj->kij", a, h, a, optimize=True)
        eigs = np.linalg.eigvalsh(b)
        return np.arctan(eigs).sum(axis=1), eigs, h

    def weights(self, values: np.ndarray):
        """Phase values plus d(phase)/dH as (n_int, n, n) matrices."""
        h = self.stencil.hessians(values)
        a = self.chol
        b = np.einsum("pi,kpq,qj->kij", a, h, a, optimize=True)
        eigs, vecs = np.linalg.eigh(b)
        phases = np.arctan(eigs).sum(axis=1)
        inner = np.einsum(
            "kip,kp,kjp->kij", vecs, 1.0 / (1.0 + eigs**2), vecs, optimize=True
        )
        w = np.einsum("ip,kpq,jq->kij", a, inner, a, optimize=True)
        return phases, w


def residual(field: ScalarField, metric: Metric, theta_hat: float | None = None) -> np.ndarray:
    """Per-interior-node phase defect, in the grid's interior node order."""
    grid = field.grid
    if theta_hat is None:
        theta_hat = convex_branch_phase(grid.n)
    ws = _Workspace(grid, metric)
    phases, _, _ = ws.phases(field.values)
    return phases - theta_hat


def linearized_apply(metric: Metric, hess: np.ndarray, dhess: np.ndarray) -> float:
    """Directional derivative of the phase: trace(((G H)^2 + I)^{-1} G dH)."""
    a = metric.chol
    b = a.T @ np.asarray(hess, dtype=float) @ a
    b = 0.5 * (b + b.T)
    m = b @ b + np.eye(metric.n)
    w = a @ np.linalg.solve(m, a.T)
    return float(np.sum(w * np.asarray(dhess, dtype=float)))


def supersolution_init(grid: SimplexGrid, boundary: ScalarField) -> np.ndarray:
    """Cone over the {x_n = 0} face data from the apex (0, ..., 0, pi).

    Linear along rays through the apex, it matches the face data at x_n = 0
    and is a supersolution of the continuum problem.
    """
    n = grid.n
    vals = np.zeros(grid.node_count)
    if n == 1:
        return vals
    from .boundary import face_chart  # local import to avoid a module cycle

    chart = face_chart(grid, Metric.identity(n), n - 1)
    face_vals = boundary.values[chart.node_index]
    if np.any(np.isnan(face_vals)):
        raise ValueError("boundary data must cover the {x_n = 0} face")
    interp = SimplexInterpolant(chart.face_grid, face_vals)
    idx = grid.interior_idx
    x = grid.coords[idx]
    scale = 1.0 - x[:, n - 1] / PI  # positive at interior nodes
    stretched = x[:, : n - 1] / scale[:, None]
    vals[idx] = scale * interp(stretched)
    return vals


def solve(
    grid: SimplexGrid,
    metric: Metric,
    boundary: ScalarField,
    config: SolverConfig | None = None,
) -> tuple[ScalarField, SolveReport]:
    cfg = config or SolverConfig()
    n = grid.n
    theta = cfg.theta_hat if cfg.theta_hat is not None else convex_branch_phase(n)
    t0 = time.perf_counter()

    non_interior = ~grid.interior_mask
    if np.any(np.isnan(boundary.values[non_interior])):
        raise ValueError("boundary field must be set on every non-interior node")

    values = np.where(non_interior, boundary.values, 0.0)
    if isinstance(cfg.init, ScalarField):
        values[grid.interior_idx] = cfg.init.values[grid.interior_idx]
    elif cfg.init == "supersolution":
        values = np.where(non_interior, values, supersolution_init(grid, boundary))
    else:
        raise ValueError(f"unknown init {cfg.init!r}")

    ws = _Workspace(grid, metric)
    delta = cfg.resid_delta if cfg.resid_delta is not None else 2.0 * grid.h
    norm_mask = grid.delta_interior(delta)[grid.interior_idx]
    if not norm_mask.any():
        norm_mask = np.ones(len(grid.interior_idx), dtype=bool)

    report = SolveReport()

    def norm_of(res):
        return float(np.abs(res[norm_mask]).max())

    phases, w = ws.weights(values)
    res = phases - theta
    norm = norm_of(res)
    relax_dt = grid.h**2 / (4.0 * n * max(1.0, float(np.linalg.eigvalsh(metric.mat)[-1])))

    for it in range(cfg.max_iters):
        if norm <= cfg.tol_residual:
            report.converged = True
            break
        rows, cols, vals_j = ws.stencil.jacobian_coo(w)
        m = len(grid.interior_idx)
        jac = sp.coo_matrix((vals_j, (rows, cols)), shape=(m, m)).tocsr()
        try:
            step = spla.spsolve(jac, -res)
        except RuntimeError as exc:  # singular factorization
            raise SolveFailure(
                f"linear solve failed: {exc}", _best(grid, values), report
            ) from exc
        damping = 1.0
        accepted = False
        for _ in range(cfg.max_backtracks):
            trial = values.copy()
            trial[grid.interior_idx] += damping * step
            phases_t, w_t = ws.weights(trial)
            res_t = phases_t - theta
            norm_t = norm_of(res_t)
            if norm_t < norm:
                if damping == 1.0:
                    # predicted full-step decrease is the entire residual
                    report.newton_ratios.append((norm - norm_t) / norm)
                values, phases, w, res, norm = trial, phases_t, w_t, res_t, norm_t
                accepted = True
                break
            damping *= cfg.backtrack_factor
        report.iterations = it + 1
        if not accepted:
            # pseudo-time relaxation until the residual shrinks again
            relaxed = False
            for k in range(cfg.relax_steps):
                values[grid.interior_idx] += relax_dt * res
                phases, w = ws.weights(values)
                res = phases - theta
                report.fallback_steps += 1
                if norm_of(res) < 0.9 * norm:
                    norm = norm_of(res)
                    relaxed = True
                    break
            if not relaxed:
                report.residual_inf = norm
                report.residual_inf_full = float(np.abs(res).max())
                report.wall_time = time.perf_counter() - t0
                raise SolveFailure(
                    f"Newton stalled at residual {norm:.3e}", _best(grid, values), report
                )
    else:
        report.residual_inf = norm
        report.residual_inf_full = float(np.abs(res).max())
        report.wall_time = time.perf_counter() - t0
        raise SolveFailure(
            f"no convergence in {cfg.max_iters} iterations (residual {norm:.3e})",
            _best(grid, values),
            report,
        )

    phases, eigs, _ = ws.phases(values)
    res = phases - theta
    report.residual_inf = norm_of(res)
    report.residual_inf_full = float(np.abs(res).max())
    hess_eigs = np.linalg.eigvalsh(ws.stencil.hessians(values))
    report.hess_eig_min = float(hess_eigs.min())
    report.hess_eig_max = float(hess_eigs.max())
    lo, hi = 0.5 * (n - 2) * PI, 0.5 * n * PI
    report.branch_ok = bool(np.all((phases > lo) & (phases < hi)))
    report.wall_time = time.perf_counter() - t0
    return _best(grid, values), report


def _best(grid: SimplexGrid, values: np.ndarray) -> ScalarField:
    return ScalarField(grid, values)


def solve_dirichlet(n: int, N: int, metric: Metric, config: SolverConfig | None = None):
    """Grid + inductive boundary data + solve, in one call."""
    from .boundary import dirichlet_data

    grid = build_grid(n, N)
    data = dirichlet_data(grid, metric)
    field, report = solve(grid, metric, data, config)
    return grid, field, report
