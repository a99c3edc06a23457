"""Marching collocation solver for semi-explicit fractional DAEs.

A system of Caputo-differential equations ``D^a_i y_i = f_i(t, y)`` plus
algebraic constraints ``0 = g(t, y)`` is rewritten in integral form,

    y_i(t) = y_i(0) + (order-a_i fractional integral of f_i)(t),

and every quantity is expanded in the hybrid basis.  Matching hold
coefficients node by node gives, thanks to the upper-triangular Toeplitz
structure of the operational matrices, an implicit n-dimensional algebraic
system per node that only references earlier nodes.  The grid is therefore
solved by forward marching with one damped-Newton solve per node; the ramp
coefficient equations then hold automatically (they are first differences of
consecutive hold equations), which `ramp_equation_residual` verifies.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from .basis import Grid, _frozen
from .operational import build_op_matrices, toeplitz_apply

__all__ = [
    "FdaeProblem",
    "SolverConfig",
    "SolutionGrid",
    "ResidualMap",
    "NewtonFailure",
    "EvaluationError",
    "integral_reformulate",
    "newton_solve_node",
    "solve",
    "error_report",
    "ramp_equation_residual",
]

_DAMPING_FLOOR = 1.0 / 64.0
_PIVOT_RTOL = 1e-14


class NewtonFailure(RuntimeError):
    """A per-node Newton solve did not converge."""


class EvaluationError(RuntimeError):
    """A right-hand side or constraint produced a non-finite value."""


@dataclass(frozen=True, eq=False)
class FdaeProblem:
    """Semi-explicit fractional DAE on [0, t_end].

    ``rhs[i]`` is the forcing of the i-th differential equation, acting on the
    unknown with index ``diff_indices[i]`` and carrying Caputo order
    ``orders[i]``; the remaining unknowns are determined by ``constraints``.
    Right-hand sides receive ``(t, y)`` with the components of ``y`` along
    axis 0 and should use numpy operations so they also evaluate vectorized.
    """

    n: int
    rhs: tuple
    constraints: tuple
    orders: tuple
    y0: np.ndarray
    t_end: float = 1.0
    diff_indices: tuple | None = None
    lower_bounds: np.ndarray | None = None
    consistency_tol: float = 1e-10

    def __post_init__(self):
        rhs = tuple(self.rhs)
        constraints = tuple(self.constraints)
        orders = tuple(float(a) for a in self.orders)
        if len(rhs) < 1:
            raise ValueError("need at least one differential equation")
        if len(orders) != len(rhs):
            raise ValueError(
                f"{len(rhs)} differential equations but {len(orders)} orders"
            )
        for a in orders:
            if not np.isfinite(a) or not (0.0 < a <= 1.0):
                raise ValueError(f"Caputo orders must lie in (0, 1], got {a!r}")
        if self.n != len(rhs) + len(constraints):
            raise ValueError(
                f"n={self.n} but {len(rhs)} differential + {len(constraints)} algebraic equations"
            )
        y0 = np.asarray(self.y0, dtype=float)
        if y0.shape != (self.n,):
            raise ValueError(f"y0 must have shape ({self.n},), got {y0.shape}")
        if not np.all(np.isfinite(y0)):
            raise ValueError("non-finite initial value")
        di = self.diff_indices
        di = tuple(range(len(rhs))) if di is None else tuple(int(i) for i in di)
        if sorted(set(di)) != sorted(di) or len(di) != len(rhs):
            raise ValueError("diff_indices must be distinct, one per differential equation")
        if any(i < 0 or i >= self.n for i in di):
            raise ValueError("diff_indices out of range")
        lb = self.lower_bounds
        if lb is not None:
            lb = np.asarray(lb, dtype=float)
            if lb.shape != (self.n,):
                raise ValueError(f"lower_bounds must have shape ({self.n},)")
            if np.any(y0 < lb):
                raise ValueError("initial value violates lower bounds")
            lb = _frozen(lb)
        if not np.isfinite(self.t_end) or self.t_end <= 0.0:
            raise ValueError(f"t_end must be positive, got {self.t_end!r}")
        for q, g in enumerate(constraints):
            r0 = float(g(0.0, y0))
            if not np.isfinite(r0) or abs(r0) > self.consistency_tol:
                raise ValueError(
                    f"inconsistent initialization: constraint {q} residual {r0:g} at t=0"
                )
        object.__setattr__(self, "rhs", rhs)
        object.__setattr__(self, "constraints", constraints)
        object.__setattr__(self, "orders", orders)
        object.__setattr__(self, "y0", _frozen(y0))
        object.__setattr__(self, "diff_indices", di)
        object.__setattr__(self, "lower_bounds", lb)

    @property
    def n_diff(self) -> int:
        return len(self.rhs)

    @property
    def alg_indices(self) -> tuple:
        return tuple(i for i in range(self.n) if i not in self.diff_indices)


@dataclass(frozen=True)
class SolverConfig:
    """Grid size and Newton controls for one solve."""

    m: int
    newton_tol: float = 1e-12
    newton_max_iter: int = 50
    damping: float = 1.0
    jacobian_eps: float = math.sqrt(np.finfo(float).eps)

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if min(self.newton_tol, self.damping, self.jacobian_eps) <= 0.0:
            raise ValueError("tolerances and damping must be positive")
        if self.newton_max_iter < 1:
            raise ValueError("newton_max_iter must be >= 1")


@dataclass(frozen=True, eq=False)
class SolutionGrid:
    """Solved node values plus per-node Newton diagnostics.

    ``y`` has one row per unknown and one column per node.  On node failure
    the columns from the failing node onward are NaN and ``status`` says so;
    a converged grid satisfies every enforced equation to ``newton_tol``.
    """

    grid: Grid
    y: np.ndarray
    newton_iters: np.ndarray
    residuals: np.ndarray
    status: str
    failed_node: int | None = None
    relaxed_nodes: tuple = ()
    projected_nodes: tuple = ()

    @property
    def ok(self) -> bool:
        return self.status == "converged"

    def at_time(self, t):
        """Piecewise-linear interpolation of all unknowns at time(s) ``t``."""
        t = np.asarray(t, dtype=float)
        if np.any(t < self.grid.t_start) or np.any(t > self.grid.t_end):
            raise ValueError("t outside grid span")
        return np.stack([np.interp(t, self.grid.nodes(), row) for row in self.y])


@dataclass(frozen=True, eq=False)
class ResidualMap:
    """Per-node residual assembly for the integral-form equations.

    ``f_hist[i, k]`` holds the sample ``f_i(node(k), y(node(k)))`` for solved
    nodes ``k < j``; only those columns are ever read for the node-``j``
    residual, which is what makes forward marching exact.
    """

    problem: FdaeProblem
    grid: Grid
    rows_ss: tuple
    rows_st: tuple
    rows_ts: tuple
    rows_tt: tuple
    implicit_coeff: np.ndarray  # h^a/gamma(a+2) per differential equation

    def history(self, j: int, f_hist: np.ndarray) -> np.ndarray:
        """Known part of the fractional-integral estimate at node ``j``.

        For interior nodes this is the hold-coefficient convolution over
        samples at nodes < j; at the final node it is the previous hold
        coefficient plus the known part of the closing ramp coefficient.
        """
        m = self.grid.m
        if not 1 <= j <= m:
            raise ValueError(f"node index must lie in [1, {m}], got {j}")
        out = np.empty(self.problem.n_diff)
        for i in range(self.problem.n_diff):
            c = f_hist[i, :j]
            d = np.diff(c)
            ss, ts = self.rows_ss[i], self.rows_ts[i]
            if j < m:
                out[i] = c @ ss[j:0:-1] + d @ ts[j:1:-1]
            else:
                st, tt = self.rows_st[i], self.rows_tt[i]
                out[i] = (
                    c[: m - 1] @ ss[m - 1 : 0 : -1]
                    + d @ ts[m - 1 : 0 : -1]
                    + c @ st[m - 1 :: -1]
                    + d @ tt[m - 1 : 0 : -1]
                )
        return out

    def residual(self, j: int, y_trial: np.ndarray, f_hist: np.ndarray) -> np.ndarray:
        """Full n-vector residual at node ``j`` for trial values ``y_trial``."""
        hist = self.history(j, f_hist)
        return self.residual_implicit(j, y_trial, hist, f_hist[:, j - 1])

    def residual_implicit(
        self, j: int, y_trial: np.ndarray, hist: np.ndarray, f_prev: np.ndarray
    ) -> np.ndarray:
        """Residual given a precomputed history term (the Newton hot path)."""
        p = self.problem
        t = self.grid.node(j)
        r = np.empty(p.n)
        for i, idx in enumerate(p.diff_indices):
            fij = float(p.rhs[i](t, y_trial))
            if not np.isfinite(fij):
                raise EvaluationError(
                    f"non-finite right-hand side {i} at node {j} (t={t:g})"
                )
            r[i] = (
                y_trial[idx]
                - p.y0[idx]
                - hist[i]
                - self.implicit_coeff[i] * (fij - f_prev[i])
            )
        for q, g in enumerate(p.constraints):
            gv = float(g(t, y_trial))
            if not np.isfinite(gv):
                raise EvaluationError(
                    f"non-finite constraint {q} at node {j} (t={t:g})"
                )
            r[p.n_diff + q] = gv
        return r

    def residual_from_grid(self, j: int, y: np.ndarray) -> np.ndarray:
        """Residual at node ``j`` reading only columns <= j of a value grid."""
        f_hist = np.empty((self.problem.n_diff, j))
        for k in range(j):
            t = self.grid.node(k)
            for i in range(self.problem.n_diff):
                f_hist[i, k] = self.problem.rhs[i](t, y[:, k])
        return self.residual(j, y[:, j], f_hist)


def integral_reformulate(problem: FdaeProblem, grid: Grid) -> ResidualMap:
    """Assemble the per-node residual map of the integral-form system."""
    if grid.t_end != problem.t_end or grid.t_start != 0.0:
        raise ValueError("grid span must match the problem span [0, t_end]")
    rows_ss, rows_st, rows_ts, rows_tt, coeff = [], [], [], [], []
    for a in problem.orders:
        mats = build_op_matrices(a, grid)
        rows_ss.append(mats.p_ss.row)
        rows_st.append(mats.p_st.row)
        rows_ts.append(mats.p_ts.row)
        rows_tt.append(mats.p_tt.row)
        coeff.append(mats.p_tt.row[0])
    return ResidualMap(
        problem=problem,
        grid=grid,
        rows_ss=tuple(rows_ss),
        rows_st=tuple(rows_st),
        rows_ts=tuple(rows_ts),
        rows_tt=tuple(rows_tt),
        implicit_coeff=_frozen(np.array(coeff)),
    )


@dataclass
class _NewtonResult:
    y: np.ndarray
    iterations: int
    residual_norm: float
    projected: bool


def _project(y: np.ndarray, lower_bounds: np.ndarray | None) -> tuple[np.ndarray, bool]:
    if lower_bounds is None:
        return y, False
    clipped = np.maximum(y, lower_bounds)
    return clipped, bool(np.any(clipped != y))


def _newton(
    residual: Callable[[np.ndarray], np.ndarray],
    guess: np.ndarray,
    config: SolverConfig,
    lower_bounds: np.ndarray | None = None,
) -> _NewtonResult:
    y, projected = _project(np.array(guess, dtype=float), lower_bounds)
    n = y.size
    r = np.asarray(residual(y), dtype=float)
    if not np.all(np.isfinite(r)):
        raise NewtonFailure("non-finite residual at initial guess")
    norm = float(np.max(np.abs(r)))
    for it in range(1, config.newton_max_iter + 1):
        if norm <= config.newton_tol:
            return _NewtonResult(y, it - 1, norm, projected)
        # forward-difference Jacobian, refreshed every iteration
        jac = np.empty((n, n))
        for p in range(n):
            step = config.jacobian_eps * (1.0 + abs(y[p]))
            yp = y.copy()
            yp[p] += step
            rp = np.asarray(residual(yp), dtype=float)
            if not np.all(np.isfinite(rp)):
                raise NewtonFailure(f"non-finite residual while forming Jacobian column {p}")
            jac[:, p] = (rp - r) / step
        try:
            lu, piv = scipy.linalg.lu_factor(jac)
        except (ValueError, scipy.linalg.LinAlgError) as exc:
            raise NewtonFailure(f"Jacobian factorization failed: {exc}") from exc
        pivots = np.abs(np.diag(lu))
        if pivots.min() < _PIVOT_RTOL * max(pivots.max(), np.finfo(float).tiny):
            raise NewtonFailure("singular Jacobian")
        delta = scipy.linalg.lu_solve((lu, piv), -r)
        lam = config.damping
        while True:
            y_new, proj = _project(y + lam * delta, lower_bounds)
            try:
                r_new = np.asarray(residual(y_new), dtype=float)
                norm_new = float(np.max(np.abs(r_new)))
                if not np.isfinite(norm_new):
                    norm_new = np.inf
            except EvaluationError:
                norm_new = np.inf
            if norm_new < norm or norm_new <= config.newton_tol:
                y, r, norm = y_new, r_new, norm_new
                projected = projected or proj
                break
            lam *= 0.5
            if lam < _DAMPING_FLOOR:
                raise NewtonFailure(
                    f"damping floor reached with residual {norm:g} after {it} iterations"
                )
    if norm <= config.newton_tol:
        return _NewtonResult(y, config.newton_max_iter, norm, projected)
    raise NewtonFailure(
        f"no convergence in {config.newton_max_iter} iterations (residual {norm:g})"
    )


def newton_solve_node(
    residual: Callable[[np.ndarray], np.ndarray],
    guess,
    config: SolverConfig,
    lower_bounds=None,
) -> np.ndarray:
    """Damped Newton with finite-difference Jacobian and LU solves.

    Returns a root with infinity-norm residual below ``config.newton_tol``;
    raises :class:`NewtonFailure` on stagnation or a singular Jacobian.
    """
    guess = np.atleast_1d(np.asarray(guess, dtype=float))
    return _newton(
        lambda y: np.atleast_1d(residual(y)), guess, config, lower_bounds
    ).y


def solve(problem: FdaeProblem, config: SolverConfig) -> SolutionGrid:
    """March the grid, solving one implicit n-dimensional system per node.

    The initial guess at each node is the previous node's solution.  If a
    node fails at ``newton_tol``, one retry at a hundredfold tolerance is
    attempted and recorded in ``relaxed_nodes``; if that also fails the
    returned grid carries ``status='node-failure'`` and NaNs from the failing
    node onward rather than silently wrong values.
    """
    grid = Grid(config.m, problem.t_end)
    rmap = integral_reformulate(problem, grid)
    n, n_diff, m = problem.n, problem.n_diff, grid.m

    y = np.full((n, m + 1), np.nan)
    y[:, 0] = problem.y0
    f_samples = np.empty((n_diff, m + 1))
    iters = np.zeros(m + 1, dtype=int)
    resnorms = np.zeros(m + 1)
    relaxed: list[int] = []
    projected: list[int] = []
    status, failed = "converged", None

    def sample_rhs(j: int) -> None:
        t = grid.node(j)
        for i in range(n_diff):
            v = float(problem.rhs[i](t, y[:, j]))
            if not np.isfinite(v):
                raise EvaluationError(
                    f"non-finite right-hand side {i} at node {j} (t={t:g})"
                )
            f_samples[i, j] = v

    sample_rhs(0)
    resnorms[0] = max(
        (abs(float(g(0.0, problem.y0))) for g in problem.constraints), default=0.0
    )

    for j in range(1, m + 1):
        hist = rmap.history(j, f_samples)
        f_prev = f_samples[:, j - 1].copy()
        phi = lambda yv: rmap.residual_implicit(j, yv, hist, f_prev)
        guess = y[:, j - 1]
        try:
            res = _newton(phi, guess, config, problem.lower_bounds)
        except (NewtonFailure, EvaluationError):
            relaxed_cfg = dataclasses.replace(
                config, newton_tol=config.newton_tol * 100.0
            )
            try:
                res = _newton(phi, guess, relaxed_cfg, problem.lower_bounds)
                relaxed.append(j)
            except (NewtonFailure, EvaluationError):
                status, failed = "node-failure", j
                break
        y[:, j] = res.y
        iters[j] = res.iterations
        resnorms[j] = res.residual_norm
        if res.projected:
            projected.append(j)
        sample_rhs(j)

    return SolutionGrid(
        grid=grid,
        y=_frozen(y),
        newton_iters=iters,
        residuals=resnorms,
        status=status,
        failed_node=failed,
        relaxed_nodes=tuple(relaxed),
        projected_nodes=tuple(projected),
    )


def error_report(solution: SolutionGrid, exact: Sequence[Callable]) -> np.ndarray:
    """Per-unknown maximum absolute node error against exact solutions."""
    nodes = solution.grid.nodes()
    errs = np.empty(len(exact))
    for i, fn in enumerate(exact):
        vals = np.asarray(fn(nodes), dtype=float)
        errs[i] = np.max(np.abs(solution.y[i] - vals))
    return errs


def ramp_equation_residual(problem: FdaeProblem, solution: SolutionGrid) -> np.ndarray:
    """Max violation of the (unenforced) ramp-coefficient equations.

    The solver only enforces the hold-coefficient equations; because the ramp
    rows are first differences of the hold rows, the ramp equations are
    implied.  This recomputes them directly from the solution as a check.
    """
    grid = solution.grid
    m = grid.m
    nodes = grid.nodes()
    out = np.empty(problem.n_diff)
    for i, idx in enumerate(problem.diff_indices):
        f_nodes = np.array(
            [float(problem.rhs[i](nodes[k], solution.y[:, k])) for k in range(m + 1)]
        )
        mats = build_op_matrices(problem.orders[i], grid)
        cs, ds = f_nodes[:m], np.diff(f_nodes)
        rhs_ramp = toeplitz_apply(cs, mats.p_st) + toeplitz_apply(ds, mats.p_tt)
        lhs_ramp = np.diff(solution.y[idx])  # initial-value expansion has zero ramp part
        out[i] = np.max(np.abs(lhs_ramp - rhs_ramp))
    return out
