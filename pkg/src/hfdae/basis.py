"""Hybrid piecewise-constant/ramp basis on a uniform time grid.

Each cell ``[node(i), node(i+1))`` carries two basis elements: a unit "hold"
(one on the cell, zero elsewhere) and a rising "ramp" (zero to one across the
cell).  Weighting the hold by the left node sample and the ramp by the sample
difference makes the reconstruction the piecewise-linear interpolant of the
node samples, which is what every downstream operator acts on.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "Grid",
    "HfSeries",
    "expand_samples",
    "expand_function",
    "expand_composite",
    "evaluate",
    "basis_hold",
    "basis_ramp",
    "basis_inner_products",
    "BasisInnerProducts",
]


@dataclass(frozen=True)
class Grid:
    """Uniform grid of ``m`` cells spanning ``[t_start, t_end]``."""

    m: int
    t_end: float
    t_start: float = 0.0

    def __post_init__(self):
        if not isinstance(self.m, (int, np.integer)) or self.m < 1:
            raise ValueError(f"cell count must be a positive integer, got {self.m!r}")
        if not (np.isfinite(self.t_start) and np.isfinite(self.t_end)):
            raise ValueError("grid endpoints must be finite")
        if self.t_end <= self.t_start:
            raise ValueError(f"empty grid span [{self.t_start}, {self.t_end}]")

    @property
    def h(self) -> float:
        return (self.t_end - self.t_start) / self.m

    def node(self, j):
        """Node position(s); the last node is pinned to ``t_end`` exactly."""
        j = np.asarray(j)
        t = self.t_start + j * self.h
        t = np.where(j == self.m, self.t_end, t)
        return float(t) if t.ndim == 0 else t

    def nodes(self) -> np.ndarray:
        return np.linspace(self.t_start, self.t_end, self.m + 1)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class HfSeries:
    """A function's coefficients in the hybrid basis.

    ``cs[i]`` is the sample held on cell ``i`` and ``ds[i]`` the ramp weight.
    ``ds`` is derived as the first difference of the node samples (the closing
    sample lives in ``tail``), so the reconstruction always interpolates the
    ``m + 1`` node samples and the difference invariant holds exactly.
    """

    grid: Grid
    cs: np.ndarray
    tail: float
    ds: np.ndarray = field(init=False)

    def __post_init__(self):
        cs = np.asarray(self.cs, dtype=float)
        if cs.shape != (self.grid.m,):
            raise ValueError(
                f"expected {self.grid.m} cell samples, got shape {cs.shape}"
            )
        tail = float(self.tail)
        if not (np.all(np.isfinite(cs)) and np.isfinite(tail)):
            raise ValueError("non-finite coefficient in series")
        object.__setattr__(self, "cs", _frozen(cs))
        object.__setattr__(self, "tail", tail)
        object.__setattr__(self, "ds", _frozen(np.diff(np.append(cs, tail))))

    @property
    def node_values(self) -> np.ndarray:
        """Samples at all ``m + 1`` nodes."""
        return np.append(self.cs, self.tail)

    def __call__(self, t):
        return evaluate(self, t)


def expand_samples(samples: Sequence[float], grid: Grid) -> HfSeries:
    """Expand ``m + 1`` node samples into hybrid coefficients."""
    samples = np.asarray(samples, dtype=float)
    if samples.shape != (grid.m + 1,):
        raise ValueError(
            f"expected {grid.m + 1} node samples, got shape {samples.shape}"
        )
    return HfSeries(grid, samples[:-1], samples[-1])


def expand_function(f: Callable[[float], float], grid: Grid) -> HfSeries:
    """Sample ``f`` at the grid nodes and expand."""
    samples = np.empty(grid.m + 1)
    for j in range(grid.m + 1):
        t = grid.node(j)
        v = float(f(t))
        if not np.isfinite(v):
            raise ValueError(f"f returned non-finite value at node {j} (t={t:g})")
        samples[j] = v
    return expand_samples(samples, grid)


def expand_composite(
    N: Callable[..., float], args: Sequence[HfSeries]
) -> HfSeries:
    """Expand ``N(t, f_1(t), ..., f_p(t))`` given expansions of the arguments.

    The composite is sampled at the nodes (no product rule is attempted), so
    the result's node values equal ``N`` applied to the arguments' node
    samples exactly.
    """
    if not args:
        raise ValueError("need at least one argument series")
    grid = args[0].grid
    for k, s in enumerate(args[1:], start=1):
        if s.grid != grid:
            raise ValueError(f"argument {k} lives on a different grid")
    vals = np.stack([s.node_values for s in args])
    samples = np.empty(grid.m + 1)
    for j in range(grid.m + 1):
        t = grid.node(j)
        v = float(N(t, *vals[:, j]))
        if not np.isfinite(v):
            raise ValueError(f"composite returned non-finite value at node {j} (t={t:g})")
        samples[j] = v
    return expand_samples(samples, grid)


def evaluate(series: HfSeries, t):
    """Evaluate the reconstruction at ``t`` (scalar or array).

    Cells are half-open; the right endpoint of the span returns ``tail`` so
    the reconstruction is continuous on the closed interval.
    """
    grid = series.grid
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < grid.t_start) or np.any(t_arr > grid.t_end):
        raise ValueError(
            f"t outside grid span [{grid.t_start}, {grid.t_end}]"
        )
    j = np.floor((t_arr - grid.t_start) / grid.h).astype(int)
    j = np.minimum(j, grid.m - 1)
    # floor can land one cell low when t sits exactly on a node
    j = np.where(t_arr >= grid.t_start + (j + 1) * grid.h, j + 1, j)
    j = np.minimum(j, grid.m - 1)
    local = (t_arr - (grid.t_start + j * grid.h)) / grid.h
    out = series.cs[j] + series.ds[j] * local
    out = np.where(t_arr == grid.t_end, series.tail, out)
    return float(out) if out.ndim == 0 else out


def basis_hold(grid: Grid, i: int, t):
    """The unit hold on cell ``i``: one on ``[node(i), node(i+1))``, else zero."""
    t = np.asarray(t, dtype=float)
    lo, hi = grid.node(i), grid.node(i + 1)
    out = np.where((t >= lo) & (t < hi), 1.0, 0.0)
    return float(out) if out.ndim == 0 else out


def basis_ramp(grid: Grid, i: int, t):
    """The rising ramp on cell ``i``: (t - node(i))/h on the cell, else zero."""
    t = np.asarray(t, dtype=float)
    lo, hi = grid.node(i), grid.node(i + 1)
    out = np.where((t >= lo) & (t < hi), (t - lo) / grid.h, 0.0)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class BasisInnerProducts:
    """Pairwise integrals of the basis elements over the grid span."""

    hold_hold: np.ndarray
    ramp_ramp: np.ndarray
    hold_ramp: np.ndarray


def basis_inner_products(grid: Grid) -> BasisInnerProducts:
    """Numerically integrate all pairwise basis products.

    Uses per-cell Gauss-Legendre quadrature, exact for the piecewise
    polynomials involved.  Because supports are disjoint, every off-diagonal
    entry integrates to zero; the diagonals come out as h, h/3 and h/2 for
    hold*hold, ramp*ramp and hold*ramp respectively.
    """
    m = grid.m
    x, w = np.polynomial.legendre.leggauss(4)
    nodes = grid.nodes()
    # all quadrature points, cell by cell
    mid = 0.5 * (nodes[:-1] + nodes[1:])
    half = 0.5 * grid.h
    pts = (mid[:, None] + half * x[None, :]).ravel()
    wts = np.tile(w * half, m)
    holds = np.stack([basis_hold(grid, i, pts) for i in range(m)])
    ramps = np.stack([basis_ramp(grid, i, pts) for i in range(m)])
    return BasisInnerProducts(
        hold_hold=(holds * wts) @ holds.T,
        ramp_ramp=(ramps * wts) @ ramps.T,
        hold_ramp=(holds * wts) @ ramps.T,
    )
