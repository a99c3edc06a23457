"""Closed-form operational matrices for fractional integration in the hybrid basis.

Fractionally integrating a single hold or ramp element gives node samples in
closed form.  Stacking those samples (and their first differences) as first
rows of upper-triangular Toeplitz matrices reduces fractional integration of
any expanded function to two short convolutions:

    order-a integral of the hold set  ->  p_ss (hold part) + p_st (ramp part)
    order-a integral of the ramp set  ->  p_ts (hold part) + p_tt (ramp part)

with entries, writing A1 = h^a/gamma(a+1) and A2 = h^a/gamma(a+2),

    p_ss row: 0, A1*(k^a - (k-1)^a)                       for k >= 1
    p_st row: A1, A1*((k+1)^a - 2k^a + (k-1)^a)
    p_ts row: 0, A2*(k^(a+1) - (k-1)^a * (k+a))
    p_tt row: A2, A2*((k+1)^(a+1) - (k+1+a)k^a - k^(a+1) + (k+a)(k-1)^a)

At a = 1 these collapse to the classical running-sum matrices h*[[0 1 1 ...]],
h*[[1 0 ...]], (h/2)*[[0 1 1 ...]], (h/2)*[[1 0 ...]].  The construction is
node-exact: the integrated series' node values equal the exact fractional
integral of the piecewise-linear reconstruction of the input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.signal

from .basis import Grid, HfSeries, _frozen

__all__ = [
    "gamma_fn",
    "UpperToeplitz",
    "OpMatrixSet",
    "build_op_matrices",
    "toeplitz_apply",
    "frac_integrate",
]


def gamma_fn(x: float) -> float:
    """Gamma function for positive arguments.

    Backed by the platform implementation, which is accurate to a few ulp;
    negative arguments and poles are out of scope here.
    """
    x = float(x)
    if not np.isfinite(x) or x <= 0.0:
        raise ValueError(f"gamma_fn requires x > 0, got {x!r}")
    return math.gamma(x)


@dataclass(frozen=True, eq=False)
class UpperToeplitz:
    """Upper-triangular Toeplitz matrix stored as its first row.

    Entry (i, j) is ``row[j - i]`` for j >= i and zero below the diagonal.
    Left-multiplication by a row vector is a truncated convolution; the dense
    matrix is never materialized.
    """

    row: np.ndarray

    def __post_init__(self):
        row = np.asarray(self.row, dtype=float)
        if row.ndim != 1 or row.size < 1:
            raise ValueError(f"first row must be a non-empty 1-D array, got shape {row.shape}")
        if not np.all(np.isfinite(row)):
            raise ValueError("non-finite entry in first row")
        object.__setattr__(self, "row", _frozen(row))

    @property
    def n(self) -> int:
        return self.row.size


def toeplitz_apply(coeffs, mat: UpperToeplitz, method: str = "direct") -> np.ndarray:
    """Row-vector times upper-triangular Toeplitz: out[j] = sum_{i<=j} coeffs[i]*row[j-i].

    ``method="direct"`` is the defining truncated convolution;
    ``method="fft"`` computes the same product via FFT convolution and agrees
    with the direct sum to rounding.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (mat.n,):
        raise ValueError(
            f"coefficient length {coeffs.shape} does not match matrix size {mat.n}"
        )
    if method == "direct":
        return np.convolve(coeffs, mat.row)[: mat.n]
    if method == "fft":
        return scipy.signal.fftconvolve(coeffs, mat.row)[: mat.n]
    raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True, eq=False)
class OpMatrixSet:
    """The four operational matrices for one (order, grid) pair."""

    alpha: float
    grid: Grid
    p_ss: UpperToeplitz
    p_st: UpperToeplitz
    p_ts: UpperToeplitz
    p_tt: UpperToeplitz


def _check_order(alpha: float) -> float:
    alpha = float(alpha)
    if not np.isfinite(alpha) or not (0.0 < alpha <= 1.0):
        raise ValueError(f"integration order must lie in (0, 1], got {alpha!r}")
    return alpha


@lru_cache(maxsize=128)
def _build_cached(alpha: float, grid: Grid) -> OpMatrixSet:
    m, h = grid.m, grid.h
    a1 = h**alpha / gamma_fn(alpha + 1.0)
    a2 = h**alpha / gamma_fn(alpha + 2.0)
    k = np.arange(1, m + 1, dtype=float)
    # node samples of the integrated first hold/ramp element; their first
    # differences are the ramp-part rows, mirroring d_i = c_{i+1} - c_i
    hold_nodes = np.zeros(m + 1)
    hold_nodes[1:] = a1 * (k**alpha - (k - 1.0) ** alpha)
    ramp_nodes = np.zeros(m + 1)
    ramp_nodes[1:] = a2 * (k ** (alpha + 1.0) - (k - 1.0) ** alpha * (k + alpha))
    return OpMatrixSet(
        alpha=alpha,
        grid=grid,
        p_ss=UpperToeplitz(hold_nodes[:m]),
        p_st=UpperToeplitz(np.diff(hold_nodes)),
        p_ts=UpperToeplitz(ramp_nodes[:m]),
        p_tt=UpperToeplitz(np.diff(ramp_nodes)),
    )


def build_op_matrices(alpha: float, grid: Grid) -> OpMatrixSet:
    """Build (or fetch from cache) the operational matrices for ``alpha`` on ``grid``."""
    return _build_cached(_check_order(alpha), grid)


def frac_integrate(series: HfSeries, alpha: float) -> HfSeries:
    """Fractional integral of order ``alpha`` of an expanded function.

    The output's node values are exact fractional integrals of the input's
    piecewise-linear reconstruction; in particular the result is node-exact
    whenever the underlying function is piecewise linear on the grid.
    """
    mats = build_op_matrices(alpha, series.grid)
    out_cs = toeplitz_apply(series.cs, mats.p_ss) + toeplitz_apply(series.ds, mats.p_ts)
    out_ds = toeplitz_apply(series.cs, mats.p_st) + toeplitz_apply(series.ds, mats.p_tt)
    return HfSeries(series.grid, out_cs, float(out_cs[-1] + out_ds[-1]))
