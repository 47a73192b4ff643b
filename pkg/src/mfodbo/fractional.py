"""Grünwald–Letnikov memory weights and the memory-augmented rolling update."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .core import SearchSpace, UsageError

DEFAULT_DELTA = 0.1
DEFAULT_MEMORY = 4


@dataclass(frozen=True)
class GlCoefficients:
    delta: float
    m: int
    weights: np.ndarray


def gl_coefficients(delta: float, m: int = DEFAULT_MEMORY) -> GlCoefficients:
    """Weights of x(t), x(t-1), ..., x(t-m+1) in the truncated GL sum.

    weights[k-1] = delta (1-delta) (2-delta) ... (k-1-delta) / k!, built by
    weights[k] = weights[k-1] * (k - delta) / (k + 1). All are non-negative
    for delta in (0, 1]; delta = 1 leaves only the first.
    """
    if not 0.0 < delta <= 1.0:
        raise UsageError(f"fractional order must lie in (0, 1], got {delta}")
    if int(m) != m or m < 1:
        raise UsageError(f"memory depth must be a positive integer, got {m}")
    m = int(m)
    w = np.empty(m)
    w[0] = delta
    for k in range(1, m):
        w[k] = w[k - 1] * (k - delta) / (k + 1)
    w.flags.writeable = False
    return GlCoefficients(float(delta), m, w)


class HistoryBuffer:
    """Last ``depth`` positions of each individual, newest first.

    Every slot starts as the initial position, so the first updates see a
    constant past instead of missing terms.
    """

    def __init__(self, initial: np.ndarray, depth: int):
        initial = np.array(initial, dtype=float, ndmin=2)
        if depth < 1:
            raise UsageError("history depth must be at least 1")
        self.depth = int(depth)
        self.data = np.repeat(initial[:, None, :], self.depth, axis=1)

    def __getitem__(self, i: int) -> np.ndarray:
        return self.data[i]

    def push(self, i: int, position: np.ndarray) -> None:
        row = self.data[i]
        row[1:] = row[:-1]
        row[0] = position

    def current(self, i: int) -> np.ndarray:
        return self.data[i, 0]

    def previous(self, i: int) -> np.ndarray:
        return self.data[i, 1 if self.depth > 1 else 0]


def fo_roll_update(
    history: np.ndarray,
    x_prev: np.ndarray,
    worst: np.ndarray,
    coeffs: GlCoefficients,
    alpha: float,
    k: float,
    b: float,
    space: SearchSpace,
) -> np.ndarray:
    """x(t+1) = sum_k w_k x(t+1-k) + alpha k x(t-1) + b |x(t) - X^w|, clamped.

    ``history`` holds at least ``coeffs.m`` rows, newest (x(t)) first. Note
    that x(t-1) enters twice: once through the memory sum and once through
    the deflection term.
    """
    hist = np.ascontiguousarray(history, dtype=float)
    if hist.ndim != 2 or hist.shape[0] < coeffs.m or hist.shape[1] != space.dim:
        raise UsageError(f"history must have shape (>= {coeffs.m}, {space.dim}), got {hist.shape}")
    return kernels.fo_roll(
        hist[: coeffs.m],
        np.ascontiguousarray(coeffs.weights),
        np.ascontiguousarray(x_prev, dtype=float),
        np.ascontiguousarray(worst, dtype=float),
        float(alpha) * float(k),
        float(b),
        space.lower,
        space.upper,
    )
