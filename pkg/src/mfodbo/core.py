"""Shared domain types: search boxes, candidates, populations, objectives."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np


UNEVALUATED = math.nan


class UsageError(ValueError):
    """Raised when an operation is called with arguments outside its contract."""


class ObjectiveEvaluationError(RuntimeError):
    """An objective could not produce a value for a position."""

    def __init__(self, message: str, position=None):
        super().__init__(message)
        self.position = None if position is None else np.asarray(position, dtype=float).copy()


@dataclass(frozen=True)
class SearchSpace:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.ascontiguousarray(self.lower, dtype=float).reshape(-1)
        hi = np.ascontiguousarray(self.upper, dtype=float).reshape(-1)
        if lo.shape != hi.shape:
            raise UsageError("lower and upper bounds differ in length")
        if lo.size < 1:
            raise UsageError("search space needs at least one dimension")
        if not np.all(lo < hi):
            raise UsageError("every lower bound must be strictly below its upper bound")
        lo.flags.writeable = False
        hi.flags.writeable = False
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def uniform(cls, dim: int, low: float, high: float) -> "SearchSpace":
        return cls(np.full(dim, float(low)), np.full(dim, float(high)))

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    def contains(self, position) -> bool:
        x = np.asarray(position, dtype=float)
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))


def clamp_to_bounds(position, space: SearchSpace) -> np.ndarray:
    """Project ``position`` onto the box, coordinate by coordinate."""
    x = np.asarray(position, dtype=float)
    if x.shape != (space.dim,):
        raise UsageError(f"position has shape {x.shape}, expected ({space.dim},)")
    return np.minimum(space.upper, np.maximum(space.lower, x))


@dataclass(frozen=True)
class Candidate:
    position: np.ndarray
    fitness: float = UNEVALUATED

    @property
    def evaluated(self) -> bool:
        return not math.isnan(self.fitness)


@dataclass(frozen=True)
class ObjectiveSpec:
    """A minimization problem: a box plus a pure map from position to real."""

    name: str
    space: SearchSpace
    evaluate: Callable[[np.ndarray], float]

    def __call__(self, position) -> float:
        return self.evaluate(position)


def safe_evaluate(obj: ObjectiveSpec, position) -> tuple[float, bool]:
    """Evaluate and map non-finite results to +inf. Returns ``(value, flagged)``."""
    value = float(obj.evaluate(position))
    if math.isfinite(value):
        return value, False
    return math.inf, True


@dataclass
class Population:
    """N positions with their fitness and the run-level reference points.

    ``best_so_far`` is the run-wide elite (X^b); ``worst_current`` and
    ``local_best`` describe the current iteration only.
    """

    positions: np.ndarray
    fitness: np.ndarray = None
    best_so_far: Optional[Candidate] = None
    worst_current: Optional[Candidate] = None
    local_best: Optional[Candidate] = None
    flagged: np.ndarray = None

    def __post_init__(self):
        self.positions = np.array(self.positions, dtype=float, ndmin=2)
        n = self.positions.shape[0]
        if self.fitness is None:
            self.fitness = np.full(n, UNEVALUATED)
        else:
            self.fitness = np.asarray(self.fitness, dtype=float).copy()
        if self.flagged is None:
            self.flagged = np.zeros(n, dtype=bool)

    def __len__(self) -> int:
        return self.positions.shape[0]

    @property
    def members(self) -> list[Candidate]:
        return [Candidate(p.copy(), float(f)) for p, f in zip(self.positions, self.fitness)]

    @classmethod
    def from_candidates(cls, members: Sequence[Candidate]) -> "Population":
        return cls(
            np.array([m.position for m in members], dtype=float),
            np.array([m.fitness for m in members], dtype=float),
        )

    def refresh_extremes(self) -> None:
        """Recompute X^ω and X* from the current fitness and fold into X^b."""
        i_best = int(np.argmin(self.fitness))
        i_worst = int(np.argmax(self.fitness))
        self.local_best = Candidate(self.positions[i_best].copy(), float(self.fitness[i_best]))
        self.worst_current = Candidate(self.positions[i_worst].copy(), float(self.fitness[i_worst]))
        if self.best_so_far is None or self.local_best.fitness < self.best_so_far.fitness:
            self.best_so_far = self.local_best


def evaluate_population(pop: Population, obj: ObjectiveSpec) -> Population:
    """Evaluate every member and return a new population with updated references.

    Non-finite objective values become +inf and are flagged; the previous
    ``best_so_far`` is kept unless something strictly better is found.
    """
    if pop.positions.shape[1] != obj.space.dim:
        raise UsageError("population dimension does not match the objective")
    out = Population(pop.positions.copy(), best_so_far=pop.best_so_far)
    for i, x in enumerate(out.positions):
        out.fitness[i], out.flagged[i] = safe_evaluate(obj, x)
    out.refresh_extremes()
    return out


def make_rng(seed: int) -> np.random.Generator:
    """The single random stream of one optimizer run (PCG64)."""
    return np.random.default_rng(int(seed) % 2**64)


__all__ = [
    "Candidate",
    "ObjectiveEvaluationError",
    "ObjectiveSpec",
    "Population",
    "SearchSpace",
    "UNEVALUATED",
    "UsageError",
    "clamp_to_bounds",
    "evaluate_population",
    "make_rng",
    "safe_evaluate",
]
