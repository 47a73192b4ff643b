"""Logistic and fractional-order logistic chaotic maps.

Covers FOLC population initialization and the chaotic perturbation of the
elite solution with a log-sigmoid decaying weight.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._backend import kernels
from .core import Candidate, Population, SearchSpace, UsageError

DEFAULT_LOGISTIC_MU = 4.0
DEFAULT_K = 20.0
DEFAULT_FOLC_MU = 3.0
DEFAULT_FOLC_ORDER = 0.7

# an irrational step used to leave a degenerate orbit without touching the rng
_ESCAPE = (math.sqrt(5.0) - 1.0) / 2.0


def _degenerate_points(mu: float) -> set[float]:
    pts = {0.0, 1.0, 1.0 - 1.0 / mu} if mu > 1.0 else {0.0, 1.0}
    if mu == 4.0:
        pts |= {0.25, 0.5, 0.75}
    return pts


@dataclass(frozen=True)
class LogisticMapState:
    value: float
    mu: float = DEFAULT_LOGISTIC_MU

    def __post_init__(self):
        if not 0.0 < self.mu <= 4.0:
            raise UsageError(f"logistic mu must lie in (0, 4], got {self.mu}")
        if not 0.0 < self.value < 1.0:
            raise UsageError(f"logistic value must lie in (0, 1), got {self.value}")
        if self.value in _degenerate_points(self.mu):
            raise UsageError(f"logistic seed {self.value} is a degenerate point for mu={self.mu}")


def logistic_step(state: LogisticMapState) -> LogisticMapState:
    """One application of x -> mu x (1 - x).

    The result is built without validation: stepping from a constructed
    state may legitimately land on a fixed point (e.g. 0.5 -> 1.0 at mu=4).
    """
    nxt = object.__new__(LogisticMapState)
    object.__setattr__(nxt, "mu", state.mu)
    object.__setattr__(nxt, "value", state.mu * state.value * (1.0 - state.value))
    return nxt


class LogisticMap:
    """Stateful logistic generator that never settles on a degenerate orbit.

    Finite-precision orbits at mu=4 can hit 0, 0.75 or the 0.5 -> 1 -> 0
    cascade; when that happens the value is shifted by a fixed irrational
    step so the stream stays inside (0, 1) and stays deterministic.
    """

    def __init__(self, seed_value: float, mu: float = DEFAULT_LOGISTIC_MU):
        LogisticMapState(seed_value, mu)
        self.mu = float(mu)
        self.value = float(seed_value)
        self._bad = _degenerate_points(self.mu)

    @classmethod
    def from_rng(cls, rng: np.random.Generator, mu: float = DEFAULT_LOGISTIC_MU) -> "LogisticMap":
        bad = _degenerate_points(mu)
        while True:
            v = float(rng.random())
            if v not in bad:
                return cls(v, mu)

    @property
    def state(self) -> LogisticMapState:
        return LogisticMapState(self.value, self.mu)

    def step(self) -> float:
        x = self.value
        y = self.mu * x * (1.0 - x)
        while not (0.0 < y < 1.0) or y in self._bad:
            y = (y + _ESCAPE) % 1.0
        self.value = y
        return y

    def draw(self, n: int) -> np.ndarray:
        return np.array([self.step() for _ in range(n)])


@dataclass(frozen=True)
class FolcParams:
    """Fractional-order logistic map settings; ``seed_value=None`` draws one per run."""

    mu: float = DEFAULT_FOLC_MU
    v: float = DEFAULT_FOLC_ORDER
    seed_value: Optional[float] = None

    def __post_init__(self):
        if not 0.0 < self.mu <= 4.0:
            raise UsageError(f"FOLC mu must lie in (0, 4], got {self.mu}")
        if not 0.0 < self.v <= 1.0:
            raise UsageError(f"FOLC order must lie in (0, 1], got {self.v}")
        if self.seed_value is not None and not 0.0 < self.seed_value < 1.0:
            raise UsageError(f"FOLC seed must lie in (0, 1), got {self.seed_value}")

    def seeded(self, rng: np.random.Generator) -> "FolcParams":
        if self.seed_value is not None:
            return self
        fixed = 1.0 - 1.0 / self.mu if self.mu > 1.0 else None
        while True:
            s = float(rng.uniform(0.1, 0.9))
            if s != fixed:
                return FolcParams(self.mu, self.v, s)


def folc_sequence(params: FolcParams, length: int) -> np.ndarray:
    """First ``length`` values of the fractional-order logistic map.

    FOLC_t = FOLC_0 + mu * sum_{j=1..t} c_{t-j} g(FOLC_{j-1}) with
    g(x) = x(1-x) and c_s = Gamma(s+v) / (Gamma(v) Gamma(s+1)) computed by
    recurrence. Each value is folded into (0, 1) by its fractional part
    before it feeds later terms; an exact 0 repeats the previous value.
    """
    if params.seed_value is None:
        raise UsageError("FolcParams.seed_value must be set; call .seeded(rng) first")
    if length < 0:
        raise UsageError("length must be non-negative")
    return kernels.folc_sequence(float(params.seed_value), float(params.mu), float(params.v), int(length))


def folc_initialize(space: SearchSpace, n: int, params: FolcParams) -> Population:
    """Spread ``n`` candidates over the box with one FOLC stream of length n*dim."""
    if n < 1:
        raise UsageError("population size must be at least 1")
    seq = folc_sequence(params, n * space.dim).reshape(n, space.dim)
    return Population(space.lower + seq * space.width)


@dataclass(frozen=True)
class PerturbationParams:
    t_max: int
    K: float = DEFAULT_K
    mu: float = DEFAULT_LOGISTIC_MU

    def __post_init__(self):
        if self.t_max < 1:
            raise UsageError("t_max must be positive")
        if not 0.0 < self.K < self.t_max:
            raise UsageError(f"K must lie in (0, t_max), got K={self.K}, t_max={self.t_max}")
        if not 0.0 < self.mu <= 4.0:
            raise UsageError(f"chaos mu must lie in (0, 4], got {self.mu}")


def logsig(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def perturbation_envelope(t: float, params: PerturbationParams) -> float:
    return logsig((params.t_max / 2.0 - t) / params.K)


def perturbation_weight(t: float, params: PerturbationParams, rng: np.random.Generator) -> float:
    """xi = logsig((t_max/2 - t)/K) * u with one uniform draw u."""
    if not 0 <= t <= params.t_max:
        raise UsageError(f"iteration {t} outside [0, {params.t_max}]")
    return perturbation_envelope(t, params) * float(rng.random())


def chaotic_perturb(
    best: Candidate,
    t: float,
    params: PerturbationParams,
    chaos_map: LogisticMap,
    space: SearchSpace,
    rng: np.random.Generator,
) -> Candidate:
    """Unevaluated candidate x_b + xi * chaos, clamped to the box.

    Draw order: the uniform behind xi first, then ``dim`` logistic steps.
    """
    xi = perturbation_weight(t, params, rng)
    chaos = chaos_map.draw(space.dim)
    pos = kernels.perturb(np.ascontiguousarray(best.position, dtype=float), xi, chaos, space.lower, space.upper)
    return Candidate(pos)
