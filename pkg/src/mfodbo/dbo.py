"""Dung beetle optimizer engine and its memory-enhanced fractional-order variant.

One engine covers the classic algorithm and every ablation: the three
:class:`VariantFlags` switch FOLC initialization, the fractional-order
rolling update and the chaotic perturbation of the elite independently.

Random draws happen in a fixed order, which is part of the determinism
contract (same seed, same trace):

* initialization: ``rng.random((N, dim))``, or one ``uniform(0.1, 0.9)``
  FOLC seed when FOLC initialization is on (and no seed is configured);
* one uniform seed for the perturbation logistic map, only when CP is on;
* per individual, by role: roller ``gamma`` then ``alpha`` (or ``theta``);
  brood ball ``B1`` then ``B2``; forager ``c1`` then ``c2``; thief ``G``;
* per CP attempt: one uniform for the weight ``xi``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._backend import kernels
from .chaos import (
    DEFAULT_K,
    DEFAULT_LOGISTIC_MU,
    FolcParams,
    LogisticMap,
    PerturbationParams,
    chaotic_perturb,
    folc_initialize,
)
from .core import Candidate, ObjectiveSpec, SearchSpace, UsageError, make_rng
from .fractional import DEFAULT_DELTA, DEFAULT_MEMORY, HistoryBuffer, gl_coefficients
from .stats import balance_from_diversity, diversity as population_diversity

ROLE_SHARES = (6, 6, 7, 11)
ROLLER, BROOD, FORAGER, THIEF = range(4)

_TAN_SINGULAR = (0.0, math.pi / 2.0, math.pi)


@dataclass(frozen=True)
class RoleCounts:
    rollers: int
    brood_balls: int
    foragers: int
    thieves: int

    def __post_init__(self):
        if min(self.as_tuple()) < 0:
            raise UsageError("role counts must be non-negative")

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.rollers, self.brood_balls, self.foragers, self.thieves)

    @property
    def total(self) -> int:
        return sum(self.as_tuple())

    def role_of_index(self) -> np.ndarray:
        return np.repeat(np.arange(4), self.as_tuple())


def partition_roles(n: int) -> RoleCounts:
    """Split ``n`` beetles 6:6:7:11 with largest-remainder rounding."""
    if n < 4:
        raise UsageError(f"population must have at least 4 members, got {n}")
    total = sum(ROLE_SHARES)
    exact = [n * s / total for s in ROLE_SHARES]
    counts = [math.floor(e) for e in exact]
    # stable sort: equal remainders go to the earlier role
    order = sorted(range(4), key=lambda r: -(exact[r] - counts[r]))
    for r in order[: n - sum(counts)]:
        counts[r] += 1
    return RoleCounts(*counts)


@dataclass(frozen=True)
class DboParams:
    k_deflection: float = 0.1
    b_step: float = 0.3
    d_thief: float = 0.5
    roll_prob: float = 0.9
    alpha_prob: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.k_deflection <= 0.2:
            raise UsageError("k_deflection must lie in (0, 0.2]")
        if not 0.0 <= self.b_step <= 1.0:
            raise UsageError("b_step must lie in [0, 1]")
        if not self.d_thief > 0.0:
            raise UsageError("d_thief must be positive")
        for name in ("roll_prob", "alpha_prob"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise UsageError(f"{name} must lie in [0, 1]")


@dataclass(frozen=True)
class VariantFlags:
    use_folc_init: bool = False
    use_fo_roll: bool = False
    use_chaotic_perturb: bool = False


VARIANTS = {
    "DBO": VariantFlags(False, False, False),
    "DBO1": VariantFlags(True, False, False),
    "DBO2": VariantFlags(False, True, False),
    "DBO3": VariantFlags(False, False, True),
    "MFO-DBO": VariantFlags(True, True, True),
}


@dataclass(frozen=True)
class RegionBounds:
    lower: np.ndarray
    upper: np.ndarray


def spawning_region(anchor, t: float, t_max: float, space: SearchSpace) -> RegionBounds:
    """Box anchor*(1-R) .. anchor*(1+R) with R = 1 - t/t_max, clipped to the space."""
    if not 0 <= t <= t_max:
        raise UsageError(f"iteration {t} outside [0, {t_max}]")
    r = 1.0 - t / t_max
    a = np.asarray(anchor, dtype=float)
    lo = kernels.clamp(a * (1.0 - r), space.lower, space.upper)
    hi = kernels.clamp(a * (1.0 + r), space.lower, space.upper)
    return RegionBounds(np.minimum(lo, hi), np.maximum(lo, hi))


def _vec(x) -> np.ndarray:
    return np.ascontiguousarray(x, dtype=float)


def draw_alpha(params: DboParams, rng: np.random.Generator) -> float:
    return 1.0 if rng.random() < params.alpha_prob else -1.0


def roll_update(x, x_prev, worst, params: DboParams, rng: np.random.Generator, space: SearchSpace) -> np.ndarray:
    """x + alpha k x_prev + b |x - worst|, alpha = +1 with ``alpha_prob``."""
    alpha = draw_alpha(params, rng)
    return kernels.roll(
        _vec(x), _vec(x_prev), _vec(worst), alpha * params.k_deflection, params.b_step,
        space.lower, space.upper,
    )


def dance_update(x, x_prev, rng: np.random.Generator, space: SearchSpace) -> np.ndarray:
    """Tangent deflection x + tan(theta) |x - x_prev|, theta ~ U[0, pi].

    Angles within 1e-12 of 0, pi/2 or pi leave the position unchanged.
    """
    theta = float(rng.uniform(0.0, math.pi))
    return dance_with_angle(x, x_prev, theta, space)


def dance_with_angle(x, x_prev, theta: float, space: SearchSpace) -> np.ndarray:
    if any(abs(theta - s) <= 1e-12 for s in _TAN_SINGULAR):
        return _vec(x).copy()
    return kernels.dance(_vec(x), _vec(x_prev), math.tan(theta), space.lower, space.upper)


def brood_update(x, local_best, region: RegionBounds, rng: np.random.Generator, space: SearchSpace) -> np.ndarray:
    dim = space.dim
    b1 = rng.random(dim)
    b2 = rng.random(dim)
    return kernels.brood(_vec(local_best), _vec(x), region.lower, region.upper, b1, b2, space.lower, space.upper)


def forage_update(x, region: RegionBounds, rng: np.random.Generator, space: SearchSpace) -> np.ndarray:
    c1 = float(rng.standard_normal())
    c2 = float(rng.random())
    return kernels.forage(_vec(x), region.lower, region.upper, c1, c2, space.lower, space.upper)


def steal_update(x, local_best, global_best, params: DboParams, rng: np.random.Generator, space: SearchSpace) -> np.ndarray:
    g = rng.standard_normal(space.dim)
    return kernels.steal(
        _vec(global_best), _vec(local_best), _vec(x), params.d_thief, g, space.lower, space.upper
    )


@dataclass(frozen=True)
class OptimizerConfig:
    population: int = 30
    iterations: int = 500
    seed: int = 0
    variants: VariantFlags = VariantFlags()
    params: DboParams = DboParams()
    roles: Optional[RoleCounts] = None
    delta: float = DEFAULT_DELTA
    memory: int = DEFAULT_MEMORY
    folc: FolcParams = FolcParams()
    K: float = DEFAULT_K
    chaos_mu: float = DEFAULT_LOGISTIC_MU
    # True: one perturbation attempt after every individual (literal);
    # False: one attempt per iteration
    cp_every_individual: bool = True
    # keep a beetle's new position only if it improves on its old one
    greedy_selection: bool = False
    record_positions: bool = False

    def role_counts(self) -> RoleCounts:
        roles = self.roles if self.roles is not None else partition_roles(self.population)
        if roles.total != self.population:
            raise UsageError(f"role counts sum to {roles.total}, population is {self.population}")
        return roles

    def perturbation(self) -> PerturbationParams:
        t_max = max(self.iterations, 1)
        # K must stay inside (0, t_max); very short runs shrink it
        k = self.K if self.K < t_max else t_max / 2.0
        return PerturbationParams(t_max=t_max, K=k, mu=self.chaos_mu)

    @classmethod
    def for_variant(cls, name: str, **kwargs) -> "OptimizerConfig":
        try:
            flags = VARIANTS[name]
        except KeyError:
            raise UsageError(f"unknown variant {name!r}; choose from {sorted(VARIANTS)}") from None
        return cls(variants=flags, **kwargs)


@dataclass
class RunTrace:
    best_fitness: np.ndarray
    diversity: np.ndarray
    best_position: np.ndarray
    best_value: float
    initial_best: float
    evaluations: int = 0
    nonfinite: int = 0
    cp_attempts: int = 0
    cp_accepted: int = 0
    role_updates: dict = field(default_factory=dict)
    snapshots: Optional[list] = None

    @property
    def exploration_pct(self) -> np.ndarray:
        return balance_from_diversity(self.diversity)[0]

    @property
    def exploitation_pct(self) -> np.ndarray:
        return balance_from_diversity(self.diversity)[1]

    @property
    def best(self) -> Candidate:
        return Candidate(self.best_position.copy(), self.best_value)


def initial_positions(space: SearchSpace, n: int, config: OptimizerConfig, rng: np.random.Generator) -> np.ndarray:
    if config.variants.use_folc_init:
        return folc_initialize(space, n, config.folc.seeded(rng)).positions
    return space.lower + rng.random((n, space.dim)) * space.width


def run(obj: ObjectiveSpec, config: OptimizerConfig = OptimizerConfig()) -> RunTrace:
    """Minimize ``obj`` with the configured variant; returns the full trace."""
    if config.iterations < 0:
        raise UsageError("iterations must be non-negative")
    space = obj.space
    n, t_max = config.population, config.iterations
    flags, prm = config.variants, config.params
    roles = config.role_counts().role_of_index()
    rng = make_rng(config.seed)
    f = obj.evaluate

    pos = initial_positions(space, n, config, rng)
    chaos_map = LogisticMap.from_rng(rng, config.chaos_mu) if flags.use_chaotic_perturb else None
    pparams = config.perturbation() if flags.use_chaotic_perturb else None
    coeffs = gl_coefficients(config.delta, config.memory) if flags.use_fo_roll else None

    counters = {"evaluations": 0, "nonfinite": 0}

    def evaluate(x) -> float:
        counters["evaluations"] += 1
        v = float(f(x))
        if math.isfinite(v):
            return v
        counters["nonfinite"] += 1
        return math.inf

    fit = np.array([evaluate(x) for x in pos])
    i0 = int(np.argmin(fit))
    xb, fb = pos[i0].copy(), float(fit[i0])
    initial_best = fb

    hist = HistoryBuffer(pos, max(config.memory if coeffs else 2, 2))
    lo, hi = space.lower, space.upper
    best_curve = np.empty(t_max)
    div_curve = np.empty(t_max)
    snapshots = [] if config.record_positions else None
    cp_attempts = cp_accepted = 0
    updates = {"roll": 0, "dance": 0, "brood": 0, "forage": 0, "steal": 0}

    for t in range(1, t_max + 1):
        worst = pos[int(np.argmax(fit))].copy()
        xstar = pos[int(np.argmin(fit))].copy()
        brood_box = spawning_region(xstar, t, t_max, space)
        for i in range(n):
            h = hist.data[i]
            x, xp = h[0], h[1]
            role = roles[i]
            if role == ROLLER:
                if rng.random() < prm.roll_prob:
                    ak = draw_alpha(prm, rng) * prm.k_deflection
                    if coeffs is not None:
                        new = kernels.fo_roll(h[: coeffs.m], coeffs.weights, xp, worst, ak, prm.b_step, lo, hi)
                    else:
                        new = kernels.roll(x, xp, worst, ak, prm.b_step, lo, hi)
                    updates["roll"] += 1
                else:
                    new = dance_update(x, xp, rng, space)
                    updates["dance"] += 1
            elif role == BROOD:
                new = brood_update(x, xstar, brood_box, rng, space)
                updates["brood"] += 1
            elif role == FORAGER:
                new = forage_update(x, spawning_region(xb, t, t_max, space), rng, space)
                updates["forage"] += 1
            else:
                new = steal_update(x, xstar, xb, prm, rng, space)
                updates["steal"] += 1

            f_new = evaluate(new)
            if config.greedy_selection and not f_new < fit[i]:
                hist.push(i, pos[i].copy())
            else:
                hist.push(i, new)
                pos[i] = new
                fit[i] = f_new

            if chaos_map is not None and (config.cp_every_individual or i == n - 1):
                cand = chaotic_perturb(Candidate(xb, fb), t, pparams, chaos_map, space, rng)
                fc = evaluate(cand.position)
                cp_attempts += 1
                if fc < fb:
                    xb, fb = cand.position, fc
                    cp_accepted += 1
            if fit[i] < fb:
                xb, fb = new.copy(), float(fit[i])

        best_curve[t - 1] = fb
        div_curve[t - 1] = population_diversity(pos)
        if snapshots is not None:
            snapshots.append(pos.copy())

    if t_max == 0:
        best_curve = np.array([fb])
        div_curve = np.array([population_diversity(pos)])
        if snapshots is not None:
            snapshots.append(pos.copy())

    return RunTrace(
        best_fitness=best_curve,
        diversity=div_curve,
        best_position=np.array(xb, dtype=float),
        best_value=fb,
        initial_best=initial_best,
        evaluations=counters["evaluations"],
        nonfinite=counters["nonfinite"],
        cp_attempts=cp_attempts,
        cp_accepted=cp_accepted,
        role_updates=updates,
        snapshots=snapshots,
    )
