"""Classic test functions and a subprocess-backed objective.

The classics stand in for the CEC2017 suite at desk scale; anything else
(including an official CEC binary) plugs in through
:func:`external_objective`.
"""
from __future__ import annotations

import shlex
import subprocess
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from ._backend import kernels
from .core import ObjectiveEvaluationError, ObjectiveSpec, SearchSpace, UsageError


@dataclass(frozen=True)
class BenchmarkFunction:
    name: str
    dim: int
    low: float
    high: float
    known_optimum: float
    argmin: float
    kind: str
    kernel: Callable[[np.ndarray], float]

    @property
    def space(self) -> SearchSpace:
        return SearchSpace.uniform(self.dim, self.low, self.high)

    def evaluate(self, x) -> float:
        return self.kernel(np.ascontiguousarray(x, dtype=float))

    def argmin_point(self) -> np.ndarray:
        return np.full(self.dim, self.argmin)

    def objective(self) -> ObjectiveSpec:
        return ObjectiveSpec(self.name, self.space, self.evaluate)


SCHWEFEL_ARGMIN = 420.9687462275036

# name: (low, high, argmin coordinate, kind)
_TABLE = {
    "sphere": (-100.0, 100.0, 0.0, "unimodal"),
    "rosenbrock": (-30.0, 30.0, 1.0, "unimodal"),
    "rastrigin": (-5.12, 5.12, 0.0, "multimodal"),
    "ackley": (-32.0, 32.0, 0.0, "multimodal"),
    "griewank": (-600.0, 600.0, 0.0, "multimodal"),
    "schwefel": (-500.0, 500.0, SCHWEFEL_ARGMIN, "multimodal"),
}

BUILTIN_NAMES = tuple(_TABLE)


def get_function(name: str, dim: int) -> BenchmarkFunction:
    if dim < 2:
        raise UsageError("benchmark dimension must be at least 2")
    try:
        low, high, arg, kind = _TABLE[name]
    except KeyError:
        raise UsageError(f"unknown benchmark {name!r}; choose from {list(_TABLE)}") from None
    return BenchmarkFunction(name, dim, low, high, 0.0, arg, kind, getattr(kernels, name))


def builtin_suite(dim: int) -> list[BenchmarkFunction]:
    return [get_function(name, dim) for name in _TABLE]


class ExternalObjective:
    """Run ``command`` once per evaluation: position on stdin, one real on stdout."""

    def __init__(self, command: Union[str, Sequence[str]], timeout: float = 60.0):
        self.argv = shlex.split(command) if isinstance(command, str) else list(command)
        if not self.argv:
            raise UsageError("external objective command is empty")
        self.timeout = timeout
        self.evaluations = 0

    def __call__(self, x) -> float:
        x = np.asarray(x, dtype=float)
        payload = " ".join(repr(float(v)) for v in x) + "\n"
        self.evaluations += 1
        try:
            proc = subprocess.run(
                self.argv, input=payload, capture_output=True, text=True, timeout=self.timeout
            )
        except (OSError, subprocess.TimeoutExpired) as exc:
            raise ObjectiveEvaluationError(f"external objective failed at {x.tolist()}: {exc}", x) from exc
        if proc.returncode != 0:
            raise ObjectiveEvaluationError(
                f"external objective exited with status {proc.returncode} at {x.tolist()}: "
                f"{proc.stderr.strip()[:200]}",
                x,
            )
        try:
            return float(proc.stdout.split()[0])
        except (IndexError, ValueError):
            raise ObjectiveEvaluationError(
                f"external objective printed {proc.stdout.strip()[:80]!r} at {x.tolist()}", x
            ) from None


def external_objective(
    command: Union[str, Sequence[str]],
    space: SearchSpace,
    name: str = "external",
    timeout: float = 60.0,
) -> ObjectiveSpec:
    """Wrap a subprocess as an objective; ``spec.evaluate.evaluations`` counts calls."""
    return ObjectiveSpec(name, space, ExternalObjective(command, timeout))
