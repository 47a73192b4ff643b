import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mfodbo.core import (
    Candidate,
    ObjectiveSpec,
    Population,
    SearchSpace,
    UsageError,
    clamp_to_bounds,
    evaluate_population,
    make_rng,
    safe_evaluate,
)


def sphere_spec(dim=2, lo=-5.0, hi=5.0):
    return ObjectiveSpec("sphere", SearchSpace.uniform(dim, lo, hi), lambda x: float(np.dot(x, x)))


def test_clamp_examples():
    unit = SearchSpace(np.array([0.0]), np.array([1.0]))
    assert clamp_to_bounds([5.0], unit).tolist() == [1.0]
    assert clamp_to_bounds([0.5], unit).tolist() == [0.5]
    box = SearchSpace(np.zeros(2), np.ones(2))
    assert clamp_to_bounds([-3.0, 0.2], box).tolist() == [0.0, 0.2]


def test_clamp_dimension_mismatch():
    with pytest.raises(UsageError):
        clamp_to_bounds([1.0, 2.0], SearchSpace.uniform(3, 0, 1))


@given(arrays(float, 4, elements=st.floats(-1e6, 1e6)))
def test_clamp_idempotent_and_inside(x):
    space = SearchSpace(np.array([-1.0, 0.0, -10.0, 2.0]), np.array([1.0, 5.0, -3.0, 2.5]))
    once = clamp_to_bounds(x, space)
    assert space.contains(once)
    assert np.array_equal(clamp_to_bounds(once, space), once)


def test_search_space_validation():
    with pytest.raises(UsageError):
        SearchSpace(np.array([1.0]), np.array([1.0]))
    with pytest.raises(UsageError):
        SearchSpace(np.zeros(2), np.ones(3))
    s = SearchSpace.uniform(3, -2, 2)
    assert s.dim == 3 and s.width.tolist() == [4.0] * 3
    with pytest.raises(ValueError):
        s.lower[0] = 7.0


def test_candidate_unevaluated_marker():
    assert not Candidate(np.zeros(2)).evaluated
    assert Candidate(np.zeros(2), 1.5).evaluated


def test_evaluate_single_member_at_optimum():
    pop = evaluate_population(Population(np.zeros((1, 2))), sphere_spec())
    assert pop.fitness.tolist() == [0.0]
    assert pop.best_so_far.fitness == 0.0


def test_evaluate_ordering():
    obj = ObjectiveSpec("id", SearchSpace.uniform(1, 0, 10), lambda x: float(x[0]))
    pop = evaluate_population(Population(np.array([[3.0], [7.0]])), obj)
    assert pop.worst_current.fitness == 7.0
    assert pop.best_so_far.fitness == 3.0
    assert pop.local_best.fitness == 3.0


def test_evaluate_is_pure():
    rng = np.random.default_rng(3)
    pop = Population(rng.uniform(-5, 5, (6, 2)))
    a = evaluate_population(pop, sphere_spec())
    b = evaluate_population(a, sphere_spec())
    assert np.array_equal(a.fitness, b.fitness)


def test_nonfinite_fitness_flagged_as_inf():
    obj = ObjectiveSpec("nan", SearchSpace.uniform(1, 0, 1), lambda x: math.nan if x[0] > 0.5 else x[0])
    pop = evaluate_population(Population(np.array([[0.2], [0.9]])), obj)
    assert pop.fitness[1] == math.inf and pop.flagged.tolist() == [False, True]
    assert safe_evaluate(obj, np.array([0.9])) == (math.inf, True)


def test_best_so_far_only_improves():
    pop = Population(np.array([[0.1, 0.1]]))
    pop = evaluate_population(pop, sphere_spec())
    worse = Population(np.array([[4.0, 4.0]]), best_so_far=pop.best_so_far)
    out = evaluate_population(worse, sphere_spec())
    assert out.best_so_far.fitness == pytest.approx(0.02)


def test_population_members_round_trip():
    pop = Population(np.arange(6.0).reshape(3, 2), np.array([1.0, 2.0, 3.0]))
    back = Population.from_candidates(pop.members)
    assert np.array_equal(back.positions, pop.positions)
    assert np.array_equal(back.fitness, pop.fitness)


def test_make_rng_reproducible():
    assert make_rng(42).random() == make_rng(42).random()
    assert make_rng(-1).random() == make_rng(2**64 - 1).random()
