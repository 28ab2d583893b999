import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from inexact_gd.oracles import (InexactOracle, InvalidDimensionError, NoiseDirectionModel,
                                NumericOverflowError, ObjectiveSpec, RngStream, finite_diff_gradient,
                                gradient_rel_error, inexact_gradient, inexact_value, noise_direction,
                                sample_unit_sphere)
from inexact_gd.problems import (NesterovSkokovProblem, quadratic_from_coefficients,
                                 rosenbrock_objective)


def half_square(dim=1):
    return ObjectiveSpec(dim, lambda x: 0.5 * float(x @ x), lambda x: np.array(x, dtype=float), f_star=0.0)


def fixed_gradient(g):
    g = np.array(g, dtype=float)
    return ObjectiveSpec(len(g), lambda x: float(g @ x), lambda x: g.copy())


def test_sphere_dim1_is_sign():
    rng = RngStream(3)
    for _ in range(50):
        u = sample_unit_sphere(1, rng)
        assert u[0] in (1.0, -1.0)


def test_sphere_dim5_unit_norm():
    u = sample_unit_sphere(5, RngStream(42))
    assert abs(np.linalg.norm(u) - 1.0) <= 1e-12


def test_sphere_mean_near_zero():
    rng = RngStream(5)
    samples = np.array([sample_unit_sphere(3, rng) for _ in range(10_000)])
    assert np.all(np.abs(samples.mean(axis=0)) <= 0.05)


def test_sphere_rejects_zero_dim():
    with pytest.raises(InvalidDimensionError):
        sample_unit_sphere(0, RngStream(0))


@settings(max_examples=200, deadline=None)
@given(dim=st.integers(1, 1000), seed=st.integers(0, 2**63 - 1))
def test_sphere_norm_property(dim, seed):
    u = sample_unit_sphere(dim, RngStream(seed))
    assert abs(np.linalg.norm(u) - 1.0) <= 1e-12


def test_noise_direction_examples():
    rng = RngStream(0)
    x = np.zeros(2)
    u = noise_direction(NoiseDirectionModel.antigradient(), x, np.array([3.0, 4.0]), rng)
    np.testing.assert_allclose(u, [-0.6, -0.8], atol=1e-15)
    u = noise_direction(NoiseDirectionModel.antigradient(), x, np.zeros(2), rng)
    assert np.array_equal(u, [0.0, 0.0])
    u = noise_direction(NoiseDirectionModel.constant([1.0, 0.0]), np.array([7.0, -2.0]), np.ones(2), rng)
    assert np.array_equal(u, [1.0, 0.0])
    u = noise_direction(NoiseDirectionModel.none(), x, np.ones(2), rng)
    assert np.array_equal(u, [0.0, 0.0])
    u = noise_direction(NoiseDirectionModel.first_component_bias(), np.zeros(3), np.ones(3), rng)
    assert np.array_equal(u, [-1.0, 0.0, 0.0])


def test_constant_model_normalizes_and_rejects_zero():
    m = NoiseDirectionModel.constant([0.0, 3.0, 4.0])
    np.testing.assert_allclose(m.vector, [0.0, 0.6, 0.8])
    with pytest.raises(ValueError):
        NoiseDirectionModel.constant([0.0, 0.0])


def test_constant_model_dimension_mismatch():
    oracle = InexactOracle(half_square(3), 0.1, noise=NoiseDirectionModel.constant([1.0, 0.0]))
    with pytest.raises(InvalidDimensionError):
        inexact_gradient(oracle, np.ones(3))


def test_inexact_gradient_zero_delta_is_exact():
    for model in (NoiseDirectionModel.random_sphere(), NoiseDirectionModel.antigradient(),
                  NoiseDirectionModel.first_component_bias()):
        oracle = InexactOracle(half_square(4), 0.0, noise=model, rng=RngStream(1))
        x = np.array([1.0, -2.0, 3.0, 0.5])
        assert np.array_equal(inexact_gradient(oracle, x), x)


def test_antigradient_cancels_gradient_of_norm_delta():
    oracle = InexactOracle(fixed_gradient([0.06, 0.08]), 0.1, noise=NoiseDirectionModel.antigradient())
    np.testing.assert_allclose(inexact_gradient(oracle, np.zeros(2)), [0.0, 0.0], atol=1e-17)


def test_first_component_bias_subtracts_delta():
    oracle = InexactOracle(fixed_gradient([1.0, 2.0]), 0.5, noise=NoiseDirectionModel.first_component_bias())
    np.testing.assert_allclose(inexact_gradient(oracle, np.zeros(2)), [0.5, 2.0])


def test_gradient_error_within_delta_many_queries():
    obj = rosenbrock_objective()
    rng = RngStream(9)
    for j, model in enumerate([NoiseDirectionModel.random_sphere(), NoiseDirectionModel.antigradient(),
                               NoiseDirectionModel.constant([1.0, 1.0]),
                               NoiseDirectionModel.first_component_bias()]):
        oracle = InexactOracle(obj, 0.01, noise=model, rng=RngStream(9, j + 1))
        for _ in range(2_500):
            x = rng.uniform(-2, 2, 2)
            g, gt = oracle.gradient_pair(x)
            assert np.linalg.norm(g - gt) <= 0.01 + 1e-15 * (1 + np.linalg.norm(g))


def test_value_error_within_small_delta():
    oracle = InexactOracle(half_square(2), 0.0, 0.1, rng=RngStream(4))
    rng = RngStream(8)
    errs = []
    for _ in range(10_000):
        x = rng.normal(2)
        f, ft = oracle.value_pair(x)
        errs.append(abs(f - ft))
    assert max(errs) <= 0.1
    # the draws actually use the interval
    assert max(errs) > 0.09


def test_value_examples():
    obj = ObjectiveSpec(1, lambda x: 2.0, lambda x: np.zeros(1))
    assert inexact_value(InexactOracle(obj, 0.0, 0.0), np.zeros(1)) == 2.0
    ft = inexact_value(InexactOracle(obj, 0.0, 0.1, rng=RngStream(2)), np.zeros(1))
    assert 1.9 <= ft <= 2.1


def test_replayed_stream_reproduces_queries():
    rng = RngStream(123, 4)
    a = InexactOracle(half_square(3), 0.1, 0.1, NoiseDirectionModel.random_sphere(), rng)
    b = InexactOracle(half_square(3), 0.1, 0.1, NoiseDirectionModel.random_sphere(), rng.replay())
    x = np.array([1.0, 2.0, 3.0])
    for _ in range(20):
        assert np.array_equal(a.gradient_pair(x)[1], b.gradient_pair(x)[1])
        assert a.value_pair(x)[1] == b.value_pair(x)[1]


def test_value_noise_does_not_shift_gradient_noise():
    x = np.ones(3)
    a = InexactOracle(half_square(3), 0.1, 0.0, NoiseDirectionModel.random_sphere(), RngStream(5))
    b = InexactOracle(half_square(3), 0.1, 0.3, NoiseDirectionModel.random_sphere(), RngStream(5))
    for _ in range(5):
        b.value_pair(x)
        assert np.array_equal(a.gradient_pair(x)[1], b.gradient_pair(x)[1])


def test_distinct_streams_differ():
    a = RngStream(1, 0).normal(4)
    b = RngStream(1, 1).normal(4)
    assert not np.array_equal(a, b)


def test_non_finite_gradient_raises_with_point():
    obj = ObjectiveSpec(2, lambda x: 0.0, lambda x: np.array([np.inf, 0.0]))
    x = np.array([1.0, 2.0])
    with pytest.raises(NumericOverflowError) as info:
        inexact_gradient(InexactOracle(obj, 0.1), x)
    assert np.array_equal(info.value.point, x)


def test_query_counters():
    oracle = InexactOracle(half_square(2), 0.1, 0.1)
    for _ in range(3):
        oracle.gradient_pair(np.ones(2))
    oracle.value_pair(np.ones(2))
    assert (oracle.grad_queries, oracle.value_queries) == (3, 1)


def test_finite_diff_examples():
    g = finite_diff_gradient(half_square(1), np.array([3.0]), 1e-6)
    assert abs(g[0] - 3.0) <= 1e-6
    g = finite_diff_gradient(rosenbrock_objective(), np.zeros(2), 1e-6)
    np.testing.assert_allclose(g, [-2.0, 0.0], atol=1e-4)
    g = finite_diff_gradient(NesterovSkokovProblem(3).objective(), np.ones(3), 1e-6)
    np.testing.assert_allclose(g, np.zeros(3), atol=1e-6)


def test_finite_diff_rejects_bad_step():
    with pytest.raises(ValueError):
        finite_diff_gradient(half_square(1), np.zeros(1), 0.0)


def test_gradient_rel_error_small_for_quadratic():
    q = quadratic_from_coefficients([0.0, 0.5, 1.0])
    assert gradient_rel_error(q.objective(), np.array([3.0, 2.0, 1.0])) <= 1e-8


def test_objective_spec_rejects_bad_dim():
    with pytest.raises(InvalidDimensionError):
        ObjectiveSpec(0, lambda x: 0.0, lambda x: x)


def test_noise_model_str():
    assert str(NoiseDirectionModel.random_sphere()) == "random"
    assert str(NoiseDirectionModel.constant([2.0, 0.0])).startswith("constant(1.0,0.0")
    assert math.isclose(np.linalg.norm(NoiseDirectionModel.constant([1, 1, 1]).vector), 1.0)
