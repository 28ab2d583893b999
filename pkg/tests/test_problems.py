import math

import numpy as np
import pytest

from inexact_gd.oracles import RngStream, gradient_rel_error
from inexact_gd.problems import (InvalidConfigurationError, LogRegData, NesterovSkokovProblem,
                                 Simple3DProblem, generate_logreg_data, logreg_eval_grad,
                                 logreg_lipschitz, make_quadratic_diag, ns_eval_grad,
                                 ns_minor_positivity, power_iteration_lambda_max,
                                 quadratic_from_coefficients, rosenbrock_eval_grad,
                                 rosenbrock_objective, simple3d_eval_grad)


@pytest.fixture(scope="module")
def logreg_small():
    return generate_logreg_data(30, 80, 4, RngStream(21))


def test_quadratic_degenerate_interval():
    q = make_quadratic_diag(3, 1, 1.0, 1.0, RngStream(0))
    assert np.array_equal(q.d, [0.0, 1.0, 1.0])
    x = np.ones(3)
    assert q.value(x) == 1.0
    assert np.array_equal(q.gradient(x), [0.0, 1.0, 1.0])


def test_quadratic_default_size_constants():
    q = make_quadratic_diag(100, 10, 0.1, 1.0, RngStream(3))
    assert np.sum(q.d == 0) == 10
    assert np.all(q.d[:10] == 0)
    obj = q.objective()
    assert obj.pl_mu == 0.1 and obj.lipschitz_L == 1.0
    assert q.d[10:].min() == 0.1 and q.d[10:].max() == 1.0


def test_quadratic_from_coefficients_example():
    q = quadratic_from_coefficients([0.0, 0.5, 1.0])
    x = np.array([3.0, 2.0, 1.0])
    assert q.value(x) == 1.5
    assert np.array_equal(q.gradient(x), [0.0, 1.0, 1.0])


def test_quadratic_invalid_configs():
    with pytest.raises(InvalidConfigurationError):
        make_quadratic_diag(3, 3, 0.1, 1.0, RngStream(0))
    with pytest.raises(InvalidConfigurationError):
        make_quadratic_diag(3, 1, 2.0, 1.0, RngStream(0))


def test_quadratic_pl_inequality():
    q = make_quadratic_diag(20, 4, 0.2, 1.0, RngStream(1))
    rng = RngStream(2)
    for _ in range(1000):
        x = rng.normal(20) * 10
        g = q.gradient(x)
        assert q.value(x) <= g @ g / (2 * q.mu) * (1 + 1e-12)


def test_simple3d_examples():
    p = Simple3DProblem(1.0, 0.1)
    f, g = simple3d_eval_grad(p, np.zeros(3))
    assert f == 0.0 and np.array_equal(g, np.zeros(3))
    f, g = simple3d_eval_grad(p, np.array([1.0, 1.0, 5.0]))
    assert math.isclose(f, 1.1)
    np.testing.assert_allclose(g, [2.0, 0.2, 0.0])
    with pytest.raises(InvalidConfigurationError):
        Simple3DProblem(0.1, 1.0)


def test_rosenbrock_examples():
    f, g = rosenbrock_eval_grad(np.array([1.0, 1.0]))
    assert f == 0.0 and np.array_equal(g, [0.0, 0.0])
    f, g = rosenbrock_eval_grad(np.zeros(2))
    assert f == 1.0 and np.array_equal(g, [-2.0, 0.0])
    f, _ = rosenbrock_eval_grad(np.array([1.0, 2.0]))
    assert f == 100.0


def test_ns_examples():
    p = NesterovSkokovProblem(3)
    f, g = ns_eval_grad(p, np.ones(3))
    assert f == 0.0 and np.array_equal(g, np.zeros(3))
    f, g = ns_eval_grad(p, np.zeros(3))
    assert f == 2.25
    np.testing.assert_allclose(g, [-0.5, 2.0, 2.0])
    assert np.linalg.norm(p.start() - np.ones(3)) == 2.0
    assert p.objective().value(np.zeros(3)) == 2.25


def test_all_gradients_match_finite_differences(logreg_small):
    rng = RngStream(31)
    cases = {
        "quadratic": (make_quadratic_diag(15, 3, 0.1, 1.0, RngStream(4)).objective(), lambda: rng.normal(15)),
        "simple3d": (Simple3DProblem(1.0, 0.1).objective(), lambda: rng.normal(3)),
        "logreg": (logreg_small.objective(), lambda: rng.normal(30)),
        "rosenbrock": (rosenbrock_objective(), lambda: rng.uniform(-2, 2, 2)),
        "nesterov-skokov": (NesterovSkokovProblem(6).objective(), lambda: rng.uniform(-1.5, 1.5, 6)),
    }
    for name, (obj, sample) in cases.items():
        for _ in range(20):
            assert gradient_rel_error(obj, sample()) <= 1e-6, name


def test_values_not_below_f_star():
    rng = RngStream(41)
    objs = [(make_quadratic_diag(10, 2, 0.1, 1.0, RngStream(0)).objective(), 10),
            (rosenbrock_objective(), 2), (NesterovSkokovProblem(4).objective(), 4)]
    for obj, n in objs:
        for _ in range(1000):
            assert obj.value(rng.normal(n) * 3) >= obj.f_star


def test_logreg_structure(logreg_small):
    d = logreg_small
    k = d.k
    assert np.array_equal(d.y[k:2 * k], -d.y[:k])
    assert np.array_equal(d.W[:k], d.W[k:2 * k])
    assert set(np.unique(d.y)) <= {-1, 1}
    s = np.linalg.svd(d.W, compute_uv=False)
    assert s[k - 1] > 1e-8 and s[k] < 1e-8 * s[0]


def test_logreg_default_size_rank():
    d = generate_logreg_data(200, 700, 10, RngStream(0))
    assert d.W.shape == (700, 200)
    assert np.linalg.matrix_rank(d.W, tol=1e-8 * np.linalg.norm(d.W, 2)) == 10


def test_logreg_at_origin(logreg_small):
    f, _ = logreg_eval_grad(logreg_small, np.zeros(30))
    assert math.isclose(f, math.log(2.0), rel_tol=1e-14)


def test_logreg_null_space_invariance(logreg_small):
    d = logreg_small
    rng = RngStream(5)
    _, _, vt = np.linalg.svd(d.W)
    null = vt[d.k:]
    for _ in range(10):
        x = rng.normal(30)
        w = null.T @ rng.normal(null.shape[0]) * 10
        f1, _ = logreg_eval_grad(d, x)
        f2, _ = logreg_eval_grad(d, x + w)
        assert abs(f1 - f2) <= 1e-10


def test_logreg_stable_for_large_margins(logreg_small):
    x = 1e4 * logreg_small.basis[:, 0]
    f, g = logreg_eval_grad(logreg_small, x)
    assert np.isfinite(f) and np.all(np.isfinite(g))


def test_logreg_lipschitz_examples(logreg_small):
    single = LogRegData(W=np.array([[1.0, 0.0]]), y=np.array([1]), k=1)
    assert math.isclose(logreg_lipschitz(single), 0.25, rel_tol=1e-10)
    L = logreg_lipschitz(logreg_small)
    scaled = LogRegData(W=3.0 * logreg_small.W, y=logreg_small.y, k=logreg_small.k)
    assert math.isclose(logreg_lipschitz(scaled), 9.0 * L, rel_tol=1e-8)
    rng = RngStream(6)
    for _ in range(1000):
        a, b = rng.normal(30) * 2, rng.normal(30) * 2
        ga = logreg_eval_grad(logreg_small, a)[1]
        gb = logreg_eval_grad(logreg_small, b)[1]
        assert np.linalg.norm(ga - gb) <= L * np.linalg.norm(a - b) * (1 + 1e-9)


def test_power_iteration_matches_eigvalsh():
    A = RngStream(7).normal((12, 5))
    lam = power_iteration_lambda_max(A)
    assert math.isclose(lam, np.linalg.eigvalsh(A.T @ A)[-1], rel_tol=1e-8)


def test_logreg_csv_roundtrip(tmp_path, logreg_small):
    path = tmp_path / "data.csv"
    logreg_small.to_csv(path)
    back = LogRegData.from_csv(path, k=logreg_small.k)
    assert np.array_equal(back.W, logreg_small.W)
    assert np.array_equal(back.y, logreg_small.y)
    assert path.read_text().splitlines()[0].startswith("label,x0,")


def test_logreg_deterministic():
    a = generate_logreg_data(10, 30, 3, RngStream(8))
    b = generate_logreg_data(10, 30, 3, RngStream(8))
    assert np.array_equal(a.W, b.W) and np.array_equal(a.y, b.y)


def test_logreg_invalid():
    with pytest.raises(InvalidConfigurationError):
        generate_logreg_data(5, 8, 6, RngStream(0))


def test_ns_minor_examples():
    assert ns_minor_positivity(NesterovSkokovProblem(2), np.array([3.0, -1.0])) == [0.25, 0.25]
    assert ns_minor_positivity(NesterovSkokovProblem(4), np.zeros(4)) == [0.25] * 4


def test_ns_minors_match_dense_determinants():
    rng = RngStream(10)
    p = NesterovSkokovProblem(5)
    for _ in range(100):
        x = rng.uniform(-1, 1, 5)
        minors = ns_minor_positivity(p, x)
        J = p.jacobian(x)
        M = J @ J.T
        for j, val in enumerate(minors, 1):
            dense = np.linalg.det(M[:j, :j])
            assert abs(val - dense) <= 1e-8 * abs(dense)


def test_ns_minors_non_decreasing_and_positive():
    rng = RngStream(11)
    for n in range(2, 9):
        p = NesterovSkokovProblem(n)
        for _ in range(50):
            m = ns_minor_positivity(p, rng.uniform(-1, 1, n))
            assert m[0] > 0
            # the recursion amplifies rounding by 16 x^2 per step
            assert all(b >= a * (1 - 1e-9) for a, b in zip(m, m[1:]))


def test_ns_minors_all_equal_quarter():
    # J is lower bidiagonal with det 1/2 in every leading block
    rng = RngStream(12)
    p = NesterovSkokovProblem(6)
    for _ in range(20):
        np.testing.assert_allclose(ns_minor_positivity(p, rng.uniform(-1, 1, 6)), 0.25, rtol=1e-9)


def test_ns_jacobian_matches_residual_differences():
    p = NesterovSkokovProblem(4)
    x = np.array([0.3, -0.7, 1.1, 0.2])
    h = 1e-7
    J = np.column_stack([(p.residuals(x + h * e) - p.residuals(x - h * e)) / (2 * h) for e in np.eye(4)])
    np.testing.assert_allclose(p.jacobian(x), J, atol=1e-7)
    with pytest.raises(InvalidConfigurationError):
        NesterovSkokovProblem(1)
