import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from scorekit.errors import DomainError
from scorekit.simplex import (
    Distribution,
    binomial_squares_model,
    empirical,
    ensure_interior,
    linear_path_model,
    make_distribution,
    model_by_name,
    softmax_model,
    tangent_basis,
    tangent_project,
    uniform,
)

from oracles import fd_gradient, interior


def test_make_distribution_normalizes_counts():
    d = make_distribution([3, 3, 4])
    np.testing.assert_allclose(d.weights, [0.3, 0.3, 0.4])
    assert d.m == 3 and d.interior


@pytest.mark.parametrize("bad", [[1], [-1, 2], [0, 0], [np.nan, 1], [[1, 2]]])
def test_make_distribution_rejects(bad):
    with pytest.raises(DomainError):
        make_distribution(bad)


def test_distribution_is_read_only_and_hashable():
    d = uniform(4)
    with pytest.raises(ValueError):
        d.weights[0] = 1.0
    assert d == uniform(4)
    assert len({d, uniform(4)}) == 1
    assert not make_distribution([1, 0]).interior


def test_empirical_is_one_based():
    np.testing.assert_allclose(empirical([1, 1, 2], 3).weights, [2 / 3, 1 / 3, 0])
    with pytest.raises(DomainError):
        empirical([0, 1], 2)
    with pytest.raises(DomainError):
        empirical([3], 2)
    with pytest.raises(DomainError):
        empirical([], 2)


def test_ensure_interior():
    ensure_interior([0.5, 0.5])
    with pytest.raises(DomainError):
        ensure_interior([1.0, 0.0])


@pytest.mark.parametrize("m", [2, 3, 5])
def test_tangent_basis_is_orthonormal_and_sum_free(m):
    B = tangent_basis(m)
    assert B.shape == (m, m - 1)
    np.testing.assert_allclose(B.T @ B, np.eye(m - 1), atol=1e-14)
    np.testing.assert_allclose(B.sum(axis=0), 0, atol=1e-14)


@given(arrays(float, 5, elements=st.floats(-1e3, 1e3)))
def test_tangent_project_is_idempotent_projection(v):
    t = tangent_project(v)
    assert abs(t.sum()) <= 1e-9 * max(1.0, np.abs(v).max())
    np.testing.assert_allclose(tangent_project(t), t, atol=1e-9)


@pytest.mark.parametrize("m", [2, 3, 5])
def test_softmax_model_jacobian(m, rng):
    model = softmax_model(m)
    for _ in range(10):
        theta = rng.uniform(-3, 3, m - 1)
        p = model.prob(theta)
        assert abs(p.sum() - 1) < 1e-14
        J = model.jacobian(theta)
        for j in range(m):
            np.testing.assert_allclose(
                J[j], fd_gradient(lambda t: model.prob(t)[j], theta), atol=1e-9
            )


def test_softmax_inverse_log_odds():
    model = softmax_model(2)
    np.testing.assert_allclose(model.prob([np.log(3)]), [0.75, 0.25])


def test_binomial_model_values_and_jacobian():
    model = binomial_squares_model()
    np.testing.assert_allclose(model.prob([0.2]), [0.64, 0.32, 0.04])
    for t in (0.1, 0.4, 0.77):
        J = model.jacobian([t])[:, 0]
        fd = [fd_gradient(lambda x: model.prob(x)[i], np.array([t]))[0] for i in range(3)]
        np.testing.assert_allclose(J, fd, atol=1e-8)
    with pytest.raises(DomainError):
        model.prob([1.0])
    with pytest.raises(DomainError):
        model.prob([0.1, 0.2])


def test_linear_path_model(rng):
    q = interior(rng, 4)
    b = tangent_project(rng.normal(size=4))
    model = linear_path_model(q, b)
    np.testing.assert_allclose(model.prob([0.0]), q)
    np.testing.assert_allclose(model.jacobian([0.1 * model.upper[0]])[:, 0], b)
    # the domain ends just before a coordinate reaches zero
    edge = model.prob(model.upper * (1 - 1e-12))
    assert edge.min() > 0
    with pytest.raises(DomainError):
        linear_path_model(q, np.ones(4))
    with pytest.raises(DomainError):
        linear_path_model(q, np.zeros(4))
    with pytest.raises(DomainError):
        linear_path_model([1.0, 0.0], [1.0, -1.0])


def test_model_sampling_is_seeded_and_inside():
    model = softmax_model(4)
    a = model.sample(np.random.default_rng(3), 6)
    b = model.sample(np.random.default_rng(3), 6)
    np.testing.assert_array_equal(a, b)
    assert all(model.contains(t) for t in a)


def test_model_by_name():
    assert model_by_name("binomial_squares").m == 3
    assert model_by_name("softmax", 5).dim == 4
    for args in (("softmax",), ("binomial_squares", 4), ("gaussian", 3)):
        with pytest.raises(DomainError):
            model_by_name(*args)


@settings(max_examples=30)
@given(st.lists(st.integers(1, 4), min_size=1, max_size=40))
def test_empirical_sums_to_one(outcomes):
    d = empirical(outcomes, 4)
    assert isinstance(d, Distribution)
    assert abs(d.weights.sum() - 1) < 1e-12
