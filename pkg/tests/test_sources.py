import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fekete_field.errors import SingularEvaluation
from fekete_field.fieldscan import (Sum, TwoBallSystem, UniformSphere, coulomb_gradient, coulomb_potential,
                                    point_source, yukawa_gradient, yukawa_potential)
from fekete_field.imagecharge import TwoBallSpec, solve_two_balls

UNIT = point_source([[0, 0, 0]], [1.0])


def random_points(seed, n=6):
    rng = np.random.default_rng(seed)
    return point_source(rng.normal(size=(n, 3)), rng.uniform(-1, 1, n))


def test_coulomb_examples():
    assert coulomb_potential(UNIT, (2, 0, 0)) == 0.5
    sph = UniformSphere((0, 0, 0), 1.0, 3.0)
    assert coulomb_potential(sph, (0.5, 0, 0)) == 3.0
    assert coulomb_potential(sph, (2, 0, 0)) == 1.5
    with pytest.raises(SingularEvaluation):
        coulomb_potential(UNIT, (0, 0, 0))
    with pytest.raises(ValueError):
        UniformSphere((0, 0, 0), 0.0, 1.0)


def test_yukawa_examples():
    assert yukawa_potential(UNIT, (1, 0, 0)) == pytest.approx(math.exp(-1), rel=1e-15)
    for s in (0.3, 2.0, 7.5):
        ratio = yukawa_potential(UNIT, (0, s, 0)) / coulomb_potential(UNIT, (0, s, 0))
        assert ratio == pytest.approx(math.exp(-s), rel=1e-13)
    assert yukawa_potential(UNIT, (0, 0, 10)) == pytest.approx(math.exp(-10) / 10, rel=1e-13)
    with pytest.raises(SingularEvaluation):
        yukawa_potential(UNIT, (0, 0, 0))


def test_vectorised_evaluation():
    X = np.random.default_rng(0).normal(size=(50, 3)) + 5
    U = coulomb_potential(UNIT, X)
    assert U.shape == (50,)
    np.testing.assert_allclose(U, 1 / np.linalg.norm(X, axis=1), rtol=1e-14)


@given(st.integers(0, 1000))
@settings(max_examples=20, deadline=None)
def test_superposition(seed):
    a, b = random_points(seed), random_points(seed + 1)
    c = UniformSphere((0.5, 0, 0), 0.7, 2.0)
    X = np.random.default_rng(seed).normal(size=(20, 3)) * 3
    for fn in (coulomb_potential, yukawa_potential):
        total = fn(Sum([a, b, c]), X)
        parts = fn(a, X) + fn(b, X) + fn(c, X)
        np.testing.assert_allclose(total, parts, rtol=1e-12, atol=1e-12 * np.abs(parts).max())


def _fd_gradient(fn, src, x, h=1e-6):
    return np.array([(fn(src, x + e) - fn(src, x - e)) / (2 * h) for e in np.eye(3) * h])


@pytest.mark.parametrize("src", [
    random_points(3),
    UniformSphere((0.2, 0.1, 0), 1.3, -2.0),
    TwoBallSystem(solve_two_balls(TwoBallSpec((0, 0, 0), 1, 1, (3, 0, 0), 0.5, -0.5))),
])
@pytest.mark.parametrize("x", [(2.5, 1.7, -0.9), (0.3, 0.2, 0.1), (-1.9, 0.4, 2.2)])
def test_analytic_gradients_match_differences(src, x):
    x = np.array(x)
    if isinstance(src, TwoBallSystem):
        x = x + (1.5, 2.0, 0)  # stay in the exterior
    for pot, grad in ((coulomb_potential, coulomb_gradient), (yukawa_potential, yukawa_gradient)):
        g = grad(src, x)
        fd = _fd_gradient(pot, src, x)
        np.testing.assert_allclose(g, fd, rtol=1e-5, atol=1e-7 * max(1.0, np.abs(g).max()))


def test_uniform_sphere_yukawa_matches_quadrature():
    # shell theorem for the screened kernel against a dense Fibonacci shell
    from fekete_field.fieldscan import fibonacci_sphere
    sph = UniformSphere((0, 0, 0), 1.0, 2.0)
    shell = point_source(fibonacci_sphere(200_000), np.full(200_000, 2.0 / 200_000))
    for x in ((0.3, 0.1, 0.0), (2.0, 0.5, 0.0)):
        assert yukawa_potential(sph, x) == pytest.approx(yukawa_potential(shell, x), rel=1e-4)


def test_two_ball_source_levels():
    system = solve_two_balls(TwoBallSpec((0, 0, 0), 1, 1, (3, 0, 0), 0.5, 0.2))
    src = TwoBallSystem(system)
    assert coulomb_potential(src, (0.2, 0.1, 0)) == system.potential1
    assert coulomb_potential(src, (3.1, 0, 0)) == system.potential2
    np.testing.assert_array_equal(coulomb_gradient(src, (0.2, 0.1, 0)), 0.0)
    assert coulomb_potential(src, (-1, 0, 0)) == pytest.approx(system.potential1, rel=1e-10)
