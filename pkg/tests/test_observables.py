import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.polynomial import Polynomial

from btlab import observables as obs
from oracles import embedding, finite_difference_laplacian

POINTS = np.random.default_rng(7).normal(size=(100, 2)) @ np.diag([0.8, 0.8])
ZS = POINTS[:, 0] + 1j * POINTS[:, 1]


def test_coordinates_match_embedding():
    for z in ZS[:10]:
        assert np.allclose([obs.x1(z), obs.x2(z), obs.x3(z)], embedding(z))


def _fd_holo_laplacian(f, z):
    return (1 + abs(z) ** 2) ** 2 * finite_difference_laplacian(lambda w: float(f(w)), z) / 4


@pytest.mark.parametrize("f,expected", [(obs.x3, -2), (obs.x1, -2), (obs.x2, -2)])
def test_laplacian_of_coordinates(f, expected):
    lap = obs.holomorphic_laplacian(f)
    assert np.allclose(lap(ZS), expected * f(ZS), atol=1e-13)
    fd = np.array([_fd_holo_laplacian(f, z) for z in ZS])
    assert np.allclose(fd, expected * f(ZS), atol=1e-5)


def test_laplacian_of_constant():
    assert np.allclose(obs.holomorphic_laplacian(obs.constant(3.0))(ZS), 0.0)


def test_laplacian_of_product_against_finite_differences():
    f = obs.x3 * obs.x3 + 0.1 * obs.x1 * obs.x3
    lap = obs.holomorphic_laplacian(f)(ZS[:20])
    fd = np.array([_fd_holo_laplacian(f, z) for z in ZS[:20]])
    assert np.allclose(lap, fd, atol=1e-5)


def test_poisson_bracket_x1_x2():
    assert np.allclose(obs.poisson_bracket(obs.x1, obs.x2)(ZS), 2 * obs.x3(ZS), atol=1e-13)
    assert np.allclose(obs.poisson_bracket(obs.x2, obs.x3)(ZS), 2 * obs.x1(ZS), atol=1e-13)


def test_poisson_bracket_against_hamiltonian_flow():
    # {f, g} = d/dt g(phi_t(z)) for the flow of X_f, by a centred difference
    f, g = obs.x1, obs.x2
    h = 1e-5
    for z in ZS[:20]:
        X = obs.hamiltonian_field(f, z)
        d = (g(z + h * X) - g(z - h * X)) / (2 * h)
        assert abs(d - obs.poisson_bracket(f, g)(z)) < 1e-8


def test_hamiltonian_field_of_x3_is_rotation():
    X = obs.hamiltonian_field(obs.x3, ZS)
    # tangent to circles |z| = const
    assert np.allclose(np.real(X * np.conj(ZS)), 0.0, atol=1e-13)


@settings(max_examples=30, deadline=None)
@given(a=st.floats(-2, 2), b=st.floats(-2, 2), zr=st.floats(-2, 2), zi=st.floats(-2, 2))
def test_bracket_antisymmetric_and_bilinear(a, b, zr, zi):
    z = complex(zr, zi)
    f = a * obs.x1 + obs.x3
    g = b * obs.x2 + obs.x1 * obs.x3
    assert abs(obs.poisson_bracket(f, g)(z) + obs.poisson_bracket(g, f)(z)) < 1e-12
    assert abs(obs.poisson_bracket(f, f)(z)) < 1e-12


def test_compose_polynomial():
    g = Polynomial([1, 0, 2])
    h = obs.compose(g, obs.x3)
    assert np.allclose(h(ZS), 1 + 2 * obs.x3(ZS) ** 2)
    # Laplacian uses second derivatives of g
    assert np.allclose(obs.holomorphic_laplacian(h)(ZS), obs.holomorphic_laplacian(2 * obs.x3 ** 2)(ZS))


def test_from_callable_has_no_derivatives():
    f = obs.from_callable(lambda z: np.abs(z), "abs")
    assert np.allclose(f(ZS), np.abs(ZS))
    with pytest.raises(ValueError):
        obs.holomorphic_laplacian(f)(ZS)


def test_arithmetic_and_degree():
    f = 2 * obs.x1 - obs.x3 / 4 + 1
    assert np.allclose(f(ZS), 2 * obs.x1(ZS) - obs.x3(ZS) / 4 + 1)
    assert (obs.x3 ** 3).degree == 3
