import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from btlab import asymptotics as asy
from oracles import gaussian_moment


def _gauss(tau, x, half=True):
    return np.sqrt(2 * np.pi / tau) * np.exp(-tau * x * x / (2 if half else 1))


# ---------------------------------------------------------------- integrals
def test_intermediate_phase_gaussian():
    p = asy.make_problem("intermediate", "one")
    ex = asy.expansion(p, 0.3)
    I = asy.oscillatory_integral(p, 0.3, 50.0, contour_shift=ex.y_c.imag)
    assert abs(I - _gauss(50, 0.3)) < 1e-12 * abs(I)


def test_intermediate_phase_on_real_line():
    p = asy.make_problem("intermediate", "one")
    I = asy.oscillatory_integral(p, 0.3, 50.0)
    assert abs(I - _gauss(50, 0.3)) < 1e-9 * _gauss(50, 0)


def test_support_away_from_critical_point():
    p = asy.make_problem("model", "bump_far")
    assert abs(asy.oscillatory_integral(p, 0.0, 200.0)) < 1e-8


def test_tau_zero_is_plain_integral():
    p = asy.make_problem("model", "bump")
    ref, _ = quad(lambda y: p.amplitude(0.0, np.array([y]))[0], -2, 2, epsabs=1e-14, epsrel=1e-13)
    assert abs(asy.oscillatory_integral(p, 0.0, 0.0) - ref) < 1e-11


def test_contour_shift_needs_entire_amplitude():
    with pytest.raises(ValueError):
        asy.oscillatory_integral(asy.make_problem("model", "bump"), 0.0, 10.0, contour_shift=0.1)


# ---------------------------------------------------------------- PS1
def test_model_phase_leading_term():
    p = asy.make_problem("model", "one")
    ex = asy.expansion(p, 0.0)
    assert abs(ex.d - 1) < 1e-15 and abs(ex.y_c) < 1e-15
    for tau in (25, 200):
        assert abs(ex.leading(tau) - np.sqrt(2 * np.pi / tau)) < 1e-15
    rep = asy.ps1_check(p, 0.0)
    assert rep.fit.satisfies(-1.4)
    assert rep.relative_leading_error < 1e-6


@pytest.mark.parametrize("phase,x,half", [("model", 0.4, False), ("intermediate", 0.3, True)])
def test_leading_term_against_gaussian_oracle_tau200(phase, x, half):
    rep = asy.ps1_check(asy.make_problem(phase, "one"), x, taus=(50, 200))
    o = _gauss(200, x, half)
    assert abs(rep.leading[-1] - o) < 1e-6 * o
    assert abs(rep.integrals[-1] - o) < 1e-6 * o


def test_intermediate_critical_value():
    ex = asy.expansion(asy.make_problem("intermediate", "one"), 0.2)
    assert abs(ex.y_c - 0.2j) < 1e-14
    assert abs(ex.phi_r - 0.02j) < 1e-14
    assert abs(np.exp(1j * 100 * ex.phi_r) - np.exp(-100 * 0.04 / 2)) < 1e-15


def test_fresnel_unit_factor():
    ex = asy.expansion(asy.make_problem("fresnel", "bump"), 0.3)
    assert abs(abs(ex.d) - 1) < 1e-15
    assert abs(ex.d - (1 / 1j) ** -0.5) < 1e-15
    assert abs(ex.d - np.exp(1j * np.pi / 4)) < 1e-15


@pytest.mark.parametrize("phase,amp,x", [("model", "cos", 0.0), ("intermediate", "cos", 0.2), ("fresnel", "bump", 0.3)])
def test_remainder_order(phase, amp, x):
    rep = asy.ps1_check(asy.make_problem(phase, amp), x)
    assert rep.fit.slope <= -1.4


def test_model_cos_closed_form():
    # a = cos y: expectation of cos(i x + Y), Y ~ N(0, 1/tau)
    p = asy.make_problem("model", "cos")
    x, tau = 0.3, 40.0
    ex = asy.expansion(p, x)
    I = asy.oscillatory_integral(p, x, tau, contour_shift=ex.y_c.imag)
    o = _gauss(tau, x, False) * np.cosh(x) * np.exp(-1 / (2 * tau))
    assert abs(I - o) < 1e-12 * abs(o)


def test_ps1_rejects_growing_phase():
    bad = asy.polynomial_phase([[0, 0, -0.5j], [1, 0, 0]], "bad")
    with pytest.raises(ValueError):
        asy.ps1_check(asy.make_problem(bad, "one"), 0.0)


# ---------------------------------------------------------------- PS2
def test_b1_for_y_squared():
    rep = asy.ps2_check(asy.make_problem("model", "y2"), 0.0, 1)
    assert abs(rep.coefficient - 1) < 1e-4
    assert abs(rep.formula - 1) < 1e-15
    # moment oracle: the normalized integral is exactly 1/tau
    assert abs(gaussian_moment(2, 50.0) / gaussian_moment(0, 50.0) - 1 / 50) < 1e-16


def test_b2_for_y_fourth():
    rep = asy.ps2_check(asy.make_problem("model", "y4"), 0.0, 2)
    assert abs(rep.formula - 3) < 1e-14
    assert abs(rep.coefficient - 3) < 1e-4
    assert abs(gaussian_moment(4, 20.0) / gaussian_moment(0, 20.0) - 3 / 400) < 1e-16


@pytest.mark.parametrize("amp,x", [("y", 0.0), ("c1", 0.3), ("c2", 0.3), ("y3", 0.0)])
def test_vanishing_b0(amp, x):
    rep = asy.ps2_check(asy.make_problem("model", amp), x, 0)
    assert abs(rep.coefficient) < 1e-6
    assert rep.formula == 0


@pytest.mark.parametrize("amp,i", [("c2", 1), ("c4", 2)])
def test_shifted_amplitudes(amp, i):
    rep = asy.ps2_check(asy.make_problem("model", amp), 0.3, i)
    assert rep.error < 1e-4


@pytest.mark.parametrize("phase", ["model", "intermediate"])
@pytest.mark.parametrize("amp", ["one", "cos", "y2", "c2"])
def test_fitted_b0_restricts_to_amplitude(phase, amp):
    # the real critical set is {x = 0, y = 0} for both phases
    prob = asy.make_problem(phase, amp)
    rep = asy.ps2_check(prob, 0.0, 0)
    assert abs(rep.coefficient - prob.amplitude(0.0, 0.0)) < 1e-6


# ---------------------------------------------------------------- Maslov
def test_diagonal_loop_index_one():
    for n in (1, 2, 3):
        path = asy.diagonal_loop([1] + [0] * (n - 1))
        assert asy.maslov_winding(path) == 1
        assert abs(asy.z4_holonomy(path) - 1j) < 1e-14


def test_constant_path():
    path = asy.UnitaryPath(np.broadcast_to(np.eye(2, dtype=complex), (20, 2, 2)).copy())
    assert asy.maslov_winding(path) == 0
    assert asy.z4_holonomy(path) == 1


def test_concatenation_doubles():
    path = asy.diagonal_loop([1, -2, 2])
    assert asy.maslov_winding(path) == 1
    assert asy.maslov_winding(path.concatenate(path)) == 2


def test_unitary_path_validation():
    with pytest.raises(ValueError):
        asy.UnitaryPath(np.ones((5, 2, 2)))
    t = np.linspace(0, 0.5, 10)
    with pytest.raises(ValueError, match="close"):
        asy.UnitaryPath(np.exp(1j * np.pi * t)[:, None, None] * np.eye(1))


def test_undersampled_path_rejected():
    with pytest.raises(ValueError, match="under-sampled"):
        asy.maslov_winding(asy.diagonal_loop([5], samples=8))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2 ** 31 - 1), n=st.integers(1, 3))
def test_z4_holonomy_is_reduced_index(seed, n):
    path, mu = asy.random_lagrangian_loop(np.random.default_rng(seed), n)
    w = asy.maslov_winding(path)
    assert w == mu
    assert abs(asy.z4_holonomy(path) - 1j ** (w % 4)) < 1e-12
