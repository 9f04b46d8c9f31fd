import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from btlab import geometry as geo
from btlab.observables import x1, x3
from oracles import embedding, finite_difference_laplacian, richardson_laplacian

MODEL = geo.fubini_study_model()


def test_form_density_values():
    assert MODEL.form_density(0) == 1.0
    assert MODEL.form_density(1) == 0.25
    assert MODEL.total_area == 2 * np.pi


def test_total_area_by_quadrature():
    q = geo.build_quadrature(MODEL, 16, 16)
    assert abs(q.integrate(np.ones(q.size)) - 2 * np.pi) < 1e-10


def test_quadrature_64():
    q = geo.build_quadrature(MODEL, 64, 64)
    assert abs(q.integrate(np.ones(q.size)) - 2 * np.pi) < 1e-12
    assert abs(q.integrate(x3(q.z))) < 1e-12
    # int t/(1+t) dmu = 2 pi int_0^inf t (1+t)^-3 dt = 2 pi B(2, 1)
    t = np.abs(q.z) ** 2
    assert abs(q.integrate(t / (1 + t)) - 2 * np.pi * 0.5) < 1e-12


def test_embedding_on_sphere():
    z = np.array([0.3 + 0.1j, -2.0 + 1j, 0.0])
    X = MODEL.embedding(z)
    assert np.allclose(np.sum(X ** 2, axis=0), 1.0)
    assert np.allclose(X[:, 0], embedding(z[0]))


def test_chart_transition_preserves_density():
    z = np.array([0.3 + 0.2j, 1.5 - 0.7j, -4 + 1j])
    assert np.allclose(MODEL.pullback_density(z), MODEL.form_density(z))
    assert np.allclose(MODEL.chart_transition(MODEL.chart_transition(z)), z)
    south = geo.fubini_study_model("south")
    assert np.allclose(south.embedding(1 / z)[2], MODEL.embedding(z)[2])


@pytest.mark.parametrize("kind,degree", [("prequantum", 1), ("halfform", -1), ("canonical", -2), ("trivial", 0)])
def test_bundle_degrees_and_curvature(kind, degree):
    b = geo.bundle(kind)
    assert b.degree == degree
    z = 0.4 - 0.3j
    assert b.curvature_scalar(z) == degree
    # curvature (1/i) dd'psi against omega: Laplacian(psi) / (4 G)
    fd = finite_difference_laplacian(b.metric_log_weight, z) / (4 * MODEL.form_density(z))
    assert abs(fd - degree) < 1e-5


@pytest.mark.parametrize("kind", ["prequantum", "halfform", "canonical", "trivial"])
def test_curvature_at_random_points(kind):
    b = geo.bundle(kind)
    rng = np.random.default_rng(7)
    z = rng.uniform(-2, 2, 100) + 1j * rng.uniform(-2, 2, 100)
    for zz in z:
        fd = richardson_laplacian(b.metric_log_weight, zz) / (4 * MODEL.form_density(zz))
        assert abs(fd - b.curvature_scalar(zz)) < 1e-6


def test_twist_bundles():
    assert geo.omega1_scalar("delta") == 0
    assert geo.omega1_scalar("trivial") == 1
    assert geo.auxiliary_bundle("delta").degree == 0
    assert geo.auxiliary_bundle("trivial").degree == 1
    with pytest.raises(ValueError):
        geo.bundle("twist", "bogus")
    with pytest.raises(ValueError):
        geo.bundle("nonsense")


def test_bundle_algebra():
    L = geo.bundle("prequantum")
    assert L.power(3).degree == 3
    assert L.tensor(L.dual()).weight == 0
    assert geo.bundle("halfform").power(2).degree == geo.bundle("canonical").degree


def test_holonomy_constant_loop():
    loop = geo.LoopPath(np.full(16, 0.3 + 0.2j))
    assert abs(geo.holonomy(geo.bundle("prequantum"), loop) - 1) < 1e-14


def test_holonomy_equator():
    loop = geo.circle_loop(1.0, 128)
    assert abs(geo.holonomy(geo.bundle("prequantum"), loop) + 1) < 1e-12
    assert abs(geo.action(geo.bundle("prequantum"), loop) - np.pi) < 1e-12


def test_holonomy_equator_by_transport_ode():
    # independent check: integrate dh/ds = -A(z') h with an ODE solver
    from scipy.integrate import solve_ivp

    L = geo.bundle("prequantum")

    def rhs(s, y):
        z = np.exp(1j * s)
        A = L.connection_form(z) * 1j * z
        return [(-A * (y[0] + 1j * y[1])).real, (-A * (y[0] + 1j * y[1])).imag]

    sol = solve_ivp(rhs, (0, 2 * np.pi), [1.0, 0.0], rtol=1e-11, atol=1e-12)
    h = sol.y[0, -1] + 1j * sol.y[1, -1]
    assert abs(h - geo.holonomy(L, geo.circle_loop(1.0, 128))) < 1e-8


def test_trivial_bundle_holonomy():
    s = 2 * np.pi * np.arange(64) / 64
    loop = geo.LoopPath(0.3 + 0.5 * np.exp(1j * s) + 0.1 * np.exp(2j * s))
    assert geo.holonomy(geo.bundle("trivial"), loop) == 1


@settings(max_examples=25, deadline=None)
@given(r=st.floats(0.1, 3.0), cx=st.floats(-0.5, 0.5), cy=st.floats(-0.5, 0.5))
def test_action_equals_enclosed_area(r, cx, cy):
    c = complex(cx, cy)
    if abs(c) >= r:
        c = 0.0
    loop = geo.circle_loop(r, 256, center=c)
    a = geo.action(geo.bundle("prequantum"), loop)
    assert abs(a - geo.enclosed_area(MODEL, loop)) < 1e-9


@settings(max_examples=20, deadline=None)
@given(r=st.floats(0.2, 3.0))
def test_reversed_loop_negates_action(r):
    loop = geo.circle_loop(r, 128)
    L = geo.bundle("prequantum")
    assert abs(geo.action(L, loop) + geo.action(L, loop.reversed())) < 1e-12
    assert abs(geo.action(L, loop.repeated(2)) - 2 * geo.action(L, loop)) < 1e-10


@settings(max_examples=30, deadline=None)
@given(lam=st.floats(-0.9, 0.9))
def test_latitude_holonomy(lam):
    # x3 = lam is |z|^2 = (1 - lam) / (1 + lam) in the north chart
    loop = geo.circle_loop(np.sqrt((1 - lam) / (1 + lam)), 256)
    by_connection = geo.holonomy(geo.bundle("prequantum"), loop)
    by_area = np.exp(1j * geo.enclosed_area(MODEL, loop))
    assert abs(by_connection - by_area) < 1e-8
    assert abs(by_connection - np.exp(1j * np.pi * (1 - lam))) < 1e-8


def test_centered_circle_area_closed_form():
    r = 0.7
    loop = geo.circle_loop(r, 128, center=0.0)
    assert abs(geo.enclosed_area(MODEL, loop) - 2 * np.pi * r * r / (1 + r * r)) < 1e-12


def test_level_set_equator():
    (loop,) = geo.level_set_loops(MODEL, x3, 0.0)
    assert np.allclose(np.abs(loop.samples), 1.0, atol=1e-12)


def test_level_set_half():
    (loop,) = geo.level_set_loops(MODEL, x3, 0.5)
    assert np.allclose(np.abs(loop.samples) ** 2, 1 / 3, atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(level=st.floats(-0.8, 0.8), eps=st.sampled_from([0.0, 0.1, 0.2]))
def test_level_set_samples_on_level(level, eps):
    f0 = x3 + eps * x1 * x3
    for loop in geo.level_set_loops(MODEL, f0, level):
        assert np.max(np.abs(f0(loop.samples) - level)) < 1e-8


def test_level_set_empty():
    with pytest.raises(ValueError, match="empty"):
        geo.level_set_loops(MODEL, x3, 1.5)


def test_level_set_counterclockwise():
    (loop,) = geo.level_set_loops(MODEL, x3 + 0.1 * x1 * x3, 0.3)
    assert geo.action(geo.bundle("prequantum"), loop) > 0
    assert loop.level == 0.3


def test_loop_from_samples_closure():
    s = np.linspace(0, 2 * np.pi, 33)
    loop = geo.LoopPath.from_samples(np.exp(1j * s))
    assert loop.n == 32
    with pytest.raises(ValueError):
        geo.LoopPath.from_samples(np.exp(1j * s[:-3]))


def test_spectral_antiderivative_roundtrip():
    s = 2 * np.pi * np.arange(64) / 64
    f = np.cos(3 * s) + 0.5
    F, total = geo.spectral_antiderivative(f)
    assert abs(total - np.pi) < 1e-12
    assert np.allclose(F, np.sin(3 * s) / 3 + 0.5 * s, atol=1e-12)
