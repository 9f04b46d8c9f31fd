import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.polynomial import Polynomial

from btlab import toeplitz as tpz
from btlab.fitting import fit_loglog
from btlab.observables import constant, holomorphic_laplacian, x1, x2, x3
from btlab.quantum import quantum_space
from oracles import toeplitz_x3_diagonal

KS = (8, 16, 32, 64)
KS_HI = (16, 32, 64, 128)


def _defects(fn, ks, twist="delta"):
    return [fn(quantum_space(k, twist)) for k in ks]


# ---------------------------------------------------------------- assemble
@pytest.mark.parametrize("twist", ["delta", "trivial"])
def test_assemble_one_is_identity(twist):
    sp = quantum_space(9, twist)
    assert np.allclose(tpz.assemble(constant(1.0), sp).matrix, np.eye(sp.dim), atol=1e-12)


@pytest.mark.parametrize("k", [1, 4, 13, 50])
def test_assemble_x3_trivial_diagonal(k):
    sp = quantum_space(k, "trivial")
    A = tpz.assemble(x3, sp).matrix
    N = k
    expected = np.array([(N - 2 * m) / (N + 2) for m in range(N + 1)])
    assert np.allclose(np.diag(A).real, expected, atol=1e-12)
    assert np.allclose(expected, toeplitz_x3_diagonal(N), atol=1e-13)
    assert np.max(np.abs(A - np.diag(np.diag(A)))) < 1e-12


def test_assemble_x1_tridiagonal():
    A = tpz.assemble(x1, quantum_space(12, "delta")).matrix
    i, j = np.indices(A.shape)
    assert np.max(np.abs(A[np.abs(i - j) != 1])) < 1e-12
    assert np.min(np.abs(A[np.abs(i - j) == 1])) > 1e-3


def test_assemble_rejects_underresolved_degree():
    sp = quantum_space(6, "delta", extra_degree=2)
    with pytest.raises(ValueError):
        tpz.assemble(x3 ** 4, sp)


@pytest.mark.parametrize("k", [1, 7, 64, 128])
def test_hermitian_for_real_multipliers(k):
    sp = quantum_space(k, "trivial")
    op = tpz.assemble(x1 * x3 + x2, sp)
    assert op.hermitian_defect() < 1e-10


# ---------------------------------------------------------------- Q(f)
@pytest.mark.parametrize("k", [1, 2, 8, 31, 64])
def test_quantize_x3_delta_spectrum(k):
    ev = tpz.spectrum(tpz.quantize_gq(x3, quantum_space(k, "delta")))
    assert np.allclose(ev, np.sort(1 - (2 * np.arange(k) + 1) / k), atol=1e-12)


@pytest.mark.parametrize("k", [1, 5, 32])
def test_quantize_x3_trivial_spectrum(k):
    ev = tpz.spectrum(tpz.quantize_gq(x3, quantum_space(k, "trivial")))
    m = np.arange(k + 1)
    assert np.allclose(ev, np.sort((k + 1) * (k - 2 * m) / (k * (k + 2))), atol=1e-12)


def test_quantize_constant():
    sp = quantum_space(10, "delta")
    assert np.allclose(tpz.quantize_gq(constant(2.5), sp).matrix, 2.5 * np.eye(sp.dim), atol=1e-12)


def test_gq_is_rescaled_toeplitz_for_x3_delta():
    k = 11
    sp = quantum_space(k, "delta")
    Q = tpz.quantize(x3, sp, "gq").matrix
    T = tpz.quantize(x3, sp, "toeplitz").matrix
    assert np.allclose(Q, (1 + 1 / k) * T, atol=1e-12)


def test_normalized_symbols():
    z = np.array([0.3 + 0.4j, -1.2 + 0.1j])
    s = tpz.normalized_symbol(x3, "toeplitz")
    assert np.allclose(s.f1(z), -x3(z))
    assert np.allclose(tpz.normalized_symbol(x3, "gq").f1(z), 0)
    with pytest.raises(ValueError):
        tpz.quantize(x3, quantum_space(3, "delta"), "weyl")


def test_quantize_series_reproduces_toeplitz():
    # T(x3) has normalized symbol (x3, -x3): quantizing that series gives T(x3) up to O(k^-2)
    k = 40
    sp = quantum_space(k, "delta")
    T = tpz.quantize(x3, sp, "toeplitz").matrix
    S = tpz.quantize_series(tpz.normalized_symbol(x3, "toeplitz"), sp).matrix
    assert tpz.op_norm(T - S) < 2.0 / k ** 2


# ---------------------------------------------------------------- spectrum
def test_spectrum_identity_and_diagonal():
    op = tpz.Operator(np.eye(4), 3, "delta")
    assert np.allclose(tpz.spectrum(op), 1.0)
    d = np.array([3.0, -1.0, 0.5, 2.0])
    assert np.allclose(tpz.spectrum(tpz.Operator(np.diag(d), 3, "delta")), np.sort(d))


def test_spectrum_k8_explicit():
    ev = tpz.spectrum(tpz.quantize_gq(x3, quantum_space(8, "delta")))
    assert np.allclose(ev, np.arange(-7, 8, 2) / 8, atol=1e-12)


def test_spectrum_rejects_non_hermitian():
    with pytest.raises(ValueError):
        tpz.spectrum(tpz.Operator(np.array([[0, 1.0], [0, 0]]), 1, "trivial"))


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2 ** 31 - 1), k=st.integers(2, 24))
def test_operator_norm_bounded_by_sup(seed, k):
    rng = np.random.default_rng(seed)
    a, b, c = rng.uniform(-1, 1, 3)
    f = a * x1 + b * x2 + c * x3
    sup = np.sqrt(a * a + b * b + c * c)
    assert tpz.op_norm(tpz.assemble(f, quantum_space(k, "delta"))) <= sup + 1e-12


# ---------------------------------------------------------------- product / commutator
def test_product_defect_trivial_case():
    assert tpz.product_defect(constant(1.0), constant(1.0), quantum_space(9, "delta")) < 1e-12


def test_product_defect_x3_x3_order():
    d = _defects(lambda s: tpz.product_defect(x3, x3, s), KS)
    assert fit_loglog(KS, d).slope <= -0.9


@pytest.mark.xfail(strict=True, reason="pre-asymptotic: slope -0.85 over k=8..64; first order shown below")
def test_product_defect_x3_x1_order_low_k():
    d = _defects(lambda s: tpz.product_defect(x3, x1, s), KS)
    assert fit_loglog(KS, d).slope <= -0.9


def test_product_defect_x3_x1_order():
    d = _defects(lambda s: tpz.product_defect(x3, x1, s), KS_HI)
    assert fit_loglog(KS_HI, d).slope <= -0.9


def test_product_defect_x3_x1_is_first_order():
    # k * defect increases to a finite limit: exactly first order, approached from above
    ks = (8, 16, 32, 64, 128, 256)
    kd = np.array(ks) * np.array(_defects(lambda s: tpz.product_defect(x3, x1, s), ks))
    assert np.all(np.diff(kd) > 0)
    assert np.all(np.diff(np.diff(kd)) < 0)


def test_commutator_of_equal_observables():
    assert tpz.commutator_defect(x1, x1, quantum_space(10, "delta"), False) < 1e-12


def test_commutator_first_order_without_correction():
    d = _defects(lambda s: tpz.commutator_defect(x1, x2, s, False), KS_HI)
    assert fit_loglog(KS_HI, d).slope <= -0.9


def test_commutator_second_order_with_correction():
    d = _defects(lambda s: tpz.commutator_defect(x1, x2, s, True), KS_HI)
    assert fit_loglog(KS_HI, d).satisfies(-1.7)


def test_commutator_second_order_trivial_twist():
    d = _defects(lambda s: tpz.commutator_defect(x3 ** 2, x1, s, True), KS_HI, "trivial")
    assert fit_loglog(KS_HI, d).slope <= -1.7


def test_commutator_leading_term_is_bracket():
    # i k [Q(x1), Q(x2)] -> T(2 x3)
    sp = quantum_space(64, "delta")
    Q1, Q2 = tpz.quantize_gq(x1, sp).matrix, tpz.quantize_gq(x2, sp).matrix
    lhs = 1j * 64 * (Q1 @ Q2 - Q2 @ Q1)
    assert tpz.op_norm(lhs - tpz.assemble(2 * x3, sp).matrix) < 0.1


# ---------------------------------------------------------------- trace
@pytest.mark.parametrize("twist", ["delta", "trivial"])
def test_trace_of_one_is_dimension(twist):
    for k in (1, 5, 40):
        sp = quantum_space(k, twist)
        assert abs(np.trace(tpz.quantize_gq(constant(1.0), sp).matrix) - sp.dim) < 1e-10
    rep = tpz.trace_check(constant(1.0), (4, 8), twist)
    assert max(rep.residuals) < 1e-10


def test_trace_x3_vanishes():
    for k in (1, 8, 33, 128):
        assert abs(np.trace(tpz.quantize_gq(x3, quantum_space(k, "trivial")).matrix)) < 1e-10


@pytest.mark.parametrize("twist", ["delta", "trivial"])
def test_trace_x3_squared_residual(twist):
    rep = tpz.trace_check(x3 ** 2, KS, twist)
    assert rep.fit.satisfies(-0.9)


def test_trace_toeplitz_scheme_uses_subprincipal_term():
    rep = tpz.trace_check(x3 ** 2, KS, "trivial", scheme="toeplitz")
    assert rep.fit.satisfies(-0.9)


# ---------------------------------------------------------------- functional calculus
def test_funcalc_identity():
    rep = tpz.functional_calculus_check(Polynomial([0, 1]), x3 + 0.2 * x1, (4, 8), "delta", "gq")
    assert max(rep.defects) < 1e-12


def test_funcalc_square_of_gq():
    rep = tpz.functional_calculus_check(Polynomial([0, 0, 1]), x3, KS, "delta", "gq")
    assert rep.fit.satisfies(-1.7)


def test_funcalc_toeplitz_needs_correction():
    with_c = tpz.functional_calculus_check(Polynomial([0, 0, 1]), x3, KS_HI, "delta", "toeplitz", True)
    without = tpz.functional_calculus_check(Polynomial([0, 0, 1]), x3, KS_HI, "delta", "toeplitz", False)
    assert with_c.fit.satisfies(-1.7)
    assert without.fit.slope > -1.7


def test_funcalc_toeplitz_without_correction_is_first_order():
    ks = (32, 64, 128, 256)
    rep = tpz.functional_calculus_check(Polynomial([0, 0, 1]), x3, ks, "delta", "toeplitz", False)
    assert rep.fit.slope <= -0.9
    kd = np.array(ks) * np.array(rep.defects)
    assert np.all(np.diff(kd) > 0) and kd[-1] < 2.0


def test_funcalc_nonpolynomial_g():
    g = (np.exp, np.exp, np.exp, np.exp)
    rep = tpz.functional_calculus_check(g, x3, KS, "delta", "gq")
    assert rep.fit.satisfies(-1.7)


# ---------------------------------------------------------------- invariants
@settings(max_examples=25, deadline=None)
@given(k=st.integers(1, 64), twist=st.sampled_from(["delta", "trivial"]),
       a=st.floats(-1, 1), b=st.floats(-1, 1), c=st.floats(-1, 1))
def test_positivity(k, twist, a, b, c):
    f = (x1 - a) ** 2 + (a * x2 + b * x3 - c) ** 2
    evals = np.linalg.eigvalsh(tpz.assemble(f, quantum_space(k, twist)).matrix)
    assert evals.min() >= -1e-10


@pytest.mark.parametrize("p", [1, 2, 3])
@pytest.mark.parametrize("twist", ["delta", "trivial"])
def test_rotational_selection_rule(p, twist):
    # (x1 + i x2)^p transforms as e^{i p theta}
    f = (x1 + 1j * x2) ** p
    A = tpz.assemble(f, quantum_space(20, twist)).matrix
    i, j = np.indices(A.shape)
    band = (i - j) == p
    assert np.max(np.abs(A[~band])) < 1e-12
    assert np.min(np.abs(A[band])) > 1e-4


@pytest.mark.parametrize("twist", ["delta", "trivial"])
@pytest.mark.parametrize("f", [x3, x1 * x3 + x2, x3 ** 3 - 0.5 * x1 ** 2], ids=["x3", "x1x3+x2", "cubic"])
def test_gq_minus_toeplitz_is_laplacian_term(twist, f):
    k = 24
    sp = quantum_space(k, twist)
    lhs = tpz.quantize(f, sp, "gq").matrix - tpz.quantize(f, sp, "toeplitz").matrix
    rhs = tpz.assemble(holomorphic_laplacian(f) * (-1.0 / (2 * k)), sp).matrix
    assert np.max(np.abs(lhs - rhs)) < 1e-12


@settings(max_examples=15, deadline=None)
@given(k=st.integers(1, 128), seed=st.integers(0, 2 ** 31 - 1))
def test_raw_matrix_hermitian(k, seed):
    rng = np.random.default_rng(seed)
    c = rng.normal(size=4)
    f = c[0] * x1 + c[1] * x2 * x3 + c[2] * x3 ** 2 + c[3] * x1 * x2 * x3
    sp = quantum_space(k, "trivial")
    E = sp.node_values
    A = (E.conj().T * (sp.quad.weights * f(sp.quad.z))) @ E
    assert np.max(np.abs(A - A.conj().T)) < 1e-10
