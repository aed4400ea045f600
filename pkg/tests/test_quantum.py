import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from xyineq import quantum as qu
from xyineq.errors import BudgetError, ModelError
from xyineq.ising import IsingEnumeration, IsingModel
from xyineq.model import CouplingTable, ModelSpec, SiteSet, Term, kitaev_couplings, kitaev_sites


def xy_pair(beta=1.0, j1=1.0, j2=1.0, spin="1/2", convention="1-2"):
    table = CouplingTable((Term(0b11, j1, j2),), "quantum-xy", convention)
    return ModelSpec(SiteSet(2), table, beta, spin)


def test_spin_half_matrices():
    s1, s2, s3 = qu.spin_matrices("1/2")
    assert np.allclose(s1, [[0, 0.5], [0.5, 0]])
    assert np.allclose(s2, [[0, -0.5j], [0.5j, 0]])
    assert np.allclose(s3, [[0.5, 0], [0, -0.5]])


def test_spin_one_diagonal():
    assert np.allclose(qu.spin_matrices(1)[2], np.diag([1, 0, -1]))


@pytest.mark.parametrize("spin", ["1/2", "1", "3/2", "2", "5/2"])
def test_spin_algebra(spin):
    s1, s2, s3 = qu.spin_matrices(spin)
    s = float(Fraction(spin))
    assert np.linalg.norm(s1 @ s2 - s2 @ s1 - 1j * s3) < 1e-13
    assert np.linalg.norm(s2 @ s3 - s3 @ s2 - 1j * s1) < 1e-13
    casimir = s1 @ s1 + s2 @ s2 + s3 @ s3
    assert np.allclose(casimir, s * (s + 1) * np.eye(s1.shape[0]))


def test_spin_matrices_are_private_copies():
    s1 = qu.spin_matrices("1/2")[0]
    s1[0, 1] = 99
    assert qu.spin_matrices("1/2")[0][0, 1] == 0.5


def test_site_operator_lifts():
    s1, s2, _ = qu.spin_matrices()
    assert np.allclose(qu.site_operator(s1, 0, 1), s1)
    a, b = qu.site_operator(s1, 0, 2), qu.site_operator(s2, 1, 2)
    assert np.allclose(a @ b, b @ a)
    for n in (1, 2, 3):
        for x in range(n):
            assert abs(np.trace(qu.site_operator(s1, x, n))) < 1e-14
    with pytest.raises(ModelError):
        qu.site_operator(s1, 2, 2)


def test_budget():
    with pytest.raises(BudgetError):
        qu.check_dimension(15, "1/2")
    assert qu.check_dimension(14, "1/2") == 1 << 14


def test_single_site_hamiltonian():
    spec = ModelSpec(SiteSet(1), CouplingTable((Term(1, 0.8, 0.0),), "quantum-xy"), 1.0)
    h = qu.assemble_hamiltonian(spec)
    assert np.allclose(h, -0.8 * qu.spin_matrices()[0])
    assert np.allclose(np.linalg.eigvalsh(h), [-0.4, 0.4])


def test_two_site_spectrum():
    h = qu.assemble_hamiltonian(xy_pair())
    assert np.allclose(np.linalg.eigvalsh(h), [-0.5, 0, 0, 0.5])


@given(st.floats(0, 2), st.floats(0, 2), st.integers(1, 3))
def test_axis_conventions_share_spectra(j1, j2, n):
    terms = tuple(Term(m, j1 * m / 7, j2 / m) for m in range(1, 1 << n))
    spec = ModelSpec(SiteSet(n), CouplingTable(terms, "quantum-xy"))
    e12 = np.linalg.eigvalsh(qu.assemble_hamiltonian(spec, (1, 2)))
    e13 = np.linalg.eigvalsh(qu.assemble_hamiltonian(spec, (1, 3)))
    assert np.allclose(e12, e13, atol=1e-12)


def test_default_axes_follow_convention():
    spec = xy_pair(convention="1-3")
    assert np.allclose(qu.assemble_hamiltonian(spec), qu.assemble_hamiltonian(spec, (1, 3)))
    with pytest.raises(ModelError):
        qu.assemble_hamiltonian(spec, (2, 3))


def test_gibbs_closed_forms():
    for beta in (0.3, 1.0, 2.0):
        for j in (0.5, 1.0):
            spec = ModelSpec(SiteSet(1), CouplingTable((Term(1, j, 0.0),), "quantum-xy"), beta)
            s1 = qu.spin_product(1, 1, 1)
            assert qu.gibbs_expectation(qu.assemble_hamiltonian(spec), beta, s1) == pytest.approx(
                0.5 * math.tanh(beta * j / 2), abs=1e-14)
        h = qu.assemble_hamiltonian(xy_pair(beta))
        assert qu.gibbs_expectation(h, beta, qu.spin_product(1, 0b11, 2)) == pytest.approx(
            0.25 * math.tanh(beta / 4), abs=1e-14)


def test_beta_zero_is_uniform():
    h = qu.assemble_hamiltonian(xy_pair())
    op = qu.spin_product(3, 0b11, 2) + np.eye(4)
    assert qu.gibbs_expectation(h, 0.0, op) == pytest.approx(np.trace(op).real / 4)


def test_truncated_examples():
    h = qu.assemble_hamiltonian(xy_pair())
    s10, s11 = qu.spin_product(1, 1, 2), qu.spin_product(1, 2, 2)
    assert qu.truncated_correlation(h, 1.0, s10, np.eye(4)) == pytest.approx(0, abs=1e-15)
    assert qu.truncated_correlation(h, 0.0, s10, s10) == pytest.approx(0.25)
    assert qu.truncated_correlation(h, 1.0, s10, s11) == pytest.approx(
        qu.gibbs_expectation(h, 1.0, s10 @ s11), abs=1e-15)


def test_low_temperature_is_stable():
    h = qu.assemble_hamiltonian(xy_pair())
    state = qu.GibbsState(h, 1e4)
    assert np.isfinite(state.log_partition)
    assert state.expectation(h) == pytest.approx(-0.5)
    rho = state.density_matrix()
    assert np.trace(rho).real == pytest.approx(1.0)


def test_non_hermitian_rejected():
    with pytest.raises(ModelError):
        qu.GibbsState(np.array([[0, 1], [0, 0]], dtype=complex), 1.0)


def test_doubled_operator_identity():
    eye = np.eye(3)
    assert np.allclose(qu.doubled_operator(eye, -1), 0)
    assert np.allclose(qu.doubled_operator(eye, 1), 2 * np.eye(9))


def test_doubled_truncated_identity():
    spec = xy_pair(0.9)
    h = qu.assemble_hamiltonian(spec)
    sx, sy = qu.spin_product(1, 1, 2), qu.spin_product(1, 2, 2)
    d = 0.5 * qu.doubled_expectation(h, spec.beta, qu.doubled_operator(sx, -1) @ qu.doubled_operator(sy, -1))
    assert d == pytest.approx(qu.truncated_correlation(h, spec.beta, sx, sy), abs=1e-10)


def test_mu_nu_unitary_and_rows():
    for n in (1, 2, 3):
        w = qu.mu_nu_basis(n)
        assert np.allclose(w @ w.conj().T, np.eye(4 ** n), atol=1e-12)
    w = qu.mu_nu_basis(1)
    r = 1 / np.sqrt(2)
    expected = [[r, 0, 0, r], [r, 0, 0, -r], [0, r, r, 0], [0, r, -r, 0]]
    for row, want in zip(w, expected):
        # rows agree up to a global sign
        assert np.allclose(row, want) or np.allclose(row, -np.array(want))


@pytest.mark.parametrize("n", [1, 2])
def test_mu_nu_sign_patterns(n):
    w = qu.mu_nu_basis(n)
    for x in range(n):
        for axis in (1, 3):
            single = qu.spin_product(axis, 1 << x, n)
            plus = w @ qu.doubled_operator(single, 1) @ w.conj().T
            minus = w @ qu.doubled_operator(single, -1) @ w.conj().T
            assert np.abs(plus.imag).max() < 1e-13 and np.abs(minus.imag).max() < 1e-13
            assert plus.real.min() >= -1e-14
            if axis == 1:
                assert minus.real.min() >= -1e-14
            else:
                assert minus.real.max() <= 1e-14


def test_composite_two_site_saturates():
    for beta in (0.4, 1.0, 1.7):
        spec = xy_pair(beta, convention="1-3")
        quantum, ising = qu.composite_ising_quantum_expectation(spec, 0b11)
        assert quantum == pytest.approx(math.tanh(beta), abs=1e-12)
        assert ising == pytest.approx(math.tanh(beta), abs=1e-12)


def test_composite_odd_set_vanishes_without_fields():
    spec = xy_pair(1e-9, convention="1-3")
    quantum, ising = qu.composite_ising_quantum_expectation(spec, 0b01)
    assert abs(quantum) < 1e-12 and abs(ising) < 1e-12


@given(st.floats(0.01, 2.0), st.floats(0, 2), st.floats(0, 2), st.floats(0, 2))
def test_composite_spin_one_domination(beta, j1, j3, h):
    table = CouplingTable((Term(0b11, j1, j3), Term(0b01, 0.0, h)), "quantum-xy", "1-3")
    spec = ModelSpec(SiteSet(2), table, beta, 1)
    for x in (1, 2, 3):
        quantum, ising = qu.composite_ising_quantum_expectation(spec, x)
        assert ising - quantum >= -1e-9


def test_magnetisation_examples():
    single = ModelSpec(SiteSet(1), CouplingTable((Term(1, 1.0, 0.0),), "quantum-xy"), 3.0)
    assert qu.finite_volume_magnetisation(single) == pytest.approx(0.25)
    free = ModelSpec(SiteSet(4), CouplingTable((Term(0b11, 1.0, 1.0),), "quantum-xy"), 1e-12)
    assert qu.finite_volume_magnetisation(free) == pytest.approx(1 / 16, abs=1e-10)
    pair = xy_pair(1.0)
    assert qu.finite_volume_magnetisation(pair) == pytest.approx(0.25 * (0.5 + 0.5 * math.tanh(0.25)))


def test_kitaev_hamiltonian_is_hermitian_and_ferromagnetic_correlations():
    spec = ModelSpec(kitaev_sites(1, 1), kitaev_couplings(1, 1), 1.0)
    h = qu.assemble_hamiltonian(spec)
    assert qu.is_hermitian(h)
    state = qu.GibbsState(h, 1.0)
    assert state.expectation(qu.spin_product(1, 0b0101, 4)) >= -1e-12
    assert state.expectation(qu.spin_product(3, 0b1111, 4)) >= -1e-12


def test_rescaled_spins():
    s1 = qu.spin_product(1, 1, 1, "3/2", rescaled=True)
    assert np.abs(np.linalg.eigvalsh(s1)).max() == pytest.approx(1.0)


def test_spin_validation():
    with pytest.raises(ModelError):
        qu.spin_matrices("1/3")
    with pytest.raises(ModelError):
        qu.product_operator([(0, 4)], 1)
