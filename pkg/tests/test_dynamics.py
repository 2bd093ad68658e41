import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from qrgdyn.couplings import Coupling
from qrgdyn.dynamics import (
    DensityMatrix,
    build_hamiltonian,
    concurrence_by_evolution,
    concurrence_closed_form,
    concurrence_series,
    concurrence_wootters,
    envelope,
    evolve,
    initial_state,
    period,
    propagator_analytic,
    propagator_spectral,
)
from qrgdyn.errors import InvalidStateError, UnderResolvedGridError, ValidationError

FIELDS = (0.0, 0.25, 0.5, 0.9, 1.0, 1.5, 3.0)
ZERO_PATTERN = [(0, 1), (0, 2), (1, 0), (1, 3), (2, 0), (2, 3), (3, 1), (3, 2)]


def pure(psi):
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return DensityMatrix(np.outer(psi, psi.conj()))


def test_hamiltonian_zero_field():
    h = build_hamiltonian(Coupling(1.0, 0.0)).matrix
    expected = np.zeros((4, 4))
    expected[0, 3] = expected[3, 0] = expected[1, 2] = expected[2, 1] = -1.0
    np.testing.assert_array_equal(h, expected)


def test_hamiltonian_critical_field():
    h = build_hamiltonian(Coupling(1.0, 1.0)).matrix
    np.testing.assert_array_equal(np.diag(h), [-2.0, 0.0, 0.0, 2.0])
    assert h[0, 3] == h[1, 2] == -1.0


def test_hamiltonian_scales_with_J():
    a = build_hamiltonian(Coupling(1.0, 0.5)).matrix
    b = build_hamiltonian(Coupling(2.0, 0.5)).matrix
    np.testing.assert_array_equal(b, 2.0 * a)
    assert np.trace(a) == 0.0 and np.array_equal(a, a.T)


@pytest.mark.parametrize("g", FIELDS)
def test_hamiltonian_is_pauli_sum(g):
    # -J (sx sx + g (sz 1 + 1 sz)) built independently from Pauli matrices
    sx = np.array([[0, 1], [1, 0]])
    sz = np.diag([1, -1])
    eye = np.eye(2)
    ref = -(np.kron(sx, sx) + g * (np.kron(sz, eye) + np.kron(eye, sz)))
    np.testing.assert_allclose(build_hamiltonian(Coupling(1.0, g)).matrix, ref, atol=1e-15)


def test_propagator_identity_at_zero_time():
    for g in FIELDS:
        np.testing.assert_array_equal(propagator_analytic(Coupling(1.0, g), 0.0).matrix, np.eye(4))
        np.testing.assert_allclose(propagator_spectral(Coupling(1.0, g), 0.0).matrix, np.eye(4), atol=1e-14)


def test_propagator_quarter_turn_at_zero_field():
    u = propagator_analytic(Coupling(1.0, 0.0), math.pi / 2).matrix
    assert u[0, 3] == pytest.approx(1j) and u[3, 0] == pytest.approx(1j)
    assert u[1, 2] == pytest.approx(1j) and u[2, 1] == pytest.approx(1j)
    for i in range(4):
        assert abs(u[i, i]) < 1e-15


@pytest.mark.parametrize("g, t", [(1.0, 0.7), (0.5, 1.3)])
def test_propagator_analytic_vs_spectral(g, t):
    c = Coupling(1.0, g)
    np.testing.assert_allclose(propagator_analytic(c, t).matrix, propagator_spectral(c, t).matrix, atol=1e-10)


@pytest.mark.parametrize("g", FIELDS)
def test_propagator_against_expm(g):
    c = Coupling(1.3, g)
    for t in np.linspace(-2.0, 5.0, 15):
        ref = expm(-1j * build_hamiltonian(c).matrix * t)
        np.testing.assert_allclose(propagator_analytic(c, t).matrix, ref, atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(g=st.floats(0.0, 5.0), t=st.floats(-20.0, 20.0), J=st.floats(0.1, 3.0))
def test_propagator_invariants(g, t, J):
    c = Coupling(J, g)
    for prop in (propagator_analytic(c, t), propagator_spectral(c, t)):
        u = prop.matrix
        assert np.linalg.norm(u @ u.conj().T - np.eye(4)) < 1e-12
        for i, j in ZERO_PATTERN:
            assert abs(u[i, j]) < 1e-12
    group = propagator_spectral(c, t).matrix @ propagator_spectral(c, -t).matrix
    assert np.linalg.norm(group - np.eye(4)) < 1e-12


def test_initial_state():
    rho = initial_state()
    expected = 0.25 * np.array([[1, 0, 0, 1], [0, 1, 1, 0], [0, 1, 1, 0], [1, 0, 0, 1]])
    np.testing.assert_allclose(rho.matrix, expected, atol=1e-16)
    assert np.trace(rho.matrix).real == pytest.approx(1.0, abs=1e-15)
    np.testing.assert_allclose(np.sort(rho.eigenvalues()), [0, 0, 0.5, 0.5], atol=1e-15)
    assert concurrence_wootters(rho) == 0.0


def test_evolve_identity_and_trace():
    rho0 = initial_state()
    same = evolve(rho0, propagator_analytic(Coupling(1.0, 0.3), 0.0))
    np.testing.assert_allclose(same.matrix, rho0.matrix, atol=1e-16)
    for g in FIELDS:
        rho = evolve(rho0, propagator_analytic(Coupling(1.0, g), 2.1))
        assert abs(np.trace(rho.matrix) - 1.0) < 1e-12
        rho.validate()


def test_evolve_preserves_spectrum():
    rho0 = initial_state()
    rho = evolve(rho0, propagator_analytic(Coupling(1.0, 1.0), 0.5))
    np.testing.assert_allclose(np.sort(rho.eigenvalues()), np.sort(rho0.eigenvalues()), atol=1e-10)


def test_concurrence_bell_and_product():
    assert concurrence_wootters(pure([1, 0, 0, 1])) == pytest.approx(1.0, abs=1e-12)
    assert concurrence_wootters(pure([0, 1, -1, 0])) == pytest.approx(1.0, abs=1e-12)
    assert concurrence_wootters(pure([1, 0, 0, 0])) == pytest.approx(0.0, abs=1e-12)
    # product of two arbitrary single-qubit states
    a, b = np.array([0.3, 0.7j]), np.array([1.0, -0.2 + 0.5j])
    assert concurrence_wootters(pure(np.kron(a, b))) == pytest.approx(0.0, abs=1e-10)


def test_concurrence_pure_state_formula():
    # for pure states C = 2|ad - bc|
    rng = np.random.default_rng(11)
    for _ in range(50):
        psi = rng.normal(size=4) + 1j * rng.normal(size=4)
        psi /= np.linalg.norm(psi)
        expected = 2 * abs(psi[0] * psi[3] - psi[1] * psi[2])
        assert concurrence_wootters(pure(psi)) == pytest.approx(expected, abs=1e-10)


def test_concurrence_werner_states():
    # Werner state p|Bell><Bell| + (1-p) I/4 has C = max(0, (3p-1)/2)
    bell = pure([1, 0, 0, 1]).matrix
    for p in np.linspace(0, 1, 21):
        rho = DensityMatrix(p * bell + (1 - p) * np.eye(4) / 4)
        assert concurrence_wootters(rho) == pytest.approx(max(0.0, (3 * p - 1) / 2), abs=1e-10)


def test_concurrence_rejects_invalid_states():
    with pytest.raises(InvalidStateError):
        concurrence_wootters(DensityMatrix(np.eye(4) / 2))
    with pytest.raises(InvalidStateError):
        concurrence_wootters(DensityMatrix(np.diag([0.6, 0.6, -0.2, 0.0]).astype(complex)))
    bad = np.eye(4, dtype=complex) / 4
    bad[0, 1] = 0.1
    with pytest.raises(InvalidStateError):
        concurrence_wootters(DensityMatrix(bad))


def test_concurrence_at_first_peak_of_critical_pair():
    c = Coupling(1.0, 1.0)
    t = math.pi / (2 * math.sqrt(5))
    rho = evolve(initial_state(), propagator_analytic(c, t))
    assert concurrence_wootters(rho) == pytest.approx(0.2, abs=1e-12)
    assert concurrence_closed_form(c, t) == pytest.approx(0.2, abs=1e-15)


def test_closed_form_trivial_cases():
    assert concurrence_closed_form(Coupling(1.0, 0.7), 0.0) == 0.0
    assert np.all(concurrence_closed_form(Coupling(1.0, 0.0), np.linspace(0, 10, 50)) == 0.0)


@pytest.mark.parametrize("g", FIELDS)
def test_closed_form_matches_evolution(g):
    c = Coupling(1.0, g)
    for t in np.linspace(0.0, period(c), 50, endpoint=False):
        assert abs(concurrence_by_evolution(c, t) - concurrence_closed_form(c, t)) < 1e-9
        assert abs(concurrence_by_evolution(c, t, spectral=True) - concurrence_closed_form(c, t)) < 1e-9


def test_period_examples():
    assert period(Coupling(1.0, 0.0)) == pytest.approx(2 * math.pi)
    assert period(Coupling(1.0, 1.0)) == pytest.approx(2 * math.pi / math.sqrt(5))
    assert period(Coupling(1.0, 1.0)) == pytest.approx(2.8099, abs=5e-5)
    assert period(Coupling(2.0, 1.0)) == pytest.approx(period(Coupling(1.0, 1.0)) / 2)


@settings(max_examples=100, deadline=None)
@given(g=st.floats(0.0, 5.0), t=st.floats(0.0, 50.0))
def test_periodicity(g, t):
    c = Coupling(1.0, g)
    assert abs(concurrence_closed_form(c, t + period(c)) - concurrence_closed_form(c, t)) < 1e-10


@pytest.mark.parametrize("g", [0.1, 0.25, 0.5, 0.9, 1.0, 2.0, 7.0])
def test_envelope_law(g):
    c = Coupling(1.0, g)
    t = np.linspace(0.0, period(c), 200001)
    sampled = np.max(concurrence_closed_form(c, t))
    a = 4 * g / (1 + 4 * g * g)
    assert envelope(g) == pytest.approx(0.5 * (1 - math.sqrt(1 - a * a)), abs=1e-12)
    assert sampled <= envelope(g) + 1e-15
    assert sampled == pytest.approx(envelope(g), abs=1e-9)


def test_envelope_maximal_at_half():
    gs = np.linspace(0.0, 3.0, 3001)
    vals = [envelope(g) for g in gs]
    assert gs[int(np.argmax(vals))] == pytest.approx(0.5)
    assert envelope(0.5) == 0.5


def test_series_one_period():
    c = Coupling(1.0, 1.0)
    s = concurrence_series(c, period(c), 401)
    assert s.values[0] == 0.0 and abs(s.values[-1]) < 1e-10
    assert np.all((s.values >= 0) & (s.values <= 1))


def test_series_matches_full_pipeline():
    c = Coupling(1.0, 0.8)
    s = concurrence_series(c, 2 * period(c), 401)
    for t, v in zip(s.times[::7], s.values[::7]):
        assert abs(v - concurrence_by_evolution(c, t)) < 1e-10


def test_series_large_field_vanishes():
    c = Coupling(1.0, 100.0)
    s = concurrence_series(c, period(c), 1001)
    assert s.values.max() < 1e-3


def test_series_grid_rules():
    c = Coupling(1.0, 1.0)
    with pytest.raises(UnderResolvedGridError):
        concurrence_series(c, 10 * period(c), 1000)
    concurrence_series(c, 10 * period(c), 2001)
    with pytest.raises(ValidationError):
        concurrence_series(c, 1.0, 1)
    with pytest.raises(ValidationError):
        concurrence_series(c, -1.0, 100)


def test_closed_form_tiny_values_keep_precision():
    # a^2 s^4 ~ 1e-20: the naive 1 - sqrt(1 - x) would return 0
    c = Coupling(1.0, 1e-10)
    t = math.pi / (2 * math.sqrt(1 + 4e-20))
    assert concurrence_closed_form(c, t) == pytest.approx(4e-20, rel=1e-9)
