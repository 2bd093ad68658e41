import numpy as np
import pytest

from qrgdyn.couplings import Coupling, renormalize_step
from qrgdyn.errors import PatternMatchError
from qrgdyn.projection import (
    block_hamiltonian,
    chain_hamiltonian,
    effective_couplings,
    exact_two_site_check,
    gauge_invariant_couplings,
    pauli_coefficients,
    projected_hamiltonian,
    projector,
    random_gauge,
    solve_block,
)


def test_block_at_zero_field_is_doubly_degenerate():
    sol = solve_block(Coupling(1.0, 0.0))
    np.testing.assert_allclose(sol.all_energies, [-1, -1, 1, 1], atol=1e-15)
    assert sol.energies == (-1.0, -1.0)


@pytest.mark.parametrize("g", [0.5, 1.0, 2.0])
def test_block_states_orthonormal_eigenvectors(g):
    c = Coupling(1.0, g)
    sol = solve_block(c)
    v = np.column_stack([sol.ground_state, sol.first_excited])
    assert np.linalg.norm(v.T @ v - np.eye(2)) < 1e-12
    h = block_hamiltonian(c)
    for vec, e in ((sol.ground_state, sol.energies[0]), (sol.first_excited, sol.energies[1])):
        assert np.linalg.norm(h @ vec - e * vec) < 1e-12
    assert sol.energies[0] <= sol.energies[1] <= sol.all_energies[2] <= sol.all_energies[3]
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(h)), sol.all_energies, atol=1e-12)


def test_block_ground_energy_non_increasing():
    e0 = [solve_block(Coupling(1.0, g)).energies[0] for g in np.linspace(0, 5, 101)]
    assert np.all(np.diff(e0) <= 1e-15)


def test_projector_is_isometry():
    p = projector(solve_block(Coupling(1.0, 0.7)))
    np.testing.assert_allclose(p.dagger @ p.matrix, np.eye(2), atol=1e-12)
    op = p.operator()
    np.testing.assert_allclose(op @ op, op, atol=1e-12)


def test_chain_hamiltonian_is_block_plus_interblock():
    c = Coupling(1.0, 0.6)
    h = chain_hamiltonian(c)
    blocks = np.kron(block_hamiltonian(c), np.eye(4)) + np.kron(np.eye(4), block_hamiltonian(c))
    # remainder: bond between sites 1 and 2, fields on sites 1 and 3 (0-based)
    sx = np.array([[0, 1], [1, 0]])
    sz = np.diag([1.0, -1.0])
    i2 = np.eye(2)
    bond = np.kron(np.kron(i2, sx), np.kron(sx, i2))
    fields = np.kron(np.kron(i2, sz), np.kron(i2, i2)) + np.kron(np.kron(i2, i2), np.kron(i2, sz))
    np.testing.assert_allclose(h - blocks, -(bond + 0.6 * fields), atol=1e-14)


@pytest.mark.parametrize("g, J_expected, g_expected", [(1.0, 2**-0.5, 1.0), (0.5, None, 0.25)])
def test_effective_couplings_examples(g, J_expected, g_expected):
    out = effective_couplings(Coupling(1.0, g))
    if J_expected is not None:
        assert out.J == pytest.approx(J_expected, abs=1e-10)
    assert out.g == pytest.approx(g_expected, abs=1e-10)


def test_effective_couplings_sweep():
    worst = 0.0
    for g in np.linspace(0.1, 5.0, 50):
        c = Coupling(1.0, g)
        a, b = effective_couplings(c), renormalize_step(c)
        worst = max(worst, abs(a.J - b.J), abs(a.g - b.g))
    assert worst < 1e-10


def test_effective_couplings_scale_with_J():
    a = effective_couplings(Coupling(2.5, 0.8))
    b = renormalize_step(Coupling(2.5, 0.8))
    assert a.J == pytest.approx(b.J, rel=1e-12) and a.g == pytest.approx(b.g, rel=1e-12)


def test_projected_form_is_ising():
    h = projected_hamiltonian(Coupling(1.0, 0.7))
    coeffs = pauli_coefficients(h)
    for key, v in coeffs.items():
        if key not in {"II", "XX", "ZI", "IZ"}:
            assert abs(v) < 1e-13


@pytest.mark.parametrize("g", [0.0, 0.3, 1.0, 2.5])
def test_gauge_invariance(g):
    c = Coupling(1.0, g)
    expected = renormalize_step(c)
    rng = np.random.default_rng(5)
    for _ in range(20):
        got = gauge_invariant_couplings(projected_hamiltonian(c, random_gauge(rng)))
        assert got.J == pytest.approx(expected.J, abs=1e-10)
        assert got.g == pytest.approx(expected.g, abs=1e-10)


def test_rotated_gauge_breaks_naive_pattern_match(monkeypatch):
    # a generic gauge mixes the Pauli labels, which the canonical reader must refuse
    from qrgdyn import projection

    h = projected_hamiltonian(Coupling(1.0, 0.8), random_gauge(np.random.default_rng(2)))
    coeffs = pauli_coefficients(h)
    stray = max(abs(v) for k, v in coeffs.items() if k not in {"II", "XX", "ZI", "IZ"})
    assert stray > 1e-3
    monkeypatch.setattr(projection, "projected_hamiltonian", lambda c, gauge=None: h)
    with pytest.raises(PatternMatchError):
        projection.effective_couplings(Coupling(1.0, 0.8))


def test_gauge_invariant_reader_rejects_non_ising():
    h = np.diag([1.0, 2.0, 3.0, -6.0])
    with pytest.raises(PatternMatchError):
        gauge_invariant_couplings(h)


def test_exact_two_site_examples():
    assert exact_two_site_check(Coupling(1.0, 1.0), 1.5) < 1e-9
    assert exact_two_site_check(Coupling(1.0, 0.0), 2.0) < 1e-12


def test_exact_two_site_random_sweep():
    rng = np.random.default_rng(17)
    for g, t in zip(rng.uniform(0, 3, 100), rng.uniform(0, 10, 100)):
        assert exact_two_site_check(Coupling(1.0, g), t) < 1e-9
