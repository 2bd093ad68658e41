"""Brute-force check of the decimation step by explicit projection.

A two-block, four-site open chain is split as in the decimation scheme: the
block term -J(sx1 sx2 + g sz1) acts inside each block and the inter-block
part carries the bond sx2 sx3 plus the field on the second site of every
block. Projecting onto the two lowest states of each block yields a
two-site Ising Hamiltonian whose couplings are read off and compared with
the closed-form recursion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import Optional, Tuple

import numpy as np
from scipy.linalg import eigh

from .couplings import Coupling
from .dynamics import (
    IDENTITY_2,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    concurrence_closed_form,
    concurrence_wootters,
    evolve,
    initial_state,
    propagator_spectral,
)
from .errors import PatternMatchError

ORTHO_TOL = 1e-12
PATTERN_TOL = 1e-10

_PAULI = {"I": IDENTITY_2, "X": SIGMA_X, "Y": SIGMA_Y, "Z": SIGMA_Z}
# Z x Z parity of the two block sites splits the block into two 2x2 sectors.
_EVEN = [0, 3]
_ODD = [1, 2]


def kron_all(*ops: np.ndarray) -> np.ndarray:
    return reduce(np.kron, ops)


def site_operator(op: np.ndarray, site: int, n_sites: int) -> np.ndarray:
    """``op`` acting on ``site`` (0-based) of an ``n_sites`` chain."""
    return kron_all(*[op if i == site else IDENTITY_2 for i in range(n_sites)])


@dataclass(frozen=True, eq=False)
class BlockSolution:
    ground_state: np.ndarray
    first_excited: np.ndarray
    energies: Tuple[float, float]
    all_energies: np.ndarray
    coupling: Coupling


@dataclass(frozen=True, eq=False)
class Projector:
    """Isometry from the renormalized site (|up'>, |down'>) into the block space."""

    matrix: np.ndarray

    @property
    def dagger(self) -> np.ndarray:
        return self.matrix.conj().T

    def operator(self) -> np.ndarray:
        """P0 = |psi0><psi0| + |psi1><psi1| on the 4-dim block space."""
        return self.matrix @ self.dagger


def block_hamiltonian(c: Coupling) -> np.ndarray:
    """-J (sx1 sx2 + g sz1); the field sits on the first site only."""
    xx = site_operator(SIGMA_X, 0, 2) @ site_operator(SIGMA_X, 1, 2)
    return (-c.J * (xx + c.g * site_operator(SIGMA_Z, 0, 2))).real


def _fix_sign(v: np.ndarray) -> np.ndarray:
    i = int(np.argmax(np.abs(v)))
    return v if v[i] >= 0 else -v


def solve_block(c: Coupling) -> BlockSolution:
    """Exact eigenpairs of the block, sorted by energy.

    The two lowest levels are degenerate for every g, so a plain eigensolver
    would return an arbitrary mixture of them. Diagonalizing each parity
    sector separately fixes psi0 to the even sector and psi1 to the odd one.
    """
    h = block_hamiltonian(c)
    vecs, energies = [], []
    for sector in (_EVEN, _ODD):
        e, v = eigh(h[np.ix_(sector, sector)])
        for j in range(2):
            full = np.zeros(4)
            full[sector] = _fix_sign(v[:, j])
            vecs.append(full)
            energies.append(e[j])
    # (even ground, even excited, odd ground, odd excited) -> ascending energy
    order = [0, 2, 1, 3]
    energies = np.array([energies[i] for i in order])
    psi0, psi1 = vecs[0], vecs[2]
    return BlockSolution(
        ground_state=psi0,
        first_excited=psi1,
        energies=(float(energies[0]), float(energies[1])),
        all_energies=energies,
        coupling=c,
    )


def projector(sol: BlockSolution, gauge: Optional[np.ndarray] = None) -> Projector:
    """Map |psi0> -> |up'>, |psi1> -> |down'>.

    ``gauge`` is an optional 2x2 unitary mixing the two retained states, used
    to check that extracted couplings do not depend on this choice.
    """
    p = np.column_stack([sol.ground_state, sol.first_excited]).astype(complex)
    if gauge is not None:
        p = p @ gauge
    return Projector(p)


def chain_hamiltonian(c: Coupling) -> np.ndarray:
    """H^B + H^BB for two blocks (sites 0,1 | 2,3) on an open chain."""
    n = 4
    x = [site_operator(SIGMA_X, i, n) for i in range(n)]
    z = [site_operator(SIGMA_Z, i, n) for i in range(n)]
    h_blocks = -c.J * (x[0] @ x[1] + c.g * z[0] + x[2] @ x[3] + c.g * z[2])
    h_inter = -c.J * (x[1] @ x[2] + c.g * z[1] + c.g * z[3])
    return h_blocks + h_inter


def projected_hamiltonian(c: Coupling, gauge: Optional[np.ndarray] = None) -> np.ndarray:
    """P0^dagger (H^B + H^BB) P0 on the two renormalized sites (4x4)."""
    p = projector(solve_block(c), gauge).matrix
    pp = np.kron(p, p)
    return pp.conj().T @ chain_hamiltonian(c) @ pp


def pauli_coefficients(h: np.ndarray) -> dict:
    """Coefficients of h in the two-site Pauli basis, keyed like 'XX', 'ZI'."""
    coeffs = {}
    for a, pa in _PAULI.items():
        for b, pb in _PAULI.items():
            coeffs[a + b] = np.trace(np.kron(pa, pb).conj().T @ h) / 4.0
    return coeffs


def effective_couplings(c: Coupling) -> Coupling:
    """(J', g') read off the projected Hamiltonian.

    The result must have the form const - J'(X X + g'(Z I + I Z)); anything
    else is reported as a PatternMatchError.
    """
    coeffs = pauli_coefficients(projected_hamiltonian(c))
    scale = max(abs(v) for v in coeffs.values())
    allowed = {"II", "XX", "ZI", "IZ"}
    stray = {k: v for k, v in coeffs.items() if k not in allowed and abs(v) > PATTERN_TOL * scale}
    if stray:
        raise PatternMatchError(f"projected Hamiltonian has non-Ising terms {stray}")
    if any(abs(coeffs[k].imag) > PATTERN_TOL * scale for k in allowed):
        raise PatternMatchError("projected Hamiltonian has complex Ising coefficients")
    if abs(coeffs["ZI"] - coeffs["IZ"]) > PATTERN_TOL * scale:
        raise PatternMatchError("renormalized fields differ between the two sites")
    J_new = -coeffs["XX"].real
    if J_new <= 0.0:
        raise PatternMatchError(f"renormalized exchange is not positive: {J_new}")
    g_new = -coeffs["ZI"].real / J_new
    return Coupling(J_new, g_new if g_new > 0.0 else 0.0)


def gauge_invariant_couplings(h: np.ndarray) -> Coupling:
    """(J', g') of a two-site Ising Hamiltonian written in any local basis.

    With the trace removed the levels are +-J' and +-J' sqrt(1+4g'^2), which
    fixes J'. Tracing out one site leaves -J' g' (rotated Z), whose norm gives
    g' linearly; recovering g' from the levels alone loses half the digits
    near g' = 0.
    """
    h = 0.5 * (h + h.conj().T)
    h0 = h - np.trace(h).real / 4.0 * np.eye(4)
    e = eigh(h0, eigvals_only=True)
    mags = np.sort(np.abs(e))
    J_new = 0.5 * (mags[0] + mags[1])
    scale = mags[3]
    if abs(mags[0] - mags[1]) > PATTERN_TOL * scale or abs(mags[2] - mags[3]) > PATTERN_TOL * scale:
        raise PatternMatchError(f"spectrum {e} is not of two-site Ising form")
    t4 = h0.reshape(2, 2, 2, 2)
    field_1 = np.einsum("ijkj->ik", t4) / 2.0
    field_2 = np.einsum("jijk->ik", t4) / 2.0
    strength_1 = np.linalg.norm(field_1, 2)
    strength_2 = np.linalg.norm(field_2, 2)
    if abs(strength_1 - strength_2) > PATTERN_TOL * scale:
        raise PatternMatchError("renormalized fields differ between the two sites")
    g_new = 0.5 * (strength_1 + strength_2) / J_new
    expected = J_new * math.sqrt(1.0 + 4.0 * g_new * g_new)
    if abs(0.5 * (mags[2] + mags[3]) - expected) > PATTERN_TOL * scale:
        raise PatternMatchError("spectrum and single-site fields are inconsistent")
    return Coupling(J_new, g_new)


def random_gauge(rng: np.random.Generator) -> np.ndarray:
    """Haar-ish random 2x2 unitary."""
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def exact_two_site_check(c: Coupling, t: float) -> float:
    """|C from rho(0) evolved with the spectral propagator - closed-form C|."""
    rho = evolve(initial_state(), propagator_spectral(c, t))
    return abs(concurrence_wootters(rho) - concurrence_closed_form(c, t))
