"""Real-time evolution and concurrence of the effective two-site system.

Basis order everywhere is |uu>, |ud>, |du>, |dd> (eigenstates of sigma^z).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import eigh

from .couplings import Coupling
from .errors import InvalidStateError, UnderResolvedGridError, ValidationError

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)
SIGMA_YY = np.kron(SIGMA_Y, SIGMA_Y)

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
CLAMP_TOL = 1e-10
IMAG_TOL = 1e-10
MIN_SAMPLES_PER_PERIOD = 200


@dataclass(frozen=True, eq=False)
class TwoSiteHamiltonian:
    matrix: np.ndarray
    coupling: Coupling


@dataclass(frozen=True, eq=False)
class Propagator:
    matrix: np.ndarray
    time: float
    coupling: Coupling


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    matrix: np.ndarray

    def validate(self) -> "DensityMatrix":
        rho = self.matrix
        if rho.shape != (4, 4):
            raise InvalidStateError(f"expected a 4x4 matrix, got shape {rho.shape}")
        if not np.all(np.isfinite(rho)):
            raise InvalidStateError("density matrix has non-finite entries")
        herm = np.linalg.norm(rho - rho.conj().T)
        if herm > HERMITIAN_TOL:
            raise InvalidStateError(f"density matrix not Hermitian (residual {herm:.3e})")
        tr = np.trace(rho)
        if abs(tr - 1.0) > TRACE_TOL:
            raise InvalidStateError(f"density matrix trace is {tr}, expected 1")
        lowest = eigh(0.5 * (rho + rho.conj().T), eigvals_only=True)[0]
        if lowest < -PSD_TOL:
            raise InvalidStateError(f"density matrix has negative eigenvalue {lowest:.3e}")
        return self

    def eigenvalues(self) -> np.ndarray:
        return eigh(0.5 * (self.matrix + self.matrix.conj().T), eigvals_only=True)


@dataclass(frozen=True, eq=False)
class ConcurrenceSeries:
    times: np.ndarray
    values: np.ndarray
    coupling: Coupling
    rg_step: int = 0
    bare: Optional[Coupling] = field(default=None)

    @property
    def period(self) -> float:
        return period(self.coupling)


def build_hamiltonian(c: Coupling) -> TwoSiteHamiltonian:
    g2 = 2.0 * c.g
    m = np.array(
        [
            [g2, 0.0, 0.0, 1.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, -g2],
        ]
    )
    return TwoSiteHamiltonian(matrix=-c.J * m, coupling=c)


def propagator_analytic(c: Coupling, t: float) -> Propagator:
    """Closed-form U(t) = exp(-iHt).

    The |uu>,|dd> pair rotates at omega = J sqrt(1+4g^2) and the |ud>,|du>
    pair at J.
    """
    root = math.sqrt(1.0 + 4.0 * c.g * c.g)
    wt = c.J * root * t
    s, co = math.sin(wt), math.cos(wt)
    u11 = complex(co, 2.0 * c.g / root * s)
    u14 = 1j * s / root
    u22 = math.cos(c.J * t)
    u23 = 1j * math.sin(c.J * t)
    U = np.array(
        [
            [u11, 0.0, 0.0, u14],
            [0.0, u22, u23, 0.0],
            [0.0, u23, u22, 0.0],
            [u14, 0.0, 0.0, u11.conjugate()],
        ],
        dtype=complex,
    )
    return Propagator(matrix=U, time=float(t), coupling=c)


def propagator_spectral(c: Coupling, t: float) -> Propagator:
    """U(t) = V exp(-i E t) V^dagger from the eigendecomposition of H."""
    energies, vecs = eigh(build_hamiltonian(c).matrix)
    phases = np.exp(-1j * energies * t)
    U = (vecs * phases) @ vecs.conj().T
    return Propagator(matrix=U, time=float(t), coupling=c)


def initial_state() -> DensityMatrix:
    """Equal mixture of the two fully x-polarized states of the pure Ising pair."""
    plus = np.array([1.0, 1.0]) / math.sqrt(2.0)
    minus = np.array([1.0, -1.0]) / math.sqrt(2.0)
    up_x = np.kron(plus, plus).astype(complex)
    down_x = np.kron(minus, minus).astype(complex)
    rho = 0.5 * (np.outer(up_x, up_x.conj()) + np.outer(down_x, down_x.conj()))
    return DensityMatrix(rho)


def evolve(rho0: DensityMatrix, U: Propagator) -> DensityMatrix:
    u = U.matrix
    rho = u @ rho0.matrix @ u.conj().T
    # Restore exact Hermiticity lost to roundoff.
    return DensityMatrix(0.5 * (rho + rho.conj().T))


def spin_flip(rho: np.ndarray) -> np.ndarray:
    return SIGMA_YY @ rho.conj() @ SIGMA_YY


def concurrence_wootters(rho: DensityMatrix) -> float:
    """Wootters concurrence max(0, l1 - l2 - l3 - l4) of a two-qubit state.

    The l_i are square roots of the eigenvalues of rho * rho_tilde in
    decreasing order. rho * rho_tilde is not Hermitian; its eigenvalues
    (general eigensolver) must come out real and non-negative.

    For the value itself the same l_i are taken as the singular values of
    A^T (sy x sy) A with rho = A A^dagger. Square roots of roundoff-sized
    eigenvalues of a rank-deficient rho * rho_tilde would otherwise cost
    about 1e-8 in accuracy.
    """
    rho.validate()
    ev = np.linalg.eigvals(rho.matrix @ spin_flip(rho.matrix))
    if np.max(np.abs(ev.imag)) > IMAG_TOL:
        raise InvalidStateError(f"rho*rho_tilde has complex eigenvalues {ev}")
    if np.min(ev.real) < -CLAMP_TOL:
        raise InvalidStateError(f"rho*rho_tilde has negative eigenvalue {np.min(ev.real):.3e}")
    lam = wootters_lambdas(rho.matrix)
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def wootters_lambdas(rho: np.ndarray) -> np.ndarray:
    """Square roots of the eigenvalues of rho * rho_tilde, descending."""
    p, vecs = eigh(0.5 * (rho + rho.conj().T))
    a = vecs * np.sqrt(np.clip(p, 0.0, None))
    return np.linalg.svd(a.T @ SIGMA_YY @ a, compute_uv=False)


def amplitude(g: float) -> float:
    """Oscillation amplitude 4g/(1+4g^2) of the concurrence; equals 1 at g = 1/2."""
    return 4.0 * g / (1.0 + 4.0 * g * g)


def _half_one_minus_sqrt(x):
    # 0.5*(1 - sqrt(1 - x)) without cancellation for small x
    return 0.5 * x / (1.0 + np.sqrt(1.0 - x))


def concurrence_closed_form(c: Coupling, t):
    """C(t) = 1/2 [1 - sqrt(1 - a^2 sin^4(J sqrt(1+4g^2) t))], a = 4g/(1+4g^2).

    Accepts a scalar or an array of times.
    """
    a = amplitude(c.g)
    s = np.sin(math.sqrt(1.0 + 4.0 * c.g * c.g) * c.J * np.asarray(t, dtype=float))
    out = _half_one_minus_sqrt(a * a * s**4)
    return float(out) if np.ndim(out) == 0 else out


def envelope(g: float) -> float:
    """Maximum over time of the closed-form concurrence."""
    a = amplitude(g)
    return float(_half_one_minus_sqrt(a * a))


def period(c: Coupling) -> float:
    """2 pi / (J sqrt(1+4g^2)).

    C(t) depends on sin^4 and therefore also repeats after half of this.
    """
    return 2.0 * math.pi / (c.J * math.sqrt(1.0 + 4.0 * c.g * c.g))


def samples_per_period(c: Coupling, t_end: float, points: int) -> float:
    return (points - 1) * period(c) / t_end


def check_resolution(c: Coupling, t_end: float, points: int) -> None:
    if points < 2:
        raise ValidationError(f"need at least 2 points, got {points}")
    if not (t_end > 0.0 and math.isfinite(t_end)):
        raise ValidationError(f"t_end must be positive, got {t_end}")
    density = samples_per_period(c, t_end, points)
    if density < MIN_SAMPLES_PER_PERIOD:
        needed = math.ceil(MIN_SAMPLES_PER_PERIOD * t_end / period(c)) + 1
        raise UnderResolvedGridError(
            f"grid has {density:.1f} samples per period (< {MIN_SAMPLES_PER_PERIOD}); "
            f"use at least {needed} points for t_end={t_end}"
        )


def concurrence_series(
    c: Coupling,
    t_end: float,
    points: int,
    rg_step: int = 0,
    bare: Optional[Coupling] = None,
) -> ConcurrenceSeries:
    check_resolution(c, t_end, points)
    times = np.linspace(0.0, t_end, points)
    values = concurrence_closed_form(c, times)
    return ConcurrenceSeries(times=times, values=np.asarray(values), coupling=c, rg_step=rg_step, bare=bare)


def concurrence_by_evolution(c: Coupling, t: float, spectral: bool = False) -> float:
    """Concurrence obtained by evolving rho(0) explicitly rather than from the closed form."""
    prop = propagator_spectral(c, t) if spectral else propagator_analytic(c, t)
    return concurrence_wootters(evolve(initial_state(), prop))
