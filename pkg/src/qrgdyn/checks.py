"""Oracle-equivalence suites run by ``qrgdyn verify``.

Each suite compares a closed form against an independent route and reports
the largest residual seen together with the tolerance it must stay under.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List

import numpy as np

from . import couplings
from .couplings import Coupling, flow, flow_derivatives
from .dynamics import (
    concurrence_closed_form,
    concurrence_wootters,
    evolve,
    initial_state,
    period,
    propagator_analytic,
    propagator_spectral,
)
from .projection import (
    effective_couplings,
    exact_two_site_check,
    gauge_invariant_couplings,
    projected_hamiltonian,
    random_gauge,
)

FIELD_GRID = (0.0, 0.25, 0.5, 0.9, 1.0, 1.5, 3.0)
TIMES_PER_PERIOD = 50
SEED = 20240607


@dataclass(frozen=True)
class SuiteResult:
    name: str
    max_residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.max_residual)) and self.max_residual < self.tolerance


def rg_projection_suite(grid_points: int = 50, g_lo: float = 0.1, g_hi: float = 5.0) -> SuiteResult:
    worst = 0.0
    for g in np.linspace(g_lo, g_hi, grid_points):
        c = Coupling(1.0, g)
        # looked up through the module so a patched recursion is what gets checked
        expected = couplings.renormalize_step(c)
        got = effective_couplings(c)
        worst = max(worst, abs(got.J - expected.J), abs(got.g - expected.g))
    return SuiteResult("rg_projection", worst, 1e-10)


def rg_gauge_suite(grid_points: int = 50, draws: int = 3) -> SuiteResult:
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for g in np.concatenate([[0.0], np.linspace(0.1, 5.0, grid_points)]):
        c = Coupling(1.0, g)
        expected = couplings.renormalize_step(c)
        for _ in range(draws):
            got = gauge_invariant_couplings(projected_hamiltonian(c, random_gauge(rng)))
            worst = max(worst, abs(got.J - expected.J), abs(got.g - expected.g))
    return SuiteResult("rg_gauge_invariance", worst, 1e-10)


def _time_grid(c: Coupling, times_per_period: int) -> np.ndarray:
    return np.linspace(0.0, period(c), times_per_period, endpoint=False)


def propagator_suite(times_per_period: int = TIMES_PER_PERIOD) -> SuiteResult:
    worst = 0.0
    for g in FIELD_GRID:
        c = Coupling(1.0, g)
        for t in _time_grid(c, times_per_period):
            diff = propagator_analytic(c, t).matrix - propagator_spectral(c, t).matrix
            worst = max(worst, float(np.max(np.abs(diff))))
    return SuiteResult("propagator_cross_check", worst, 1e-10)


def unitarity_suite(times_per_period: int = TIMES_PER_PERIOD) -> SuiteResult:
    worst = 0.0
    eye = np.eye(4)
    for g in FIELD_GRID:
        c = Coupling(1.0, g)
        for t in _time_grid(c, times_per_period):
            for prop in (propagator_analytic(c, t), propagator_spectral(c, t)):
                u = prop.matrix
                worst = max(worst, float(np.linalg.norm(u @ u.conj().T - eye)))
    return SuiteResult("propagator_unitarity", worst, 1e-12)


def concurrence_pipeline_suite(times_per_period: int = TIMES_PER_PERIOD) -> SuiteResult:
    worst = 0.0
    rho0 = initial_state()
    for g in FIELD_GRID:
        c = Coupling(1.0, g)
        for t in _time_grid(c, times_per_period):
            via_state = concurrence_wootters(evolve(rho0, propagator_analytic(c, t)))
            worst = max(worst, abs(via_state - concurrence_closed_form(c, t)))
    return SuiteResult("concurrence_pipeline", worst, 1e-9)


def exact_two_site_suite(samples: int = 100) -> SuiteResult:
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for g, t in zip(rng.uniform(0.0, 3.0, samples), rng.uniform(0.0, 10.0, samples)):
        worst = max(worst, exact_two_site_check(Coupling(1.0, g), t))
    return SuiteResult("exact_two_site", worst, 1e-9)


def flow_derivative_suite(max_step: int = 8, grid_points: int = 21) -> SuiteResult:
    """Chain-rule derivatives against central differences of the flow (relative error)."""
    worst = 0.0
    for g in np.linspace(0.5, 1.5, grid_points):
        for n in range(1, max_step + 1):
            h = 1e-6 * g
            hi, lo = flow(Coupling(1.0, g + h), n).final, flow(Coupling(1.0, g - h), n).final
            d = flow_derivatives(Coupling(1.0, g), n)
            fd_g = (hi.g - lo.g) / (2 * h)
            fd_J = (hi.J - lo.J) / (2 * h)
            worst = max(worst, abs(fd_g - d.dgn_dg) / abs(d.dgn_dg), abs(fd_J - d.dJn_dg) / abs(d.dJn_dg))
    return SuiteResult("flow_derivatives_fd", float(worst), 1e-6)


def run_all(grid_points: int = 50) -> List[SuiteResult]:
    return [
        rg_projection_suite(grid_points),
        rg_gauge_suite(grid_points),
        propagator_suite(),
        unitarity_suite(),
        concurrence_pipeline_suite(),
        exact_two_site_suite(),
        flow_derivative_suite(),
    ]
