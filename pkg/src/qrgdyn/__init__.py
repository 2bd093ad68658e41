"""Renormalization-group entanglement dynamics of the transverse-field Ising chain."""

__version__ = "0.1.0"

from .couplings import (
    Coupling,
    FlowDerivatives,
    RGTrajectory,
    effective_size,
    flow,
    flow_derivatives,
    renormalize_step,
)
from .dynamics import (
    ConcurrenceSeries,
    DensityMatrix,
    Propagator,
    TwoSiteHamiltonian,
    build_hamiltonian,
    concurrence_closed_form,
    concurrence_series,
    concurrence_wootters,
    evolve,
    initial_state,
    period,
    propagator_analytic,
    propagator_spectral,
)
from .projection import effective_couplings, exact_two_site_check, solve_block
from .scaling import (
    CollapsePoint,
    DerivativeCurve,
    PeakRecord,
    ScalingFit,
    collapse,
    dTmax_dg,
    derivative_curve,
    find_minimum,
    fit_gm_drift,
    fit_theta,
    t_max_analytic,
    t_max_numeric,
)
