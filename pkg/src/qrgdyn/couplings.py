"""Couplings of the transverse-field Ising chain and their exact RG flow.

One decimation step with two-site blocks maps (J, g) to

    J' = J * 2q / (1 + q**2),   q = g + sqrt(g**2 + 1),
    g' = g**2,

so after n steps g_n = g**(2**n) and the chain of N = 2**(n+1) sites is
described by a single effective pair of spins.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List

from .errors import FlowOverflowError, ValidationError

G_CRITICAL = 1.0
BLOCK_SIZE = 2
# 2**(n+1) must stay representable as a double.
MAX_STEPS = 1022


@dataclass(frozen=True)
class Coupling:
    J: float = 1.0
    g: float = 0.0

    def __post_init__(self):
        J, g = float(self.J), float(self.g)
        if not (math.isfinite(J) and J > 0.0):
            raise ValidationError(f"J must be finite and positive, got {self.J!r}")
        if not (math.isfinite(g) and g >= 0.0):
            raise ValidationError(f"g must be finite and non-negative, got {self.g!r}")
        object.__setattr__(self, "J", J)
        object.__setattr__(self, "g", g)


@dataclass(frozen=True)
class RGTrajectory:
    bare: Coupling
    steps: tuple

    @property
    def n_max(self) -> int:
        return len(self.steps) - 1

    def __getitem__(self, n: int) -> Coupling:
        return self.steps[n]

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def final(self) -> Coupling:
        return self.steps[-1]


@dataclass(frozen=True)
class FlowDerivatives:
    """Derivatives of the step-n couplings with respect to the bare field."""

    n: int
    dJn_dg: float
    dgn_dg: float


def _check_steps(n) -> int:
    if isinstance(n, bool) or int(n) != n:
        raise ValidationError(f"step count must be an integer, got {n!r}")
    n = int(n)
    if n < 0:
        raise ValidationError(f"step count must be >= 0, got {n}")
    if n > MAX_STEPS:
        raise FlowOverflowError(f"step count {n} exceeds the supported maximum {MAX_STEPS}")
    return n


def coupling_ratio(g: float) -> float:
    """J'/J written exactly as the decimation produces it: 2q/(1+q^2)."""
    q = g + math.sqrt(g * g + 1.0)
    # 2q/(1+q^2) rearranged so q^2 cannot overflow
    return 2.0 / (q + 1.0 / q)


def coupling_ratio_simplified(g: float) -> float:
    """Same ratio via the identity 2q/(1+q^2) = 1/sqrt(1+g^2)."""
    return 1.0 / math.sqrt(1.0 + g * g)


def renormalize_step(c: Coupling) -> Coupling:
    g_new = c.g * c.g
    if not math.isfinite(g_new):
        raise FlowOverflowError(f"g' = g**2 overflows for g = {c.g!r}")
    return Coupling(c.J * coupling_ratio(c.g), g_new)


def _advance(c: Coupling, n: int) -> Coupling:
    try:
        return renormalize_step(c)
    except ValidationError as exc:
        # J underflowing to zero happens only together with runaway g.
        raise FlowOverflowError(f"flow left double range at step {n}: {exc}") from exc


def flow(bare: Coupling, n_max: int) -> RGTrajectory:
    """Iterate the decimation ``n_max`` times starting from ``bare``."""
    n_max = _check_steps(n_max)
    steps: List[Coupling] = [bare]
    for n in range(n_max):
        steps.append(_advance(steps[-1], n + 1))
    return RGTrajectory(bare=bare, steps=tuple(steps))


def couplings_at(bare: Coupling, n: int) -> Coupling:
    return flow(bare, n).final


def effective_size(n: int) -> int:
    """Number of chain sites represented by the two renormalized sites after n steps."""
    n = _check_steps(n)
    return BLOCK_SIZE ** (n + 1)


def flow_derivatives(bare: Coupling, n: int) -> FlowDerivatives:
    """Exact d(J_n)/dg and d(g_n)/dg by the chain rule through every step.

    Uses J_{m+1} = J_m (1 + g_m^2)^(-1/2) and g_{m+1} = g_m^2, so
    dg_{m+1} = 2 g_m dg_m and
    dJ_{m+1} = dJ_m (1+g_m^2)^(-1/2) - J_m g_m (1+g_m^2)^(-3/2) dg_m.
    """
    n = _check_steps(n)
    J, g = bare.J, bare.g
    dJ, dg = 0.0, 1.0
    for m in range(n):
        r = coupling_ratio(g)
        # g/(1+g^2) in a form that survives large g
        g_over_s = 1.0 / (g + 1.0 / g) if g > 0.0 else 0.0
        dJ = (dJ - J * g_over_s * dg) * r
        dg = 2.0 * g * dg
        J = J * r
        g = g * g
        if not (math.isfinite(g) and math.isfinite(dg) and math.isfinite(dJ)) or J == 0.0:
            raise FlowOverflowError(f"flow derivatives overflow at step {m + 1} for g = {bare.g!r}")
    return FlowDerivatives(n=n, dJn_dg=dJ, dgn_dg=dg)


def overflow_bound(n: int) -> float:
    """Largest bare g (approximately) for which g**(2**n) stays finite."""
    n = _check_steps(n)
    return math.exp(math.log(1.7e308) / 2.0**n)
