"""Peak times of the concurrence and their finite-size scaling.

After n RG steps the pair (J_n, g_n) gives C(t) maxima at
t = (2k-1) pi / (2 J_n sqrt(1 + 4 g_n^2)). The derivative of that time with
respect to the bare field develops a dip near g = 1 whose depth and
position scale with N = 2**(n+1).

Time is measured either in bare units (``rescaled=False``) or in units of
the renormalized exchange, tau = t * J_n (``rescaled=True``, the default).
Only the second choice reproduces the N**1 divergence and the 1/N drift of
the dip position; in bare units the extra 1/J_n ~ N**(1/2) factor at g = 1
steepens the divergence and pushes the dip above g = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from scipy.optimize import golden

from . import couplings
from .couplings import Coupling, G_CRITICAL, effective_size, flow, flow_derivatives
from .dynamics import ConcurrenceSeries, concurrence_closed_form, envelope
from .errors import (
    BoundaryMinimumError,
    InsufficientPeaksError,
    InsufficientSamplesError,
    NoOverlapError,
    ValidationError,
)

FD_REL_STEP = 1e-6
GOLDEN_TOL = 1e-8
MIN_CURVE_POINTS = 100
PEAK_FLOOR = 0.0


@dataclass(frozen=True)
class PeakRecord:
    n: int
    N: int
    g: float
    k: int
    t_max: float
    c_max: float


@dataclass(frozen=True, eq=False)
class DerivativeCurve:
    n: int
    N: int
    k: int
    g: np.ndarray
    dT_dg: np.ndarray
    J: float = 1.0
    rescaled: bool = True


@dataclass(frozen=True)
class ScalingFit:
    exponent: float
    prefactor: float
    residual: float
    sample: Tuple[Tuple[float, float], ...]

    def as_dict(self) -> dict:
        return {
            "exponent": self.exponent,
            "prefactor": self.prefactor,
            "residual": self.residual,
            "sample": [list(s) for s in self.sample],
        }


@dataclass(frozen=True)
class CollapsePoint:
    x: float
    y: float
    N: int


def _check_order(k: int) -> int:
    if isinstance(k, bool) or int(k) != k or k < 1:
        raise ValidationError(f"peak order k must be an integer >= 1, got {k!r}")
    return int(k)


def t_max_analytic(bare: Coupling, n: int, k: int = 1, rescaled: bool = True) -> PeakRecord:
    k = _check_order(k)
    c = flow(bare, n).final
    root = math.hypot(1.0, 2.0 * c.g)
    unit = 1.0 if rescaled else c.J
    t = (2 * k - 1) * math.pi / (2.0 * unit * root)
    return PeakRecord(n=n, N=effective_size(n), g=bare.g, k=k, t_max=t, c_max=envelope(c.g))


def _refine_vertex(t: np.ndarray, y: np.ndarray, j: int) -> Tuple[float, float]:
    y0, y1, y2 = y[j - 1], y[j], y[j + 1]
    h = t[j] - t[j - 1]
    curv = y0 - 2.0 * y1 + y2
    if curv >= 0.0:
        return float(t[j]), float(y1)
    shift = 0.5 * (y0 - y2) / curv
    return float(t[j] + shift * h), float(y1 - 0.125 * (y0 - y2) ** 2 / curv)


def t_max_numeric(series: ConcurrenceSeries, k: int = 1) -> PeakRecord:
    """k-th local maximum of a sampled concurrence, counted in time order.

    The three samples around the discrete maximum are fitted with a parabola
    in (4C(1-C))**(1/4), which equals sqrt(a)|sin(omega t)| for this model
    and so stays smooth where C itself has a cusp (amplitude a = 1).
    Near a = 1 the returned height inherits the square-root sensitivity of
    1/2 (1 - sqrt(1 - a^2)) to the fitted amplitude.
    """
    k = _check_order(k)
    t, v = series.times, series.values
    if len(t) < 3:
        raise InsufficientPeaksError("series too short to contain a peak")
    mid = v[1:-1]
    idx = np.flatnonzero((mid > v[:-2]) & (mid >= v[2:]) & (mid > PEAK_FLOOR)) + 1
    if len(idx) < k:
        raise InsufficientPeaksError(
            f"insufficient peaks: found {len(idx)} local maxima, need k={k}; extend t_end"
        )
    smooth = np.power(np.clip(4.0 * v * (1.0 - v), 0.0, None), 0.25)
    t_peak, root_peak = _refine_vertex(t, smooth, idx[k - 1])
    a2s4 = min(root_peak**4, 1.0)
    c_peak = 0.5 * a2s4 / (1.0 + math.sqrt(1.0 - a2s4))
    bare = series.bare if series.bare is not None else series.coupling
    return PeakRecord(
        n=series.rg_step, N=effective_size(series.rg_step), g=bare.g, k=k, t_max=t_peak, c_max=c_peak
    )


def _dT_dg_exact(bare: Coupling, n: int, k: int, rescaled: bool) -> float:
    c = flow(bare, n).final
    d = flow_derivatives(bare, n)
    unit = 1.0 if rescaled else c.J
    t = (2 * k - 1) * math.pi / (2.0 * unit * math.hypot(1.0, 2.0 * c.g))
    # 4g/(1+4g^2) written so that large g_n cannot overflow
    ratio = 1.0 / (c.g + 0.25 / c.g) if c.g > 0.0 else 0.0
    log_deriv = -ratio * d.dgn_dg
    if not rescaled:
        log_deriv -= d.dJn_dg / c.J
    return t * log_deriv


def dTmax_dg(
    bare_g: float,
    n: int,
    k: int = 1,
    method: str = "exact",
    J: float = 1.0,
    rescaled: bool = True,
) -> float:
    """Derivative of the k-th peak time with respect to the bare field."""
    if not bare_g > 0.0:
        raise ValidationError(f"bare g must be positive, got {bare_g!r}")
    k = _check_order(k)
    if method == "exact":
        return _dT_dg_exact(Coupling(J, bare_g), n, k, rescaled)
    if method in ("fd", "finite_difference"):
        h = FD_REL_STEP * bare_g
        hi = t_max_analytic(Coupling(J, bare_g + h), n, k, rescaled).t_max
        lo = t_max_analytic(Coupling(J, bare_g - h), n, k, rescaled).t_max
        return (hi - lo) / (2.0 * h)
    raise ValidationError(f"unknown method {method!r}; expected 'exact' or 'fd'")


def derivative_curve(
    bare_J: float,
    g_range: Tuple[float, float],
    points: int,
    n: int,
    k: int = 1,
    rescaled: bool = True,
) -> DerivativeCurve:
    g_lo, g_hi = map(float, g_range)
    if not (0.0 < g_lo < g_hi):
        raise ValidationError(f"g range must satisfy 0 < lo < hi, got {g_range}")
    if points < MIN_CURVE_POINTS:
        raise ValidationError(f"derivative curve needs >= {MIN_CURVE_POINTS} points, got {points}")
    bound = couplings.overflow_bound(n)
    if g_hi >= bound:
        raise couplings.FlowOverflowError(
            f"g = {g_hi} overflows after {n} steps; keep g below {bound:.6g}"
        )
    gs = np.linspace(g_lo, g_hi, points)
    vals = np.array([_dT_dg_exact(Coupling(bare_J, g), n, k, rescaled) for g in gs])
    return DerivativeCurve(n=n, N=effective_size(n), k=k, g=gs, dT_dg=vals, J=bare_J, rescaled=rescaled)


def find_minimum(curve: DerivativeCurve) -> Tuple[float, float]:
    """Grid argmin of the curve refined by golden-section search on the exact derivative."""
    i = int(np.argmin(curve.dT_dg))
    if i == 0 or i == len(curve.g) - 1:
        raise BoundaryMinimumError(
            f"minimum of dT/dg for n={curve.n} lies on the boundary g={curve.g[i]:.6g}; widen range"
        )

    def f(g):
        return _dT_dg_exact(Coupling(curve.J, g), curve.n, curve.k, curve.rescaled)

    brack = (curve.g[i - 1], curve.g[i], curve.g[i + 1])
    # golden() stops on a relative bracket width; g is O(1) here
    g_m = float(golden(f, brack=brack, tol=GOLDEN_TOL / 4.0))
    return g_m, f(g_m)


def _loglog_fit(xs: Sequence[float], ys: Sequence[float], sample) -> ScalingFit:
    lx, ly = np.log(np.asarray(xs, float)), np.log(np.asarray(ys, float))
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    rms = float(np.sqrt(np.mean(resid**2)))
    return ScalingFit(float(slope), float(math.exp(intercept)), rms, tuple(sample))


def _check_sizes(samples) -> None:
    if len(samples) < 3:
        raise InsufficientSamplesError(f"insufficient samples: need >= 3, got {len(samples)}")
    sizes = [s[0] for s in samples]
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValidationError("sizes N must be strictly increasing")


def fit_theta(samples: Sequence[Tuple[float, float]]) -> ScalingFit:
    """Slope of ln|dT/dg at g_m| against ln N."""
    samples = [(float(N), float(v)) for N, v in samples]
    _check_sizes(samples)
    mags = [abs(v) for _, v in samples]
    if min(mags) <= 0.0:
        raise ValidationError("derivative magnitudes must be positive")
    return _loglog_fit([N for N, _ in samples], mags, samples)


def fit_gm_drift(samples: Sequence[Tuple[float, float]]) -> ScalingFit:
    """Slope of ln(g_c - g_m) against ln N; about -1 when g_m approaches g_c like 1/N."""
    samples = [(float(N), float(gm)) for N, gm in samples]
    _check_sizes(samples)
    if any(gm >= G_CRITICAL for _, gm in samples):
        raise ValidationError("every g_m must lie below g_c = 1")
    return _loglog_fit([N for N, _ in samples], [G_CRITICAL - gm for _, gm in samples], samples)


def collapse(
    curves: Sequence[DerivativeCurve],
    minima: Sequence[Tuple[float, float]],
    y_exponent: float = 0.0,
    grid_points: int = 4001,
) -> Tuple[List[List[CollapsePoint]], float]:
    """Map curves to (N (g - g_m), N**(-y_exponent) (dT/dg|g_m - dT/dg)).

    The metric is the sup-norm difference of the two largest-N curves on
    their common x-range, divided by the y-range of the larger curve.
    """
    if len(curves) != len(minima):
        raise ValidationError("need exactly one minimum per curve")
    if len(curves) < 2:
        raise ValidationError("collapse needs at least two curves")
    if len({c.k for c in curves}) != 1:
        raise ValidationError("all curves must share the same peak order k")
    groups = []
    for curve, (g_m, v_m) in zip(curves, minima):
        scale = float(curve.N) ** (-y_exponent)
        x = curve.N * (curve.g - g_m)
        y = scale * (v_m - curve.dT_dg)
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValidationError(f"non-finite collapse values for N={curve.N}")
        groups.append((curve.N, x, y))
    groups.sort(key=lambda item: item[0])
    (_, xa, ya), (_, xb, yb) = groups[-2], groups[-1]
    lo, hi = max(xa.min(), xb.min()), min(xa.max(), xb.max())
    if not lo < hi:
        raise NoOverlapError("largest-N curves have no overlapping x-range")
    xs = np.linspace(lo, hi, grid_points)
    diff = np.max(np.abs(np.interp(xs, xa, ya) - np.interp(xs, xb, yb)))
    span = float(yb.max() - yb.min())
    metric = float(diff / span) if span > 0.0 else 0.0
    points = [[CollapsePoint(float(x), float(y), N) for x, y in zip(xs_, ys_)] for N, xs_, ys_ in groups]
    return points, metric


@dataclass(frozen=True)
class ScalingResult:
    n_values: Tuple[int, ...]
    minima: Tuple[Tuple[float, float], ...]
    theta_fit: ScalingFit
    gm_drift_fit: ScalingFit


def scaling_pipeline(
    n_values: Sequence[int],
    g_range: Tuple[float, float] = (0.5, 1.1),
    points: int = 2001,
    k: int = 1,
    J: float = 1.0,
    rescaled: bool = True,
) -> ScalingResult:
    """Locate the dip of dT_max/dg for each n and fit both scaling laws."""
    minima = []
    for n in n_values:
        curve = derivative_curve(J, g_range, points, n, k, rescaled)
        minima.append(find_minimum(curve))
    sizes = [effective_size(n) for n in n_values]
    theta = fit_theta([(N, v) for N, (_, v) in zip(sizes, minima)])
    drift = fit_gm_drift([(N, gm) for N, (gm, _) in zip(sizes, minima)])
    return ScalingResult(tuple(n_values), tuple(minima), theta, drift)


def concurrence_vs_g(t: float, n: int, g_grid, J: float = 1.0, rescaled: bool = False) -> np.ndarray:
    """C at fixed time across bare fields after n steps; ``t`` is t*J_n when rescaled."""
    out = np.empty(len(g_grid))
    for i, g in enumerate(g_grid):
        c = flow(Coupling(J, g), n).final
        out[i] = concurrence_closed_form(c, t / c.J if rescaled else t)
    return out


def first_peak_in_g(
    t: float, n: int, g_grid: np.ndarray, J: float = 1.0, rescaled: bool = False, floor: float = 1e-6
) -> float:
    """Smallest g at which C(t; g) has a local maximum above ``floor``.

    The floor keeps roundoff ripples in regions where C is ~1e-16 from
    counting as peaks.
    """
    vals = concurrence_vs_g(t, n, g_grid, J, rescaled)
    mid = vals[1:-1]
    idx = np.flatnonzero((mid > vals[:-2]) & (mid >= vals[2:]) & (mid > floor)) + 1
    if len(idx) == 0:
        raise InsufficientPeaksError(f"no concurrence peak in g for t={t}, n={n}")
    return float(g_grid[idx[0]])
