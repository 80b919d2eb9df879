"""Post-processing: jackknife errors, curve crossings, threshold bracketing.

The critical temperature is located where the xi_L/L curves of different
sizes intersect (pairwise linear interpolation on a shared grid).  The
threshold in disorder strength is bracketed by the largest p that still shows
a crossing and the smallest p that does not; the midpoint is the estimate and
half the gap its uncertainty.  A clean-lattice oracle solves the anisotropic
triangular criticality condition exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .noise_model import nishimori_couplings, fundamental_probs
from .presets import case_rates
from .spin_glass import correlation_length


def jackknife(bins) -> tuple:
    """Leave-one-out jackknife mean and standard error of a bin series."""
    bins = np.asarray(bins, dtype=float)
    n = len(bins)
    if n < 2:
        raise ValueError("jackknife requires at least 2 bins")
    total = bins.sum()
    loo = (total - bins) / (n - 1)
    mean = bins.mean()
    err = math.sqrt((n - 1) / n * ((loo - loo.mean()) ** 2).sum())
    return float(mean), float(err)


def jackknife_transform(bin_sets: list, func: Callable) -> tuple:
    """Jackknife of func(mean of each bin series) over aligned bins.

    bin_sets is a list of 1-D arrays sharing a length n; func maps the tuple
    of bin-series means to a scalar.  Used for nonlinear observables such as
    the correlation length built from two averaged correlators.
    """
    arrays = [np.asarray(b, dtype=float) for b in bin_sets]
    n = len(arrays[0])
    if any(len(a) != n for a in arrays) or n < 2:
        raise ValueError("aligned bin series of length >= 2 required")
    full = func(*[a.mean() for a in arrays])
    loo = []
    for i in range(n):
        means = [(a.sum() - a[i]) / (n - 1) for a in arrays]
        loo.append(func(*means))
    loo = np.asarray(loo, dtype=float)
    err = math.sqrt((n - 1) / n * ((loo - loo.mean()) ** 2).sum())
    return float(full), float(err)


@dataclass
class CurveFamily:
    """xi_L/L (or any crossing observable) per size on a shared x grid."""

    x: np.ndarray
    sizes: list
    values: dict  # size -> array over x
    errors: dict  # size -> array over x

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        if len(self.sizes) < 2:
            raise ValueError("need at least 2 sizes")
        if len(self.x) < 3:
            raise ValueError("need at least 3 grid points")
        for s in self.sizes:
            if len(self.values[s]) != len(self.x) or len(self.errors[s]) != len(self.x):
                raise ValueError(f"curve for size {s} does not match the grid")


@dataclass
class ThresholdEstimate:
    value: float
    uncertainty: float
    method: str  # "crossing" | "bracket"
    provenance: dict = field(default_factory=dict)
    bracket: tuple | None = None


class NoCrossing(Exception):
    """The curve family does not intersect within the grid."""


class Inconclusive(Exception):
    """The scanned grid does not bracket the threshold."""

    def __init__(self, direction: str):
        self.direction = direction
        super().__init__(f"grid does not bracket the threshold; extend {direction}")


def _pair_crossings(x, y1, e1, y2, e2):
    """Sign changes of y1 - y2 with linear interpolation and error propagation."""
    diff = y1 - y2
    err = np.sqrt(e1**2 + e2**2)
    out = []
    for i in range(len(x) - 1):
        a, b = diff[i], diff[i + 1]
        if a == 0.0 and b == 0.0:
            continue
        if a == 0.0:
            frac = 0.0
        elif a * b < 0:
            frac = a / (a - b)
        else:
            continue
        xc = x[i] + frac * (x[i + 1] - x[i])
        slope = abs(b - a) / (x[i + 1] - x[i])
        sigma = math.sqrt(err[i] ** 2 + err[i + 1] ** 2) / max(slope, 1e-300)
        # significance of the sign change at its endpoints
        signif = min(abs(a) / max(err[i], 1e-300), abs(b) / max(err[i + 1], 1e-300))
        out.append((xc, sigma, signif))
    return out


def _curves_overlap(family: CurveFamily) -> bool:
    """True if the two largest sizes never separate by more than one sigma
    over the lowest quartile of the grid (the no-transition signature)."""
    s1, s2 = sorted(family.sizes)[-2:]
    n_quart = max(2, len(family.x) // 4)
    d = np.abs(family.values[s1][:n_quart] - family.values[s2][:n_quart])
    e = np.sqrt(family.errors[s1][:n_quart] ** 2 + family.errors[s2][:n_quart] ** 2)
    return bool(np.all(d <= np.maximum(e, 1e-300)))


def find_crossing(family: CurveFamily, provenance: dict | None = None) -> ThresholdEstimate:
    """Error-weighted mean of all pairwise curve crossings.

    Raises NoCrossing when no pair of curves changes sign on the grid or when
    the largest sizes overlap within errors over the low end of the grid.
    """
    if _curves_overlap(family):
        raise NoCrossing("largest sizes overlap within errors")
    crossings = []
    sizes = sorted(family.sizes)
    for a in range(len(sizes)):
        for b in range(a + 1, len(sizes)):
            s1, s2 = sizes[a], sizes[b]
            found = _pair_crossings(
                family.x,
                family.values[s1],
                family.errors[s1],
                family.values[s2],
                family.errors[s2],
            )
            if found:
                # keep the most significant sign change of this pair
                found.sort(key=lambda c: -c[2])
                crossings.append(found[0][:2])
    if not crossings:
        raise NoCrossing("no pairwise sign change on the grid")
    xs = np.array([c[0] for c in crossings])
    sig = np.array([max(c[1], 1e-12) for c in crossings])
    wts = 1.0 / sig**2
    mean = float((xs * wts).sum() / wts.sum())
    propagated = math.sqrt(1.0 / wts.sum())
    spread = float(xs.std()) if len(xs) > 1 else 0.0
    return ThresholdEstimate(
        value=mean,
        uncertainty=max(math.hypot(propagated, spread), 1e-12),
        method="crossing",
        provenance=provenance or {},
    )


def threshold_bracket(
    p_grid, runner: Callable, provenance: dict | None = None
) -> ThresholdEstimate:
    """Largest crossing p and smallest non-crossing p give the threshold.

    runner maps p to a CurveFamily (or raises NoCrossing itself).  The
    estimate is the midpoint of the bracket; the uncertainty is half the gap.
    """
    p_grid = sorted(p_grid)
    if len(p_grid) < 2:
        raise Inconclusive("the grid (single point)")
    has_crossing = []
    for p in p_grid:
        try:
            find_crossing(runner(p))
            has_crossing.append(True)
        except NoCrossing:
            has_crossing.append(False)
    if all(has_crossing):
        raise Inconclusive("upward")
    if not any(has_crossing):
        raise Inconclusive("downward")
    last_cross = max(p for p, ok in zip(p_grid, has_crossing) if ok)
    above = [p for p, ok in zip(p_grid, has_crossing) if not ok and p > last_cross]
    if not above:
        raise Inconclusive("upward")
    first_gone = min(above)
    return ThresholdEstimate(
        value=0.5 * (last_cross + first_gone),
        uncertainty=0.5 * (first_gone - last_cross),
        method="bracket",
        provenance=provenance or {},
        bracket=(last_cross, first_gone),
    )


def exact_triangular_tc(J1: float, J2: float, J3: float) -> float:
    """Critical temperature of the clean anisotropic triangular Ising model.

    Root of sinh(2J1/T)sinh(2J2/T) + sinh(2J2/T)sinh(2J3/T)
    + sinh(2J3/T)sinh(2J1/T) = 1 (the square lattice at J3 = 0).
    """
    if J1 <= 0 or J2 <= 0 or J3 < 0:
        raise ValueError("need J1, J2 > 0 and J3 >= 0")

    def f(T):
        s1 = math.sinh(2 * J1 / T)
        s2 = math.sinh(2 * J2 / T)
        s3 = math.sinh(2 * J3 / T)
        return s1 * s2 + s2 * s3 + s3 * s1 - 1.0

    # keep sinh arguments below overflow at the low end of the bracket
    lo = 2.0 * max(J1, J2, J3) / 350.0
    hi = 1.0
    while f(hi) > 0:
        hi *= 2.0
    return float(brentq(f, lo, hi, xtol=1e-12, rtol=1e-12))


def nishimori_line(case: str, p: float, normalization: str = "J1") -> float:
    """Nishimori temperature T_N = 1/kappa_norm for a case preset at disorder p."""
    rates = case_rates(case, p)
    coup = nishimori_couplings(fundamental_probs(rates), normalization=normalization)
    return coup.T_N


def default_temperature_ladder(
    J: tuple, n_temps: int = 24, span: float = 0.5
) -> np.ndarray:
    """Geometric ladder bracketing the clean-lattice critical temperature."""
    j3 = max(J[2], 0.0)
    t_guess = exact_triangular_tc(J[0], J[1], j3)
    lo, hi = (1.0 - span) * t_guess, (1.0 + span) * t_guess
    return np.geomspace(lo, hi, n_temps)


def xi_over_l_from_bins(g0_bins, gq_bins, L: int) -> tuple:
    """Jackknife xi_L/L from aligned correlator bins; None if flagged invalid."""

    def xi_ratio(g0m, gqm):
        xi = correlation_length(g0m, gqm, L)
        return math.nan if xi is None else xi / L

    value, err = jackknife_transform([g0_bins, gq_bins], xi_ratio)
    if math.isnan(value) or math.isnan(err):
        return None, None
    return value, err
