"""Monte Carlo engine for the correlated-disorder triangular random-bond Ising model.

Spins live on a periodic L x L lattice with three bond families per site:
vertical (magnitude J1, sign h), horizontal (magnitude J2, sign v) and one
diagonal (magnitude J3, sign v*h), all diagonals sharing one orientation.
Sampling is single-spin Metropolis interspersed with replica-exchange moves
between adjacent temperatures.  Observables are the k = 0 and k = q_min
Fourier correlators entering the second-moment correlation length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .noise_model import (
    EffectiveRates,
    NishimoriCouplings,
    fundamental_probs,
    nishimori_couplings,
)


@dataclass
class BondLattice:
    """Quenched couplings of one disorder sample.

    sign_v / sign_h / sign_d are +-1 arrays of shape (L, L); bond (x, y)
    couples the site to its neighbor at (x, y+1), (x+1, y) and (x+1, y+1)
    respectively (periodic).
    """

    L: int
    J1: float
    J2: float
    J3: float
    sign_v: np.ndarray
    sign_h: np.ndarray
    sign_d: np.ndarray
    seed: int | None = None
    rates: EffectiveRates | None = None
    couplings: NishimoriCouplings | None = None

    def bond_arrays(self) -> tuple:
        """Signed coupling magnitudes as float64 arrays for the kernels."""
        return (
            self.J1 * self.sign_v.astype(np.float64),
            self.J2 * self.sign_h.astype(np.float64),
            self.J3 * self.sign_d.astype(np.float64),
        )


def build_bond_lattice(
    L: int,
    rates: EffectiveRates,
    seed: int,
    normalization: str = "J1",
    floor: float | None = None,
) -> BondLattice:
    """Magnitudes from the Nishimori conditions, signs from quenched disorder.

    The sign rules are the per-cell products of the three error variables:
    the vertical bond flips with z_q*z_r, the horizontal bond with z_p*z_r,
    the diagonal bond with z_p*z_q.
    """
    probs = fundamental_probs(rates)
    coup = nishimori_couplings(probs, normalization=normalization, floor=floor)
    rng = np.random.default_rng(seed)

    def draw(prob):
        z = np.ones((L, L), dtype=np.int8)
        z[rng.random((L, L)) < prob] = -1
        return z

    z_p = draw(rates.p)
    z_q = draw(rates.q)
    z_r = draw(rates.r)
    return BondLattice(
        L=L,
        J1=coup.J1,
        J2=coup.J2,
        J3=coup.J3,
        sign_v=z_q * z_r,
        sign_h=z_p * z_r,
        sign_d=z_p * z_q,
        seed=seed,
        rates=rates,
        couplings=coup,
    )


def clean_bond_lattice(L: int, J: tuple) -> BondLattice:
    """Disorder-free lattice with explicit coupling magnitudes (J1, J2, J3)."""
    ones = np.ones((L, L), dtype=np.int8)
    return BondLattice(L=L, J1=J[0], J2=J[1], J3=J[2], sign_v=ones, sign_h=ones.copy(), sign_d=ones.copy())


@njit(cache=True)
def _energy(spins, b1, b2, b3):
    L = spins.shape[0]
    e = 0.0
    for i in range(L):
        ip = (i + 1) % L
        for j in range(L):
            jp = (j + 1) % L
            s = spins[i, j]
            e -= s * (b1[i, j] * spins[i, jp] + b2[i, j] * spins[ip, j] + b3[i, j] * spins[ip, jp])
    return e


@njit(cache=True)
def _sweep_block(spins, b1, b2, b3, beta, rand):
    """n_sweeps Metropolis sweeps in typewriter order.

    rand has shape (n_sweeps, L*L).  Returns (energy change, accepted flips).
    """
    L = spins.shape[0]
    de_total = 0.0
    accepted = 0
    for sweep in range(rand.shape[0]):
        k = 0
        for i in range(L):
            ip = (i + 1) % L
            im = (i - 1) % L
            for j in range(L):
                jp = (j + 1) % L
                jm = (j - 1) % L
                s = spins[i, j]
                field = (
                    b1[i, j] * spins[i, jp]
                    + b1[i, jm] * spins[i, jm]
                    + b2[i, j] * spins[ip, j]
                    + b2[im, j] * spins[im, j]
                    + b3[i, j] * spins[ip, jp]
                    + b3[im, jm] * spins[im, jm]
                )
                de = 2.0 * s * field
                if de <= 0.0 or rand[sweep, k] < math.exp(-beta * de):
                    spins[i, j] = -s
                    de_total += de
                    accepted += 1
                k += 1
    return de_total, accepted


def energy(lattice: BondLattice, spins: np.ndarray) -> float:
    b1, b2, b3 = lattice.bond_arrays()
    return float(_energy(spins.astype(np.int8), b1, b2, b3))


@dataclass
class ReplicaState:
    """One replica: spin configuration, temperature slot, cached energy."""

    spins: np.ndarray
    temp_index: int
    energy: float


def random_replica(lattice: BondLattice, temp_index: int, rng) -> ReplicaState:
    spins = np.where(rng.random((lattice.L, lattice.L)) < 0.5, 1, -1).astype(np.int8)
    return ReplicaState(spins=spins, temp_index=temp_index, energy=energy(lattice, spins))


def metropolis_sweep(
    state: ReplicaState, lattice: BondLattice, T: float, rng, n_sweeps: int = 1
) -> int:
    """In-place Metropolis sweeps at temperature T; returns accepted flips."""
    if T <= 0:
        raise ValueError("temperature must be positive")
    b1, b2, b3 = lattice.bond_arrays()
    rand = rng.random((n_sweeps, lattice.L * lattice.L))
    de, accepted = _sweep_block(state.spins, b1, b2, b3, 1.0 / T, rand)
    state.energy += de
    return int(accepted)


def parallel_tempering_step(
    replicas: list, temperatures: np.ndarray, rng, parity: int = 0
) -> int:
    """Attempt swaps between adjacent temperature slots of one parity.

    replicas[k] runs at temperatures[k].  A swap exchanges the configurations
    (a permutation, never a mutation) with probability
    min(1, exp(dbeta * dE)).  Returns the number of accepted swaps.
    """
    if len(replicas) != len(temperatures):
        raise ValueError("one replica per temperature required")
    accepted = 0
    for k in range(parity % 2, len(replicas) - 1, 2):
        beta_lo = 1.0 / temperatures[k]
        beta_hi = 1.0 / temperatures[k + 1]
        arg = (beta_lo - beta_hi) * (replicas[k].energy - replicas[k + 1].energy)
        if arg >= 0.0 or rng.random() < math.exp(arg):
            a, b = replicas[k], replicas[k + 1]
            a.spins, b.spins = b.spins, a.spins
            a.energy, b.energy = b.energy, a.energy
            accepted += 1
    return accepted


def measure_g(spins: np.ndarray) -> tuple:
    """Fourier correlators |m(k)|^2 / L^2 at k = 0 and k = q_min = (2pi/L, 0).

    The translation-averaged estimator has the same expectation as the
    origin-anchored correlator sum but a far lower variance.
    """
    L = spins.shape[0]
    m0 = float(spins.sum())
    phase = 2.0 * np.pi * np.arange(L) / L
    row_sums = spins.sum(axis=1)
    mc = float(np.dot(row_sums, np.cos(phase)))
    ms = float(np.dot(row_sums, np.sin(phase)))
    return m0 * m0 / (L * L), (mc * mc + ms * ms) / (L * L)


def correlation_length(g0_mean: float, gq_mean: float, L: int) -> float | None:
    """Second-moment correlation length; None flags an invalid sample."""
    if gq_mean <= 0.0 or g0_mean < gq_mean:
        return None
    q_min = 2.0 * np.pi / L
    return float(math.sqrt(g0_mean / gq_mean - 1.0) / (2.0 * math.sin(q_min / 2.0)))


@dataclass
class McSchedule:
    """Temperature ladder and sweep/swap counts for one disorder sample."""

    temperatures: np.ndarray
    n_met: int = 800
    n_rounds: int = 10000
    therm_fraction: float = 0.5
    n_bins: int = 10

    def __post_init__(self):
        temps = np.asarray(self.temperatures, dtype=float)
        if len(temps) < 1 or np.any(np.diff(temps) <= 0):
            raise ValueError("temperature ladder must be strictly increasing")
        if self.n_met < 1:
            raise ValueError("n_met must be >= 1")
        if self.n_rounds < 2 or self.measurement_rounds < self.n_bins:
            raise ValueError("schedule leaves too few measurement rounds")
        object.__setattr__(self, "temperatures", temps)

    @property
    def measurement_rounds(self) -> int:
        return self.n_rounds - int(self.n_rounds * self.therm_fraction)


@dataclass
class ObservableSeries:
    """Per-temperature jackknife bins of the two correlators."""

    temperatures: np.ndarray
    g0_bins: np.ndarray  # (n_temps, n_bins)
    gq_bins: np.ndarray
    sweep_acceptance: np.ndarray
    swap_acceptance: float

    def g0_mean(self) -> np.ndarray:
        return self.g0_bins.mean(axis=1)

    def gq_mean(self) -> np.ndarray:
        return self.gq_bins.mean(axis=1)


def run_disorder_sample(lattice: BondLattice, schedule: McSchedule, seed: int) -> ObservableSeries:
    """Thermalize, then bin measurements of G(0) and G(q_min) per temperature."""
    rng = np.random.default_rng(seed)
    temps = schedule.temperatures
    n_t = len(temps)
    replicas = [random_replica(lattice, k, rng) for k in range(n_t)]
    b1, b2, b3 = lattice.bond_arrays()
    L = lattice.L

    therm_rounds = schedule.n_rounds - schedule.measurement_rounds
    n_meas = schedule.measurement_rounds
    g0_acc = np.zeros((n_t, schedule.n_bins))
    gq_acc = np.zeros((n_t, schedule.n_bins))
    bin_counts = np.zeros(schedule.n_bins, dtype=np.int64)
    flips = np.zeros(n_t, dtype=np.int64)
    swaps_accepted = 0
    swaps_attempted = 0

    for rnd in range(schedule.n_rounds):
        for k, rep in enumerate(replicas):
            rand = rng.random((schedule.n_met, L * L))
            de, acc = _sweep_block(rep.spins, b1, b2, b3, 1.0 / temps[k], rand)
            rep.energy += de
            flips[k] += acc
        if n_t > 1:
            swaps_accepted += parallel_tempering_step(replicas, temps, rng, parity=rnd % 2)
            swaps_attempted += max(0, (n_t - (rnd % 2)) // 2)
        if rnd >= therm_rounds:
            b = (rnd - therm_rounds) * schedule.n_bins // n_meas
            bin_counts[b] += 1
            for k, rep in enumerate(replicas):
                g0, gq = measure_g(rep.spins)
                g0_acc[k, b] += g0
                gq_acc[k, b] += gq

    g0_bins = g0_acc / bin_counts[None, :]
    gq_bins = gq_acc / bin_counts[None, :]
    total_proposals = schedule.n_rounds * schedule.n_met * L * L
    return ObservableSeries(
        temperatures=temps,
        g0_bins=g0_bins,
        gq_bins=gq_bins,
        sweep_acceptance=flips / total_proposals,
        swap_acceptance=swaps_accepted / swaps_attempted if swaps_attempted else 0.0,
    )


def verify_energy_caches(replicas: list, lattice: BondLattice, rtol: float = 1e-9) -> None:
    """Raise if any cached energy drifted from a fresh recomputation."""
    for rep in replicas:
        exact = energy(lattice, rep.spins)
        scale = max(abs(exact), 1.0)
        if abs(rep.energy - exact) > rtol * scale:
            raise AssertionError(
                f"energy cache drift: cached {rep.energy}, recomputed {exact}"
            )


def exhaustive_observables(lattice: BondLattice, T: float) -> tuple:
    """Exact Boltzmann averages (G0, Gq_min, E) by full enumeration; L <= 4."""
    L = lattice.L
    n = L * L
    if n > 16:
        raise ValueError("exhaustive enumeration limited to L <= 4")
    states = np.arange(1 << n, dtype=np.uint32)
    bits = ((states[:, None] >> np.arange(n)[None, :]) & 1).astype(np.int8)
    spins = (2 * bits - 1).reshape(-1, L, L)

    b1, b2, b3 = lattice.bond_arrays()
    e = np.zeros(len(states))
    for i in range(L):
        ip = (i + 1) % L
        for j in range(L):
            jp = (j + 1) % L
            s = spins[:, i, j]
            e -= s * (
                b1[i, j] * spins[:, i, jp]
                + b2[i, j] * spins[:, ip, j]
                + b3[i, j] * spins[:, ip, jp]
            )

    m0 = spins.sum(axis=(1, 2)).astype(float)
    phase = 2.0 * np.pi * np.arange(L) / L
    rows = spins.sum(axis=2).astype(float)
    mc = rows @ np.cos(phase)
    ms = rows @ np.sin(phase)
    g0 = m0 * m0 / n
    gq = (mc * mc + ms * ms) / n

    w = np.exp(-(e - e.min()) / T)
    z = w.sum()
    return float((g0 * w).sum() / z), float((gq * w).sum() / z), float((e * w).sum() / z)
