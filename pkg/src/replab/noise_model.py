"""Closed-form map from circuit-level noise to effective error rates and couplings.

The five depolarizing rates of the readout circuit collapse exactly into three
effective flip probabilities (p, q, r): data phase flip, measurement flip, and
the correlated data+measurement flip produced by errors between the two CNOTs
of a cycle.  From (p, q, r) we build the probabilities of the four fundamental
lattice events and the Ising couplings that put the model on the Nishimori
line.  A Pauli-transfer-matrix oracle verifies the factorization of the
two-qubit channel numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

# Single-qubit Pauli matrices, ordered (I, X, Y, Z).
_PAULIS = [
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
]

# Complete-depolarization caps: lambda = 3/4 (one qubit), 15/16 (two qubits).
SINGLE_QUBIT_CAP = 3.0 / 4.0
TWO_QUBIT_CAP = 15.0 / 16.0


class InfiniteCouplingError(ValueError):
    """A fundamental event probability is zero, so a coupling diverges."""

    def __init__(self, which: str):
        self.which = which
        super().__init__(
            f"fundamental probability {which} is zero: the corresponding "
            "coupling is infinite (a hard constraint, not a Boltzmann weight)"
        )


def _check_range(name: str, value: float, cap: float) -> None:
    if not math.isfinite(value) or value < 0.0 or value > cap:
        raise ValueError(f"{name} must lie in [0, {cap}], got {value}")


@dataclass(frozen=True)
class CircuitNoiseParams:
    """Depolarizing rates of the five circuit elements."""

    p_sp: float = 0.0
    p_id: float = 0.0
    p_1: float = 0.0
    p_m: float = 0.0
    p_2: float = 0.0

    def __post_init__(self):
        for name in ("p_sp", "p_id", "p_1", "p_m"):
            _check_range(name, getattr(self, name), SINGLE_QUBIT_CAP)
        _check_range("p_2", self.p_2, TWO_QUBIT_CAP)

    @classmethod
    def uniform(cls, lam: float) -> "CircuitNoiseParams":
        return cls(p_sp=lam, p_id=lam, p_1=lam, p_m=lam, p_2=lam)


@dataclass(frozen=True)
class EffectiveRates:
    """The three effective flip probabilities, each in [0, 1/2]."""

    p: float
    q: float
    r: float

    def __post_init__(self):
        for name in ("p", "q", "r"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0.0 or value > 0.5 + 1e-15:
                raise ValueError(f"effective rate {name} must lie in [0, 1/2], got {value}")


@dataclass(frozen=True)
class FundamentalProbs:
    """Probabilities of the four fundamental lattice events e0..e3."""

    pi0: float
    pi1: float
    pi2: float
    pi3: float

    def __post_init__(self):
        total = self.pi0 + self.pi1 + self.pi2 + self.pi3
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"event probabilities must sum to 1, got {total}")

    def as_tuple(self) -> tuple:
        return (self.pi0, self.pi1, self.pi2, self.pi3)


@dataclass(frozen=True)
class NishimoriCouplings:
    """Dimensionless couplings beta*J_i and their normalized magnitudes.

    kappa_i are the raw products beta*J_i; J1..J3 are kappa_i / kappa_norm
    under the chosen normalization, and T_N = 1 / kappa_norm is the Nishimori
    temperature in those units.
    """

    kappa0: float
    kappa1: float
    kappa2: float
    kappa3: float
    kappa_norm: float
    policy: str = "J1"
    floored: bool = False

    @property
    def J1(self) -> float:
        return self.kappa1 / self.kappa_norm

    @property
    def J2(self) -> float:
        return self.kappa2 / self.kappa_norm

    @property
    def J3(self) -> float:
        return self.kappa3 / self.kappa_norm

    @property
    def T_N(self) -> float:
        return 1.0 / self.kappa_norm


def compose_flip_channels(rates: Iterable[float]) -> float:
    """Flip rate of the composition of independent flip channels.

    The composed channel satisfies 1 - 2*gamma_tot = prod(1 - 2*gamma_i).
    """
    acc = 1.0
    for g in rates:
        if g < 0.0 or g > 1.0:
            raise ValueError(f"flip rate must lie in [0, 1], got {g}")
        acc *= 1.0 - 2.0 * g
    return 0.5 * (1.0 - acc)


def factorize_two_qubit_channel(p_2: float) -> tuple:
    """Rates of the three independent factors of the squared CNOT channel.

    By symmetry the P, Q and R factors carry the same rate 8*p_2/15.
    """
    _check_range("p_2", p_2, TWO_QUBIT_CAP)
    lam = 8.0 * p_2 / 15.0
    return (lam, lam, lam)


def effective_rates_from_circuit(params: CircuitNoiseParams) -> EffectiveRates:
    """Exact (p, q, r) for a circuit noise configuration.

    p collects the CNOT factor and four idle channels on the data qubit; q
    collects the CNOT factor with the two single-qubit gates, preparation and
    measurement channels on the ancilla; r is the correlated factor alone.
    A single-qubit depolarizing channel of strength lam acts as an effective
    flip channel of rate 2*lam/3 on the relevant error type.
    """
    lam_p, lam_q, lam_r = factorize_two_qubit_channel(params.p_2)
    idle = 2.0 * params.p_id / 3.0
    p = compose_flip_channels([lam_p, idle, idle, idle, idle])
    q = compose_flip_channels(
        [
            lam_q,
            2.0 * params.p_1 / 3.0,
            2.0 * params.p_1 / 3.0,
            2.0 * params.p_sp / 3.0,
            2.0 * params.p_m / 3.0,
        ]
    )
    return EffectiveRates(p=p, q=q, r=lam_r)


def fundamental_probs(rates: EffectiveRates) -> FundamentalProbs:
    """Probabilities of the events e0..e3 on one unit cell."""
    p, q, r = rates.p, rates.q, rates.r
    return FundamentalProbs(
        pi0=(1 - p) * (1 - q) * (1 - r) + p * q * r,
        pi1=p * (1 - q) * (1 - r) + r * q * (1 - p),
        pi2=q * (1 - p) * (1 - r) + r * p * (1 - q),
        pi3=p * q * (1 - r) + r * (1 - p) * (1 - q),
    )


def nishimori_couplings(
    probs: FundamentalProbs,
    normalization: str = "J1",
    floor: float | None = None,
) -> NishimoriCouplings:
    """Couplings beta*J_i fixed by the error probabilities.

    normalization selects the constant dividing the kappas: "J1" (default)
    sets J1 = 1, "max" divides by the largest magnitude.  With "J1" and
    kappa1 = 0 the policy falls back to the maximum.  Zero probabilities are
    a hard error unless an explicit floor is supplied.
    """
    pis = list(probs.as_tuple())
    floored = False
    for i, pi in enumerate(pis):
        if pi <= 0.0:
            if floor is None:
                raise InfiniteCouplingError(f"pi{i}")
            pis[i] = floor
            floored = True
    pi0, pi1, pi2, pi3 = pis
    kappa0 = 0.25 * math.log(pi0 * pi1 * pi2 * pi3)
    kappa1 = 0.25 * math.log(pi0 * pi1 / (pi2 * pi3))
    kappa2 = 0.25 * math.log(pi0 * pi2 / (pi1 * pi3))
    kappa3 = 0.25 * math.log(pi0 * pi3 / (pi1 * pi2))

    if normalization == "J1":
        kappa_norm = kappa1 if kappa1 != 0.0 else max(kappa1, kappa2, kappa3)
    elif normalization == "max":
        kappa_norm = max(kappa1, kappa2, kappa3)
    else:
        raise ValueError(f"unknown normalization policy: {normalization!r}")
    if kappa_norm == 0.0:
        raise ValueError("all couplings vanish; cannot normalize")
    return NishimoriCouplings(
        kappa0=kappa0,
        kappa1=kappa1,
        kappa2=kappa2,
        kappa3=kappa3,
        kappa_norm=kappa_norm,
        policy=normalization,
        floored=floored,
    )


# ---------------------------------------------------------------------------
# Pauli-transfer-matrix oracle
# ---------------------------------------------------------------------------

def pauli_basis(n_qubits: int) -> list:
    """Tensor-product Pauli basis, data qubit first (data x ancilla)."""
    if n_qubits == 1:
        return list(_PAULIS)
    basis = []
    for a in _PAULIS:
        for b in _PAULIS:
            basis.append(np.kron(a, b))
    return basis


def ptm_of_pauli_mixture(terms: Sequence[tuple], n_qubits: int) -> np.ndarray:
    """PTM of a channel sum_k c_k K_k rho K_k^dagger with Pauli K_k.

    terms is a list of (coefficient, unitary matrix).  R_ij =
    tr(P_i E(P_j)) / d; for Pauli channels the result is real diagonal with
    R_00 = 1.
    """
    basis = pauli_basis(n_qubits)
    d = 2**n_qubits
    R = np.zeros((d * d, d * d))
    for j, Pj in enumerate(basis):
        out = sum(c * (K @ Pj @ K.conj().T) for c, K in terms)
        for i, Pi in enumerate(basis):
            R[i, j] = np.real(np.trace(Pi @ out)) / d
    return R


def two_qubit_cnot_channel_terms(p_2: float) -> list:
    """Kraus mixture of the effective CNOT noise channel.

    After reducing by error equivalences, the two-qubit depolarizing channel
    acts as a mixture of the identity and the three operators P = 1 x Z,
    Q = X x 1, R = X x Z, each with coefficient 4*p_2/15.
    """
    I2 = np.eye(2, dtype=complex)
    X = _PAULIS[1]
    Z = _PAULIS[3]
    P = np.kron(I2, Z)
    Q = np.kron(X, I2)
    R = np.kron(X, Z)
    c = 4.0 * p_2 / 15.0
    return [(1.0 - 3.0 * c, np.eye(4, dtype=complex)), (c, P), (c, Q), (c, R)]


def verify_factorization(p_2: float) -> float:
    """Max deviation between the squared CNOT channel and its three factors.

    Builds the 16x16 PTM of the effective two-qubit channel applied twice and
    the PTM product of the three factored channels with rate 8*p_2/15 each.
    The contract is a deviation below 1e-12.
    """
    _check_range("p_2", p_2, TWO_QUBIT_CAP)
    R2 = ptm_of_pauli_mixture(two_qubit_cnot_channel_terms(p_2), n_qubits=2)
    squared = R2 @ R2

    I2 = np.eye(2, dtype=complex)
    X = _PAULIS[1]
    Z = _PAULIS[3]
    lam = 8.0 * p_2 / 15.0
    product = np.eye(16)
    for op in (np.kron(I2, Z), np.kron(X, I2), np.kron(X, Z)):
        factor = ptm_of_pauli_mixture(
            [(1.0 - lam, np.eye(4, dtype=complex)), (lam, op)], n_qubits=2
        )
        product = factor @ product
    return float(np.max(np.abs(squared - product)))
