"""Space-time error lattice of the repetition code.

One unit cell per (data qubit i, round t) carries three binary disorder
variables (z_p, z_q, z_r).  z_p flips the data qubit, z_q flips the round-t
measurement of the ancilla to the right of qubit i, and z_r flips both.  The
chain variables are the products v = z_p*z_r (vertical link, data flip) and
h = z_q*z_r (horizontal link, measurement flip).  Defects are time differences
of successive stabilizer outcomes; the final measurement round is perfect, so
no q or r flip is drawn for t = T.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .noise_model import EffectiveRates


@dataclass(frozen=True)
class LatticeDims:
    """d data qubits (code distance), T measurement rounds, d-1 ancillas."""

    d: int
    T: int

    def __post_init__(self):
        if self.d < 2:
            raise ValueError(f"code distance must be >= 2, got {self.d}")
        if self.T < 1:
            raise ValueError(f"round count must be >= 1, got {self.T}")

    @property
    def n_ancilla(self) -> int:
        return self.d - 1


@dataclass
class DisorderSample:
    """Quenched z-variables per unit cell.

    z_p has shape (d, T): every data qubit can flip every round.  z_q and z_r
    have shape (d-1, T): the measurement arm lives on the ancilla to the right
    of qubit i, so the last data-qubit column carries no q/r variables.  Under
    the perfect-final-round convention the last round of z_q and z_r is +1.
    """

    dims: LatticeDims
    rates: EffectiveRates
    seed: int
    z_p: np.ndarray
    z_q: np.ndarray
    z_r: np.ndarray


@dataclass
class ErrorChain:
    """Link variables of an error configuration.

    v has shape (d, T): v[i, t-1] = -1 means a phase flip of data qubit i in
    round t.  h has shape (d-1, T): h[x, t-1] = -1 means the round-t outcome
    of ancilla x was flipped.
    """

    dims: LatticeDims
    v: np.ndarray
    h: np.ndarray

    def data_flip_parity(self) -> np.ndarray:
        """Net flip (boolean) per data qubit, accumulated over all rounds."""
        return (self.v == -1).sum(axis=1) % 2 == 1


def sample_disorder(
    dims: LatticeDims,
    rates: EffectiveRates,
    seed: int,
    perfect_final: bool = True,
) -> DisorderSample:
    """Draw i.i.d. z-triples for every unit cell; reproducible from the seed."""
    rng = np.random.default_rng(seed)
    d, T = dims.d, dims.T

    def draw(prob, shape):
        z = np.ones(shape, dtype=np.int8)
        z[rng.random(shape) < prob] = -1
        return z

    z_p = draw(rates.p, (d, T))
    z_q = draw(rates.q, (d - 1, T))
    z_r = draw(rates.r, (d - 1, T))
    if perfect_final:
        z_q[:, T - 1] = 1
        z_r[:, T - 1] = 1
    return DisorderSample(dims=dims, rates=rates, seed=seed, z_p=z_p, z_q=z_q, z_r=z_r)


def chain_from_disorder(sample: DisorderSample) -> ErrorChain:
    """Fix the link signs from the z-triples: v = z_p*z_r, h = z_q*z_r."""
    d = sample.dims.d
    v = sample.z_p.copy()
    v[: d - 1] *= sample.z_r
    h = sample.z_q * sample.z_r
    return ErrorChain(dims=sample.dims, v=v, h=h)


def empty_chain(dims: LatticeDims) -> ErrorChain:
    return ErrorChain(
        dims=dims,
        v=np.ones((dims.d, dims.T), dtype=np.int8),
        h=np.ones((dims.d - 1, dims.T), dtype=np.int8),
    )


def syndrome_volume(chain: ErrorChain) -> np.ndarray:
    """Defect array of shape (d-1, T), boolean.

    A data flip on qubit i in round t toggles the defects at ancillas i-1 and
    i in round t (boundary qubits toggle a single defect).  A measurement flip
    at ancilla x in round t toggles the defects at rounds t and t+1 (a single
    defect if t = T).
    """
    dims = chain.dims
    d, T = dims.d, dims.T
    if chain.v.shape != (d, T) or chain.h.shape != (d - 1, T):
        raise ValueError("chain arrays do not match lattice dimensions")
    defects = np.zeros((d - 1, T), dtype=bool)

    vflips = chain.v == -1
    # data flip on qubit i toggles ancillas i-1 and i where they exist
    defects ^= vflips[1:, :]   # left ancilla of qubits 1..d-1
    defects ^= vflips[:-1, :]  # right ancilla of qubits 0..d-2

    hflips = chain.h == -1
    defects ^= hflips
    defects[:, 1:] ^= hflips[:, :-1]
    return defects


def apply_equivalence(chain: ErrorChain, spins: np.ndarray) -> ErrorChain:
    """Deform the chain by the equivalence configuration (syndrome-preserving).

    spins has shape (d, T) with values +-1; flipping the spin of cell (i, t)
    toggles v[i, t], v[i, t+1], h[i-1, t] and h[i, t] (links beyond the
    boundary are simply absent).  Equivalently v' = v * sigma * sigma(time
    predecessor) and h' = h * sigma * sigma(space successor), with +1 spins
    outside the grid.
    """
    dims = chain.dims
    d, T = dims.d, dims.T
    if spins.shape != (d, T):
        raise ValueError(f"spins must have shape {(d, T)}, got {spins.shape}")
    sigma = np.asarray(spins, dtype=np.int8)

    v = chain.v.copy()
    v *= sigma
    v[:, 1:] *= sigma[:, :-1]

    h = chain.h.copy()
    h *= sigma[:-1, :]
    h *= sigma[1:, :]
    return ErrorChain(dims=dims, v=v, h=h)


def residual_logical_class(chain: ErrorChain, correction: np.ndarray) -> str:
    """Classify the residual after applying a correction: trivial or logical.

    correction is a boolean flip per data qubit, applied after the (perfect)
    final round.  The residual must be stabilizer-trivial, i.e. uniform across
    qubits; all-flipped is the logical operator.
    """
    correction = np.asarray(correction, dtype=bool)
    if correction.shape != (chain.dims.d,):
        raise ValueError(f"correction must have shape ({chain.dims.d},)")
    residual = chain.data_flip_parity() ^ correction
    if residual.any() and not residual.all():
        raise ValueError("residual error has nonempty syndrome: correction invalid")
    return "logical" if residual.all() else "trivial"


def serialize_chain(chain: ErrorChain) -> dict:
    """Compact JSON-ready form (arrays of +-1) for golden tests and the CLI."""
    return {
        "d": chain.dims.d,
        "rounds": chain.dims.T,
        "v": chain.v.tolist(),
        "h": chain.h.tolist(),
    }


def deserialize_chain(payload: dict) -> ErrorChain:
    dims = LatticeDims(d=payload["d"], T=payload["rounds"])
    return ErrorChain(
        dims=dims,
        v=np.array(payload["v"], dtype=np.int8),
        h=np.array(payload["h"], dtype=np.int8),
    )
