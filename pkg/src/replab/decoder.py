"""Exact minimum-weight perfect-matching decoder on the triangular defect graph.

Defects live on the (ancilla, round) grid.  Edge weights are negative
log-odds of the three error types; the distance between two defects is the
minimum of the three two-type Manhattan metrics (any shortest path on the
full triangular graph uses at most two edge types).  Boundaries are handled
with virtual partner nodes.  The blossom solve runs in a compiled extension;
a networkx fallback keeps the package importable without it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .lattice import ErrorChain, LatticeDims, chain_from_disorder, sample_disorder, syndrome_volume
from .noise_model import EffectiveRates

try:
    from . import _blossom
except ImportError:  # pragma: no cover - built extension normally present
    _blossom = None

# Fixed-point scale for the integer blossom solver.
_WEIGHT_BITS = 32


@dataclass(frozen=True)
class WeightMetric:
    """Log-likelihood weights of the three edge types.

    r_sign fixes the diagonal orientation of the correlated edge in defect
    coordinates: +1 for a (space+1, time+1) step (the default produced by the
    measurement arm landing on the right ancilla), -1 for the mirrored gate
    order.
    """

    w_p: float
    w_q: float
    w_r: float
    r_sign: int = 1

    def __post_init__(self):
        for name in ("w_p", "w_q", "w_r"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.r_sign not in (-1, 1):
            raise ValueError("r_sign must be +1 or -1")


def weight_metric(rates: EffectiveRates, r_sign: int = 1) -> WeightMetric:
    """w_x = -log(x / (1-x)); a zero rate makes its edge type unusable."""

    def w(name, x):
        if x >= 0.5:
            raise ValueError(f"rate {name} >= 1/2 gives a nonpositive weight")
        if x == 0.0:
            return math.inf
        return -math.log(x / (1.0 - x))

    return WeightMetric(
        w_p=w("p", rates.p), w_q=w("q", rates.q), w_r=w("r", rates.r), r_sign=r_sign
    )


def _cost(weight: float, count: int) -> float:
    # avoids inf * 0 when an edge type is excluded but unused
    return 0.0 if count == 0 else weight * count


def defect_distance(a: tuple, b: tuple, metric: WeightMetric) -> float:
    """Minimum over the three two-type weighted Manhattan metrics."""
    dx = (b[0] - a[0]) * metric.r_sign
    dt = b[1] - a[1]
    pq = _cost(metric.w_p, abs(dx)) + _cost(metric.w_q, abs(dt))
    pr = _cost(metric.w_p, abs(dx - dt)) + _cost(metric.w_r, abs(dt))
    qr = _cost(metric.w_q, abs(dt - dx)) + _cost(metric.w_r, abs(dx))
    return min(pq, pr, qr)


def boundary_distance(x: int, metric: WeightMetric, dims: LatticeDims) -> float:
    """Weight of matching ancilla x to the nearer code boundary.

    Each space step costs min(w_p, w_r): the virtual partner carries no time
    coordinate, so time offsets accumulated by r-steps are free.
    """
    step = min(metric.w_p, metric.w_r)
    return min(_cost(step, x + 1), _cost(step, dims.d - 1 - x))


def _boundary_side(x: int, dims: LatticeDims) -> str:
    # ties go left for determinism
    return "left" if x + 1 <= dims.d - 1 - x else "right"


@dataclass
class MatchingGraph:
    """Defect graph with one virtual boundary partner per real defect.

    Nodes 0..n-1 are real defects, n..2n-1 their virtual partners.  The
    weight matrix is symmetric; virtual-virtual edges are zero.
    """

    n_real: int
    weights: np.ndarray

    @property
    def n_nodes(self) -> int:
        return 2 * self.n_real


@dataclass
class Matching:
    pairs: list
    total_weight: float


def pairwise_weights(defects: np.ndarray, metric: WeightMetric) -> np.ndarray:
    """Vectorized defect-defect distance matrix."""
    x = defects[:, 0].astype(np.int64)
    t = defects[:, 1].astype(np.int64)
    dx = (x[None, :] - x[:, None]) * metric.r_sign
    dt = t[None, :] - t[:, None]

    def block(w, counts):
        if math.isinf(w):
            return np.where(counts == 0, 0.0, np.inf)
        return w * counts

    pq = block(metric.w_p, np.abs(dx)) + block(metric.w_q, np.abs(dt))
    pr = block(metric.w_p, np.abs(dx - dt)) + block(metric.w_r, np.abs(dt))
    qr = block(metric.w_q, np.abs(dt - dx)) + block(metric.w_r, np.abs(dx))
    return np.minimum(pq, np.minimum(pr, qr))


def boundary_weights(defects: np.ndarray, metric: WeightMetric, dims: LatticeDims) -> np.ndarray:
    x = defects[:, 0].astype(np.int64)
    step = min(metric.w_p, metric.w_r)
    return step * np.minimum(x + 1, dims.d - 1 - x)


def build_matching_graph(
    defects: np.ndarray, metric: WeightMetric, dims: LatticeDims
) -> MatchingGraph:
    """All-pairs graph of real defects plus per-defect virtual partners."""
    defects = np.asarray(defects)
    n = len(defects)
    W = np.zeros((2 * n, 2 * n))
    if n:
        W[:n, :n] = pairwise_weights(defects, metric)
        b = boundary_weights(defects, metric, dims)
        W[:n, n:] = np.inf
        W[n:, :n] = np.inf
        W[np.arange(n), np.arange(n) + n] = b
        W[np.arange(n) + n, np.arange(n)] = b
    return MatchingGraph(n_real=n, weights=W)


def _solve_int_matching(weights: np.ndarray) -> list:
    """Min-weight perfect matching of a complete even graph, integer-exact.

    weights is a dense symmetric float matrix; entries of +inf mark forbidden
    edges.  Returns the matched pairs (i, j) with i < j.
    """
    n = weights.shape[0]
    if n == 0:
        return []
    if n % 2:
        raise ValueError("perfect matching requires an even node count")
    finite = weights[np.isfinite(weights)]
    max_w = float(finite.max()) if finite.size else 1.0
    scale = (1 << _WEIGHT_BITS) / max(max_w, 1e-300)
    scale = min(scale, float(1 << _WEIGHT_BITS))

    iu, ju = np.triu_indices(n, k=1)
    mask = np.isfinite(weights[iu, ju])
    iu, ju = iu[mask], ju[mask]
    int_w = np.round(weights[iu, ju] * scale).astype(np.int64)

    if _blossom is not None:
        big = int(int_w.max()) + 1 if int_w.size else 1
        # offset > n * big makes every extra matched pair dominate any weight
        # difference, so the maximum-weight matching is perfect when one exists
        offset = big * (n + 1)
        edges = np.stack([iu, ju], axis=1).astype(np.int64)
        mate = _blossom.max_weight_matching(n, edges, offset + big - int_w)
        if np.any(mate < 0):
            raise ValueError("graph admits no perfect matching")
        return [(i, int(mate[i])) for i in range(n) if i < mate[i]]

    import networkx as nx  # fallback path

    g = nx.Graph()
    g.add_nodes_from(range(n))
    for i, j, w in zip(iu, ju, int_w):
        g.add_edge(int(i), int(j), weight=int(w))
    match = nx.min_weight_matching(g)
    if len(match) * 2 != n:
        raise ValueError("graph admits no perfect matching")
    return sorted(tuple(sorted(e)) for e in match)


def solve_mwpm(graph: MatchingGraph) -> Matching:
    """Exact minimum-weight perfect matching of the virtual-node graph."""
    pairs = _solve_int_matching(graph.weights)
    total = float(sum(graph.weights[i, j] for i, j in pairs))
    return Matching(pairs=pairs, total_weight=total)


def extract_defects(defect_volume: np.ndarray) -> np.ndarray:
    """Defect coordinates (x, t) with t starting at 1, ordered lexicographically."""
    xs, ts = np.nonzero(defect_volume)
    return np.stack([xs, ts + 1], axis=1)


def decode(defect_volume: np.ndarray, metric: WeightMetric, dims: LatticeDims) -> np.ndarray:
    """Correction (boolean flip per data qubit) realizing the MWPM.

    Solves the reduced complete graph on real defects where the weight of a
    pair is min(pair distance, sum of the two boundary weights); this is
    exactly equivalent to the virtual-node construction because virtual nodes
    pair among themselves at zero weight.
    """
    correction, _ = _decode_with_weight(defect_volume, metric, dims)
    return correction


def _decode_with_weight(
    defect_volume: np.ndarray, metric: WeightMetric, dims: LatticeDims
) -> tuple:
    defects = extract_defects(defect_volume)
    n = len(defects)
    correction = np.zeros(dims.d, dtype=bool)
    if n == 0:
        return correction, 0.0

    pair_w = pairwise_weights(defects, metric)
    bound_w = boundary_weights(defects, metric, dims)
    both_boundary = bound_w[:, None] + bound_w[None, :]
    reduced = np.minimum(pair_w, both_boundary)

    m = n
    if n % 2:
        # odd defect count: a dummy node absorbs one boundary match
        m = n + 1
        W = np.zeros((m, m))
        W[:n, :n] = reduced
        W[:n, n] = bound_w
        W[n, :n] = bound_w
        reduced = W

    pairs = _solve_int_matching(reduced)
    total = 0.0

    def send_to_boundary(x: int) -> None:
        if _boundary_side(x, dims) == "left":
            correction[: x + 1] ^= True
        else:
            correction[x + 1 :] ^= True

    for i, j in pairs:
        if j == n and n % 2:
            send_to_boundary(int(defects[i, 0]))
            total += bound_w[i]
            continue
        if pair_w[i, j] <= both_boundary[i, j]:
            x1, x2 = sorted((int(defects[i, 0]), int(defects[j, 0])))
            correction[x1 + 1 : x2 + 1] ^= True
            total += pair_w[i, j]
        else:
            send_to_boundary(int(defects[i, 0]))
            send_to_boundary(int(defects[j, 0]))
            total += both_boundary[i, j]
    return correction, float(total)


def matched_weight(defect_volume: np.ndarray, metric: WeightMetric, dims: LatticeDims) -> float:
    """Total weight of the optimal matching (reduced-graph route)."""
    defects = extract_defects(defect_volume)
    n = len(defects)
    if n == 0:
        return 0.0
    graph = build_matching_graph(defects, metric, dims)
    return solve_mwpm(graph).total_weight


@dataclass
class TrialOutcome:
    success: bool
    defect_count: int
    matched_weight: float


def run_trial(
    dims: LatticeDims, rates: EffectiveRates, metric: WeightMetric, seed: int
) -> TrialOutcome:
    """One memory-experiment trial: sample, decode, classify."""
    sample = sample_disorder(dims, rates, seed)
    chain = chain_from_disorder(sample)
    defect_volume = syndrome_volume(chain)
    correction, weight = _decode_with_weight(defect_volume, metric, dims)
    residual = chain.data_flip_parity() ^ correction
    if residual.any() and not residual.all():
        raise AssertionError("decoder produced a correction with nonempty syndrome")
    return TrialOutcome(
        success=not residual.all(),
        defect_count=int(defect_volume.sum()),
        matched_weight=weight,
    )


def logical_error_rate(
    dims: LatticeDims,
    rates: EffectiveRates,
    trials: int,
    seed: int,
    r_sign: int = 1,
) -> tuple:
    """Monte Carlo logical failure fraction with binomial standard error."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    if rates.p == 0.0 and rates.q == 0.0 and rates.r == 0.0:
        return 0.0, 0.0
    metric = weight_metric(rates, r_sign=r_sign)
    rng = np.random.default_rng(seed)
    trial_seeds = rng.integers(0, 2**63 - 1, size=trials)
    failures = 0
    for s in trial_seeds:
        outcome = run_trial(dims, rates, metric, int(s))
        failures += not outcome.success
    rate = failures / trials
    stderr = math.sqrt(max(rate * (1.0 - rate), 1.0 / trials) / trials)
    return rate, stderr


def failure_count(
    dims: LatticeDims, rates: EffectiveRates, trials: int, seed: int, r_sign: int = 1
) -> int:
    """Failure count for a block of trials (commutative reduction unit)."""
    if rates.p == 0.0 and rates.q == 0.0 and rates.r == 0.0:
        return 0
    metric = weight_metric(rates, r_sign=r_sign)
    rng = np.random.default_rng(seed)
    trial_seeds = rng.integers(0, 2**63 - 1, size=trials)
    failures = 0
    for s in trial_seeds:
        if not run_trial(dims, rates, metric, int(s)).success:
            failures += 1
    return failures
