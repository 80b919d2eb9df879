"""replab: repetition-code noise mapping, exact matching decoder, and
triangular random-bond Ising model with correlated disorder."""

from .noise_model import (
    CircuitNoiseParams,
    EffectiveRates,
    FundamentalProbs,
    InfiniteCouplingError,
    NishimoriCouplings,
    effective_rates_from_circuit,
    fundamental_probs,
    nishimori_couplings,
)
from .lattice import DisorderSample, ErrorChain, LatticeDims
from .decoder import WeightMetric, decode, logical_error_rate, weight_metric
from .spin_glass import BondLattice, McSchedule, build_bond_lattice, run_disorder_sample
from .fss import CurveFamily, ThresholdEstimate, exact_triangular_tc, find_crossing
from .presets import CASES, case_couplings, case_rates

__version__ = "0.1.0"
