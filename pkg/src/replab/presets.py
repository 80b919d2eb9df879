"""Disorder-case presets: the four (p, q, r) families of the phase diagram."""

from __future__ import annotations

from .noise_model import EffectiveRates, fundamental_probs, nishimori_couplings

# r as a multiple of p, with q = p throughout
CASE_R_RATIO = {
    "I": 0.5,
    "II": 1.0,
    "III": 2.0,
    "IV": 0.0,
}

CASES = tuple(CASE_R_RATIO)


def case_rates(case: str, p: float) -> EffectiveRates:
    """Effective rates (p, q, r) for a case preset at disorder strength p."""
    if case not in CASE_R_RATIO:
        raise ValueError(f"unknown case {case!r}; expected one of {CASES}")
    return EffectiveRates(p=p, q=p, r=CASE_R_RATIO[case] * p)


def case_couplings(case: str, p: float, normalization: str = "J1") -> tuple:
    """Normalized (J1, J2, J3) for a case; p = 0 uses the clean-lattice limit.

    As p -> 0 the coupling ratios of cases I-III all tend to the isotropic
    triangular lattice, while case IV stays on the square lattice (J3 = 0).
    """
    if p == 0.0:
        return (1.0, 1.0, 0.0) if case == "IV" else (1.0, 1.0, 1.0)
    rates = case_rates(case, p)
    coup = nishimori_couplings(fundamental_probs(rates), normalization=normalization)
    return (coup.J1, coup.J2, coup.J3)
