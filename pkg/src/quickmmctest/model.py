"""
Per-hypothesis Monte Carlo tallies and their Beta posteriors.

A hypothesis that has seen ``S`` exceedances among ``k`` null samples
carries a ``Beta(1 + S, 1 + k - S)`` posterior on its p-value (uniform
prior). The functions here work on scalars via :class:`HypothesisState`
and on whole tally vectors ``(k, S)`` for the engine's inner loops.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError

__all__ = [
    "HypothesisState",
    "posterior_params",
    "update_state",
    "sample_posterior",
    "posterior_draws",
    "point_estimate",
]

_TINY = np.nextafter(0.0, 1.0)
_BELOW_ONE = np.nextafter(1.0, 0.0)


@dataclass(frozen=True)
class HypothesisState:
    """Samples drawn ``k`` and exceedances ``S`` for one hypothesis."""

    k: int = 0
    S: int = 0

    def __post_init__(self):
        if self.k < 0 or self.S < 0 or self.S > self.k:
            raise InputError(f"need 0 <= S <= k, got k={self.k}, S={self.S}")

    @property
    def a(self) -> float:
        return 1.0 + self.S

    @property
    def b(self) -> float:
        return 1.0 + self.k - self.S


def posterior_params(k, S):
    """Beta posterior parameters ``(1 + S, 1 + k - S)``; works on arrays."""
    k = np.asarray(k, dtype=float)
    S = np.asarray(S, dtype=float)
    return 1.0 + S, 1.0 + k - S


def update_state(state: HypothesisState, new_exceedances: int, new_samples: int) -> HypothesisState:
    if new_samples < 0 or new_exceedances < 0 or new_exceedances > new_samples:
        raise InputError(
            f"a batch of {new_samples} sample(s) cannot hold {new_exceedances} exceedance(s)"
        )
    return HypothesisState(state.k + new_samples, state.S + new_exceedances)


def posterior_draws(k, S, rng: np.random.Generator, size=None) -> np.ndarray:
    """Independent draws from ``Beta(1 + S, 1 + k - S)``.

    Each Beta variate is ``X / (X + Y)`` with ``X ~ Gamma(a)`` and
    ``Y ~ Gamma(b)``. ``size`` defaults to the broadcast shape of
    ``(k, S)``; pass e.g. ``(R, m)`` for ``R`` independent replicate
    vectors. Draws that round to exactly 0 or 1 are moved to the nearest
    interior double.
    """
    a, b = posterior_params(k, S)
    x = rng.standard_gamma(a, size=size)
    y = rng.standard_gamma(b, size=size)
    return np.clip(x / (x + y), _TINY, _BELOW_ONE)


def sample_posterior(state: HypothesisState, rng: np.random.Generator) -> float:
    return float(posterior_draws(state.k, state.S, rng))


def point_estimate(state_or_k, S=None):
    """Pseudo-count estimate ``(S + 1) / (k + 1)``.

    Accepts a :class:`HypothesisState` or vectors ``k, S``. Never below
    ``1 / (k + 1)``.
    """
    if isinstance(state_or_k, HypothesisState):
        return (state_or_k.S + 1.0) / (state_or_k.k + 1.0)
    k = np.asarray(state_or_k, dtype=float)
    return (np.asarray(S, dtype=float) + 1.0) / (k + 1.0)
