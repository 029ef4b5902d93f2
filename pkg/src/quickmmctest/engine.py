"""
QuickMMCTest: sequential allocation of Monte Carlo samples across tests.

Each of ``n_max`` iterations spends ``delta = K // n_max`` samples. The
first iteration spreads them uniformly. Later iterations resample all
p-values ``R`` times from their Beta posteriors, run the procedure on
every resampled vector and count how often each hypothesis is rejected
(``r_i``). The weight ``min(r_i/R, 1 - r_i/R)`` is large for hypotheses
whose decision is still unstable, and residual sampling turns the weights
into integer sample counts. After the loop, a fresh resampling pass
yields empirical rejection probabilities and the final decisions.

Random numbers come from named substreams of one root seed, see
:func:`make_streams`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import special

from .errors import ConfigurationError, InputError, SourceExhaustedError
from .model import point_estimate, posterior_draws, posterior_params
from .procedures import (
    ThresholdRule,
    apply_procedure,
    apply_procedure_batch,
    effective_alpha,
    effective_alpha_batch,
    get_procedure,
    threshold_sequence,
)

__all__ = [
    "DECISION_MODES",
    "STREAM_NAMES",
    "EngineConfig",
    "DecisionReport",
    "make_streams",
    "rejection_counts",
    "compute_weights",
    "residual_allocate",
    "final_decisions",
    "final_decisions_point",
    "run_quickmmctest",
]

DECISION_MODES = ("empirical_rejection_prob", "point_estimate")
STREAM_NAMES = ("weights", "allocation", "final", "source")

# cap on resampled values held in memory at once
_CHUNK_VALUES = 2_000_000


def make_streams(seed: int) -> dict:
    """Independent generators for each named use of randomness.

    The same ``seed`` always maps to the same four streams, so e.g. the
    source's Bernoulli draws never shift the posterior resampling.
    """
    children = np.random.SeedSequence(seed).spawn(len(STREAM_NAMES))
    return {name: np.random.default_rng(ss) for name, ss in zip(STREAM_NAMES, children)}


@dataclass(frozen=True)
class EngineConfig:
    """Parameters of one QuickMMCTest run.

    ``exact_single_step`` lets single-step procedures under a constant
    level skip the explicit resampling loop: there each ``r_i`` is exactly
    ``Binomial(R, P(p_i <= tau))`` under the Beta posterior, so it is drawn
    directly. Set it to False to force the literal loop.
    """

    K: int
    n_max: int = 10
    R: int = 1000
    cutoff: float = 0.5
    decision_mode: str = "empirical_rejection_prob"
    exact_single_step: bool = True

    def __post_init__(self):
        for name in ("K", "n_max", "R"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ConfigurationError(f"{name} must be a positive integer, got {value!r}")
        if self.K // self.n_max < 1:
            raise ConfigurationError(
                f"budget K={self.K} is smaller than n_max={self.n_max}: no samples per iteration"
            )
        if not 0.0 < self.cutoff < 1.0:
            raise ConfigurationError(f"cutoff must lie in (0, 1), got {self.cutoff!r}")
        if self.decision_mode not in DECISION_MODES:
            raise ConfigurationError(
                f"decision_mode must be one of {DECISION_MODES}, got {self.decision_mode!r}"
            )

    @property
    def delta(self) -> int:
        return self.K // self.n_max


@dataclass
class DecisionReport:
    """Final tallies and decisions of a run.

    ``rejection_counts`` is None when decisions came from point estimates.
    """

    k: np.ndarray
    S: np.ndarray
    decisions: np.ndarray
    decision_mode: str
    rejection_counts: Optional[np.ndarray] = None
    R: Optional[int] = None
    cutoff: Optional[float] = None
    meta: dict = field(default_factory=dict)

    @property
    def m(self) -> int:
        return self.k.size

    @property
    def spend(self) -> int:
        return int(self.k.sum())

    @property
    def point_estimates(self) -> np.ndarray:
        return point_estimate(self.k, self.S)

    @property
    def empirical_rejection_probability(self) -> np.ndarray:
        if self.rejection_counts is None:
            return np.full(self.m, np.nan)
        return self.rejection_counts / self.R

    @property
    def rejected(self) -> np.ndarray:
        """0-based indices of rejected hypotheses."""
        return np.flatnonzero(self.decisions)


def rejection_counts(k, S, proc, rule: ThresholdRule, R: int, rng: np.random.Generator,
                     exact_single_step: bool = True) -> np.ndarray:
    """How often each hypothesis is rejected over ``R`` posterior resamples.

    Each repetition draws the whole p-value vector from the current
    posteriors and evaluates ``h(p, alpha(p))``, recomputing the level
    from the resampled vector under a variable threshold rule.
    """
    spec = get_procedure(proc)
    k = np.asarray(k)
    S = np.asarray(S)
    m = k.size
    if exact_single_step and spec.direction == "single_step" and rule.kind == "constant":
        tau = threshold_sequence(spec, m, rule.alpha_star)[0]
        a, b = posterior_params(k, S)
        return rng.binomial(R, special.betainc(a, b, tau)).astype(np.int64)

    counts = np.zeros(m, dtype=np.int64)
    chunk = max(1, _CHUNK_VALUES // m)
    done = 0
    while done < R:
        rows = min(chunk, R - done)
        P = posterior_draws(k, S, rng, size=(rows, m))
        counts += apply_procedure_batch(spec, P, effective_alpha_batch(rule, P)).sum(axis=0)
        done += rows
    return counts


def compute_weights(k, S, proc, rule: ThresholdRule, R: int, rng: np.random.Generator,
                    exact_single_step: bool = True):
    """Stability weights ``min(r/R, 1 - r/R)`` and the counts ``r``.

    Falls back to uniform weights ``1/m`` when every weight is zero.
    """
    if R < 1:
        raise ConfigurationError(f"R must be positive, got {R!r}")
    r = rejection_counts(k, S, proc, rule, R, rng, exact_single_step)
    freq = r / R
    w = np.minimum(freq, 1.0 - freq)
    if w.sum() == 0:
        w = np.full(r.size, 1.0 / r.size)
    return w, r


def residual_allocate(weights, delta: int, rng: np.random.Generator) -> np.ndarray:
    """Split ``delta`` samples in proportion to ``weights`` by residual sampling.

    Everyone first gets ``floor(w_i * delta)`` of the normalised weight;
    the leftover samples go out one at a time (with replacement) with
    probabilities proportional to the fractional parts.
    """
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size == 0 or np.any(w < 0) or not np.all(np.isfinite(w)):
        raise InputError("weights must be a non-empty vector of non-negative numbers")
    total = w.sum()
    if total <= 0:
        raise InputError("all weights are zero; apply the uniform fallback first")
    if int(delta) != delta or delta < 1:
        raise ConfigurationError(f"delta must be a positive integer, got {delta!r}")
    delta = int(delta)

    share = w / total * delta
    # snap values within rounding error of an integer so 0.3 * 10 gives 3
    nearest = np.round(share)
    share = np.where(np.abs(share - nearest) < 1e-9 * max(1, delta), nearest, share)
    n = np.floor(share).astype(np.int64)
    left = delta - int(n.sum())
    if left > 0:
        frac = share - n
        if frac.sum() <= 0:
            frac = w
        n += rng.multinomial(left, frac / frac.sum())
    if n.sum() != delta:
        raise RuntimeError("residual sampling lost samples")
    return n


def final_decisions(k, S, proc, rule: ThresholdRule, R: int, cutoff: float,
                    rng: np.random.Generator, exact_single_step: bool = True):
    """Reject hypothesis ``i`` iff ``r_i / R > cutoff``; returns ``(decisions, r)``."""
    r = rejection_counts(k, S, proc, rule, R, rng, exact_single_step)
    return r / R > cutoff, r


def final_decisions_point(k, S, proc, rule: ThresholdRule) -> np.ndarray:
    """Decisions ``h(p_hat, alpha(p_hat))`` from pseudo-count estimates."""
    p_hat = point_estimate(k, S)
    return apply_procedure(proc, p_hat, effective_alpha(rule, p_hat))


def run_quickmmctest(config: EngineConfig, source, proc, rule: ThresholdRule, seed: int,
                     streams: dict = None) -> DecisionReport:
    """Run QuickMMCTest against an exceedance source.

    Parameters
    ----------
    config : EngineConfig
    source : ExceedanceSource
        Anything with ``m`` and ``draw(counts) -> exceedances``.
    proc : str or ProcedureSpec
    rule : ThresholdRule
    seed : int
        Root seed; the ``weights``, ``allocation`` and ``final`` substreams
        are derived from it (the source carries its own generator).
    streams : dict, optional
        Pre-built substreams from :func:`make_streams`, overriding ``seed``.

    Returns
    -------
    DecisionReport
        ``k.sum() == n_max * (K // n_max)``; any remainder of ``K`` is left
        unspent.

    Raises
    ------
    SourceExhaustedError
        With ``k`` and ``S`` set to the tallies reached before the failure.
    """
    spec = get_procedure(proc)
    if streams is None:
        streams = make_streams(seed)
    m = source.m
    k = np.zeros(m, dtype=np.int64)
    S = np.zeros(m, dtype=np.int64)
    uniform = np.full(m, 1.0 / m)

    for it in range(config.n_max):
        if it == 0:
            w = uniform
        else:
            w, _ = compute_weights(k, S, spec, rule, config.R, streams["weights"],
                                   config.exact_single_step)
        n = residual_allocate(w, config.delta, streams["allocation"])
        try:
            e = np.asarray(source.draw(n), dtype=np.int64)
        except SourceExhaustedError as exc:
            exc.k, exc.S = k.copy(), S.copy()
            raise
        if np.any(e < 0) or np.any(e > n):
            raise InputError("source returned an impossible exceedance count")
        k += n
        S += e

    if config.decision_mode == "point_estimate":
        decisions = final_decisions_point(k, S, spec, rule)
        return DecisionReport(k, S, decisions, "point_estimate")
    decisions, r = final_decisions(k, S, spec, rule, config.R, config.cutoff,
                                   streams["final"], config.exact_single_step)
    return DecisionReport(k, S, decisions, "empirical_rejection_prob", r, config.R, config.cutoff)
