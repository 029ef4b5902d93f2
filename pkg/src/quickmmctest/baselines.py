"""The naive fixed-budget method: ``s`` samples each, then plug in estimates."""

from __future__ import annotations

import numpy as np

from .engine import DecisionReport, final_decisions_point
from .errors import ConfigurationError, SourceExhaustedError
from .procedures import ThresholdRule

__all__ = ["run_naive"]


def run_naive(s: int, source, proc, rule: ThresholdRule) -> DecisionReport:
    """Draw ``s`` samples per hypothesis and apply the procedure to
    ``p_hat = (e + 1) / (s + 1)``.

    With Bonferroni this can never reject once ``1 / (s + 1) > alpha / m``.
    """
    if int(s) != s or s < 1:
        raise ConfigurationError(f"samples per hypothesis must be a positive integer, got {s!r}")
    m = source.m
    k = np.full(m, int(s), dtype=np.int64)
    try:
        S = np.asarray(source.draw(k), dtype=np.int64)
    except SourceExhaustedError as exc:
        exc.k, exc.S = np.zeros(m, dtype=np.int64), np.zeros(m, dtype=np.int64)
        raise
    decisions = final_decisions_point(k, S, proc, rule)
    return DecisionReport(k, S, decisions, "point_estimate")
