"""Exception types shared across the package."""

from __future__ import annotations


class ConfigurationError(ValueError):
    """Invalid parameters (alpha outside [0, 1], zero budget per iteration, ...)."""


class InputError(ValueError):
    """Malformed data: NaN or out-of-range p-values, mismatched lengths, bad files."""


class SourceExhaustedError(RuntimeError):
    """A recorded source ran out of Monte Carlo statistics for a hypothesis.

    ``hypothesis`` is the 1-based id, ``shortfall`` the number of statistics
    missing. When raised out of an engine run, ``k`` and ``S`` hold the
    tallies accumulated before the failing batch.
    """

    def __init__(self, hypothesis: int, shortfall: int, k=None, S=None):
        self.hypothesis = hypothesis
        self.shortfall = shortfall
        self.k = k
        self.S = S
        super().__init__(
            f"source exhausted for hypothesis {hypothesis}: "
            f"{shortfall} more statistic(s) requested than available"
        )
