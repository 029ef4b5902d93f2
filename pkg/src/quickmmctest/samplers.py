"""
Exceedance sources: where the engine gets its Monte Carlo samples.

A source knows ``m`` hypotheses and answers "draw ``n`` more null
samples for hypothesis ``i``; how many of them were at least as extreme
as the observed statistic?". Hypotheses are 0-based in the Python API;
the statistics file format and all error messages use 1-based ids.

Statistics file format (UTF-8, one record per line)::

    # comment
    hypothesis_id,kind,value
    1,obs,2.31
    1,mc,0.42
    1,mc,2.90
    2,obs,-0.7
    ...

``kind`` is ``obs`` (exactly one per hypothesis) or ``mc`` (Monte Carlo
statistics, consumed in file order). Ids are contiguous from 1. A
statistic counts as an exceedance when it is ``>=`` the observed one.
"""

from __future__ import annotations

import os
from typing import Dict, List, Union

import numpy as np

from .errors import InputError, SourceExhaustedError

__all__ = [
    "ExceedanceSource",
    "BernoulliOracle",
    "RecordedStatisticsSource",
    "StatisticsFormatError",
    "read_statistics_file",
]


class StatisticsFormatError(InputError):
    def __init__(self, message: str, line: int = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class ExceedanceSource:
    """Base class. Subclasses set ``m`` and implement :meth:`draw_batch`."""

    m: int

    def draw_batch(self, i: int, n: int) -> int:
        raise NotImplementedError

    def draw(self, counts) -> np.ndarray:
        """Draw ``counts[i]`` samples for every hypothesis; return exceedances."""
        counts = np.asarray(counts, dtype=np.int64)
        if counts.shape != (self.m,):
            raise InputError(f"expected {self.m} counts, got shape {counts.shape}")
        out = np.zeros(self.m, dtype=np.int64)
        for i in np.flatnonzero(counts):
            out[i] = self.draw_batch(int(i), int(counts[i]))
        return out

    def _check_index(self, i: int) -> None:
        if not 0 <= i < self.m:
            raise IndexError(f"hypothesis index {i} out of range for m={self.m}")


class BernoulliOracle(ExceedanceSource):
    """Simulated exceedances: each sample exceeds with probability ``true_p[i]``."""

    def __init__(self, true_p, rng: np.random.Generator):
        self.true_p = np.asarray(true_p, dtype=float)
        if self.true_p.ndim != 1 or np.any((self.true_p < 0) | (self.true_p > 1)):
            raise InputError("true_p must be a vector of probabilities")
        self.m = self.true_p.size
        self.rng = rng

    def draw_batch(self, i: int, n: int) -> int:
        self._check_index(i)
        if n < 0:
            raise InputError("batch size must be non-negative")
        return int(self.rng.binomial(n, self.true_p[i]))

    def draw(self, counts) -> np.ndarray:
        counts = np.asarray(counts, dtype=np.int64)
        if counts.shape != (self.m,):
            raise InputError(f"expected {self.m} counts, got shape {counts.shape}")
        return self.rng.binomial(counts, self.true_p).astype(np.int64)


class RecordedStatisticsSource(ExceedanceSource):
    """Serves precomputed permutation/bootstrap statistics in order.

    Parameters
    ----------
    observed : sequence of float
        Observed statistic per hypothesis.
    mc_statistics : sequence of sequences of float
        Monte Carlo statistics per hypothesis, consumed front to back.

    Statistics are never recycled; asking for more than remain raises
    :class:`SourceExhaustedError`.
    """

    def __init__(self, observed, mc_statistics):
        self.observed = np.asarray(observed, dtype=float)
        if len(mc_statistics) != self.observed.size:
            raise InputError("need one list of Monte Carlo statistics per hypothesis")
        self.mc_statistics = [np.asarray(s, dtype=float) for s in mc_statistics]
        self.m = self.observed.size
        self.cursor = np.zeros(self.m, dtype=np.int64)

    def remaining(self, i: int) -> int:
        return self.mc_statistics[i].size - int(self.cursor[i])

    def draw_batch(self, i: int, n: int) -> int:
        self._check_index(i)
        if n < 0:
            raise InputError("batch size must be non-negative")
        left = self.remaining(i)
        if n > left:
            raise SourceExhaustedError(i + 1, n - left)
        start = int(self.cursor[i])
        chunk = self.mc_statistics[i][start:start + n]
        self.cursor[i] = start + n
        return int(np.count_nonzero(chunk >= self.observed[i]))

    def draw(self, counts) -> np.ndarray:
        # check the whole request first so a failing batch consumes nothing
        counts = np.asarray(counts, dtype=np.int64)
        for i in np.flatnonzero(counts):
            left = self.remaining(int(i))
            if counts[i] > left:
                raise SourceExhaustedError(int(i) + 1, int(counts[i] - left))
        return super().draw(counts)

    @classmethod
    def from_file(cls, path: Union[str, os.PathLike]) -> "RecordedStatisticsSource":
        observed, mc = read_statistics_file(path)
        return cls(observed, mc)


def read_statistics_file(path):
    """Parse a statistics file into ``(observed, mc_statistics)`` lists.

    Raises :class:`StatisticsFormatError` carrying the offending line
    number, or naming the hypothesis for structural problems.
    """
    obs: Dict[int, float] = {}
    mc: Dict[int, List[float]] = {}
    seen_data = False
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = [f.strip() for f in line.split(",")]
            if len(fields) != 3:
                raise StatisticsFormatError(f"expected 3 comma-separated fields, got {len(fields)}", lineno)
            hid, kind, value = fields
            if not seen_data and hid == "hypothesis_id":
                continue
            seen_data = True
            try:
                hid = int(hid)
            except ValueError:
                raise StatisticsFormatError(f"hypothesis id {hid!r} is not an integer", lineno) from None
            if hid < 1:
                raise StatisticsFormatError(f"hypothesis id must be >= 1, got {hid}", lineno)
            try:
                value = float(value)
            except ValueError:
                raise StatisticsFormatError(f"value {value!r} is not a number", lineno) from None
            if not np.isfinite(value):
                raise StatisticsFormatError(f"value {value!r} is not finite", lineno)
            if kind == "obs":
                if hid in obs:
                    raise StatisticsFormatError(f"second obs line for hypothesis {hid}", lineno)
                obs[hid] = value
            elif kind == "mc":
                mc.setdefault(hid, []).append(value)
            else:
                raise StatisticsFormatError(f"kind must be 'obs' or 'mc', got {kind!r}", lineno)

    ids = set(obs) | set(mc)
    if not ids:
        raise StatisticsFormatError("file contains no hypotheses")
    m = max(ids)
    for hid in range(1, m + 1):
        if hid not in ids:
            raise StatisticsFormatError(f"hypothesis ids are not contiguous: {hid} is missing")
        if hid not in obs:
            raise StatisticsFormatError(f"hypothesis {hid} has no obs line")
    return [obs[h] for h in range(1, m + 1)], [mc.get(h, []) for h in range(1, m + 1)]
