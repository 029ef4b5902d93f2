"""
Multiple testing procedures as a generic step-up / step-down engine.

Every procedure is described by a direction (single step, step down or
step up) and a rule producing per-rank critical values
``tau_1 <= ... <= tau_m`` from ``(m, alpha)``:

==========  ===========  =====================================
name        direction    tau_i
==========  ===========  =====================================
bonferroni  single_step  alpha / m
sidak       step_down    1 - (1 - alpha) ** (1 / (m - i + 1))
holm        step_down    alpha / (m - i + 1)
simes       step_up      i * alpha / m
hochberg    step_up      alpha / (m - i + 1)
bh          step_up      i * alpha / m
by          step_up      i * alpha / (m * sum_{j<=m} 1/j)
==========  ===========  =====================================

Rejection sets are returned as boolean masks over the input order.
Hypotheses with tied p-values are always decided as a block.

The threshold rule decides which ``alpha`` is handed to the procedure:
either a constant nominal level, or the Pounds-Cheng correction
``alpha* / pi0_hat(p)`` with ``pi0_hat(p) = min(1, 2 * mean(p))``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .errors import ConfigurationError, InputError

__all__ = [
    "PROCEDURE_NAMES",
    "ProcedureSpec",
    "ThresholdRule",
    "get_procedure",
    "threshold_sequence",
    "apply_procedure",
    "apply_procedure_batch",
    "estimate_pi0",
    "effective_alpha",
    "effective_alpha_batch",
]

ArrayLike = Union[np.ndarray, list, tuple]


def _ranks(m: int) -> np.ndarray:
    return np.arange(1, m + 1, dtype=float)


def _bonferroni(m, alpha):
    return np.ones(m) * (alpha / m)


def _sidak(m, alpha):
    return 1.0 - (1.0 - alpha) ** (1.0 / (m - _ranks(m) + 1.0))


def _holm(m, alpha):
    return alpha / (m - _ranks(m) + 1.0)


def _linear(m, alpha):
    return _ranks(m) * alpha / m


def _by(m, alpha):
    # cumsum is a plain left-to-right sum
    harmonic = np.cumsum(1.0 / _ranks(m))[-1]
    return _ranks(m) * alpha / (m * harmonic)


@dataclass(frozen=True)
class ProcedureSpec:
    """A multiple testing procedure ``h(p, alpha)``.

    ``critical_values(m, alpha)`` must broadcast over a column of alphas
    of shape ``(n, 1)``, returning shape ``(n, m)``.
    """

    name: str
    direction: str
    critical_values: Callable[[int, np.ndarray], np.ndarray]

    def __post_init__(self):
        if self.direction not in ("single_step", "step_down", "step_up"):
            raise ConfigurationError(f"unknown direction {self.direction!r}")


_PROCEDURES = {
    "bonferroni": ProcedureSpec("bonferroni", "single_step", _bonferroni),
    "sidak": ProcedureSpec("sidak", "step_down", _sidak),
    "holm": ProcedureSpec("holm", "step_down", _holm),
    "simes": ProcedureSpec("simes", "step_up", _linear),
    "hochberg": ProcedureSpec("hochberg", "step_up", _holm),
    "bh": ProcedureSpec("bh", "step_up", _linear),
    "by": ProcedureSpec("by", "step_up", _by),
}

PROCEDURE_NAMES = tuple(_PROCEDURES)


def get_procedure(proc: Union[str, ProcedureSpec]) -> ProcedureSpec:
    """Look up a procedure by its lowercase name (specs pass through)."""
    if isinstance(proc, ProcedureSpec):
        return proc
    try:
        return _PROCEDURES[str(proc).lower()]
    except KeyError:
        raise ConfigurationError(
            f"unknown procedure {proc!r}; expected one of {', '.join(PROCEDURE_NAMES)}"
        ) from None


def _check_alpha(alpha) -> None:
    a = np.asarray(alpha, dtype=float)
    if not np.all((a >= 0.0) & (a <= 1.0)):
        raise ConfigurationError(f"alpha must lie in [0, 1], got {alpha!r}")


def threshold_sequence(proc, m: int, alpha: float) -> np.ndarray:
    """Critical values ``(tau_1, ..., tau_m)`` of a procedure.

    Parameters
    ----------
    proc : str or ProcedureSpec
        Procedure name, e.g. ``"bh"``.
    m : int
        Number of hypotheses, at least 1.
    alpha : float
        Level in [0, 1].

    Returns
    -------
    ndarray of shape (m,)
        Non-decreasing critical values.
    """
    spec = get_procedure(proc)
    if int(m) != m or m < 1:
        raise ConfigurationError(f"m must be a positive integer, got {m!r}")
    _check_alpha(alpha)
    return np.asarray(spec.critical_values(int(m), float(alpha)), dtype=float)


def _check_pvalues(p: np.ndarray) -> None:
    if not np.all(np.isfinite(p)):
        raise InputError("p-values must be finite (got NaN or inf)")
    if np.any((p < 0.0) | (p > 1.0)):
        raise InputError("p-values must lie in [0, 1]")


def apply_procedure_batch(proc, P: np.ndarray, alpha) -> np.ndarray:
    """Evaluate a procedure on each row of ``P``.

    ``alpha`` is a scalar or one level per row. Returns a boolean array
    with the shape of ``P``; no input validation is done here since this
    sits in the engine's inner loop.
    """
    spec = get_procedure(proc)
    P = np.atleast_2d(P)
    n, m = P.shape
    alpha = np.asarray(alpha, dtype=float)
    if alpha.ndim == 0:
        tau = np.broadcast_to(spec.critical_values(m, float(alpha)), (n, m))
    else:
        tau = spec.critical_values(m, alpha.reshape(n, 1)).reshape(n, m)

    if spec.direction == "single_step":
        return P <= tau[:, :1]

    ordered = np.sort(P, axis=1)
    passes = ordered <= tau
    if spec.direction == "step_up":
        # k = largest passing rank (0 when none pass)
        k = m - np.argmax(passes[:, ::-1], axis=1)
        k[~passes.any(axis=1)] = 0
    else:
        # k = length of the leading run of passing ranks
        k = np.where(passes.all(axis=1), m, np.argmin(passes, axis=1))
    cut = ordered[np.arange(n), np.maximum(k - 1, 0)]
    return (P <= cut[:, None]) & (k > 0)[:, None]


def apply_procedure(proc, p: ArrayLike, alpha: float) -> np.ndarray:
    """Apply a procedure to one p-value vector.

    Parameters
    ----------
    proc : str or ProcedureSpec
    p : array_like of shape (m,)
        P-values in [0, 1].
    alpha : float
        Level in [0, 1].

    Returns
    -------
    ndarray of bool, shape (m,)
        ``True`` where the hypothesis is rejected.
    """
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise InputError("p must be a non-empty 1-d vector")
    _check_pvalues(p)
    _check_alpha(alpha)
    return apply_procedure_batch(proc, p[None, :], float(alpha))[0]


@dataclass(frozen=True)
class ThresholdRule:
    """Constant level, or the Pounds-Cheng ``alpha* / pi0_hat(p)``."""

    kind: str = "constant"
    alpha_star: float = 0.1

    def __post_init__(self):
        kind = self.kind.replace("-", "_")
        if kind not in ("constant", "pounds_cheng"):
            raise ConfigurationError(
                f"unknown threshold rule {self.kind!r}; expected constant or pounds-cheng"
            )
        object.__setattr__(self, "kind", kind)
        _check_alpha(self.alpha_star)

    @property
    def label(self) -> str:
        return self.kind.replace("_", "-")


def estimate_pi0(p: ArrayLike) -> float:
    """Robust estimate ``min(1, 2 * mean(p))`` of the proportion of true nulls."""
    p = np.asarray(p, dtype=float)
    if p.size == 0:
        raise InputError("cannot estimate pi0 from an empty vector")
    _check_pvalues(p)
    return float(min(1.0, 2.0 * p.mean()))


def effective_alpha(rule: ThresholdRule, p: ArrayLike = None) -> float:
    """Level handed to the procedure for p-value vector ``p``.

    The Pounds-Cheng level is capped at 1 so that it stays a valid level
    when ``pi0_hat`` is very small.
    """
    if rule.kind == "constant":
        return float(rule.alpha_star)
    pi0 = estimate_pi0(p)
    if pi0 <= rule.alpha_star:
        return 1.0
    return rule.alpha_star / pi0


def effective_alpha_batch(rule: ThresholdRule, P: np.ndarray):
    """Row-wise :func:`effective_alpha`; a scalar for the constant rule."""
    if rule.kind == "constant":
        return float(rule.alpha_star)
    pi0 = np.minimum(1.0, 2.0 * P.mean(axis=1))
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(pi0 <= rule.alpha_star, 1.0, rule.alpha_star / pi0)
