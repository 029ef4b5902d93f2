"""
Simulation studies comparing QuickMMCTest with the naive method.

P-values follow a two-component mixture: with probability ``pi1`` the
null is false and the p-value is drawn from ``Beta(alt_beta_a,
alt_beta_b)``, otherwise it is uniform. Exceedances are simulated by a
Bernoulli oracle with success probability equal to the true p-value, and
decisions are scored against

* the procedure applied to the true p-values (switched classifications
  and switched rejections), and
* the falseness indicators (per-pair power and false non-discovery
  proportion).

In fixed-set mode one p-value vector, drawn from ``fixed_set_seed``, is
shared by every replication so only Monte Carlo noise varies. Otherwise
each replication draws its own p-values and indicators.
"""

from __future__ import annotations

import csv
import math
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Iterable, Iterator, List, Optional, Sequence

import numpy as np

from .baselines import run_naive
from .engine import DECISION_MODES, EngineConfig, make_streams, run_quickmmctest
from .errors import ConfigurationError, InputError
from .procedures import ThresholdRule, apply_procedure, effective_alpha, get_procedure
from .samplers import BernoulliOracle

__all__ = [
    "FIXED_SET_SEED",
    "METHODS",
    "METRICS_HEADER",
    "SimulationConfig",
    "GroundTruth",
    "MetricsRecord",
    "generate_pvalues",
    "fixed_ground_truth",
    "switched_metrics",
    "power_metrics",
    "replication_seed",
    "run_replication",
    "run_study",
    "summarize",
    "write_metrics_csv",
]

# Pinned seed of the shared p-value set. Its Bonferroni(0.1) ground truth
# has 87 rejections, like the set used for the published tables.
FIXED_SET_SEED = 3

METHODS = ("quickmmctest", "naive")

METRICS_HEADER = (
    "replication", "seed", "method", "procedure", "threshold_rule", "alpha", "effort",
    "rejections", "switched", "switched_rejections", "power", "fnp", "spend",
)


@dataclass(frozen=True)
class SimulationConfig:
    """Everything needed to replay a study; ``efforts`` are samples per hypothesis.

    QuickMMCTest at effort ``s`` gets the matched total budget ``K = s * m``.
    """

    m: int = 5000
    pi1: float = 0.1
    alt_beta_a: float = 0.25
    alt_beta_b: float = 25.0
    replications: int = 100
    seed: int = 1
    efforts: tuple = (1000,)
    methods: tuple = METHODS
    procedure: str = "bh"
    threshold_rule: str = "constant"
    alpha: float = 0.1
    n_max: int = 10
    R: int = 1000
    cutoff: float = 0.5
    decision_mode: str = "empirical_rejection_prob"
    fixed_set: bool = True
    fixed_set_seed: int = FIXED_SET_SEED
    exact_single_step: bool = True

    def __post_init__(self):
        object.__setattr__(self, "efforts", tuple(int(e) for e in self.efforts))
        object.__setattr__(self, "methods", tuple(self.methods))
        if self.m < 1:
            raise ConfigurationError(f"m must be positive, got {self.m}")
        if not 0.0 <= self.pi1 <= 1.0:
            raise ConfigurationError(f"pi1 must lie in [0, 1], got {self.pi1}")
        if self.alt_beta_a <= 0 or self.alt_beta_b <= 0:
            raise ConfigurationError("alt_beta_a and alt_beta_b must be positive")
        if self.replications < 1:
            raise ConfigurationError(f"replications must be positive, got {self.replications}")
        if not self.efforts:
            raise ConfigurationError("efforts must list at least one samples-per-hypothesis value")
        if any(e < 1 for e in self.efforts):
            raise ConfigurationError(f"efforts must be positive, got {self.efforts}")
        bad = [x for x in self.methods if x not in METHODS]
        if bad or not self.methods:
            raise ConfigurationError(f"methods must be drawn from {METHODS}, got {self.methods}")
        if self.decision_mode not in DECISION_MODES:
            raise ConfigurationError(f"decision_mode must be one of {DECISION_MODES}")
        get_procedure(self.procedure)
        self.rule
        for s in self.efforts:
            self.engine_config(s)

    @property
    def rule(self) -> ThresholdRule:
        return ThresholdRule(self.threshold_rule, self.alpha)

    def engine_config(self, effort: int) -> EngineConfig:
        return EngineConfig(
            K=effort * self.m, n_max=self.n_max, R=self.R, cutoff=self.cutoff,
            decision_mode=self.decision_mode, exact_single_step=self.exact_single_step,
        )


@dataclass
class GroundTruth:
    p_star: np.ndarray
    false_null: np.ndarray
    truth_rejections: np.ndarray

    @property
    def m(self) -> int:
        return self.p_star.size


@dataclass
class MetricsRecord:
    replication: int
    seed: int
    method: str
    procedure: str
    threshold_rule: str
    alpha: float
    effort: int
    rejections: int
    switched: int
    switched_rejections: int
    power: float
    fnp: float
    spend: int
    power_defined: bool = True


def generate_pvalues(config: SimulationConfig, rng: np.random.Generator) -> GroundTruth:
    """Mixture p-values, falseness indicators and the ground-truth decisions."""
    m = config.m
    false_null = rng.random(m) < config.pi1
    alt = rng.beta(config.alt_beta_a, config.alt_beta_b, size=m)
    null = rng.random(m)
    p_star = np.where(false_null, alt, null)
    rule = config.rule
    truth = apply_procedure(config.procedure, p_star, effective_alpha(rule, p_star))
    return GroundTruth(p_star, false_null, truth)


def fixed_ground_truth(config: SimulationConfig) -> GroundTruth:
    """The shared p-value set of fixed-set mode."""
    return generate_pvalues(config, np.random.default_rng(config.fixed_set_seed))


def _as_mask(decisions, m: int) -> np.ndarray:
    d = np.asarray(decisions)
    if d.dtype == bool:
        if d.shape != (m,):
            raise InputError(f"decision mask has shape {d.shape}, expected ({m},)")
        return d
    mask = np.zeros(m, dtype=bool)
    if d.size and (d.min() < 0 or d.max() >= m):
        raise InputError("rejected index out of range")
    mask[d.astype(int)] = True
    return mask


def switched_metrics(decisions, truth: GroundTruth):
    """``(switched classifications, switched rejections)``.

    ``decisions`` is a boolean mask or an array of 0-based rejected indices.
    Switched rejections are rejections the ground truth does not make.
    """
    d = _as_mask(decisions, truth.m)
    t = truth.truth_rejections
    return int(np.count_nonzero(d != t)), int(np.count_nonzero(d & ~t))


def power_metrics(decisions, truth: GroundTruth):
    """``(per-pair power, fnp, power_defined)``.

    Power is the fraction of false nulls rejected, reported as 0 with
    ``power_defined=False`` when there are no false nulls. The fnp is the
    fraction of false nulls among non-rejected hypotheses, 0 when every
    hypothesis is rejected.
    """
    d = _as_mask(decisions, truth.m)
    f = truth.false_null
    n_false = int(f.sum())
    power = float(np.count_nonzero(d & f) / n_false) if n_false else 0.0
    n_accepted = int(np.count_nonzero(~d))
    fnp = float(np.count_nonzero(f & ~d) / n_accepted) if n_accepted else 0.0
    return power, fnp, n_false > 0


def replication_seed(root_seed: int, replication: int) -> int:
    ss = np.random.SeedSequence([root_seed, replication])
    return int(ss.generate_state(1, np.uint32)[0])


def _run_seed(rep_seed: int, method: str, effort: int) -> int:
    ss = np.random.SeedSequence([rep_seed, zlib.crc32(method.encode()), effort])
    return int(ss.generate_state(1, np.uint32)[0])


def run_replication(config: SimulationConfig, replication: int,
                    truth: Optional[GroundTruth] = None) -> List[MetricsRecord]:
    """All (method, effort) runs of one replication, in config order."""
    rep_seed = replication_seed(config.seed, replication)
    if truth is None:
        truth = generate_pvalues(config, np.random.default_rng([rep_seed, 0]))
    rule = config.rule
    records = []
    for method in config.methods:
        for effort in config.efforts:
            streams = make_streams(_run_seed(rep_seed, method, effort))
            source = BernoulliOracle(truth.p_star, streams["source"])
            if method == "naive":
                report = run_naive(effort, source, config.procedure, rule)
            else:
                report = run_quickmmctest(config.engine_config(effort), source,
                                          config.procedure, rule, rep_seed, streams=streams)
            switched, switched_rej = switched_metrics(report.decisions, truth)
            power, fnp, defined = power_metrics(report.decisions, truth)
            records.append(MetricsRecord(
                replication=replication, seed=rep_seed, method=method,
                procedure=get_procedure(config.procedure).name, threshold_rule=rule.label,
                alpha=config.alpha, effort=effort,
                rejections=int(report.decisions.sum()), switched=switched,
                switched_rejections=switched_rej, power=power, fnp=fnp,
                spend=report.spend, power_defined=defined,
            ))
    return records


def _replication_job(args):
    return run_replication(*args)


def run_study(config: SimulationConfig, threads: int = 1) -> Iterator[MetricsRecord]:
    """Yield metrics records ordered by replication, then method, then effort.

    Replications run in ``threads`` worker processes when ``threads > 1``;
    the output does not depend on the worker count.
    """
    truth = fixed_ground_truth(config) if config.fixed_set else None
    jobs = [(config, rep, truth) for rep in range(config.replications)]
    if threads <= 1 or len(jobs) == 1:
        for job in jobs:
            yield from _replication_job(job)
        return
    with ProcessPoolExecutor(max_workers=threads) as pool:
        for records in pool.map(_replication_job, jobs):
            yield from records


def _mean_se(values: Sequence[float]):
    x = np.asarray(values, dtype=float)
    if x.size < 2:
        return float(x.mean()), 0.0
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))


def summarize(records: Iterable[MetricsRecord]) -> List[dict]:
    """Mean and standard error of every metric per (method, effort)."""
    groups = {}
    for rec in records:
        groups.setdefault((rec.method, rec.effort), []).append(rec)
    rows = []
    for (method, effort), recs in groups.items():
        row = {"method": method, "effort": effort, "procedure": recs[0].procedure, "n": len(recs)}
        for name in ("switched", "switched_rejections", "rejections", "power", "fnp", "spend"):
            row[name], row[name + "_se"] = _mean_se([getattr(r, name) for r in recs])
        rows.append(row)
    return rows


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.6g}"
    return str(value)


def write_metrics_csv(records: Iterable[MetricsRecord], fh, comments: Sequence[str] = ()) -> None:
    """Write the metrics CSV (``#`` comment lines first, then header and rows)."""
    for line in comments:
        fh.write(f"# {line}\n")
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(METRICS_HEADER)
    for rec in records:
        row = asdict(rec)
        writer.writerow([_fmt(row[name]) for name in METRICS_HEADER])
