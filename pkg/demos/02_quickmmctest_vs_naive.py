"""
QuickMMCTest against equal allocation
=====================================

Both methods get the same total number of Monte Carlo samples.  Equal
allocation spends them evenly; QuickMMCTest moves them towards the
hypotheses whose decision is still uncertain.  The p-values are known
here, so each Monte Carlo draw is a Bernoulli(p) exceedance.
"""

import numpy as np

from quickmmctest import BernoulliOracle, EngineConfig, ThresholdRule, run_naive, run_quickmmctest
from quickmmctest.experiments import SimulationConfig, fixed_ground_truth, switched_metrics

study = SimulationConfig(procedure="bh")
truth = fixed_ground_truth(study)
rule = ThresholdRule("constant", 0.1)
m, effort = study.m, 1000
print(f"m = {m}, ground truth rejects {truth.truth_rejections.sum()}")

naive = run_naive(effort, BernoulliOracle(truth.p_star, np.random.default_rng(1)), "bh", rule)
quick = run_quickmmctest(EngineConfig(K=effort * m), BernoulliOracle(truth.p_star, np.random.default_rng(2)),
                         "bh", rule, seed=3)

for label, report in (("naive", naive), ("QuickMMCTest", quick)):
    switched, switched_rej = switched_metrics(report.decisions, truth)
    print(f"{label:>12}: {report.decisions.sum()} rejections, {switched} switched "
          f"({switched_rej} wrongly rejected)")

# where did the samples go?  Hypotheses near the decision boundary soak up most of them
order = np.argsort(truth.p_star)
print("samples on the 200 smallest p-values:", quick.k[order[:200]].sum())
print("samples on the 2000 largest p-values:", quick.k[order[-2000:]].sum())
