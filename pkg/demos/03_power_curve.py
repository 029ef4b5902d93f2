"""
Power as a function of Monte Carlo effort
=========================================

Under Bonferroni the pseudo-count estimate (S + 1) / (s + 1) can never go
below 1 / (s + 1), so equal allocation with s samples per hypothesis
cannot reject anything until 1 / (s + 1) <= alpha / m.  QuickMMCTest
concentrates samples and gets there much earlier.
"""

from quickmmctest.experiments import SimulationConfig, run_study, summarize

config = SimulationConfig(procedure="bonferroni", m=2000, replications=5, fixed_set=False,
                          efforts=(10, 100, 1000), R=500)
rows = summarize(run_study(config))
print(f"{'effort':>7} {'method':>13} {'power':>7} {'1-fnp':>7}")
for row in sorted(rows, key=lambda r: (r["effort"], r["method"])):
    print(f"{row['effort']:>7} {row['method']:>13} {row['power']:>7.3f} {1 - row['fnp']:>7.3f}")
