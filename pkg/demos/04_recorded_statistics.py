"""
Testing from recorded Monte Carlo statistics
============================================

In practice each hypothesis has an observed test statistic and a stream
of statistics simulated under its null.  A draw is an exceedance when
the simulated value is at least the observed one.  Here twelve
two-sample comparisons use permutation statistics computed up front.
"""

import numpy as np

from quickmmctest import EngineConfig, RecordedStatisticsSource, ThresholdRule, run_quickmmctest

rng = np.random.default_rng(0)
m, n_perm = 12, 10_000
shift = np.where(np.arange(m) < 4, 1.0, 0.0)  # the first four groups differ

observed, streams = [], []
for i in range(m):
    x, y = rng.normal(shift[i], 1, 25), rng.normal(0, 1, 25)
    pooled = np.concatenate([x, y])
    observed.append(x.mean() - y.mean())
    perms = np.array([rng.permutation(pooled) for _ in range(n_perm)])
    streams.append(perms[:, :25].mean(axis=1) - perms[:, 25:].mean(axis=1))

# allocation is adaptive, so a single hypothesis may receive most of the budget;
# keeping K at most the stream length guarantees no stream runs dry
source = RecordedStatisticsSource(observed, streams)
report = run_quickmmctest(EngineConfig(K=n_perm), source, "bh", ThresholdRule("constant", 0.05),
                          seed=1)
for i in range(m):
    print(f"H{i + 1:<3} samples {report.k[i]:>5}  p_hat {report.point_estimates[i]:.4f}  "
          f"P(reject) {report.empirical_rejection_probability[i]:.3f}  "
          f"{'reject' if report.decisions[i] else '-'}")
