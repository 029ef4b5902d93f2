"""
Multiple testing procedures on a fixed p-value vector
======================================================

Every procedure is a step-up, step-down or single-step rule over a
sequence of critical values.  Here they are side by side.
"""

import numpy as np

from quickmmctest import (PROCEDURE_NAMES, ThresholdRule, apply_procedure, effective_alpha,
                          estimate_pi0, threshold_sequence)

p = np.array([0.001, 0.008, 0.039, 0.041, 0.042, 0.06, 0.074, 0.205, 0.212, 0.216])
alpha = 0.05

# critical values for m = 10
for name in PROCEDURE_NAMES:
    print(f"{name:>10}", np.round(threshold_sequence(name, len(p), alpha), 4))

# which hypotheses each rule rejects (0-based positions)
for name in PROCEDURE_NAMES:
    print(f"{name:>10} rejects", np.flatnonzero(apply_procedure(name, p, alpha)))

# Pounds-Cheng raises the level when the p-values suggest few true nulls
rule = ThresholdRule("pounds-cheng", alpha)
print("pi0 estimate", estimate_pi0(p), "effective level", effective_alpha(rule, p))
