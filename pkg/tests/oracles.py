"""Independent reference implementations used only by the tests."""

import math


def reference_thresholds(name, m, alpha):
    """Critical values written out rank by rank from the textbook formulas."""
    if name == "bonferroni":
        return [alpha / m for i in range(1, m + 1)]
    if name == "sidak":
        return [1.0 - (1.0 - alpha) ** (1.0 / (m - i + 1.0)) for i in range(1, m + 1)]
    if name in ("holm", "hochberg"):
        return [alpha / (m - i + 1.0) for i in range(1, m + 1)]
    if name in ("simes", "bh"):
        return [i * alpha / m for i in range(1, m + 1)]
    if name == "by":
        c = 0.0
        for j in range(1, m + 1):
            c += 1.0 / j
        return [i * alpha / (m * c) for i in range(1, m + 1)]
    raise KeyError(name)


DIRECTION = {
    "bonferroni": "single_step", "sidak": "step_down", "holm": "step_down",
    "simes": "step_up", "hochberg": "step_up", "bh": "step_up", "by": "step_up",
}


def brute_force_rejections(name, p, alpha):
    """Rejected indices, found by trying every cut rank k = 0..m explicitly."""
    m = len(p)
    tau = reference_thresholds(name, m, alpha)
    order = sorted(range(m), key=lambda i: p[i])
    ps = [p[i] for i in order]
    direction = DIRECTION[name]
    if direction == "single_step":
        return {i for i in range(m) if p[i] <= tau[0]}
    best = 0
    for k in range(1, m + 1):
        if direction == "step_up":
            ok = ps[k - 1] <= tau[k - 1]
        else:
            ok = all(ps[j] <= tau[j] for j in range(k))
        if ok:
            best = k
    return set(order[:best])


def regularized_beta_cdf(x, a, b, n=200_000):
    """I_x(a, b) by midpoint quadrature after substituting t = x * u**(1/a).

    The substitution removes the t**(a-1) singularity at zero, leaving a
    smooth integrand for the quadrature.
    """
    log_beta = math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)
    # t = x * v**(1/a), dt = x/a * v**(1/a - 1) dv  =>  t**(a-1) dt = x**a / a dv
    total = 0.0
    for j in range(n):
        v = (j + 0.5) / n
        t = x * v ** (1.0 / a)
        total += (1.0 - t) ** (b - 1.0)
    return math.exp(a * math.log(x) - math.log(a) - log_beta) * total / n
