"""Exit criteria for the package, one test per criterion.

Criteria 4-6 run the desk-scale simulation studies (100 replications at
m = 5000) and take several minutes in total.
"""

import itertools
import math
import time

import numpy as np
import pytest
from scipy import stats

from quickmmctest.baselines import run_naive
from quickmmctest.cli import main
from quickmmctest.engine import residual_allocate
from quickmmctest.experiments import (
    SimulationConfig,
    fixed_ground_truth,
    generate_pvalues,
    run_study,
    summarize,
)
from quickmmctest.model import posterior_draws
from quickmmctest.procedures import PROCEDURE_NAMES, ThresholdRule, apply_procedure
from quickmmctest.samplers import BernoulliOracle
from oracles import brute_force_rejections, regularized_beta_cdf

M = 5000
ALPHA = 0.1


def by_method(rows):
    return {(r["method"], r["effort"]): r for r in rows}


def test_1_procedure_oracle_equivalence(acceptance):
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    cases = []
    for _ in range(10_000):
        m = int(rng.integers(1, 9))
        p = rng.random(m) ** rng.choice([1, 3, 6])
        if rng.random() < 0.3:
            p = np.round(p, 2)  # force ties
        cases.append((list(p), float(rng.choice([0.01, 0.05, 0.1, 0.2, rng.random()]))))
    grid = [0.0, 0.001, 0.01, 0.02, 0.025, 0.05, 0.1, 0.5, 1.0]
    for m in (1, 2, 3):
        for p in itertools.product(grid, repeat=m):
            for alpha in (0.05, 0.1):
                cases.append((list(p), alpha))

    mismatches = 0
    for p, alpha in cases:
        for name in PROCEDURE_NAMES:
            got = set(np.flatnonzero(apply_procedure(name, p, alpha)))
            mismatches += got != brute_force_rejections(name, p, alpha)
    elapsed = time.perf_counter() - start
    ok = mismatches == 0 and elapsed < 10
    acceptance(1, "procedure oracle equivalence", ok,
               f"{len(cases)} vectors x 7 procedures, {mismatches} mismatches, {elapsed:.1f}s")
    assert mismatches == 0
    assert elapsed < 10


def test_2_naive_bonferroni_rejects_nothing(acceptance):
    assert 1 / 1001 > ALPHA / M
    truth = fixed_ground_truth(SimulationConfig(procedure="bonferroni"))
    rule = ThresholdRule("constant", ALPHA)
    rejections = []
    for seed in range(25):
        source = BernoulliOracle(truth.p_star, np.random.default_rng(seed))
        rejections.append(int(run_naive(1000, source, "bonferroni", rule).decisions.sum()))
    # every p_hat >= 1/1001 > 2e-5, also when every sample misses
    worst = run_naive(1000, BernoulliOracle(np.zeros(M), np.random.default_rng(0)), "bonferroni", rule)
    ok = max(rejections) == 0 and not worst.decisions.any()
    acceptance(2, "naive Bonferroni rejects 0 (m=5000, s=1000)", ok, f"max rejections {max(rejections)}")
    assert ok


def test_3_ground_truth_rejection_scale(acceptance):
    start = time.perf_counter()
    expected = 500 * regularized_beta_cdf(ALPHA / M, 0.25, 25) + 4500 * ALPHA / M
    config = SimulationConfig(procedure="bonferroni")
    counts = [
        int(generate_pvalues(config, np.random.default_rng([77, i])).truth_rejections.sum())
        for i in range(200)
    ]
    mean = float(np.mean(counts))
    elapsed = time.perf_counter() - start
    ok = 70 <= mean <= 100 and elapsed < 30
    acceptance(3, "mean Bonferroni ground-truth rejections in [70, 100]", ok,
               f"mean {mean:.1f}, analytic {expected:.1f}, {elapsed:.1f}s")
    assert abs(expected - 82.26) < 0.05
    assert 70 <= mean <= 100
    assert elapsed < 30


@pytest.mark.slow
def test_4_switched_decisions_simes_bh(acceptance):
    config = SimulationConfig(procedure="bh", replications=100, efforts=(1000,), seed=11)
    records = list(run_study(config))
    rows = by_method(summarize(records))
    naive, quick = rows[("naive", 1000)], rows[("quickmmctest", 1000)]

    # Simes uses the same critical values, so the study is identical record for record
    simes = SimulationConfig(procedure="simes", replications=2, efforts=(1000,), seed=11)
    same = [(r.switched, r.switched_rejections) for r in run_study(simes)] == [
        (r.switched, r.switched_rejections) for r in records if r.replication < 2]

    ok = (22 <= naive["switched"] <= 42 and quick["switched"] <= 6
          and quick["switched_rejections"] <= 3 and same)
    acceptance(4, "switched decisions, Simes/BH, effort 1000", ok,
               f"naive {naive['switched']:.1f}±{naive['switched_se']:.1f} "
               f"({naive['switched_rejections']:.1f}); "
               f"QuickMMCTest {quick['switched']:.2f}±{quick['switched_se']:.2f} "
               f"({quick['switched_rejections']:.2f}); simes==bh {same}")
    assert 22 <= naive["switched"] <= 42
    assert quick["switched"] <= 6
    assert quick["switched_rejections"] <= 3
    assert same


def test_5_switched_decisions_bonferroni(acceptance):
    config = SimulationConfig(procedure="bonferroni", replications=100, efforts=(1000,), seed=12)
    truth_count = int(fixed_ground_truth(config).truth_rejections.sum())
    records = list(run_study(config))
    naive = [r for r in records if r.method == "naive"]
    naive_ok = all(r.rejections == 0 and r.switched == truth_count for r in naive)
    quick = by_method(summarize(records))[("quickmmctest", 1000)]
    ok = naive_ok and 25 <= quick["switched"] <= 65 and quick["switched_rejections"] <= 6
    acceptance(5, "switched decisions, Bonferroni, effort 1000", ok,
               f"naive switched = {truth_count} every replication: {naive_ok}; "
               f"QuickMMCTest {quick['switched']:.1f}±{quick['switched_se']:.1f} "
               f"({quick['switched_rejections']:.2f})")
    assert naive_ok
    assert 25 <= quick["switched"] <= 65
    assert quick["switched_rejections"] <= 6


@pytest.mark.slow
def test_6_power_dominance_simes(acceptance):
    common = dict(procedure="simes", replications=100, fixed_set=False, seed=13)
    quick = by_method(summarize(run_study(SimulationConfig(
        **common, methods=("quickmmctest",), efforts=(100,)))))[("quickmmctest", 100)]
    naive = by_method(summarize(run_study(SimulationConfig(
        **common, methods=("naive",), efforts=(100, 1000)))))
    n100, n1000 = naive[("naive", 100)], naive[("naive", 1000)]
    joint_se = math.hypot(quick["power_se"], n100["power_se"])
    cond_a = quick["power"] >= n1000["power"] - 0.05
    cond_b = quick["power"] - n100["power"] >= 2 * joint_se
    acceptance(6, "QuickMMCTest power at 100 vs naive", cond_a and cond_b,
               f"QuickMMCTest@100 {quick['power']:.3f}, naive@100 {n100['power']:.3f}, "
               f"naive@1000 {n1000['power']:.3f}, joint se {joint_se:.4f}")
    assert cond_a
    assert cond_b


def test_7_bonferroni_power_floor(acceptance):
    common = dict(procedure="bonferroni", replications=100, fixed_set=False, seed=14)
    efforts = (10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10000)
    naive = [r for r in run_study(SimulationConfig(**common, methods=("naive",), efforts=efforts))]
    naive_zero = all(r.power == 0 for r in naive)
    quick = by_method(summarize(run_study(SimulationConfig(
        **common, methods=("quickmmctest",), efforts=(1000, 10000)))))
    q1000, q10000 = quick[("quickmmctest", 1000)]["power"], quick[("quickmmctest", 10000)]["power"]
    ok = naive_zero and q1000 > 0 and q10000 > 0
    acceptance(7, "Bonferroni naive power 0, QuickMMCTest > 0", ok,
               f"naive all zero {naive_zero}; QuickMMCTest@1000 {q1000:.3f}, @10000 {q10000:.3f}")
    assert naive_zero
    assert q1000 > 0 and q10000 > 0


def test_8_residual_sampling(acceptance):
    rng = np.random.default_rng(8)
    failures = 0
    for _ in range(10_000):
        m = int(rng.integers(1, 50))
        w = rng.random(m) ** rng.choice([1, 4])
        w[rng.random(m) < 0.2] = 0.0
        if w.sum() == 0:
            w[0] = 1.0
        delta = int(rng.integers(1, 10**6))
        n = residual_allocate(w, delta, rng)
        floors = np.floor(w / w.sum() * delta - 1e-9)
        failures += n.sum() != delta or np.any(n < floors)
    trials = 10_000
    split = sum(residual_allocate([0.5, 0.5], 3, rng)[0] == 2 for _ in range(trials)) / trials
    ok = failures == 0 and abs(split - 0.5) <= 0.02
    acceptance(8, "residual sampling exactness", ok, f"{failures} failures, split {split:.4f}")
    assert failures == 0
    assert abs(split - 0.5) <= 0.02


def test_9_posterior_correctness(acceptance):
    rng = np.random.default_rng(9)
    pvalues = {}
    for S, k in ((0, 0), (0, 1000), (500, 1000)):
        draws = posterior_draws(k, S, rng, size=100_000)
        pvalues[(S, k)] = stats.kstest(draws, stats.beta(1 + S, 1 + k - S).cdf).pvalue
    ok = all(p > 1e-3 for p in pvalues.values())
    acceptance(9, "posterior KS test at 1e-3", ok,
               ", ".join(f"(S={S},k={k}) p={p:.3f}" for (S, k), p in pvalues.items()))
    assert ok


def test_10_cli_determinism(acceptance, tmp_path):
    cfg = tmp_path / "study.cfg"
    cfg.write_text("m = 500\nreplications = 3\nefforts = 100\nprocedure = bh\n")
    outputs = []
    for i, threads in enumerate(("1", "1", "8")):
        out = tmp_path / f"sim{i}.csv"
        assert main(["simulate", "--config", str(cfg), "--seed", "5", "--threads", threads,
                     "--out", str(out)]) == 0
        outputs.append(out.read_bytes())
    sim_ok = outputs[0] == outputs[1] == outputs[2]

    data = tmp_path / "stats.csv"
    rng = np.random.default_rng(10)
    lines = []
    for h in range(1, 21):
        lines.append(f"{h},obs,{rng.normal(2.0 * (h % 3), 1)}")
        lines += [f"{h},mc,{x}" for x in rng.normal(size=2000)]
    data.write_text("\n".join(lines) + "\n")
    # a budget no larger than any one stream can never exhaust the source
    runs = []
    for i, threads in enumerate(("1", "1", "8")):
        out = tmp_path / f"run{i}.csv"
        assert main(["run", "--data", str(data), "--budget", "2000", "--seed", "5",
                     "--threads", threads, "--out", str(out)]) == 0
        runs.append(out.read_bytes())
    run_ok = runs[0] == runs[1] == runs[2]
    acceptance(10, "simulate/run byte-identical across repeats and --threads 1/8",
               sim_ok and run_ok, f"simulate {sim_ok}, run {run_ok}")
    assert sim_ok and run_ok
