"""Acceptance criteria C1-C10, one summary line each (see the 'acceptance' section of the run)."""
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from _instances import cluster_family, cos_family, random_deadline, tiny_coflows
from onlinesched import cli, experiment, oracle
from onlinesched.framework import (
    competitive_factor, deterministic_grid, interval_start_of, randomized_grid, run_online,
)
from onlinesched.model import cluster_aggregates, cos_batch_makespan, total_weight, write_instance
from onlinesched.muwp import MuwpSolver, knapsack_muwp_fixed_m, lp_round_muwp_cluster, lp_round_muwp_cos
from onlinesched.offline import (
    OfflineScheduler, dp_optimal_cos, greedy_2approx_cos, offline_cluster_schedule,
    permutation_objective,
)

LN2 = math.log(2)


@pytest.fixture(scope="module")
def dp_set():
    """The C1 family: 500 release-free COS instances with n <= 8, m <= 4."""
    return cos_family(500, n_max=8, m_max=4, seed=1)


@pytest.fixture(scope="module")
def dp_optima(dp_set):
    t0 = time.perf_counter()
    opts = [dp_optimal_cos(inst, range(inst.n)) for inst in dp_set]
    return opts, time.perf_counter() - t0


def test_c1_dp_matches_brute_force(dp_set, dp_optima, record):
    opts, dp_time = dp_optima
    t0 = time.perf_counter()
    bad = []
    for k, (inst, (_, val)) in enumerate(zip(dp_set, opts)):
        _, ref = oracle.brute_opt_perm_cos(inst)
        if val != ref:
            bad.append((k, val, ref))
    elapsed = dp_time + time.perf_counter() - t0
    ok = not bad and elapsed < 60
    record("C1 DP exactness", ok,
           f"{len(dp_set) - len(bad)}/{len(dp_set)} equal to brute force, {elapsed:.1f}s (limit 60s)")
    assert not bad, bad[:5]
    assert elapsed < 60


def test_c2_deterministic_exact_mode(record):
    solver, sched = MuwpSolver("exact"), OfflineScheduler("dp")
    bad, worst = [], 0.0
    plain = cos_family(300, n_max=8, m_max=3, seed=2)
    released = cos_family(300, n_max=8, m_max=3, seed=3, releases="uniform")
    for tag, family in (("r=0", plain), ("releases", released)):
        for k, inst in enumerate(family):
            if tag == "r=0":
                opt = dp_optimal_cos(inst, range(inst.n))[1]
            else:
                opt = oracle.brute_opt_perm_cos(inst, with_releases=True)[1]
            res = run_online(inst, solver, sched, deterministic_grid())
            bound = 3 * opt + total_weight(inst)
            worst = max(worst, float(res.objective / bound))
            if res.objective > bound:
                bad.append((tag, k, res.objective, bound))
    record("C2 det grid, exact+dp, obj <= 3 OPT + W", not bad,
           f"{len(bad)} violations over 600 instances, worst obj/bound {worst:.3f}")
    assert not bad, bad[:5]


def test_c3_half_rounding(record):
    rng = np.random.default_rng(4)
    family = cos_family(300, n_max=12, m_max=3, seed=4)
    bad = []
    for k, inst in enumerate(family):
        R = list(range(inst.n))
        D = random_deadline(rng, inst, R)
        sol = lp_round_muwp_cos(inst, R, D)
        best = oracle.brute_muwp_cos(inst, R, D)
        if cos_batch_makespan(inst, sol.selected) > 2 * D:
            bad.append((k, "makespan"))
        if sol.unscheduled_weight > 2 * best:
            bad.append((k, "weight"))
    record("C3 (2,2) rounding", not bad, f"{len(bad)} violations over {len(family)} instances")
    assert not bad, bad[:5]


def test_c4_knapsack_dual(record):
    rng = np.random.default_rng(5)
    t0 = time.perf_counter()
    bad = []
    for k in range(200):
        eps = (Fraction(1, 10), Fraction(1, 2))[k % 2]
        m = 1 + k % 3
        n = int(rng.integers(1, 11))
        inst = experiment.gen("cos", n, m, 5000 + k)
        R = list(range(n))
        D = random_deadline(rng, inst, R)
        sol = knapsack_muwp_fixed_m(inst, R, D, eps)
        _, best = oracle.brute_mswp(inst, R, D)
        got = total_weight(inst, sol.selected)
        loads = [sum((inst.p[i][j] for j in sol.selected), Fraction(0)) for i in range(m)]
        if got < best:
            bad.append((k, "weight", got, best))
        if any(x > (1 + eps) * D for x in loads):
            bad.append((k, "load", loads, D))
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 120
    record("C4 knapsack dual", ok, f"{len(bad)} violations over 200 instances, {elapsed:.1f}s (limit 120s)")
    assert not bad, bad[:5]
    assert elapsed < 120


def test_c5_cluster_pipeline(record):
    rng = np.random.default_rng(6)
    family = cluster_family(200, seed=6)
    bad = []
    for k, inst in enumerate(family):
        R = list(range(inst.n))
        work = max(sum(cluster_aggregates(inst, j, i)[0] for j in R) / s for i, s in enumerate(inst.sizes))
        D = Fraction(int(rng.integers(1, int(work) + 3)))
        sol = lp_round_muwp_cluster(inst, R, D)
        S = sol.selected
        for i, size in enumerate(inst.sizes):
            if sum((cluster_aggregates(inst, j, i)[0] for j in S), Fraction(0)) / size > 2 * D:
                bad.append((k, "work", i))
            if max((cluster_aggregates(inst, j, i)[1] for j in S), default=0) > 2 * D:
                bad.append((k, "task", i))
        if S and offline_cluster_schedule(inst, S).makespan() > 4 * D:
            bad.append((k, "makespan"))
        if sol.unscheduled_weight > 2 * sol.lp_value:
            bad.append((k, "weight"))
    record("C5 cluster (4,2) pipeline", not bad, f"{len(bad)} violations over {len(family)} instances")
    assert not bad, bad[:5]


def test_c6_interval_start_constant(record):
    target = 1 / (2 * LN2)
    Cs = [Fraction(1), Fraction(37, 10), Fraction(100)]
    rng = np.random.default_rng(7)
    draws = 100_000
    t0 = time.perf_counter()
    sums = [Fraction(0)] * len(Cs)
    for _ in range(draws):
        grid = randomized_grid(rng)
        for i, C in enumerate(Cs):
            sums[i] += interval_start_of(C, grid)
    elapsed = time.perf_counter() - t0
    means = [float(s / draws / C) for s, C in zip(sums, Cs)]
    errs = [abs(x - target) / target for x in means]
    ok = all(e < 0.01 for e in errs) and elapsed < 10
    record("C6 E[B]/C = 1/(2 ln 2)", ok,
           "means " + ", ".join(f"{x:.5f}" for x in means)
           + f" vs {target:.5f}, max rel err {max(errs):.2%}, {elapsed:.1f}s (limit 10s)")
    assert all(e < 0.01 for e in errs), means
    assert elapsed < 10


@pytest.mark.slow
def test_c7_randomized_expectation(record):
    solver, sched = MuwpSolver("exact"), OfflineScheduler("dp")
    family = cos_family(100, n_max=7, m_max=3, seed=8)
    trials = 500
    factor = competitive_factor(1, 1, 1, randomized=True)
    bad, worst = [], -math.inf
    for k, inst in enumerate(family):
        opt = dp_optimal_cos(inst, range(inst.n))[1]
        rng = np.random.default_rng(80_000 + k)
        objs = np.array([float(run_online(inst, solver, sched, randomized_grid(rng)).objective)
                         for _ in range(trials)])
        se = objs.std(ddof=1) / math.sqrt(trials)
        bound = factor * float(opt) + float(total_weight(inst))
        worst = max(worst, (objs.mean() - bound) / max(se, 1e-12))
        if objs.mean() > bound + 3 * se:
            bad.append((k, objs.mean(), bound, se))
    record("C7 rand grid, mean obj <= (1/ln2 + 1) OPT + W + 3 SE", not bad,
           f"{len(bad)} violations over {len(family)} instances x {trials} trials, "
           f"factor {factor:.4f}, worst (mean - bound)/SE {worst:.1f}")
    assert not bad, bad[:5]


def test_c8_reduced_shop_never_worse(record):
    rng = np.random.default_rng(9)
    family = tiny_coflows(200, seed=9)
    bad = []
    for k, inst in enumerate(family):
        D = Fraction(int(rng.integers(0, 13)))
        ok, W, W_red = oracle.lemma5_check(inst, D)
        if not ok:
            bad.append((k, W, W_red))
    record("C8 coflow W' <= W", not bad, f"{len(bad)} violations over {len(family)} instances")
    assert not bad, bad[:5]


def test_c9_greedy_within_two(dp_set, dp_optima, record):
    opts, _ = dp_optima
    ratios = []
    for inst, (_, opt) in zip(dp_set, opts):
        val = permutation_objective(inst, greedy_2approx_cos(inst, range(inst.n)))
        ratios.append(val / opt)
    worst = max(ratios)
    record("C9 greedy / DP <= 2", worst <= 2,
           f"worst ratio {float(worst):.4f}, mean {float(sum(ratios) / len(ratios)):.4f} over {len(ratios)}")
    assert worst <= 2


@pytest.mark.slow
def test_c10_desk_table(tmp_path, capsys, record):
    csvs, combos = [], []
    for model, muwp, offline, m in experiment.TABLE1:
        folder = tmp_path / f"{model}_{muwp}"
        folder.mkdir()
        params = experiment.GenParams(pmax=10, releases="uniform", horizon=10)
        for k in range(8):
            write_instance(experiment.gen(model, 6, m, 100 + k, params), folder / f"i{k}.txt")
        for grid in ("det", "rand"):
            out = tmp_path / f"{model}_{muwp}_{grid}.csv"
            rc = cli.main(["run", str(folder), "--model", model, "--muwp", muwp, "--offline", offline,
                           "--grid", grid, "--trials", "20", "--no-timing", "--strict", "--out", str(out)])
            assert rc == 0, (model, muwp, grid)
            csvs.append(str(out))
        combos.append((model, muwp, offline))
    capsys.readouterr()
    assert cli.main(["report", *csvs]) == 0
    text = capsys.readouterr().out
    rows = experiment.read_csv(csvs)
    table = experiment.format_table(rows)

    det_bad = [r for r in rows if r["grid"] == "det" and r["bound_pass"] != "true"]
    ratio_bad = [r for r in rows if r["grid"] == "det"
                 and float(r["empirical_ratio"]) > float(r["bound"]) / float(r["opt_upper"])]
    rand_bad = experiment.expectation_violations(rows)
    factors = {(r["model"], r["muwp"], r["grid"]): float(r["factor"]) for r in rows}
    expected = {
        ("cos", "exact", "det"): 3, ("cos", "lp2", "det"): 10, ("coflow", "exact", "det"): 6,
        ("coflow", "lp2", "det"): 12, ("cluster", "cluster-lp", "det"): 19,
        ("cos", "exact", "rand"): 2.45, ("cos", "lp2", "rand"): 7.78, ("coflow", "exact", "rand"): 5.45,
        ("coflow", "lp2", "rand"): 9.78, ("cluster", "cluster-lp", "rand"): 14.55,
    }
    # randomized constants are quoted rounded up to two decimals
    const_ok = all(
        math.isclose(factors[key], val) if key[2] == "det"
        else val - 0.01 < factors[key] <= val
        for key, val in expected.items()
    )
    ok = not det_bad and not ratio_bad and not rand_bad and const_ok and "== cluster ==" in text
    print("\n" + table)
    record("C10 desk table via run + report", ok,
           f"{len(rows)} rows, {len(det_bad)} det bound failures, {len(rand_bad)} expectation failures, "
           f"bound constants {'match' if const_ok else 'MISMATCH'}\n" + table.rstrip())
    assert ok
