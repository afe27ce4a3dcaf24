"""Brute-force references for tests and example regeneration.

These are deliberately naive and share nothing with the solvers apart from
the instance types: permutations are simulated directly, subsets come from
``itertools`` and the cluster makespan is found by trying task assignments.
"""
from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Iterable

from .model import ClusterInstance, CoflowInstance, CosInstance, frac

PERM_CAP = 8
SUBSET_CAP = 15
TASK_CAP = 12


def _simulate_cos(p, w, r, order, with_releases):
    m = len(p)
    free = [0] * m
    total = 0
    for j in order:
        start = r[j] if with_releases else 0
        finish = start
        for i in range(m):
            if p[i][j]:
                begin = free[i] if free[i] > start else start
                free[i] = begin + p[i][j]
                if free[i] > finish:
                    finish = free[i]
        total += w[j] * finish
    return total


def brute_opt_perm_cos(inst: CosInstance, with_releases: bool = False, cap: int = PERM_CAP):
    """Best permutation schedule over all n! orders; returns ``(order, objective)``.

    Without releases this is the true optimum; with releases it is an upper
    bound, since the search is restricted to permutation schedules.
    """
    n = inst.n
    if n > cap:
        raise ValueError(f"{n} jobs exceeds the permutation cap of {cap}")
    if n == 0:
        return (), Fraction(0)
    # integers make the n! loop tolerable
    denom = 1
    for x in [v for row in inst.p for v in row] + list(inst.r):
        denom = denom * x.denominator // _gcd(denom, x.denominator)
    p = [[int(v * denom) for v in row] for row in inst.p]
    r = [int(v * denom) for v in inst.r]
    wden = 1
    for x in inst.w:
        wden = wden * x.denominator // _gcd(wden, x.denominator)
    w = [int(v * wden) for v in inst.w]

    best_val, best_order = None, None
    for order in itertools.permutations(range(n)):
        val = _simulate_cos(p, w, r, order, with_releases)
        if best_val is None or val < best_val:
            best_val, best_order = val, order
    return best_order, Fraction(best_val, denom * wden)


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


def brute_mswp(inst: CosInstance, R: Iterable[int], D, cap: int = SUBSET_CAP):
    """Heaviest subset of ``R`` whose machine loads all fit in ``D``."""
    R = sorted(set(R))
    D = frac(D)
    if len(R) > cap:
        raise ValueError(f"{len(R)} jobs exceeds the subset cap of {cap}")
    denom = 1
    for row in inst.p:
        for j in R:
            denom = denom * row[j].denominator // _gcd(denom, row[j].denominator)
    p = [{j: int(row[j] * denom) for j in R} for row in inst.p]
    limit = D * denom
    best_set, best_w = (), Fraction(0)
    for size in range(len(R) + 1):
        for combo in itertools.combinations(R, size):
            if all(sum(row[j] for j in combo) <= limit for row in p):
                wt = sum((inst.w[j] for j in combo), Fraction(0))
                if wt > best_w:
                    best_set, best_w = combo, wt
    return best_set, best_w


def brute_muwp_cos(inst: CosInstance, R: Iterable[int], D, cap: int = SUBSET_CAP) -> Fraction:
    """Optimal unscheduled weight, via the maximisation twin."""
    R = sorted(set(R))
    _, packed = brute_mswp(inst, R, D, cap)
    return sum((inst.w[j] for j in R), Fraction(0)) - packed


def _min_makespan(tasks: list, machines: int) -> Fraction:
    tasks = sorted(tasks, reverse=True)
    best = [sum(tasks, Fraction(0))]
    loads = [Fraction(0)] * machines

    def place(k):
        if k == len(tasks):
            best[0] = min(best[0], max(loads))
            return
        seen = set()
        for q in range(machines):
            # machines with equal load are interchangeable
            if loads[q] in seen:
                continue
            seen.add(loads[q])
            loads[q] += tasks[k]
            place(k + 1)
            loads[q] -= tasks[k]

    place(0)
    return best[0]


def brute_cluster_makespan(inst: ClusterInstance, S: Iterable[int], cap: int = TASK_CAP) -> Fraction:
    """Exact minimum makespan of ``S`` ignoring releases (max over clusters)."""
    S = list(S)
    span = Fraction(0)
    for i, size in enumerate(inst.sizes):
        tasks = [t for j in S for t in inst.tasks[j][i] if t > 0]
        if len(tasks) > cap:
            raise ValueError(f"{len(tasks)} tasks on cluster {i} exceeds the cap of {cap}")
        if tasks:
            span = max(span, _min_makespan(tasks, size))
    return span


def _simulate_cluster(inst: ClusterInstance, order, with_releases):
    finish = {j: (inst.r[j] if with_releases else Fraction(0)) for j in order}
    for i, size in enumerate(inst.sizes):
        free = [Fraction(0)] * size
        for j in order:
            ready = inst.r[j] if with_releases else Fraction(0)
            for t in inst.tasks[j][i]:
                if t == 0:
                    continue
                q = free.index(min(free))
                free[q] = max(free[q], ready) + t
                finish[j] = max(finish[j], free[q])
    return sum((inst.w[j] * finish[j] for j in order), Fraction(0))


def brute_opt_perm_cluster(inst: ClusterInstance, with_releases: bool = True, cap: int = PERM_CAP):
    """Best list schedule over all job orders; a certified upper bound on the optimum."""
    if inst.n > cap:
        raise ValueError(f"{inst.n} jobs exceeds the permutation cap of {cap}")
    best_val, best_order = None, ()
    for order in itertools.permutations(range(inst.n)):
        val = _simulate_cluster(inst, order, with_releases)
        if best_val is None or val < best_val:
            best_val, best_order = val, order
    return best_order, best_val if best_val is not None else Fraction(0)


def _port_loads(mat):
    m = len(mat)
    rows = [sum(mat[i]) for i in range(m)]
    cols = [sum(mat[i][o] for i in range(m)) for o in range(m)]
    return rows + cols


def lemma5_check(inst: CoflowInstance, D, cap: int = 6) -> tuple[bool, Fraction, Fraction]:
    """Compare optimal unscheduled weight on the switch (W) and on the reduced open shop (W').

    Returns ``(W' <= W, W, W')``. Switch feasibility follows the fluid port
    model: a set of coflows fits iff every port carries at most ``D``.
    """
    from .model import coflow_to_cos

    D = frac(D)
    if inst.n > cap:
        raise ValueError(f"{inst.n} coflows exceeds the cap of {cap}")
    total = sum(inst.w, Fraction(0))
    W = total
    for size in range(inst.n + 1):
        for combo in itertools.combinations(range(inst.n), size):
            ports = [0] * (2 * inst.m)
            for j in combo:
                ports = [a + b for a, b in zip(ports, _port_loads(inst.demand[j]))]
            if all(x <= D for x in ports):
                W = min(W, total - sum((inst.w[j] for j in combo), Fraction(0)))
    W_red = brute_muwp_cos(coflow_to_cos(inst), range(inst.n), D, cap=cap)
    return W_red <= W, W, W_red
