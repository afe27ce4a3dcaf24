"""Minimum unscheduled weight solvers.

Each solver picks a subset of the pending jobs for a deadline ``D`` and
declares its guarantee: the subset finishes by ``alpha * D`` and leaves out at
most ``beta`` times the optimal unscheduled weight for deadline ``D``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

import numpy as np

from . import lp
from .model import (
    ClusterInstance, CoflowInstance, CosInstance, Instance,
    as_integers, cluster_aggregates, coflow_to_cos, frac, total_weight,
)

EXACT_CAP = 20
KNAPSACK_MAX_M = 4
KNAPSACK_MAX_CELLS = 10 ** 8
HALF = Fraction(1, 2)


@dataclass(frozen=True)
class MuwpSolution:
    selected: tuple[int, ...]
    alpha: Fraction
    beta: Fraction
    unscheduled_weight: Fraction
    lp_value: Optional[Fraction] = None
    fractional: Optional[dict] = None


def _solution(inst, R, selected, alpha, beta, **extra) -> MuwpSolution:
    selected = tuple(sorted(selected))
    left = total_weight(inst, R) - total_weight(inst, selected)
    return MuwpSolution(selected, frac(alpha), frac(beta), left, **extra)


def _cos_view(inst: Instance) -> CosInstance:
    if isinstance(inst, CosInstance):
        return inst
    if isinstance(inst, CoflowInstance):
        return coflow_to_cos(inst)
    raise TypeError(f"{type(inst).__name__} has no concurrent open shop view")


def _subset_loads(p_rows: list[list[int]]) -> np.ndarray:
    """Loads of every subset of k items: shape (2^k, m), row = bitmask."""
    k = len(p_rows[0]) if p_rows else 0
    m = len(p_rows)
    big = max((sum(row) for row in p_rows), default=0) >= 2 ** 62
    loads = np.zeros((1 << k, m), dtype=object if big else np.int64)
    for b in range(k):
        col = np.array([row[b] for row in p_rows], dtype=loads.dtype)
        loads[1 << b: 1 << (b + 1)] = loads[: 1 << b] + col
    return loads


def exact_muwp(inst: Instance, R: Iterable[int], D, cap: int = EXACT_CAP) -> MuwpSolution:
    """Best feasible subset by enumerating every subset of ``R``.

    Ties go to more selected jobs, then the lexicographically smallest set.
    COS and coflow subsets are feasible when their batch makespan is at most
    ``D``; cluster subsets use the exhaustive makespan oracle.
    """
    R = sorted(set(R))
    D = frac(D)
    if len(R) > cap:
        raise ValueError(f"exact MUWP over {len(R)} jobs exceeds the cap of {cap}")
    k = len(R)
    w_int, _ = as_integers([inst.w[j] for j in R])
    weight = np.zeros(1 << k, dtype=object)
    for b in range(k):
        weight[1 << b: 1 << (b + 1)] = weight[: 1 << b] + w_int[b]

    if isinstance(inst, ClusterInstance):
        from .oracle import brute_cluster_makespan
        feasible = np.array([
            brute_cluster_makespan(inst, [R[b] for b in range(k) if mask >> b & 1]) <= D
            for mask in range(1 << k)
        ])
    else:
        view = _cos_view(inst)
        flat, scale = as_integers([view.p[i][j] for i in range(view.m) for j in R])
        rows = [flat[i * k:(i + 1) * k] for i in range(view.m)]
        loads = _subset_loads(rows)
        span = loads.max(axis=1) if view.m else np.zeros(1 << k, dtype=np.int64)
        feasible = span <= math.floor(D * scale)

    cand = np.flatnonzero(feasible)
    wbest = max(weight[cand])
    top = [int(mask) for mask in cand if weight[mask] == wbest]
    pick = min(top, key=lambda mask: (-int(mask).bit_count(),
                                      [R[b] for b in range(k) if mask >> b & 1]))
    return _solution(inst, R, [R[b] for b in range(k) if pick >> b & 1], 1, 1)


def _round_half(inst, R, rows, rhs, hi) -> tuple[dict, Fraction]:
    """Solve ``min sum w_j (1 - x_j)`` over the given packing rows and keep ``x_j >= 1/2``.

    Among optimal fractional points the one with the largest ``sum x_j`` is
    taken (a second LP), so that weightless jobs are not starved forever.
    """
    w = [inst.w[j] for j in R]
    first = lp.solve(lp.LpProblem(c=w, A=rows, b=rhs, lo=[0] * len(R), hi=hi, sense="max"))
    if first.status != lp.OPTIMAL:
        raise RuntimeError(f"MUWP relaxation reported {first.status}")
    packed = first.value
    second = lp.solve(lp.LpProblem(
        c=[1] * len(R), A=list(rows) + [[-x for x in w]], b=list(rhs) + [-packed],
        lo=[0] * len(R), hi=hi, sense="max",
    ))
    if second.status != lp.OPTIMAL:
        raise RuntimeError(f"tie-breaking relaxation reported {second.status}")
    x = dict(zip(R, second.x))
    lp_value = total_weight(inst, R) - packed
    return x, lp_value


def lp_round_muwp_cos(inst: Instance, R: Iterable[int], D) -> MuwpSolution:
    """Half-rounding of the packing LP; finishes by 2D leaving at most twice the optimum out."""
    R = sorted(set(R))
    D = frac(D)
    if not R:
        return _solution(inst, R, [], 2, 2, lp_value=Fraction(0), fractional={})
    view = _cos_view(inst)
    rows = [[view.p[i][j] for j in R] for i in range(view.m)]
    x, lp_value = _round_half(inst, R, rows, [D] * view.m, [1] * len(R))
    chosen = [j for j in R if x[j] >= HALF]
    return _solution(inst, R, chosen, 2, 2, lp_value=lp_value, fractional=x)


def lp_round_muwp_cluster(inst: ClusterInstance, R: Iterable[int], D) -> MuwpSolution:
    """Half-rounding of the cluster LP (work per machine and largest task); finishes by 4D."""
    if not isinstance(inst, ClusterInstance):
        raise TypeError("cluster LP rounding needs a ClusterInstance")
    R = sorted(set(R))
    D = frac(D)
    if not R:
        return _solution(inst, R, [], 4, 2, lp_value=Fraction(0), fractional={})
    rows = [
        [cluster_aggregates(inst, j, i)[0] / size for j in R]
        for i, size in enumerate(inst.sizes)
    ]
    # B_ji x_j <= D, kept as an upper bound on x_j
    hi = []
    for j in R:
        cap = Fraction(1)
        for i in range(inst.m):
            big = cluster_aggregates(inst, j, i)[1]
            if big > 0:
                cap = min(cap, D / big)
        hi.append(cap)
    x, lp_value = _round_half(inst, R, rows, [D] * inst.m, hi)
    chosen = [j for j in R if x[j] >= HALF]
    return _solution(inst, R, chosen, 4, 2, lp_value=lp_value, fractional=x)


def knapsack_select(sizes: list[list[Fraction]], weights: list[Fraction],
                    capacity: list[Fraction], eps, max_cells: int = KNAPSACK_MAX_CELLS) -> list[int]:
    """Scaled multidimensional knapsack DP; returns chosen item indices.

    With ``b_i = eps * s_i / (n + 1)``, sizes are rounded down to multiples
    of ``b_i`` and capacities up. The DP over the scaled problem is exact, so
    the chosen weight is at least the unscaled optimum, while the true load in
    dimension i stays within ``(1 + eps) * s_i``.
    """
    eps = frac(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    n, m = len(weights), len(capacity)
    if n == 0:
        return []
    scaled_p, scaled_s = [], []
    for i in range(m):
        s = frac(capacity[i])
        unit = eps * s / (n + 1)
        if unit == 0:
            # zero capacity: only work-free items fit
            scaled_s.append(0)
            scaled_p.append([0 if sizes[i][j] == 0 else 1 for j in range(n)])
        else:
            scaled_s.append(math.ceil(s / unit))
            scaled_p.append([math.floor(frac(sizes[i][j]) / unit) for j in range(n)])
    cells = n * math.prod(s + 1 for s in scaled_s)
    if cells > max_cells:
        raise MemoryError(f"knapsack table needs {cells} cells, guard is {max_cells}")

    w_int, _ = as_integers(weights)
    shape = tuple(s + 1 for s in scaled_s)
    dtype = object if sum(w_int) >= 2 ** 62 else np.int64
    value = np.zeros(shape, dtype=dtype)
    took = []
    for j in range(n):
        need = [scaled_p[i][j] for i in range(m)]
        take = np.zeros(shape, dtype=bool)
        if all(need[i] <= scaled_s[i] for i in range(m)):
            dst = tuple(slice(need[i], None) for i in range(m))
            src = tuple(slice(0, shape[i] - need[i]) for i in range(m))
            cand = value[src] + w_int[j]
            # prefer taking on ties so weightless items still get packed
            better = cand >= value[dst]
            take[dst] = better
            new = value.copy()
            new[dst] = np.where(better, cand, value[dst])
            value = new
        took.append(take)

    chosen = []
    cell = list(scaled_s)
    for j in range(n - 1, -1, -1):
        if took[j][tuple(cell)]:
            chosen.append(j)
            for i in range(m):
                cell[i] -= scaled_p[i][j]
    return sorted(chosen)


def knapsack_muwp_fixed_m(inst: Instance, R: Iterable[int], D, eps,
                          max_m: int = KNAPSACK_MAX_M,
                          max_cells: int = KNAPSACK_MAX_CELLS) -> MuwpSolution:
    """(1 + eps, 1) solver for a fixed, small number of machines."""
    R = sorted(set(R))
    eps = frac(eps)
    view = _cos_view(inst)
    if view.m > max_m:
        raise ValueError(f"knapsack DP is limited to {max_m} machines, instance has {view.m}")
    sizes = [[view.p[i][j] for j in R] for i in range(view.m)]
    picked = knapsack_select(sizes, [inst.w[j] for j in R], [frac(D)] * view.m, eps, max_cells)
    return _solution(inst, R, [R[k] for k in picked], 1 + eps, 1)


class MuwpSolver:
    """Named solver with its declared guarantee, as plugged into the framework."""

    def __init__(self, kind: str, eps=Fraction(1, 10), cap: int = EXACT_CAP):
        if kind not in ("exact", "lp2", "knap", "cluster-lp"):
            raise ValueError(f"unknown MUWP solver {kind!r}")
        self.kind = kind
        self.eps = frac(eps)
        self.cap = cap

    @property
    def alpha(self) -> Fraction:
        return {"exact": Fraction(1), "lp2": Fraction(2), "knap": 1 + self.eps,
                "cluster-lp": Fraction(4)}[self.kind]

    @property
    def beta(self) -> Fraction:
        return Fraction(2) if self.kind in ("lp2", "cluster-lp") else Fraction(1)

    def __call__(self, inst: Instance, R: Iterable[int], D) -> MuwpSolution:
        if self.kind == "exact":
            return exact_muwp(inst, R, D, self.cap)
        if self.kind == "lp2":
            return lp_round_muwp_cos(inst, R, D)
        if self.kind == "knap":
            return knapsack_muwp_fixed_m(inst, R, D, self.eps)
        return lp_round_muwp_cluster(inst, R, D)

    def __repr__(self):
        return f"MuwpSolver({self.kind!r})"
