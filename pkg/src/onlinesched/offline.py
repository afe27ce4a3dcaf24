"""Release-free schedulers used inside one interval of the online framework."""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .model import (
    ClusterInstance, CoflowInstance, CosInstance, Instance, Schedule,
    as_integers, cluster_aggregates, coflow_to_cos, frac,
)

DP_CAP = 20


def dp_optimal_cos(inst: CosInstance, S: Iterable[int], cap: int = DP_CAP) -> tuple[tuple[int, ...], Fraction]:
    """Optimal permutation of ``S`` for total weighted completion time, release times ignored.

    Held-Karp style recursion over subsets: ``C(T, j)`` is the best cost of
    scheduling ``T`` with ``j`` last, which equals the best cost of ``T - {j}``
    plus ``w_j`` times the largest machine load of ``T``. Runs in
    O(m n^2 2^n) and returns ``(order, objective)``.
    """
    jobs = sorted(set(S))
    k = len(jobs)
    if k > cap:
        raise ValueError(f"DP over {k} jobs exceeds the cap of {cap}")
    if k == 0:
        return (), Fraction(0)
    flat, pscale = as_integers([inst.p[i][j] for i in range(inst.m) for j in jobs])
    loads_of = [flat[i * k:(i + 1) * k] for i in range(inst.m)]
    w, wscale = as_integers([inst.w[j] for j in jobs])

    full = (1 << k) - 1
    load = [[0] * inst.m for _ in range(full + 1)]
    span = [0] * (full + 1)
    for mask in range(1, full + 1):
        low = (mask & -mask).bit_length() - 1
        base = load[mask & (mask - 1)]
        cur = [base[i] + loads_of[i][low] for i in range(inst.m)]
        load[mask] = cur
        span[mask] = max(cur) if cur else 0

    # best[T] = min_j C(T, j); last[T] = argmin, which is also the back-pointer
    best = [0] * (full + 1)
    last = [-1] * (full + 1)
    for mask in sorted(range(1, full + 1), key=int.bit_count):
        top = None
        for j in range(k):
            bit = 1 << j
            if not mask & bit:
                continue
            cost = best[mask ^ bit] + w[j] * span[mask]
            if top is None or cost < top:
                top, last[mask] = cost, j
        best[mask] = top

    order = []
    mask = full
    while mask:
        j = last[mask]
        order.append(jobs[j])
        mask ^= 1 << j
    order.reverse()
    return tuple(order), Fraction(best[full], pscale * wscale)


def build_permutation_schedule(inst: CosInstance, order: Sequence[int], offset=0,
                               releases: bool = False) -> Schedule:
    """Nonpreemptive schedule running components in ``order`` on every machine.

    Each component starts as soon as its machine is free (and, with
    ``releases``, not before the job's release time).
    """
    offset = frac(offset)
    sched = Schedule()
    free = [offset] * inst.m
    for j in order:
        ready = max(offset, inst.r[j]) if releases else offset
        done = ready
        for i in range(inst.m):
            p = inst.p[i][j]
            if p == 0:
                continue
            start = max(free[i], ready)
            free[i] = start + p
            sched.add(i, j, start, free[i])
            done = max(done, free[i])
        sched.completion[j] = done
    return sched


def greedy_2approx_cos(inst: CosInstance, S: Iterable[int]) -> tuple[int, ...]:
    """Reverse greedy ordering: fill the schedule from the back.

    Repeatedly look at the machine with the largest remaining load and put
    last the job with the smallest weight-to-work ratio on that machine.
    """
    remaining = sorted(set(S))
    load = [sum((inst.p[i][j] for j in remaining), Fraction(0)) for i in range(inst.m)]
    tail = []
    while remaining:
        top = max(range(inst.m), key=lambda i: (load[i], -i)) if inst.m else None
        if top is None or load[top] == 0:
            # nothing left has any work; order does not matter
            tail.extend(reversed(remaining))
            break
        pick = min(
            (j for j in remaining if inst.p[top][j] > 0),
            key=lambda j: (inst.w[j] / inst.p[top][j], j),
        )
        tail.append(pick)
        remaining.remove(pick)
        for i in range(inst.m):
            load[i] -= inst.p[i][pick]
    return tuple(reversed(tail))


def permutation_objective(inst: CosInstance, order: Sequence[int]) -> Fraction:
    """Release-free objective of a permutation schedule starting at 0."""
    free = [Fraction(0)] * inst.m
    total = Fraction(0)
    for j in order:
        for i in range(inst.m):
            free[i] += inst.p[i][j]
        total += inst.w[j] * max(free, default=Fraction(0))
    return total


def list_schedule_cluster(inst: ClusterInstance, S: Iterable[int], order: Sequence[int],
                          offset=0) -> Schedule:
    """Per cluster, hand each task (jobs in ``order``) to the earliest-free machine."""
    offset = frac(offset)
    members = set(S)
    order = [j for j in order if j in members]
    if set(order) != members:
        raise ValueError("order must cover the scheduled set")
    sched = Schedule()
    for j in order:
        sched.completion[j] = offset
    for i, size in enumerate(inst.sizes):
        free = [offset] * size
        for j in order:
            for t in inst.tasks[j][i]:
                if t == 0:
                    continue
                q = min(range(size), key=lambda q: (free[q], q))
                start = free[q]
                free[q] = start + t
                sched.add((i, q), j, start, free[q])
                sched.completion[j] = max(sched.completion[j], free[q])
        span = max(free) - offset
        work = sum((cluster_aggregates(inst, j, i)[0] for j in order), Fraction(0))
        biggest = max((cluster_aggregates(inst, j, i)[1] for j in order), default=Fraction(0))
        assert span <= work / size + biggest, (
            f"list scheduling bound broken on cluster {i}: {span} > {work / size} + {biggest}")
    return sched


def cluster_cos_view(inst: ClusterInstance) -> CosInstance:
    """COS surrogate with p'_ij = max(P_ji / m_i, B_ji), used only for ordering."""
    p = [
        [max(cluster_aggregates(inst, j, i)[0] / size, cluster_aggregates(inst, j, i)[1])
         for j in range(inst.n)]
        for i, size in enumerate(inst.sizes)
    ]
    return CosInstance(p=p, w=inst.w, r=inst.r)


def _order(inst: CosInstance, S, ordering: str) -> tuple[int, ...]:
    if ordering == "dp":
        return dp_optimal_cos(inst, S)[0]
    if ordering == "greedy":
        return greedy_2approx_cos(inst, S)
    raise ValueError(f"unknown ordering {ordering!r}")


def offline_coflow_schedule(inst: CoflowInstance, S: Iterable[int], offset=0,
                            ordering: str = "dp") -> Schedule:
    """Fluid port schedule: every port serves the coflows' data one after another.

    The order comes from a COS scheduler run on the port-load reduction; port
    ``i < m`` is input i and port ``m + o`` is output o.
    """
    reduced = coflow_to_cos(inst)
    order = _order(reduced, S, ordering)
    return build_permutation_schedule(reduced, order, offset)


def offline_cluster_schedule(inst: ClusterInstance, S: Iterable[int], offset=0,
                             ordering: str = "dp") -> Schedule:
    order = _order(cluster_cos_view(inst), S, ordering)
    return list_schedule_cluster(inst, S, order, offset)


class OfflineScheduler:
    """Within-interval scheduler used by the framework.

    ``gamma`` is the approximation factor charged in bound reports: the
    constant of the offline algorithm each configuration stands in for.
    ``proven_gamma`` is what this implementation actually guarantees, or
    ``None`` when it is only measured empirically.
    """

    def __init__(self, ordering: str = "dp"):
        if ordering not in ("dp", "greedy"):
            raise ValueError(f"unknown ordering {ordering!r}")
        self.ordering = ordering
        self.name = ordering
        self._cache: dict = {}

    def gamma(self, inst: Instance) -> int:
        if isinstance(inst, CosInstance):
            return 1 if self.ordering == "dp" else 2
        if isinstance(inst, CoflowInstance):
            return 4
        return 3

    def proven_gamma(self, inst: Instance) -> Optional[int]:
        # the fluid port model is COS on the reduced instance, so the DP is exact there too
        if self.ordering == "dp" and isinstance(inst, (CosInstance, CoflowInstance)):
            return 1
        return None

    def order(self, inst: Instance, S: Iterable[int]) -> tuple[int, ...]:
        key = (id(inst), frozenset(S))
        hit = self._cache.get(key)
        if hit is not None and hit[0] is inst:
            return hit[1]
        if isinstance(inst, CosInstance):
            view = inst
        elif isinstance(inst, CoflowInstance):
            view = coflow_to_cos(inst)
        else:
            view = cluster_cos_view(inst)
        order = _order(view, key[1], self.ordering)
        if len(self._cache) > 4096:
            self._cache.clear()
        self._cache[key] = (inst, order)
        return order

    def __call__(self, inst: Instance, S: Iterable[int], offset=0) -> Schedule:
        S = frozenset(S)
        order = self.order(inst, S)
        if isinstance(inst, CosInstance):
            return build_permutation_schedule(inst, order, offset)
        if isinstance(inst, CoflowInstance):
            return build_permutation_schedule(coflow_to_cos(inst), order, offset)
        return list_schedule_cluster(inst, S, order, offset)

