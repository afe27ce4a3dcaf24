from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from onlinesched import oracle
from onlinesched.model import ClusterInstance, CoflowInstance, CosInstance, objective, validate
from onlinesched.offline import (
    OfflineScheduler, build_permutation_schedule, dp_optimal_cos, greedy_2approx_cos,
    list_schedule_cluster, offline_cluster_schedule, offline_coflow_schedule, permutation_objective,
)

TWO_JOBS = CosInstance.build(p=[[1, 2], [3, 1]], w=[1, 2])


def test_dp_examples():
    assert dp_optimal_cos(CosInstance.build(p=[[3], [5]], w=[2]), [0]) == ((0,), 10)
    assert dp_optimal_cos(TWO_JOBS, [0, 1]) == ((1, 0), 8)
    twins = CosInstance.build(p=[[1, 1], [1, 1]], w=[1, 1])
    assert dp_optimal_cos(twins, [0, 1])[1] == 3


def test_dp_on_subset_and_empty():
    assert dp_optimal_cos(TWO_JOBS, []) == ((), 0)
    assert dp_optimal_cos(TWO_JOBS, [0]) == ((0,), 3)


def test_permutation_schedule_by_hand():
    s = build_permutation_schedule(TWO_JOBS, (1, 0))
    assert s.completion == {1: 2, 0: 4}
    validate(TWO_JOBS, s)
    assert build_permutation_schedule(TWO_JOBS, ()).completion == {}


def test_permutation_schedule_offset_and_releases():
    inst = CosInstance.build(p=[[2, 1]], w=[1, 1], r=[0, 5])
    s = build_permutation_schedule(inst, (0, 1), offset=1, releases=True)
    assert s.completion == {0: 3, 1: 6}


def test_greedy_examples():
    single = CosInstance.build(p=[[4]], w=[1])
    assert greedy_2approx_cos(single, [0]) == (0,)
    assert permutation_objective(TWO_JOBS, greedy_2approx_cos(TWO_JOBS, [0, 1])) <= 16
    same = CosInstance.build(p=[[2, 2, 2], [1, 1, 1]], w=[3, 3, 3])
    order = greedy_2approx_cos(same, range(3))
    assert permutation_objective(same, order) == dp_optimal_cos(same, range(3))[1]


def test_list_schedule_examples():
    inst = ClusterInstance(sizes=[3], tasks=[[[5, 4, 3, 3, 3, 2]]], w=[1], r=[0])
    assert list_schedule_cluster(inst, [0], [0]).makespan() == 7
    one = ClusterInstance(sizes=[1], tasks=[[[2, 3]], [[4]]], w=[1, 1], r=[0, 0])
    assert list_schedule_cluster(one, [0, 1], [0, 1]).makespan() == 9
    even = ClusterInstance(sizes=[3], tasks=[[[4, 4, 4]]], w=[1], r=[0])
    assert list_schedule_cluster(even, [0], [0]).makespan() == 4


def test_list_schedule_order_must_cover():
    inst = ClusterInstance(sizes=[1], tasks=[[[1]], [[1]]], w=[1, 1], r=[0, 0])
    with pytest.raises(ValueError):
        list_schedule_cluster(inst, [0, 1], [0])


def test_coflow_examples():
    one = CoflowInstance(m=2, demand=[[[1, 2], [3, 4]]], w=[1], r=[0])
    assert offline_coflow_schedule(one, [0]).completion[0] == 7
    disjoint = CoflowInstance(m=2, demand=[[[3, 0], [0, 0]], [[0, 0], [0, 5]]], w=[1, 1], r=[0, 0])
    assert offline_coflow_schedule(disjoint, [0, 1]).completion == {0: 3, 1: 5}
    pair = CoflowInstance(m=1, demand=[[[2]], [[1]]], w=[1, 3], r=[0, 0])
    s = offline_coflow_schedule(pair, [0, 1])
    assert s.completion == {1: 1, 0: 3}
    assert objective(pair, s) == 6


def test_cluster_of_singletons_behaves_like_cos():
    inst = ClusterInstance(sizes=[1, 1], tasks=[[[1], [3]], [[2], [1]]], w=[1, 2], r=[0, 0])
    s = offline_cluster_schedule(inst, [0, 1])
    assert objective(inst, s) == 8


def test_scheduler_gamma_and_cache():
    dp, greedy = OfflineScheduler("dp"), OfflineScheduler("greedy")
    coflow = CoflowInstance(m=1, demand=[[[1]]], w=[1], r=[0])
    cluster = ClusterInstance(sizes=[1], tasks=[[[1]]], w=[1], r=[0])
    assert [dp.gamma(TWO_JOBS), greedy.gamma(TWO_JOBS), dp.gamma(coflow), dp.gamma(cluster)] == [1, 2, 4, 3]
    assert dp.proven_gamma(coflow) == 1 and greedy.proven_gamma(TWO_JOBS) is None
    assert dp.order(TWO_JOBS, [0, 1]) is dp.order(TWO_JOBS, [1, 0])
    with pytest.raises(ValueError):
        OfflineScheduler("sjf")


def test_batch_offset_shifts_everything():
    s = OfflineScheduler("dp")(TWO_JOBS, [0, 1], Fraction(5, 2))
    assert s.completion == {1: Fraction(9, 2), 0: Fraction(13, 2)}


@st.composite
def small_cos(draw):
    n = draw(st.integers(1, 6))
    m = draw(st.integers(1, 3))
    p = [[draw(st.integers(0, 9)) for _ in range(n)] for _ in range(m)]
    w = [draw(st.integers(0, 9)) for _ in range(n)]
    return CosInstance.build(p=p, w=w)


@settings(max_examples=80, deadline=None)
@given(small_cos())
def test_dp_equals_brute_force(inst):
    order, val = dp_optimal_cos(inst, range(inst.n))
    assert val == oracle.brute_opt_perm_cos(inst)[1]
    assert permutation_objective(inst, order) == val
    assert objective(inst, build_permutation_schedule(inst, order)) == val


@settings(max_examples=80, deadline=None)
@given(small_cos())
def test_greedy_never_beats_dp(inst):
    order = greedy_2approx_cos(inst, range(inst.n))
    assert sorted(order) == list(range(inst.n))
    assert permutation_objective(inst, order) >= dp_optimal_cos(inst, range(inst.n))[1]
