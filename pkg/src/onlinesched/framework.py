"""The online framework: geometric intervals, one MUWP call and one batch per interval.

At each grid point ``tau_k`` the pending released jobs go to a MUWP solver
with deadline ``D = tau_{k+1} - tau_k``; the chosen set is scheduled without
regard to release times in ``[alpha tau_k, alpha tau_{k+1})``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .model import Instance, Schedule, check_online_mode, frac, total_weight, validate
from .muwp import MuwpSolver
from .offline import OfflineScheduler

MAX_ROUNDS = 400


@dataclass(frozen=True)
class IntervalSequence:
    """Grid points ``tau_k``.

    Deterministic: ``tau_0 = 0`` and ``tau_k = 2^(k-1)``; rounds start at k=1.
    Randomized: ``tau_k = eta 2^k`` for k >= 0 with ``eta = 2^-X``, X uniform
    on (0, 1]; rounds start at k=0 and ``tau_{-1} = 0`` closes the first
    interval ``(0, eta]``.
    """

    kind: str = "det"
    eta: Optional[Fraction] = None
    x: Optional[float] = None

    @property
    def first_round(self) -> int:
        return 1 if self.kind == "det" else 0

    def point(self, k: int) -> Fraction:
        if self.kind == "det":
            if k < 0:
                raise ValueError("deterministic grid starts at k = 0")
            return Fraction(0) if k == 0 else Fraction(1 << (k - 1))
        if k < -1:
            raise ValueError("randomized grid starts at k = -1")
        return Fraction(0) if k == -1 else self.eta * (1 << k)

    def deadline(self, k: int) -> Fraction:
        return self.point(k + 1) - self.point(k)

    def points(self, count: int) -> list[Fraction]:
        start = 0 if self.kind == "det" else -1
        return [self.point(k) for k in range(start, start + count)]

    def index_of(self, t) -> int:
        """Smallest k with ``t <= tau_k``, i.e. t lies in ``(tau_{k-1}, tau_k]``."""
        t = frac(t)
        if t <= 0:
            return 0 if self.kind == "det" else -1
        # smallest j >= 0 with 2^j >= ceil(ratio), done in integers
        if self.kind == "det":
            a, b = t.numerator, t.denominator
        else:
            a = t.numerator * self.eta.denominator
            b = t.denominator * self.eta.numerator
        j = (-(-a // b) - 1).bit_length()
        return j + 1 if self.kind == "det" else j


def deterministic_grid() -> IntervalSequence:
    return IntervalSequence("det")


def randomized_grid(seed=None) -> IntervalSequence:
    """Random grid with ``eta = 2^-X``; ``seed`` may be an int or a numpy Generator."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    x = 1.0 - rng.random()          # uniform on (0, 1]
    return eta_grid(2.0 ** -x, x)


def eta_grid(eta, x: Optional[float] = None) -> IntervalSequence:
    eta = frac(eta)
    if not (Fraction(1, 2) <= eta < 1):
        raise ValueError(f"eta must lie in [1/2, 1), got {eta}")
    return IntervalSequence("rand", eta, x)


def interval_start_of(C, intervals: IntervalSequence) -> Fraction:
    """Start ``tau_{k-1}`` of the interval ``(tau_{k-1}, tau_k]`` containing ``C``; 0 if C <= tau_first."""
    k = intervals.index_of(C)
    lowest = 0 if intervals.kind == "det" else -1
    if k <= lowest:
        return Fraction(0)
    return intervals.point(k - 1)


def interval_start_float(C: float, eta: float) -> float:
    """Float version of :func:`interval_start_of` for the randomized grid, for Monte Carlo use."""
    if C <= eta:
        return 0.0
    k = math.ceil(math.log2(C / eta))
    while k > 0 and C <= eta * 2.0 ** (k - 1):
        k -= 1
    while C > eta * 2.0 ** k:
        k += 1
    return eta * 2.0 ** (k - 1)


@dataclass
class RoundLog:
    k: int
    tau: Fraction
    D: Fraction
    pending: tuple[int, ...]
    selected: tuple[int, ...]
    offset: Fraction
    makespan: Fraction
    unscheduled_weight: Fraction

    def line(self) -> str:
        return (f"round {self.k} {_fmt(self.tau)} {_fmt(self.D)} {len(self.pending)} "
                f"{len(self.selected)} {_fmt(self.offset)} {_fmt(self.makespan)}")


def _fmt(x: Fraction) -> str:
    x = frac(x)
    if x.denominator == 1:
        return str(x.numerator)
    return repr(float(x))


@dataclass
class OnlineResult:
    schedule: Schedule
    objective: Fraction
    completion: dict[int, Fraction]
    delta: dict[int, Fraction]
    round_of: dict[int, int]
    rounds: list[RoundLog]
    alpha: Fraction
    beta: Fraction
    gamma: int
    total_weight: Fraction
    intervals: IntervalSequence = field(default_factory=deterministic_grid)

    def log_lines(self) -> list[str]:
        return [r.line() for r in self.rounds]


class FitError(RuntimeError):
    """A batch did not fit into its stretched interval."""


def run_online(inst: Instance, muwp: MuwpSolver, scheduler: OfflineScheduler,
               intervals: Optional[IntervalSequence] = None, check: bool = True) -> OnlineResult:
    """Simulate the online algorithm on ``inst`` and return the full record."""
    intervals = intervals or deterministic_grid()
    check_online_mode(inst)
    alpha, beta = muwp.alpha, muwp.beta
    sched = Schedule()
    result = OnlineResult(
        schedule=sched, objective=Fraction(0), completion={}, delta={}, round_of={},
        rounds=[], alpha=alpha, beta=beta, gamma=scheduler.gamma(inst),
        total_weight=total_weight(inst), intervals=intervals,
    )
    unscheduled = set(range(inst.n))
    k = intervals.first_round
    while unscheduled:
        if k - intervals.first_round > MAX_ROUNDS:
            raise RuntimeError(f"jobs {sorted(unscheduled)} still pending after {MAX_ROUNDS} rounds")
        tau, D = intervals.point(k), intervals.deadline(k)
        pending = sorted(j for j in unscheduled if inst.r[j] <= tau)
        if not pending:
            k += 1
            continue
        sol = muwp(inst, pending, D)
        offset = alpha * tau
        batch = scheduler(inst, sol.selected, offset)
        span = batch.makespan() - offset if sol.selected else Fraction(0)
        if span > alpha * D:
            raise FitError(f"round {k}: batch needs {span}, interval allows {alpha * D}")
        sched.merge(batch)
        for j in sol.selected:
            c = batch.completion[j]
            result.completion[j] = c
            result.delta[j] = c - offset
            result.round_of[j] = k
        unscheduled.difference_update(sol.selected)
        result.rounds.append(RoundLog(k, tau, D, tuple(pending), sol.selected, offset,
                                      span, sol.unscheduled_weight))
        k += 1
    result.objective = sum((inst.w[j] * c for j, c in result.completion.items()), Fraction(0))
    if check and inst.n:
        validate(inst, sched, releases=True)
    return result


@dataclass(frozen=True)
class BoundReport:
    objective: Fraction
    factor: float | Fraction
    bound: float | Fraction
    passed: bool
    randomized: bool


def competitive_factor(alpha, beta, gamma, randomized: bool = False):
    """``2 alpha beta + gamma`` (exact) or ``alpha beta / ln 2 + gamma`` (float)."""
    if randomized:
        return float(alpha * beta) / math.log(2) + float(gamma)
    return 2 * frac(alpha) * frac(beta) + frac(gamma)


def theorem_bound(result: OnlineResult, opt_upper, gamma=None, randomized: Optional[bool] = None) -> BoundReport:
    """Compare the run's objective against ``factor * opt_upper + alpha W``.

    ``opt_upper`` must be at least the true optimum. For the randomized grid the
    factor is the in-expectation one, so a single run is only indicative.
    """
    gamma = result.gamma if gamma is None else gamma
    if randomized is None:
        randomized = result.intervals.kind == "rand"
    factor = competitive_factor(result.alpha, result.beta, gamma, randomized)
    additive = result.alpha * result.total_weight
    if randomized:
        bound = factor * float(opt_upper) + float(additive)
        passed = float(result.objective) <= bound
    else:
        bound = factor * frac(opt_upper) + additive
        passed = result.objective <= bound
    return BoundReport(result.objective, factor, bound, passed, randomized)
