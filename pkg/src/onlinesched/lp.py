"""Exact bounded-variable primal simplex for small dense LPs.

Solves ``min/max c.x  s.t.  A x <= b,  lo <= x <= hi`` over ``Fraction``.
Bland's smallest-index rule is used for both the entering and the leaving
variable, so the method terminates without perturbation.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .model import frac

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"

_INF = None  # marker for an absent upper bound


@dataclass(frozen=True)
class LpProblem:
    c: tuple[Fraction, ...]
    A: tuple[tuple[Fraction, ...], ...]
    b: tuple[Fraction, ...]
    lo: tuple[Fraction, ...]
    hi: tuple[Fraction, ...]
    sense: str = "min"

    def __post_init__(self):
        n = len(self.c)
        object.__setattr__(self, "c", tuple(frac(x) for x in self.c))
        object.__setattr__(self, "A", tuple(tuple(frac(x) for x in row) for row in self.A))
        object.__setattr__(self, "b", tuple(frac(x) for x in self.b))
        object.__setattr__(self, "lo", tuple(frac(x) for x in self.lo))
        object.__setattr__(self, "hi", tuple(frac(x) for x in self.hi))
        if self.sense not in ("min", "max"):
            raise ValueError(f"sense must be 'min' or 'max', got {self.sense!r}")
        if len(self.A) != len(self.b):
            raise ValueError(f"{len(self.A)} constraint rows but {len(self.b)} right-hand sides")
        if any(len(row) != n for row in self.A):
            raise ValueError(f"every constraint row needs {n} coefficients")
        if len(self.lo) != n or len(self.hi) != n:
            raise ValueError(f"bounds must have length {n}")
        if any(l > h for l, h in zip(self.lo, self.hi)):
            raise ValueError("lower bound exceeds upper bound")

    @classmethod
    def boxed(cls, c, A=(), b=(), lo=0, hi=1, sense="min"):
        """Convenience constructor with scalar box bounds."""
        n = len(c)
        return cls(c=c, A=A, b=b, lo=[lo] * n, hi=[hi] * n, sense=sense)


@dataclass(frozen=True)
class LpResult:
    status: str
    x: Optional[tuple[Fraction, ...]]
    value: Optional[Fraction]
    pivots: int = 0


class _Tableau:
    """Dense tableau over structural, slack and artificial columns."""

    def __init__(self, rows, rhs, upper, basis, values):
        self.T = rows            # m x N, equals B^-1 [A | I | art]
        self.rhs = rhs
        self.upper = upper       # per column upper bound (lower is 0), None = inf
        self.basis = basis       # column index per row
        self.x = values          # current value of every column
        self.pivots = 0

    def iterate(self, cost, allowed, max_pivots):
        m, N = len(self.T), len(self.x)
        while True:
            pos = {col: i for i, col in enumerate(self.basis)}
            enter = None
            for j in range(N):
                if j in pos or not allowed[j]:
                    continue
                red = cost[j] - sum(cost[self.basis[i]] * self.T[i][j] for i in range(m) if self.T[i][j])
                at_upper = self.upper[j] is not None and self.x[j] == self.upper[j]
                if (red < 0 and not at_upper) or (red > 0 and self.x[j] != 0):
                    enter = j
                    direction = 1 if red < 0 else -1
                    break
            if enter is None:
                return
            # the entering column moves by direction*t; basic var i moves by -direction*t*T[i][enter]
            best_t, leave, leave_col, leave_to_upper = None, None, None, False
            if self.upper[enter] is not None:
                best_t, leave_col = self.upper[enter], enter
            for i in range(m):
                a = self.T[i][enter]
                if not a:
                    continue
                slope = -direction * a
                col = self.basis[i]
                if slope < 0:
                    t, to_upper = self.x[col] / -slope, False
                elif self.upper[col] is not None:
                    t, to_upper = (self.upper[col] - self.x[col]) / slope, True
                else:
                    continue
                if best_t is None or t < best_t or (t == best_t and col < leave_col):
                    best_t, leave, leave_col, leave_to_upper = t, i, col, to_upper
            if best_t is None:
                raise ArithmeticError("LP is unbounded; boxed problems cannot be")
            self.pivots += 1
            if self.pivots > max_pivots:
                raise RuntimeError(f"simplex exceeded {max_pivots} pivots")
            t = best_t
            self.x[enter] += direction * t
            for i in range(m):
                a = self.T[i][enter]
                if a:
                    self.x[self.basis[i]] -= direction * t * a
            if leave is None:
                continue  # bound flip of the entering variable
            self.x[leave_col] = self.upper[leave_col] if leave_to_upper else Fraction(0)
            self._pivot(leave, enter)

    def _pivot(self, r, j):
        row = self.T[r]
        piv = row[j]
        row = [v / piv for v in row]
        self.T[r] = row
        for i in range(len(self.T)):
            if i != r:
                f = self.T[i][j]
                if f:
                    self.T[i] = [a - f * b for a, b in zip(self.T[i], row)]
        self.basis[r] = j


def solve(problem: LpProblem, max_pivots: int = 100_000) -> LpResult:
    """Return an exact optimal vertex, or ``status == 'infeasible'``."""
    n, m = len(problem.c), len(problem.A)
    sign = 1 if problem.sense == "min" else -1
    # shift x = lo + y, 0 <= y <= hi - lo
    width = [h - l for l, h in zip(problem.lo, problem.hi)]
    rhs = [
        bi - sum(a * l for a, l in zip(row, problem.lo))
        for row, bi in zip(problem.A, problem.b)
    ]
    # columns: y (n), slack (m), artificial (one per row with negative rhs)
    art_rows = [i for i in range(m) if rhs[i] < 0]
    N = n + m + len(art_rows)
    T, basis = [], []
    values = [Fraction(0)] * N
    upper = list(width) + [_INF] * (m + len(art_rows))
    art_of = {i: n + m + k for k, i in enumerate(art_rows)}
    for i in range(m):
        row = [Fraction(0)] * N
        for j in range(n):
            row[j] = problem.A[i][j]
        row[n + i] = Fraction(1)
        if i in art_of:
            # A y + s - a = rhs < 0 ; flip so the artificial is basic with value -rhs
            row[art_of[i]] = Fraction(-1)
            row = [-v for v in row]
            basis.append(art_of[i])
            values[art_of[i]] = -rhs[i]
        else:
            basis.append(n + i)
            values[n + i] = rhs[i]
        T.append(row)
    tab = _Tableau(T, rhs, upper, basis, values)

    if art_rows:
        phase1 = [Fraction(0)] * N
        for col in art_of.values():
            phase1[col] = Fraction(1)
        tab.iterate(phase1, [True] * N, max_pivots)
        if any(tab.x[col] != 0 for col in art_of.values()):
            return LpResult(INFEASIBLE, None, None, tab.pivots)
        for col in art_of.values():
            tab.upper[col] = Fraction(0)

    cost = [sign * c for c in problem.c] + [Fraction(0)] * (N - n)
    allowed = [j < n + m for j in range(N)]
    tab.iterate(cost, allowed, max_pivots)
    x = tuple(l + tab.x[j] for j, l in enumerate(problem.lo))
    value = sum((c * v for c, v in zip(problem.c, x)), Fraction(0))
    return LpResult(OPTIMAL, x, value, tab.pivots)


def is_feasible_point(problem: LpProblem, x: Sequence[Fraction]) -> bool:
    """Exact check of ``A x <= b`` and the box."""
    if any(not (l <= v <= h) for l, v, h in zip(problem.lo, x, problem.hi)):
        return False
    return all(
        sum((a * v for a, v in zip(row, x)), Fraction(0)) <= bi
        for row, bi in zip(problem.A, problem.b)
    )
