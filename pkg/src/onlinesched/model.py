"""Instances, schedules and objective evaluation for the three environments.

Concurrent open shop (COS), coflow on a non-blocking switch, and concurrent
clusters of identical machines. Every number is kept as a ``Fraction`` so that
bound checks downstream are exact comparisons.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, Sequence, Union

Number = Union[int, Fraction]


def frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(x)
    return Fraction(str(x)) if isinstance(x, str) else Fraction(x)


def _frac_tuple(xs) -> tuple:
    return tuple(frac(x) for x in xs)


def as_integers(values: Iterable[Fraction]) -> tuple[list[int], int]:
    """Scale rationals to integers by the lcm of their denominators."""
    values = [frac(v) for v in values]
    scale = math.lcm(*(v.denominator for v in values)) if values else 1
    return [v.numerator * (scale // v.denominator) for v in values], scale


# --------------------------------------------------------------------------
# Instances
# --------------------------------------------------------------------------

def _check_jobs(n: int, w, r):
    if len(w) != n or len(r) != n:
        raise ValueError(f"expected {n} weights and releases, got {len(w)} and {len(r)}")
    if any(x < 0 for x in w):
        raise ValueError("weights must be nonnegative")
    if any(x < 0 for x in r):
        raise ValueError("release times must be nonnegative")


@dataclass(frozen=True)
class CosInstance:
    """Concurrent open shop: ``p[i][j]`` is job j's work on machine i."""

    p: tuple[tuple[Fraction, ...], ...]
    w: tuple[Fraction, ...]
    r: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "p", tuple(_frac_tuple(row) for row in self.p))
        object.__setattr__(self, "w", _frac_tuple(self.w))
        object.__setattr__(self, "r", _frac_tuple(self.r))
        _check_jobs(len(self.w), self.w, self.r)
        for row in self.p:
            if len(row) != self.n:
                raise ValueError(f"processing row has {len(row)} entries, expected {self.n}")
            if any(x < 0 for x in row):
                raise ValueError("processing times must be nonnegative")

    @classmethod
    def build(cls, p, w, r=None):
        w = list(w)
        return cls(p=p, w=w, r=r if r is not None else [0] * len(w))

    @property
    def n(self) -> int:
        return len(self.w)

    @property
    def m(self) -> int:
        return len(self.p)

    def column(self, j: int) -> tuple[Fraction, ...]:
        return tuple(row[j] for row in self.p)


@dataclass(frozen=True)
class CoflowInstance:
    """Coflows on an m x m switch; ``demand[j][i][o]`` is data from input i to output o."""

    m: int
    demand: tuple[tuple[tuple[int, ...], ...], ...]
    w: tuple[Fraction, ...]
    r: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(
            self, "demand",
            tuple(tuple(tuple(int(x) for x in row) for row in mat) for mat in self.demand),
        )
        object.__setattr__(self, "w", _frac_tuple(self.w))
        object.__setattr__(self, "r", _frac_tuple(self.r))
        _check_jobs(len(self.demand), self.w, self.r)
        for mat in self.demand:
            if len(mat) != self.m or any(len(row) != self.m for row in mat):
                raise ValueError(f"each coflow needs a {self.m}x{self.m} demand matrix")
            if any(x < 0 for row in mat for x in row):
                raise ValueError("demands must be nonnegative")

    @property
    def n(self) -> int:
        return len(self.w)


@dataclass(frozen=True)
class ClusterInstance:
    """Concurrent clusters; ``tasks[j][i]`` lists the task durations of job j on cluster i."""

    sizes: tuple[int, ...]
    tasks: tuple[tuple[tuple[Fraction, ...], ...], ...]
    w: tuple[Fraction, ...]
    r: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(int(s) for s in self.sizes))
        object.__setattr__(
            self, "tasks",
            tuple(tuple(_frac_tuple(ts) for ts in job) for job in self.tasks),
        )
        object.__setattr__(self, "w", _frac_tuple(self.w))
        object.__setattr__(self, "r", _frac_tuple(self.r))
        _check_jobs(len(self.tasks), self.w, self.r)
        if any(s < 1 for s in self.sizes):
            raise ValueError("every cluster needs at least one machine")
        for job in self.tasks:
            if len(job) != self.m:
                raise ValueError(f"each job needs one task list per cluster ({self.m})")
            if any(x < 0 for ts in job for x in ts):
                raise ValueError("task durations must be nonnegative")

    @property
    def n(self) -> int:
        return len(self.w)

    @property
    def m(self) -> int:
        return len(self.sizes)


Instance = Union[CosInstance, CoflowInstance, ClusterInstance]


def total_weight(inst: Instance, jobs: Iterable[int] | None = None) -> Fraction:
    if jobs is None:
        jobs = range(inst.n)
    return sum((inst.w[j] for j in jobs), Fraction(0))


def cos_batch_makespan(inst: CosInstance, S: Iterable[int]) -> Fraction:
    """Largest machine load of ``S``, i.e. its makespan when releases are ignored."""
    S = list(S)
    if not S:
        return Fraction(0)
    return max(sum((row[j] for j in S), Fraction(0)) for row in inst.p)


@functools.lru_cache(maxsize=256)
def coflow_to_cos(inst: CoflowInstance) -> CosInstance:
    """Port-load reduction: machine i is input port i, machine m+o is output port o."""
    m = inst.m
    p = [[0] * inst.n for _ in range(2 * m)]
    for j, mat in enumerate(inst.demand):
        for i in range(m):
            p[i][j] = sum(mat[i])
        for o in range(m):
            p[m + o][j] = sum(mat[i][o] for i in range(m))
    return CosInstance(p=p, w=inst.w, r=inst.r)


def cluster_aggregates(inst: ClusterInstance, j: int, i: int) -> tuple[Fraction, Fraction]:
    """(total work, largest task) of job j's subjob on cluster i."""
    ts = inst.tasks[j][i]
    return sum(ts, Fraction(0)), max(ts, default=Fraction(0))


def job_size(inst: Instance, j: int) -> Fraction:
    """Largest single piece of work of job j (used by the online-mode check)."""
    if isinstance(inst, CosInstance):
        return max(inst.column(j), default=Fraction(0))
    if isinstance(inst, CoflowInstance):
        return max(coflow_to_cos(inst).column(j), default=Fraction(0))
    return max((cluster_aggregates(inst, j, i)[1] for i in range(inst.m)), default=Fraction(0))


def check_online_mode(inst: Instance) -> None:
    small = [j for j in range(inst.n) if job_size(inst, j) < 1]
    if small:
        raise ValueError(f"online mode requires every job to have a piece of size >= 1; violated by jobs {small}")


def model_name(inst: Instance) -> str:
    if isinstance(inst, CosInstance):
        return "cos"
    if isinstance(inst, CoflowInstance):
        return "coflow"
    if isinstance(inst, ClusterInstance):
        return "cluster"
    raise TypeError(f"not an instance: {type(inst).__name__}")


# --------------------------------------------------------------------------
# Schedules
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Segment:
    job: int
    start: Fraction
    end: Fraction


@dataclass
class Schedule:
    """Ordered segments per execution unit plus per-job completion times.

    Units are machine indices for COS, port indices (inputs then outputs) for
    coflows and ``(cluster, machine)`` pairs for clusters. A job that owns no
    segment still has a completion time, which is where its batch started.
    """

    units: dict[Hashable, list[Segment]] = field(default_factory=dict)
    completion: dict[int, Fraction] = field(default_factory=dict)

    def add(self, unit: Hashable, job: int, start: Number, end: Number) -> None:
        self.units.setdefault(unit, []).append(Segment(job, frac(start), frac(end)))

    @property
    def jobs(self) -> set[int]:
        return set(self.completion)

    def makespan(self) -> Fraction:
        return max(self.completion.values(), default=Fraction(0))

    def merge(self, other: "Schedule") -> None:
        overlap = self.jobs & other.jobs
        if overlap:
            raise ValueError(f"jobs {sorted(overlap)} scheduled twice")
        for unit, segs in other.units.items():
            mine = self.units.setdefault(unit, [])
            mine.extend(segs)
            mine.sort(key=lambda s: (s.start, s.end))
        self.completion.update(other.completion)


def _required_work(inst: Instance, j: int) -> dict[Hashable, object]:
    if isinstance(inst, CosInstance):
        return {i: inst.p[i][j] for i in range(inst.m)}
    if isinstance(inst, CoflowInstance):
        red = coflow_to_cos(inst)
        return {i: red.p[i][j] for i in range(red.m)}
    return {i: sorted(inst.tasks[j][i]) for i in range(inst.m)}


def validate(inst: Instance, sched: Schedule, jobs: Iterable[int] | None = None,
             releases: bool = True) -> None:
    """Raise ``ValueError`` unless ``sched`` is a valid schedule of ``jobs``.

    ``releases=False`` skips release-time checks, for the release-free batch
    schedules built inside one interval.
    """
    expected = set(range(inst.n)) if jobs is None else set(jobs)
    if sched.jobs != expected:
        raise ValueError(f"schedule covers jobs {sorted(sched.jobs)}, expected {sorted(expected)}")

    done: dict[int, dict] = {j: {} for j in expected}
    last_end: dict[int, Fraction] = {}
    for unit, segs in sched.units.items():
        prev_end = None
        for seg in segs:
            if seg.job not in expected:
                raise ValueError(f"unit {unit!r} runs unknown job {seg.job}")
            if seg.end <= seg.start:
                raise ValueError(f"empty or reversed segment {seg} on unit {unit!r}")
            if prev_end is not None and seg.start < prev_end:
                raise ValueError(f"overlapping or unsorted segments on unit {unit!r} at {seg}")
            if releases and seg.start < inst.r[seg.job]:
                raise ValueError(f"job {seg.job} starts at {seg.start} before its release {inst.r[seg.job]}")
            prev_end = seg.end
            last_end[seg.job] = max(last_end.get(seg.job, seg.end), seg.end)
            key = unit[0] if isinstance(inst, ClusterInstance) else unit
            if isinstance(inst, ClusterInstance):
                if not (0 <= unit[1] < inst.sizes[unit[0]]):
                    raise ValueError(f"cluster {unit[0]} has no machine {unit[1]}")
                done[seg.job].setdefault(key, []).append(seg.end - seg.start)
            else:
                done[seg.job][key] = done[seg.job].get(key, 0) + (seg.end - seg.start)

    for j in expected:
        need = _required_work(inst, j)
        for key, amount in need.items():
            got = done[j].get(key, [] if isinstance(inst, ClusterInstance) else 0)
            if isinstance(inst, ClusterInstance):
                got = sorted(x for x in got)
                amount = [x for x in amount if x > 0]
            if got != amount:
                raise ValueError(f"job {j} receives {got} on unit {key!r}, needs {amount}")
        extra = set(done[j]) - set(need)
        if extra:
            raise ValueError(f"job {j} runs on unknown units {sorted(extra)}")
        c = sched.completion[j]
        if j in last_end and c != last_end[j]:
            raise ValueError(f"job {j} completion {c} differs from its last segment end {last_end[j]}")
        if releases and c < inst.r[j]:
            raise ValueError(f"job {j} completes before its release")


def objective(inst: Instance, sched: Schedule, releases: bool = True) -> Fraction:
    """Total weighted completion time of a validated schedule."""
    validate(inst, sched, releases=releases)
    return sum((inst.w[j] * c for j, c in sched.completion.items()), Fraction(0))


# --------------------------------------------------------------------------
# Text format
# --------------------------------------------------------------------------

class InstanceFormatError(ValueError):
    def __init__(self, line: int, msg: str):
        super().__init__(f"line {line}: {msg}")
        self.line = line


class _Lines:
    def __init__(self, text: str):
        self._rows = [
            (k + 1, raw.split("#", 1)[0].split())
            for k, raw in enumerate(text.splitlines())
        ]
        self._rows = [(k, toks) for k, toks in self._rows if toks]
        self._pos = 0
        self.last = 0

    def take(self, count: int, what: str) -> tuple[int, list[str]]:
        if count == 0:
            # an empty row is written as a blank line, which was dropped
            return self.last, []
        if self._pos >= len(self._rows):
            raise InstanceFormatError(self.last + 1, f"unexpected end of input, expected {what}")
        lineno, toks = self._rows[self._pos]
        self._pos += 1
        self.last = lineno
        if len(toks) != count:
            raise InstanceFormatError(lineno, f"expected {count} tokens for {what}, got {len(toks)}")
        return lineno, toks

    def numbers(self, count: int, what: str) -> list[Fraction]:
        lineno, toks = self.take(count, what)
        return [_parse_number(t, lineno) for t in toks]

    def finish(self) -> None:
        if self._pos < len(self._rows):
            raise InstanceFormatError(self._rows[self._pos][0], "trailing tokens after instance")


def _parse_number(tok: str, lineno: int) -> Fraction:
    try:
        return Fraction(tok)
    except (ValueError, ZeroDivisionError):
        raise InstanceFormatError(lineno, f"not a number: {tok!r}") from None


def _parse_count(tok: str, lineno: int) -> int:
    try:
        v = int(tok)
    except ValueError:
        raise InstanceFormatError(lineno, f"not an integer: {tok!r}") from None
    if v < 0:
        raise InstanceFormatError(lineno, f"negative count {v}")
    return v


def parse_instance(text: str) -> Instance:
    lines = _Lines(text)
    if not lines._rows:
        raise InstanceFormatError(1, "empty input")
    lineno, toks = lines._rows[0]
    kind = toks[0].upper() if toks else ""
    if kind not in ("COS", "COFLOW", "CC"):
        raise InstanceFormatError(lineno, f"unknown instance kind {toks[0]!r}")
    _, toks = lines.take(3, "header")
    n, m = _parse_count(toks[1], lineno), _parse_count(toks[2], lineno)
    w = lines.numbers(n, "weights")
    r = lines.numbers(n, "release times")
    try:
        if kind == "COS":
            p = [lines.numbers(n, f"processing times of machine {i}") for i in range(m)]
            inst: Instance = CosInstance(p=p, w=w, r=r)
        elif kind == "COFLOW":
            demand = []
            for j in range(n):
                mat = []
                for i in range(m):
                    ln, toks = lines.take(m, f"demand row {i} of coflow {j}")
                    row = []
                    for t in toks:
                        x = _parse_number(t, ln)
                        if x.denominator != 1:
                            raise InstanceFormatError(ln, f"coflow demand must be an integer: {t!r}")
                        row.append(int(x))
                    mat.append(row)
                demand.append(mat)
            inst = CoflowInstance(m=m, demand=demand, w=w, r=r)
        else:
            ln, toks = lines.take(m, "cluster sizes")
            sizes = [_parse_count(t, ln) for t in toks]
            tasks = []
            for j in range(n):
                job = []
                for i in range(m):
                    if lines._pos >= len(lines._rows):
                        raise InstanceFormatError(lines.last + 1, f"missing tasks of job {j} on cluster {i}")
                    ln, toks = lines._rows[lines._pos]
                    count = _parse_count(toks[0], ln)
                    _, toks = lines.take(count + 1, f"tasks of job {j} on cluster {i}")
                    job.append([_parse_number(t, ln) for t in toks[1:]])
                tasks.append(job)
            inst = ClusterInstance(sizes=sizes, tasks=tasks, w=w, r=r)
    except InstanceFormatError:
        raise
    except ValueError as exc:
        raise InstanceFormatError(lines.last, str(exc)) from None
    lines.finish()
    return inst


def read_instance(path) -> Instance:
    with open(path) as fh:
        return parse_instance(fh.read())


def _fmt(x) -> str:
    x = frac(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _row(xs: Sequence) -> str:
    return " ".join(_fmt(x) for x in xs)


def format_instance(inst: Instance) -> str:
    out = []
    if isinstance(inst, CosInstance):
        out.append(f"COS {inst.n} {inst.m}")
        out += [_row(inst.w), _row(inst.r)]
        out += [_row(row) for row in inst.p]
    elif isinstance(inst, CoflowInstance):
        out.append(f"COFLOW {inst.n} {inst.m}")
        out += [_row(inst.w), _row(inst.r)]
        for mat in inst.demand:
            out += [_row(row) for row in mat]
    else:
        out.append(f"CC {inst.n} {inst.m}")
        out += [_row(inst.w), _row(inst.r), _row(inst.sizes)]
        for job in inst.tasks:
            for ts in job:
                out.append(" ".join([str(len(ts))] + [_fmt(x) for x in ts]))
    return "\n".join(out) + "\n"


def write_instance(inst: Instance, path) -> None:
    with open(path, "w") as fh:
        fh.write(format_instance(inst))
