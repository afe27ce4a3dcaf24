"""Instance generation, algorithm-matrix runs and CSV summaries."""
from __future__ import annotations

import csv
import io
import math
import time
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from . import oracle
from .framework import competitive_factor, deterministic_grid, randomized_grid, run_online
from .model import (
    ClusterInstance, CoflowInstance, CosInstance, Instance, coflow_to_cos, frac,
    job_size, model_name, total_weight,
)
from .muwp import KNAPSACK_MAX_M, MuwpSolver
from .offline import OfflineScheduler, cluster_cos_view, dp_optimal_cos

COLUMNS = [
    "instance_id", "model", "muwp", "offline", "grid", "seed", "eta", "objective",
    "opt_upper", "bound", "bound_pass", "empirical_ratio", "runtime_ms", "lb_ratio", "factor",
]

MODELS = ("cos", "coflow", "cluster")


@dataclass
class GenParams:
    pmin: int = 1
    pmax: int = 20
    wmin: int = 1
    wmax: int = 10
    releases: str = "zero"
    horizon: int = 20
    max_cluster_size: int = 3
    max_tasks: int = 4
    density: float = 0.5

    def __post_init__(self):
        if not (1 <= self.pmin <= self.pmax):
            raise ValueError(f"need 1 <= pmin <= pmax, got {self.pmin}, {self.pmax}")
        if not (0 <= self.wmin <= self.wmax):
            raise ValueError(f"need 0 <= wmin <= wmax, got {self.wmin}, {self.wmax}")
        if self.releases not in ("zero", "uniform"):
            raise ValueError(f"release pattern must be 'zero' or 'uniform', got {self.releases!r}")
        if self.horizon < 0 or self.max_cluster_size < 1 or self.max_tasks < 1:
            raise ValueError("horizon must be >= 0, cluster size and task count >= 1")
        if not (0 < self.density <= 1):
            raise ValueError("density must lie in (0, 1]")


def gen(model: str, n: int, m: int, seed: int, params: Optional[GenParams] = None) -> Instance:
    """Seeded random instance of the given model."""
    params = params or GenParams()
    if n < 0 or m < 1:
        raise ValueError(f"need n >= 0 and m >= 1, got n={n}, m={m}")
    rng = np.random.default_rng(seed)
    w = rng.integers(params.wmin, params.wmax + 1, size=n).tolist()
    if params.releases == "zero":
        r = [0] * n
    else:
        r = rng.integers(0, params.horizon + 1, size=n).tolist()
    lo, hi = params.pmin, params.pmax + 1
    if model == "cos":
        p = rng.integers(lo, hi, size=(m, n)).tolist()
        return CosInstance(p=p, w=w, r=r)
    if model == "coflow":
        demand = []
        for _ in range(n):
            mat = rng.integers(lo, hi, size=(m, m)) * (rng.random((m, m)) < params.density)
            if not mat.any():
                mat[rng.integers(m), rng.integers(m)] = rng.integers(lo, hi)
            demand.append(mat.tolist())
        return CoflowInstance(m=m, demand=demand, w=w, r=r)
    if model == "cluster":
        sizes = rng.integers(1, params.max_cluster_size + 1, size=m).tolist()
        tasks = []
        for _ in range(n):
            job = [rng.integers(lo, hi, size=rng.integers(0, params.max_tasks + 1)).tolist()
                   for _ in range(m)]
            if not any(job):
                job[rng.integers(m)] = [int(rng.integers(lo, hi))]
            tasks.append(job)
        return ClusterInstance(sizes=sizes, tasks=tasks, w=w, r=r)
    raise ValueError(f"unknown model {model!r}")


@dataclass
class RunConfig:
    model: str = "cos"
    muwp: str = "exact"
    offline: str = "dp"
    grid: str = "det"
    trials: int = 1
    seed: int = 0
    eps: Fraction = Fraction(1, 10)
    cap_n: int = 8
    timing: bool = True
    strict: bool = False
    instances: list = field(default_factory=list)

    def __post_init__(self):
        self.eps = frac(self.eps)
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}")
        if self.grid not in ("det", "rand"):
            raise ValueError(f"grid must be 'det' or 'rand', got {self.grid!r}")
        if self.offline not in ("dp", "greedy"):
            raise ValueError(f"offline must be 'dp' or 'greedy', got {self.offline!r}")
        if self.trials < 1:
            raise ValueError("need at least one trial")
        if self.muwp == "cluster-lp" and self.model != "cluster":
            raise ValueError("cluster-lp only applies to the cluster model")
        if self.model == "cluster" and self.muwp != "cluster-lp":
            raise ValueError("the cluster model is run with cluster-lp; list scheduling "
                             "cannot honour the exact solver's deadline")
        if self.muwp not in ("exact", "lp2", "knap", "cluster-lp"):
            raise ValueError(f"unknown MUWP solver {self.muwp!r}")

    def check_instance(self, inst: Instance) -> None:
        if model_name(inst) != self.model:
            raise ValueError(f"instance is {model_name(inst)}, config expects {self.model}")
        if self.muwp == "knap":
            machines = inst.m * 2 if isinstance(inst, CoflowInstance) else inst.m
            if machines > KNAPSACK_MAX_M:
                raise ValueError(f"knap needs at most {KNAPSACK_MAX_M} machines, instance has {machines}")


def opt_upper_bound(inst: Instance, cap_n: int = 8) -> tuple[Optional[Fraction], str]:
    """A certified value >= OPT, or ``(None, '')`` past the cap.

    Exact (DP) for release-free COS and coflow; otherwise the best permutation
    or list schedule honouring release times.
    """
    if inst.n > cap_n:
        return None, ""
    if isinstance(inst, ClusterInstance):
        return oracle.brute_opt_perm_cluster(inst, with_releases=True)[1], "perm"
    view = inst if isinstance(inst, CosInstance) else coflow_to_cos(inst)
    if all(r == 0 for r in view.r):
        return dp_optimal_cos(view, range(view.n))[1], "dp"
    return oracle.brute_opt_perm_cos(view, with_releases=True)[1], "perm"


def trivial_lower_bound(inst: Instance) -> Fraction:
    """sum_j w_j (r_j + largest piece of j): no schedule can beat it."""
    if isinstance(inst, ClusterInstance):
        view = cluster_cos_view(inst)
        return sum((inst.w[j] * (inst.r[j] + max(view.column(j))) for j in range(inst.n)), Fraction(0))
    return sum((inst.w[j] * (inst.r[j] + job_size(inst, j)) for j in range(inst.n)), Fraction(0))


def fmt(x) -> str:
    if x is None or x == "":
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    x = frac(x) if not isinstance(x, float) else x
    if isinstance(x, Fraction) and x.denominator == 1:
        return str(x.numerator)
    return format(float(x), ".10g")


def run_rows(config: RunConfig, instances: Iterable[tuple[str, Instance]]):
    """Yield one result dict per (instance, trial)."""
    solver = MuwpSolver(config.muwp, eps=config.eps)
    sched = OfflineScheduler(config.offline)
    rand = config.grid == "rand"
    for inst_id, inst in instances:
        config.check_instance(inst)
        opt, _ = opt_upper_bound(inst, config.cap_n)
        lb = trivial_lower_bound(inst)
        for trial in range(config.trials if rand else 1):
            seed = config.seed + trial
            grid = randomized_grid(seed) if rand else deterministic_grid()
            t0 = time.perf_counter()
            res = run_online(inst, solver, sched, grid)
            elapsed = (time.perf_counter() - t0) * 1000
            factor = competitive_factor(res.alpha, res.beta, res.gamma, rand)
            additive = res.alpha * total_weight(inst)
            bound = passed = ratio = None
            if opt is not None:
                if rand:
                    bound = factor * float(opt) + float(additive)
                else:
                    bound = factor * opt + additive
                    passed = res.objective <= bound
                ratio = res.objective / opt if opt > 0 else None
            yield {
                "instance_id": inst_id,
                "model": config.model,
                "muwp": config.muwp,
                "offline": config.offline,
                "grid": config.grid,
                "seed": seed if rand else config.seed,
                "eta": repr(float(grid.eta)) if rand else "",
                "objective": fmt(res.objective),
                "opt_upper": fmt(opt),
                "bound": fmt(bound),
                "bound_pass": fmt(passed) if passed is not None else "",
                "empirical_ratio": fmt(ratio),
                "runtime_ms": f"{elapsed:.3f}" if config.timing else "",
                "lb_ratio": fmt(res.objective / lb) if lb > 0 else "",
                "factor": fmt(factor),
            }


def write_csv(rows: Iterable[dict], out) -> int:
    writer = csv.DictWriter(out, fieldnames=COLUMNS, lineterminator="\n")
    writer.writeheader()
    count = 0
    for row in rows:
        writer.writerow(row)
        count += 1
    return count


def expectation_violations(rows: list[dict]) -> list[str]:
    """Randomized rows: per instance, is the trial mean within bound + 3 standard errors?"""
    bad = []
    for key, group in _group_instances(rows).items():
        if len(group) < 2 or not group[0]["bound"]:
            continue
        objs = np.array([float(r["objective"]) for r in group])
        se = objs.std(ddof=1) / math.sqrt(len(objs))
        if objs.mean() > float(group[0]["bound"]) + 3 * se:
            bad.append(f"{key}: mean {objs.mean():.6g} > bound {group[0]['bound']} + 3*{se:.3g}")
    return bad


def _group_instances(rows):
    out = defaultdict(list)
    for r in rows:
        if r["grid"] == "rand":
            out[(r["instance_id"], r["model"], r["muwp"], r["offline"])].append(r)
    return out


def read_csv(paths) -> list[dict]:
    rows = []
    for path in paths:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            missing = set(COLUMNS[:13]) - set(reader.fieldnames or [])
            if missing:
                raise ValueError(f"{path}: missing columns {sorted(missing)}")
            rows.extend(reader)
    return rows


def report(rows: list[dict]) -> str:
    """Mean and max empirical ratios per model and algorithm."""
    if not rows:
        return "no rows\n"
    buf = io.StringIO()
    by_model = defaultdict(lambda: defaultdict(list))
    for r in rows:
        by_model[r["model"]][(r["muwp"], r["offline"], r["grid"])].append(r)
    for model in sorted(by_model):
        buf.write(f"== {model} ==\n")
        buf.write(f"{'muwp':<11}{'offline':<8}{'grid':<5}{'rows':>6}{'factor':>9}"
                  f"{'mean_ratio':>12}{'max_ratio':>11}{'checks':>10}\n")
        for (muwp, offline, grid), group in sorted(by_model[model].items()):
            ratios = [float(r["empirical_ratio"]) for r in group if r["empirical_ratio"]]
            if not ratios:
                ratios = [float(r["lb_ratio"]) for r in group if r.get("lb_ratio")]
            mean = f"{np.mean(ratios):.4f}" if ratios else "-"
            worst = f"{max(ratios):.4f}" if ratios else "-"
            factor = group[0].get("factor", "")
            factor = f"{float(factor):.2f}" if factor else "-"
            if grid == "det":
                checked = [r for r in group if r["bound_pass"]]
                ok = sum(r["bound_pass"] == "true" for r in checked)
                checks = f"{ok}/{len(checked)}"
            else:
                groups = _group_instances(group)
                bad = expectation_violations(group)
                checks = f"{len(groups) - len(bad)}/{len(groups)}"
            buf.write(f"{muwp:<11}{offline:<8}{grid:<5}{len(group):>6}{factor:>9}"
                      f"{mean:>12}{worst:>11}{checks:>10}\n")
            if grid == "rand":
                for key, trials in sorted(_group_instances(group).items()):
                    objs = np.array([float(r["objective"]) for r in trials])
                    se = objs.std(ddof=1) / math.sqrt(len(objs)) if len(objs) > 1 else float("nan")
                    buf.write(f"    {key[0]}: trials={len(objs)} mean={objs.mean():.6g} se={se:.3g}\n")
    return buf.getvalue()


def load_instances(paths) -> list[tuple[str, Instance]]:
    from .model import read_instance

    files = []
    for p in paths:
        p = Path(p)
        if p.is_dir():
            files.extend(sorted(q for q in p.iterdir() if q.suffix == ".txt"))
        else:
            files.append(p)
    return [(f.stem, read_instance(f)) for f in files]


def interval_start_samples(C: float, draws: int, seed: int = 0) -> np.ndarray:
    """Interval starts B for completion time C under ``draws`` random grids."""
    from .framework import interval_start_float

    rng = np.random.default_rng(seed)
    xs = 1.0 - rng.random(draws)
    etas = 2.0 ** -xs
    return np.array([interval_start_float(C, float(e)) for e in etas])


# the six algorithm combinations of the summary table: (model, muwp, offline, m)
TABLE1 = [
    ("cos", "exact", "dp", 3),
    ("cos", "lp2", "greedy", 3),
    ("cos", "knap", "dp", 2),
    ("coflow", "exact", "dp", 2),
    ("coflow", "lp2", "greedy", 2),
    ("cluster", "cluster-lp", "dp", 2),
]


def desk_table(count: int = 10, n: int = 6, trials: int = 20, seed: int = 0,
               eps=Fraction(1, 10), timing: bool = False) -> list[dict]:
    """Det and randomized rows for every TABLE1 combination on seeded instances."""
    rows = []
    for model, muwp, offline, m in TABLE1:
        params = GenParams(pmax=10, releases="uniform", horizon=10)
        insts = [(f"{model}_s{seed + k}", gen(model, n, m, seed + k, params)) for k in range(count)]
        for grid in ("det", "rand"):
            config = RunConfig(model=model, muwp=muwp, offline=offline, grid=grid,
                               trials=trials, seed=seed, eps=eps, timing=timing)
            rows.extend(run_rows(config, insts))
    return rows


def format_table(rows: list[dict]) -> str:
    """One line per combination: both factors, mean/max ratio per grid and check counts."""
    buf = io.StringIO()
    buf.write(f"{'model':<8}{'muwp':<11}{'offline':<8}{'det_bound':>10}{'rand_bound':>11}"
              f"{'det_mean':>10}{'det_max':>9}{'rand_mean':>10}{'det_ok':>8}{'rand_ok':>8}\n")
    combos = defaultdict(lambda: defaultdict(list))
    for r in rows:
        combos[(r["model"], r["muwp"], r["offline"])][r["grid"]].append(r)
    for (model, muwp, offline), grids in combos.items():
        det, rnd = grids.get("det", []), grids.get("rand", [])
        dr = [float(r["empirical_ratio"]) for r in det if r["empirical_ratio"]]
        rr = [float(r["empirical_ratio"]) for r in rnd if r["empirical_ratio"]]
        d_ok = sum(r["bound_pass"] == "true" for r in det)
        d_n = sum(bool(r["bound_pass"]) for r in det)
        groups = _group_instances(rnd)
        r_ok = len(groups) - len(expectation_violations(rnd))
        df = f"{float(det[0]['factor']):.4g}" if det else "-"
        rf = f"{float(rnd[0]['factor']):.4f}" if rnd else "-"
        buf.write(f"{model:<8}{muwp:<11}{offline:<8}{df:>10}{rf:>11}"
                  f"{_mean(dr):>10}{_max(dr):>9}{_mean(rr):>10}"
                  f"{f'{d_ok}/{d_n}':>8}{f'{r_ok}/{len(groups)}':>8}\n")
    return buf.getvalue()


def _mean(xs):
    return f"{np.mean(xs):.4f}" if xs else "-"


def _max(xs):
    return f"{max(xs):.4f}" if xs else "-"
