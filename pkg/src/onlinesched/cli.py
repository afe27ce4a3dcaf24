"""Command line: ``onlinesched {gen,run,report,oracle}``."""
from __future__ import annotations

import argparse
import math
import sys
from fractions import Fraction
from pathlib import Path

from . import experiment, oracle
from .model import (
    ClusterInstance, CoflowInstance, CosInstance, coflow_to_cos, format_instance, read_instance,
)

EXIT_OK, EXIT_USAGE, EXIT_BOUND = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="onlinesched", description=__doc__)
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="write random instances")
    g.add_argument("--model", choices=experiment.MODELS, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--count", type=int, default=1, help="instances with seeds seed..seed+count-1")
    g.add_argument("--pmin", type=int, default=1)
    g.add_argument("--pmax", type=int, default=20)
    g.add_argument("--wmin", type=int, default=1)
    g.add_argument("--wmax", type=int, default=10)
    g.add_argument("--releases", choices=("zero", "uniform"), default="zero")
    g.add_argument("--horizon", type=int, default=20)
    g.add_argument("--max-cluster-size", type=int, default=3)
    g.add_argument("--max-tasks", type=int, default=4)
    g.add_argument("--out", required=True, help="file (count=1) or directory")

    r = sub.add_parser("run", help="run the online algorithm over instance files")
    r.add_argument("instances", nargs="*", help="instance files or directories of *.txt")
    r.add_argument("--model", choices=experiment.MODELS, required=True)
    r.add_argument("--muwp", choices=("exact", "lp2", "knap", "cluster-lp"), default="exact")
    r.add_argument("--offline", choices=("dp", "greedy"), default="dp")
    r.add_argument("--grid", choices=("det", "rand"), default="det")
    r.add_argument("--trials", type=int, default=1)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--eps", type=Fraction, default=Fraction(1, 10))
    r.add_argument("--cap-n", type=int, default=8, help="largest n for which opt_upper is computed")
    r.add_argument("--out", default="-")
    r.add_argument("--no-timing", action="store_true", help="leave runtime_ms blank (byte-stable output)")
    r.add_argument("--strict", action="store_true", help="exit 2 on any bound violation")

    rep = sub.add_parser("report", help="summarise result CSVs")
    rep.add_argument("csv", nargs="+")

    o = sub.add_parser("oracle", help="brute-force references")
    osub = o.add_subparsers(dest="what", required=True, parser_class=_Parser)
    op = osub.add_parser("opt", help="best permutation schedule")
    op.add_argument("instance")
    op.add_argument("--releases", action="store_true")
    ms = osub.add_parser("mswp", help="heaviest subset fitting a deadline")
    ms.add_argument("instance")
    ms.add_argument("--deadline", type=Fraction, required=True)
    cm = osub.add_parser("cluster-makespan", help="exact makespan of all jobs of a cluster instance")
    cm.add_argument("instance")
    red = osub.add_parser("reduction", help="compare switch and reduced-shop MUWP optima")
    red.add_argument("instance")
    red.add_argument("--deadline", type=Fraction, required=True)
    ist = osub.add_parser("interval-start", help="Monte Carlo mean of the interval start")
    ist.add_argument("--C", type=float, nargs="+", default=[1.0, 3.7, 100.0])
    ist.add_argument("--draws", type=int, default=100_000)
    ist.add_argument("--seed", type=int, default=0)
    return ap


def _cmd_gen(args) -> int:
    params = experiment.GenParams(
        pmin=args.pmin, pmax=args.pmax, wmin=args.wmin, wmax=args.wmax,
        releases=args.releases, horizon=args.horizon,
        max_cluster_size=args.max_cluster_size, max_tasks=args.max_tasks,
    )
    out = Path(args.out)
    if args.count == 1 and out.suffix:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(format_instance(experiment.gen(args.model, args.n, args.m, args.seed, params)))
        return EXIT_OK
    out.mkdir(parents=True, exist_ok=True)
    for k in range(args.count):
        seed = args.seed + k
        inst = experiment.gen(args.model, args.n, args.m, seed, params)
        (out / f"{args.model}_n{args.n}_m{args.m}_s{seed}.txt").write_text(format_instance(inst))
    return EXIT_OK


def _cmd_run(args) -> int:
    config = experiment.RunConfig(
        model=args.model, muwp=args.muwp, offline=args.offline, grid=args.grid,
        trials=args.trials, seed=args.seed, eps=args.eps, cap_n=args.cap_n,
        timing=not args.no_timing, strict=args.strict,
    )
    instances = experiment.load_instances(args.instances)
    rows = list(experiment.run_rows(config, instances))
    if args.out == "-":
        experiment.write_csv(rows, sys.stdout)
    else:
        with open(args.out, "w", newline="") as fh:
            experiment.write_csv(rows, fh)
    if args.strict:
        bad = [f"{r['instance_id']}: objective {r['objective']} > bound {r['bound']}"
               for r in rows if r["bound_pass"] == "false"]
        bad += experiment.expectation_violations(rows)
        if bad:
            print("bound violations:\n  " + "\n  ".join(bad), file=sys.stderr)
            return EXIT_BOUND
    return EXIT_OK


def _cmd_report(args) -> int:
    sys.stdout.write(experiment.report(experiment.read_csv(args.csv)))
    return EXIT_OK


def _cmd_oracle(args) -> int:
    if args.what == "interval-start":
        target = 1 / (2 * math.log(2))
        for C in args.C:
            b = experiment.interval_start_samples(C, args.draws, args.seed) / C
            se = b.std(ddof=1) / math.sqrt(len(b))
            print(f"C={C:g} mean(B)/C={b.mean():.6f} se={se:.2e} target={target:.6f}")
        return EXIT_OK
    inst = read_instance(args.instance)
    if args.what == "opt":
        if isinstance(inst, ClusterInstance):
            order, val = oracle.brute_opt_perm_cluster(inst, with_releases=args.releases)
        else:
            view = inst if isinstance(inst, CosInstance) else coflow_to_cos(inst)
            order, val = oracle.brute_opt_perm_cos(view, with_releases=args.releases)
        print(f"order {' '.join(map(str, order))}\nobjective {val}")
    elif args.what == "mswp":
        if not isinstance(inst, CosInstance):
            raise ValueError("mswp oracle needs a COS instance")
        chosen, weight = oracle.brute_mswp(inst, range(inst.n), args.deadline)
        print(f"set {' '.join(map(str, chosen))}\nweight {weight}")
    elif args.what == "cluster-makespan":
        if not isinstance(inst, ClusterInstance):
            raise ValueError("cluster-makespan needs a CC instance")
        print(oracle.brute_cluster_makespan(inst, range(inst.n)))
    elif args.what == "reduction":
        if not isinstance(inst, CoflowInstance):
            raise ValueError("reduction needs a COFLOW instance")
        ok, W, W_red = oracle.lemma5_check(inst, args.deadline)
        print(f"W {W}\nW_reduced {W_red}\npass {str(ok).lower()}")
        return EXIT_OK if ok else EXIT_BOUND
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handler = {"gen": _cmd_gen, "run": _cmd_run, "report": _cmd_report, "oracle": _cmd_oracle}[args.cmd]
    try:
        return handler(args)
    except (ValueError, OSError) as exc:
        print(f"onlinesched: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
