"""Command-line entry point: ``lsalloc {growth,simulate,couple,sweep}``.

Exit codes: 0 success, 1 a check was violated, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

from . import alloc, coupling, experiment, growth
from .graph import GraphError
from .rng import RngPlan
from .specs import GRAMMAR_VERSION, SpecError, __doc__ as SPEC_DOC, parse_graph, parse_process, parse_weights

log = logging.getLogger("lsalloc")


class UsageError(Exception):
    pass


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_growth(args) -> int:
    g = parse_graph(args.graph)
    gammas = tuple(args.gamma or ())
    for gm in gammas:
        if not 0 < gm <= 0.5:
            raise UsageError(f"gamma must lie in (0, 0.5], got {gm}")
    rep = growth.growth_report(g, gammas)
    _emit(rep.to_json() + "\n", args.output)
    return 0


def _stop(args) -> tuple[str, int | None]:
    if args.until_cover:
        return "cover", None
    if args.until_blanket:
        if not args.delta:
            raise UsageError("--until-blanket needs at least one --delta")
        return "blanket", None
    if args.balls is None:
        raise UsageError("give --balls N, --until-cover or --until-blanket")
    if args.balls < 0:
        raise UsageError("--balls must be >= 0")
    return "balls", args.balls


def cmd_simulate(args) -> int:
    g = parse_graph(args.graph)
    proc = parse_process(args.process)
    stop, m = _stop(args)
    deltas = tuple(args.delta or ())
    if any(d <= 1 for d in deltas):
        raise UsageError("--delta values must exceed 1")
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    plan = RngPlan(args.seed)
    runs = []
    for t in range(args.trials):
        if proc.kind == "coupon":
            rec = alloc.run_coupon_collector(g, plan, trial=t)
            runs.append({"trial": t, **rec.to_dict()})
            continue
        if proc.poisson:
            if stop != "balls" or not m:
                raise UsageError("poisson processes need --balls N > 0 (the mean)")
            rec = alloc.run_poissonized(g, proc.kind, m, plan, trial=t, d=proc.d, deltas=deltas, trace=args.trace)
        elif proc.kind == "local-search":
            rec = alloc.run_local_search(g, m, plan, stop=stop, deltas=deltas, trial=t, trace=args.trace)
        else:
            rec = alloc.run_d_choice(g, m, proc.d, plan, stop=stop, deltas=deltas, trial=t, trace=args.trace)
        if args.trace:
            if not args.trace_dir:
                raise UsageError("--trace needs --trace-dir")
            Path(args.trace_dir).mkdir(parents=True, exist_ok=True)
            (Path(args.trace_dir) / f"trace_{t}.csv").write_text(rec.trace_csv(), encoding="utf-8")
            rec.trace = None
        runs.append({"trial": t, **rec.to_dict()})
    if args.format == "json":
        doc = {"graph": args.graph, "process": str(proc), "seed": args.seed, "stop": stop,
               "balls": m, "runs": runs}
        text = json.dumps(doc, sort_keys=True) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        bl = [f"blanket_{d!r}" for d in sorted(set(float(x) for x in deltas))]
        w.writerow(["trial", "balls", "max_load", "min_load", "cover_time", *bl])
        for r in runs:
            bt = r.get("blanket_times", {})
            w.writerow([r["trial"], r.get("balls", r.get("cover_time")), r.get("max_load", ""), r.get("min_load", ""),
                        "" if r["cover_time"] is None else r["cover_time"],
                        *["" if bt.get(k[8:]) is None else bt.get(k[8:]) for k in bl]])
        text = buf.getvalue()
    _emit(text, args.output)
    return 0


def cmd_couple(args) -> int:
    g = parse_graph(args.graph)
    plan = RngPlan(args.seed)
    if args.cases < 1:
        raise UsageError("--cases must be >= 1")
    if args.kind in ("lipschitz", "removal"):
        k = args.balls if args.balls is not None else 2 * g.n
        if k < 1:
            raise UsageError("--balls must be >= 1 for this coupling")
        fn = coupling.lipschitz_cases if args.kind == "lipschitz" else coupling.removal_cases
        rep = fn(g, k, args.cases, plan)
    elif args.kind == "majorization":
        m = args.balls if args.balls is not None else 4 * g.n
        mu = parse_weights(args.mu, g)
        rep = coupling.majorization_cases(g, mu, m, args.cases, plan)
    else:
        rounds = args.balls if args.balls is not None else alloc.cover_cap(g.n)
        rep = coupling.coupon_cases(g, rounds, args.cases, plan)
    _emit(rep.to_json() + "\n", args.output)
    return 0 if rep.ok else 1


def cmd_sweep(args) -> int:
    try:
        text = Path(args.config).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(str(exc)) from None
    cfg = experiment.load_config(text)
    if args.workers:
        cfg.workers = args.workers
    res = experiment.run_sweep(cfg, progress=lambda msg: print(msg, file=sys.stderr, flush=True))
    _emit(res.to_csv() if args.format == "csv" else res.to_json() + "\n", args.output)
    status = 0
    for band in args.band or ():
        try:
            metric, den, tol = band.rsplit(":", 2)
            report = experiment.band_check(res, metric, den, float(tol))
        except (ValueError, KeyError) as exc:
            raise UsageError(f"bad --band {band!r}: {exc}") from None
        print(f"band {metric}/{den}: {report}", file=sys.stderr)
        if not report.passed:
            status = 1
    return status


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="lsalloc",
        description="Local search balls-into-bins simulations.",
        epilog=f"spec grammar v{GRAMMAR_VERSION}:\n{SPEC_DOC}",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("growth", help="neighborhood-growth radii R1, R2")
    g.add_argument("graph")
    g.add_argument("--gamma", type=float, action="append")
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_growth)

    s = sub.add_parser("simulate", help="run an allocation process")
    s.add_argument("graph")
    s.add_argument("process")
    stop = s.add_mutually_exclusive_group()
    stop.add_argument("--balls", type=int)
    stop.add_argument("--until-cover", action="store_true")
    stop.add_argument("--until-blanket", action="store_true")
    s.add_argument("--delta", type=float, action="append", help="blanket-time delta (repeatable)")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--trials", type=int, default=1)
    s.add_argument("--format", choices=("json", "csv"), default="json")
    s.add_argument("--trace", action="store_true")
    s.add_argument("--trace-dir")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("couple", help="check a coupling over randomized cases")
    c.add_argument("kind", choices=("lipschitz", "removal", "majorization", "coupon"))
    c.add_argument("graph")
    c.add_argument("--balls", type=int, help="balls per case (rounds for coupon)")
    c.add_argument("--cases", type=int, default=100)
    c.add_argument("--mu", default="zero", help="weight function for majorization")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("-o", "--output")
    c.set_defaults(func=cmd_couple)

    w = sub.add_parser("sweep", help="run a sweep described by a config file")
    w.add_argument("config")
    w.add_argument("--format", choices=("csv", "json"), default="csv")
    w.add_argument("--band", action="append", help="METRIC:DENOMINATOR:TOLERANCE, e.g. max_load:r1:2")
    w.add_argument("--workers", type=int)
    w.add_argument("-o", "--output")
    w.set_defaults(func=cmd_sweep)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, SpecError, GraphError, experiment.ConfigError, growth.GrowthError) as exc:
        print(f"lsalloc {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except alloc.InvariantViolation as exc:
        print(f"lsalloc {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
