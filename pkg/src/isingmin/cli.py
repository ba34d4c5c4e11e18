"""``isingmin`` command line: generate, solve, factor, bench, classify.

Every command that writes JSON echoes its validated run configuration under
``run_config``.  Failures exit with status 1 (2 for usage errors) and print
``{"error": ..., "message": ...}`` on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from .bench import DEFAULT_SHAPES, scaling_benchmark
from .exact import BRANCHING_ORDERS, BnbOptions, branch_and_bound, exhaustive_ground_state
from .factoring.encode import ENCODERS
from .factoring.experiment import factoring_experiment
from .io import (export_distribution, export_report, export_samples, export_timings,
                 parse_instance, read_instance, serialize_instance)
from .lattice import COUPLING_DISTS, FIELD_DISTS, generate_lattice
from .local import default_workers, multi_start
from .model import InstanceClass, classify_hardness

DEFAULT_SEED = 0
SOLVERS = ("exhaustive", "bnb", "local")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    seed: int = DEFAULT_SEED
    workers: int = 1
    instance: str | None = None
    generator: dict | None = None
    solver: str | None = None
    num_starts: int = 1
    limits: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)

    def validate(self) -> "RunConfig":
        if self.seed < 0:
            raise UsageError("seed must be non-negative")
        if self.workers < 1:
            raise UsageError("workers must be >= 1")
        if self.num_starts < 1:
            raise UsageError("starts must be >= 1")
        if self.solver is not None and self.solver not in SOLVERS:
            raise UsageError(f"solver must be one of {SOLVERS}")
        for k, v in self.limits.items():
            if v is not None and v <= 0:
                raise UsageError(f"{k} must be positive")
        return self

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v not in (None, {}, [])}


def _dims(text: str) -> list[int]:
    try:
        dims = [int(t) for t in text.split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad dimension list {text!r}") from None
    if not dims:
        raise argparse.ArgumentTypeError("empty dimension list")
    return dims


def _workers(value) -> int:
    return int(value) if value is not None else default_workers()


def _emit(text: str, path: str | None):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


# -- commands ----------------------------------------------------------------------


def cmd_generate(args) -> int:
    system = generate_lattice(args.dims, args.periodic, args.dist, args.field, args.seed)
    _emit(serialize_instance(system), args.output)
    return 0


def _load_system(args, cfg: RunConfig):
    if args.instance:
        cfg.instance = args.instance
        if args.instance == "-":
            return parse_instance(sys.stdin.read())
        return read_instance(args.instance)
    if args.dims:
        cfg.generator = {"dims": args.dims, "periodic": args.periodic, "dist": args.dist,
                         "field": args.field, "seed": args.gen_seed}
        return generate_lattice(args.dims, args.periodic, args.dist, args.field, args.gen_seed)
    raise UsageError("give an instance path or --dims")


def cmd_solve(args) -> int:
    cfg = RunConfig("solve", seed=args.seed, workers=_workers(args.workers), solver=args.solver,
                    num_starts=args.starts,
                    limits={"node_limit": args.node_limit, "time_limit": args.time_limit},
                    options={"use_dominance": not args.no_dominance, "order": args.order},
                    outputs={"report": args.output, "samples": args.samples,
                             "timing": not args.no_timing})
    cfg.limits = {k: v for k, v in cfg.limits.items() if v is not None}
    system = _load_system(args, cfg)
    cfg.validate()
    if args.solver == "exhaustive":
        report = exhaustive_ground_state(system)
    elif args.solver == "bnb":
        report = branch_and_bound(system, BnbOptions(
            use_dominance=not args.no_dominance, branching_order=args.order,
            node_limit=args.node_limit, time_limit=args.time_limit))
    else:
        report, samples = multi_start(system, args.starts, args.seed, cfg.workers)
        report.extra["start_energies"] = [s.energy for s in samples]
        if args.samples:
            export_samples(samples, args.samples, timing=not args.no_timing)
    if args.no_timing:
        report.wall_time = 0.0
    _emit(export_report(report, run_config=cfg.to_dict()), args.output)
    return 0


def cmd_factor(args) -> int:
    encoders = ["direct", "ancilla"] if args.encoder == "both" else [args.encoder]
    if args.truncate is not None:
        if args.encoder not in ("direct", "truncated"):
            raise UsageError("--truncate applies to the direct encoding only")
        encoders = ["truncated"]
    cfg = RunConfig("factor", seed=args.seed, workers=_workers(args.workers),
                    num_starts=args.starts,
                    options={"N": args.N, "encoders": encoders, "n_x": args.nx, "n_y": args.ny,
                             "max_arity": args.truncate or 2},
                    outputs={"csv": args.csv, "json": args.output}).validate()
    summaries = []
    for enc in encoders:
        try:
            res = factoring_experiment(args.N, enc, args.starts, args.seed, args.nx, args.ny,
                                       max_arity=args.truncate or 2, max_workers=cfg.workers)
        except (TypeError, ValueError) as exc:
            raise UsageError(str(exc)) from None
        summaries.append(res.summary())
        if args.csv:
            path = Path(args.csv)
            if len(encoders) > 1:
                path = path.with_name(f"{path.stem}.{enc}{path.suffix or '.csv'}")
            export_distribution(res, path)
    doc = {"run_config": cfg.to_dict(), "results": summaries}
    if len(summaries) == 2:
        a, b = summaries
        doc["comparison"] = {
            "success_probability": {a["encoder"]: a["success_probability"],
                                    b["encoder"]: b["success_probability"]},
            "entropy_bits": {a["encoder"]: a["entropy_bits"], b["encoder"]: b["entropy_bits"]},
            "num_spins": {a["encoder"]: a["num_spins"], b["encoder"]: b["num_spins"]},
        }
    _emit(json.dumps(doc, indent=2, sort_keys=True) + "\n", args.output)
    return 0


def cmd_bench(args) -> int:
    shapes = [tuple(_dims(s)) for s in args.shapes] if args.shapes else list(DEFAULT_SHAPES)
    rows, ratios = scaling_benchmark(shapes, rounds=args.rounds, seed=args.seed,
                                     passes=args.passes)
    if args.csv:
        export_timings(rows, args.csv)
    else:
        sys.stdout.write(export_timings(rows))
    doc = {
        "run_config": RunConfig("bench", seed=args.seed,
                                options={"shapes": shapes, "rounds": args.rounds,
                                         "passes": args.passes}).to_dict(),
        "sizes": sorted({r.num_spins for r in rows}),
        "ratios": ratios,
        "max_ratio": max(ratios) if ratios else None,
    }
    if args.output:
        Path(args.output).write_text(json.dumps(doc, indent=2) + "\n")
    elif args.csv:
        sys.stdout.write(json.dumps(doc, indent=2) + "\n")
    return 0


def cmd_classify(args) -> int:
    ic = InstanceClass(args.dims, args.periodic, args.field, args.signs)
    doc = {"instance_class": asdict(ic), "hardness": classify_hardness(ic).value}
    sys.stdout.write(json.dumps(doc) + "\n")
    return 0


# -- parser ------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="isingmin", description="Ising spin-glass ground states and factoring.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def lattice_args(sp, dims_required):
        sp.add_argument("--dims", type=_dims, required=dims_required,
                        help="comma-separated extents, e.g. 15,15")
        sp.add_argument("--periodic", type=int, default=0,
                        help="number of leading dimensions that wrap (default 0)")
        sp.add_argument("--dist", choices=COUPLING_DISTS, default="gaussian")
        sp.add_argument("--field", choices=FIELD_DISTS, default="zero")

    g = sub.add_parser("generate", help="write a random lattice instance")
    lattice_args(g, True)
    g.add_argument("--seed", type=int, default=DEFAULT_SEED)
    g.add_argument("-o", "--output", help="instance path (default stdout)")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", help="find a low or minimum energy configuration")
    s.add_argument("instance", nargs="?", help=".ising file, or - for stdin")
    lattice_args(s, False)
    s.add_argument("--gen-seed", type=int, default=DEFAULT_SEED,
                   help="generator seed when --dims is used")
    s.add_argument("--solver", choices=SOLVERS, default="bnb")
    s.add_argument("--starts", type=int, default=1, help="random starts for local search")
    s.add_argument("--seed", type=int, default=DEFAULT_SEED)
    s.add_argument("--workers", type=int, default=None,
                   help="threads for multi-start (default: ISINGMIN_WORKERS or CPU count)")
    s.add_argument("--no-dominance", action="store_true", help="disable prune-by-dominance")
    s.add_argument("--order", choices=BRANCHING_ORDERS, default="degree_desc")
    s.add_argument("--node-limit", type=int)
    s.add_argument("--time-limit", type=float, help="seconds")
    s.add_argument("--samples", help="per-start CSV path (local solver)")
    s.add_argument("--no-timing", action="store_true",
                   help="write zero wall times so outputs depend only on inputs")
    s.add_argument("-o", "--output", help="report JSON path (default stdout)")
    s.set_defaults(func=cmd_solve)

    f = sub.add_parser("factor", help="factor N through a spin-system encoding")
    f.add_argument("N", type=int)
    f.add_argument("--encoder", choices=(*ENCODERS, "both"), default="direct")
    f.add_argument("--truncate", type=int, metavar="K",
                   help="drop couplings over K spins from the direct encoding")
    f.add_argument("--starts", type=int, default=100)
    f.add_argument("--seed", type=int, default=DEFAULT_SEED)
    f.add_argument("--nx", type=int, help="bits of x (default ceil(L/2))")
    f.add_argument("--ny", type=int, help="bits of y (default L-1)")
    f.add_argument("--workers", type=int, default=None)
    f.add_argument("--csv", help="distribution CSV path")
    f.add_argument("-o", "--output", help="summary JSON path (default stdout)")
    f.set_defaults(func=cmd_factor)

    b = sub.add_parser("bench", help="per-pass timing across lattice sizes")
    b.add_argument("--shapes", nargs="*", help="lattice shapes, e.g. 100,100 250,400")
    b.add_argument("--rounds", type=int, default=5)
    b.add_argument("--passes", type=int, help="passes per measurement (default: size based)")
    b.add_argument("--seed", type=int, default=DEFAULT_SEED)
    b.add_argument("--csv", help="timing CSV path (default stdout)")
    b.add_argument("-o", "--output", help="summary JSON path")
    b.set_defaults(func=cmd_bench)

    c = sub.add_parser("classify", help="complexity class of a lattice family")
    c.add_argument("--dims", type=int, required=True, help="number of dimensions")
    c.add_argument("--periodic", type=int, default=0)
    c.add_argument("--field", action="store_true", help="nonzero magnetizations")
    c.add_argument("--signs", choices=("mixed", "nonnegative"), default="mixed")
    c.set_defaults(func=cmd_classify)
    return p


def _fail(kind: str, message: str, code: int) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        return _fail("usage", str(exc), 2)
    except (ValueError, OSError, LookupError, TypeError) as exc:
        return _fail(type(exc).__name__, str(exc), 1)


if __name__ == "__main__":
    sys.exit(main())
