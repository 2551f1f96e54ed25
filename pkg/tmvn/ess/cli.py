"""tmvn-ess command line interface.

    tmvn-ess sample --problem p.json --out samples.csv --samples 1000 --chains 4
    tmvn-ess check --problem p.json --out samples.csv
    tmvn-ess bench --family random --dims 64 128 256 --out bench.csv
    tmvn-ess gen --dims 32 --seed 1 --out p.json

"""

import argparse
import logging
import pathlib
import sys
from typing import List, Optional

import numpy

from tmvn.ess import __version__
from tmvn.ess.bench import gen_random_instance, time_methods, worst_case_instance
from tmvn.ess.enums import BenchFamily, Precision
from tmvn.ess.errors import (
    EXIT_CHECK_FAILED,
    EXIT_INPUT_ERROR,
    EXIT_OK,
    ESSError,
    exit_code,
)
from tmvn.ess.io import (
    dump_problem,
    load_problem,
    read_samples,
    stats_path,
    to_problem,
    write_bench_rows,
    write_samples,
    write_stats,
)
from tmvn.ess.logger import logger
from tmvn.ess.models import ProblemFile, RunStats
from tmvn.ess.polytope import residuals
from tmvn.ess.sampler import SamplerConfig, sample_gaussian
from tmvn.ess.settings import BenchSettings, SamplerSettings
from tmvn.ess.utils import Timer


def _parser() -> argparse.ArgumentParser:
    sampler = SamplerSettings()
    bench = BenchSettings()

    parser = argparse.ArgumentParser(
        prog="tmvn-ess",
        description="Rejection-free elliptical slice sampling of truncated normals.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    commands = parser.add_subparsers(dest="command", required=True)

    sample = commands.add_parser("sample", help="Sample a truncated normal problem.")
    sample.add_argument("--problem", required=True, type=pathlib.Path)
    sample.add_argument("--out", required=True, type=pathlib.Path)
    sample.add_argument("--samples", type=int, default=1000, help="Samples per chain.")
    sample.add_argument("--chains", type=int, default=1)
    sample.add_argument("--burn-in", type=int, default=sampler.burn_in)
    sample.add_argument("--thinning", type=int, default=sampler.thinning)
    sample.add_argument("--trim-eps", type=float, default=sampler.trim_eps)
    sample.add_argument("--tol", type=float, default=sampler.tol)
    sample.add_argument("--seed", type=int, default=None)
    sample.add_argument(
        "--precision",
        choices=[p.value for p in Precision],
        default=sampler.precision.value,
    )
    sample.add_argument("--workers", type=int, default=sampler.workers)
    sample.add_argument(
        "--x0",
        type=float,
        nargs="+",
        default=None,
        help="Strictly feasible start (overrides the problem's x0).",
    )

    check = commands.add_parser("check", help="Check samples against a problem.")
    check.add_argument("--problem", required=True, type=pathlib.Path)
    check.add_argument("--out", required=True, type=pathlib.Path, help="Sample CSV.")
    check.add_argument("--tol", type=float, default=1e-9)

    run = commands.add_parser("bench", help="Time interval constructions and sampling.")
    run.add_argument(
        "--family",
        choices=[f.value for f in BenchFamily],
        default=BenchFamily.random.value,
    )
    run.add_argument(
        "--dims",
        type=int,
        nargs="+",
        default=[16, 64, 256],
        help="Dimensions (random family) or constraint counts (worst-case family).",
    )
    run.add_argument("--out", required=True, type=pathlib.Path)
    run.add_argument("--reps", type=int, default=bench.reps)
    run.add_argument("--chains", type=int, default=bench.chains)
    run.add_argument("--steps", type=int, default=bench.steps)
    run.add_argument("--workers", type=int, default=bench.workers)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument(
        "--precision",
        choices=[p.value for p in Precision],
        default=sampler.precision.value,
    )
    run.add_argument(
        "--jump-eps",
        type=float,
        default=bench.jump_eps,
        help="Fixed angular step of the likelihood jump baseline.",
    )

    gen = commands.add_parser("gen", help="Write a random problem with a feasible start.")
    gen.add_argument("--dims", type=int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True, type=pathlib.Path)

    return parser


def cmd_sample(args: argparse.Namespace) -> int:
    """Sample a problem file; write the samples CSV and the stats sidecar."""
    problem = to_problem(load_problem(args.problem))
    cfg = SamplerConfig.from_settings(
        precision=Precision(args.precision),
        trim_eps=args.trim_eps,
        feasibility_tol=args.tol,
        burn_in=args.burn_in,
        thinning=args.thinning,
        seed=args.seed,
        workers=args.workers,
    )

    with Timer() as t:
        result = sample_gaussian(
            problem, args.samples, args.chains, cfg, start=args.x0
        )

    write_samples(args.out, result.samples)

    n = result.n_samples
    stats = RunStats(
        n=n,
        chains=result.chains,
        burn_in=cfg.burn_in,
        thinning=cfg.thinning,
        rejections=result.rejections,
        steps=result.steps * result.chains,
        seed=result.seed,
        precision=cfg.precision,
        wall_time=t.elapsed,
        mean=result.samples.mean(axis=0).tolist() if n else [],
        variance=result.samples.var(axis=0).tolist() if n else [],
    )
    write_stats(stats_path(args.out), stats)

    logger.info(
        f"Wrote {n} samples to {args.out} ({result.rejections} rejection(s), {t.elapsed:.3f}s)"
    )
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    """Check that every sample satisfies A x <= b + tol."""
    problem = to_problem(load_problem(args.problem))
    samples = read_samples(args.out)
    if samples.shape[0] == 0:
        print("0 samples, nothing to check")
        return EXIT_OK

    res = residuals(problem.poly, samples)
    worst = res.max(axis=1)
    max_violation = float(worst.max())
    print(f"max violation: {max_violation:.17g}")

    bad = numpy.flatnonzero(worst > args.tol)
    if bad.size:
        print(f"row {int(bad[0])} violates the constraints by {float(worst[bad[0]]):.17g}")
        return EXIT_CHECK_FAILED

    return EXIT_OK


def cmd_gen(args: argparse.Namespace) -> int:
    """Write a random problem, including its strictly feasible start."""
    inst = gen_random_instance(args.dims, numpy.random.default_rng(args.seed))
    problem = ProblemFile(
        A=inst.poly.a_rows.tolist(),
        b=inst.poly.b.tolist(),
        x0=inst.x0.tolist(),
    )
    args.out.write_bytes(dump_problem(problem))
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    """Run the timing harness and write its rows as CSV."""
    family = BenchFamily(args.family)
    if family == BenchFamily.random:
        rng = numpy.random.default_rng(args.seed)
        instances = [gen_random_instance(d, rng) for d in args.dims]
    else:
        instances = [worst_case_instance(m) for m in args.dims]

    rows = time_methods(
        instances,
        reps=args.reps,
        chains=args.chains,
        steps=args.steps,
        workers=args.workers,
        precision=Precision(args.precision),
        seed=args.seed,
        jump_eps=args.jump_eps,
    )
    write_bench_rows(args.out, rows)
    return EXIT_OK


COMMANDS = {
    "sample": cmd_sample,
    "check": cmd_check,
    "gen": cmd_gen,
    "bench": cmd_bench,
}


def main(argv: Optional[List[str]] = None) -> int:
    """CLI entry point."""
    args = _parser().parse_args(argv)

    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(asctime)s %(name)s %(levelname)s %(message)s")

    try:
        return COMMANDS[args.command](args)
    except ESSError as e:
        print(f"error: {e}", file=sys.stderr)
        return exit_code(e)
    except ValueError as e:
        # pydantic validation errors of the sampler configuration
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
