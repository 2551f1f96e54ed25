"""Problem JSON, sample CSV and run statistics readers / writers."""

import csv
import pathlib
from typing import Sequence, TextIO, Union

import numpy
import orjson
from numpy.typing import ArrayLike, NDArray
from pydantic import ValidationError

from tmvn.ess.errors import InvalidProblem
from tmvn.ess.models import BenchRow, ProblemFile, RunStats
from tmvn.ess.polytope import GaussianSpec, Polytope, Problem

PathLike = Union[str, pathlib.Path]


def parse_problem(content: Union[bytes, str]) -> ProblemFile:
    """Parse and validate a problem document."""
    try:
        return ProblemFile.model_validate(orjson.loads(content))
    except orjson.JSONDecodeError as e:
        raise InvalidProblem(f"Problem is not valid JSON: {e}") from e
    except ValidationError as e:
        raise InvalidProblem(f"Invalid problem: {e}") from e


def load_problem(path: PathLike) -> ProblemFile:
    """Read a problem JSON file."""
    try:
        content = pathlib.Path(path).read_bytes()
    except OSError as e:
        raise InvalidProblem(f"Could not read problem file {path}: {e}") from e

    return parse_problem(content)


def dump_problem(problem: ProblemFile) -> bytes:
    """Serialize a problem (deterministic bytes)."""
    return orjson.dumps(
        problem.model_dump(exclude_none=True), option=orjson.OPT_INDENT_2
    )


def to_problem(problem: ProblemFile) -> Problem:
    """Build the numerical problem from its file model."""
    poly = Polytope(problem.A, problem.b)
    if problem.is_standard:
        spec = GaussianSpec.standard(problem.dim)
    else:
        mean = problem.mean if problem.mean is not None else numpy.zeros(problem.dim)
        cov = (
            problem.covariance
            if problem.covariance is not None
            else numpy.eye(problem.dim)
        )
        spec = GaussianSpec(mean, cov)

    x0 = numpy.asarray(problem.x0, dtype=float) if problem.x0 is not None else None
    return Problem(poly, spec, x0)


def write_samples(path: Union[PathLike, TextIO], samples: ArrayLike) -> None:
    """Write samples as CSV: header x0,x1,... and one row per sample."""
    samples = numpy.atleast_2d(numpy.asarray(samples, dtype=float))
    header = ",".join(f"x{i}" for i in range(samples.shape[1]))
    numpy.savetxt(path, samples, fmt="%.17g", delimiter=",", header=header, comments="")


def read_samples(path: PathLike) -> NDArray:
    """Read a sample CSV written by `write_samples`."""
    try:
        with open(path, "r") as f:
            header = f.readline().strip()
            d = len(header.split(",")) if header else 0
            rows = [line for line in f if line.strip()]
    except OSError as e:
        raise InvalidProblem(f"Could not read samples {path}: {e}") from e

    if not rows:
        return numpy.zeros((0, d))

    try:
        samples = numpy.loadtxt(rows, delimiter=",", ndmin=2)
    except ValueError as e:
        raise InvalidProblem(f"Invalid sample file {path}: {e}") from e

    if samples.shape[1] != d:
        raise InvalidProblem(
            f"Sample rows have {samples.shape[1]} values, header names {d} columns"
        )

    return samples


def stats_path(out: PathLike) -> pathlib.Path:
    """Sidecar statistics path: `<out>.json`."""
    out = pathlib.Path(out)
    return out.with_name(out.name + ".json")


def write_stats(path: PathLike, stats: RunStats) -> None:
    """Write run statistics as JSON."""
    pathlib.Path(path).write_bytes(
        orjson.dumps(stats.model_dump(mode="json"), option=orjson.OPT_INDENT_2)
    )


BENCH_COLUMNS = list(BenchRow.model_fields)


def write_bench_rows(path: PathLike, rows: Sequence[BenchRow]) -> None:
    """Write benchmark rows as CSV."""
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=BENCH_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow(row.model_dump(mode="json"))
