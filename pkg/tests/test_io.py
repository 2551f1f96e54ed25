"""test tmvn.ess.io."""

import os

import numpy
import orjson
import pytest

from tmvn.ess.errors import InvalidProblem
from tmvn.ess.io import (
    dump_problem,
    load_problem,
    parse_problem,
    read_samples,
    stats_path,
    to_problem,
    write_samples,
    write_stats,
)
from tmvn.ess.models import RunStats

from .conftest import DATA_DIR


def test_load_problem(box_problem, gaussian_problem):
    """Problem files are parsed and converted."""
    problem = load_problem(box_problem)
    assert problem.dim == 2
    assert problem.is_standard

    converted = to_problem(problem)
    assert converted.poly.n_constraints == 4
    assert converted.spec.is_standard
    numpy.testing.assert_array_equal(converted.x0, [0.0, 0.0])

    converted = to_problem(load_problem(gaussian_problem))
    assert not converted.spec.is_standard
    assert converted.x0 is None
    numpy.testing.assert_allclose(converted.spec.cholesky @ converted.spec.cholesky.T, [[1.0, 0.3], [0.3, 2.0]])


def test_mean_only():
    """A missing covariance defaults to the identity."""
    problem = parse_problem(b'{"A": [[1.0]], "b": [1.0], "mean": [0.5]}')
    assert not problem.is_standard
    numpy.testing.assert_array_equal(to_problem(problem).spec.covariance, [[1.0]])


def test_invalid_problems(tmp_path):
    """Malformed files raise InvalidProblem."""
    with pytest.raises(InvalidProblem):
        load_problem(os.path.join(DATA_DIR, "mismatch.json"))

    with pytest.raises(InvalidProblem):
        load_problem(tmp_path / "missing.json")

    with pytest.raises(InvalidProblem):
        parse_problem(b"{not json")

    with pytest.raises(InvalidProblem):
        parse_problem(b'{"A": [[1.0, 2.0], [1.0]], "b": [1.0, 1.0]}')

    with pytest.raises(InvalidProblem):
        parse_problem(b'{"A": [[1.0]], "b": [1.0], "x0": [0.0, 0.0]}')

    with pytest.raises(InvalidProblem):
        parse_problem(b'{"A": [[1.0]], "b": [1.0], "covariance": [[1.0, 0.0]]}')

    with pytest.raises(InvalidProblem):
        parse_problem(b'{"A": [], "b": []}')


def test_dump_problem(box_problem):
    """Dumped problems parse back to the same model."""
    problem = load_problem(box_problem)
    content = dump_problem(problem)
    assert parse_problem(content) == problem
    assert "mean" not in orjson.loads(content)


def test_samples_csv(tmp_path):
    """Header and full precision values."""
    samples = numpy.random.default_rng(0).standard_normal((5, 3))
    path = tmp_path / "samples.csv"
    write_samples(path, samples)

    with open(path) as f:
        assert f.readline().strip() == "x0,x1,x2"

    numpy.testing.assert_array_equal(read_samples(path), samples)

    write_samples(path, numpy.zeros((0, 3)))
    assert read_samples(path).shape == (0, 3)

    path.write_text("x0,x1\n1.0,2.0,3.0\n")
    with pytest.raises(InvalidProblem):
        read_samples(path)

    with pytest.raises(InvalidProblem):
        read_samples(tmp_path / "missing.csv")


def test_stats(tmp_path):
    """Sidecar statistics."""
    assert stats_path(tmp_path / "out.csv") == tmp_path / "out.csv.json"

    stats = RunStats(
        n=2,
        chains=1,
        burn_in=0,
        thinning=1,
        rejections=0,
        steps=2,
        seed=3,
        precision="f32",
        wall_time=0.1,
        mean=[0.0],
        variance=[1.0],
    )
    write_stats(tmp_path / "stats.json", stats)
    body = orjson.loads((tmp_path / "stats.json").read_bytes())
    assert body["precision"] == "f32"
    assert body["seed"] == 3
