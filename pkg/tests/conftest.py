"""tmvn.ess tests configuration."""

import os

import numpy
import pytest
from fastapi.testclient import TestClient

from tmvn.ess.polytope import Polytope

DATA_DIR = os.path.join(os.path.dirname(__file__), "fixtures")


@pytest.fixture
def app(monkeypatch):
    """App fixture."""
    monkeypatch.setenv("TMVN_ESS_API_DEBUG", "TRUE")
    monkeypatch.setenv("TMVN_ESS_API_MAX_SAMPLES", "5000")

    from tmvn.ess.main import app

    with TestClient(app) as client:
        yield client


@pytest.fixture
def rng():
    """Seeded random generator."""
    return numpy.random.default_rng(20240611)


@pytest.fixture
def box():
    """[-1, 2] x [-0.5, 1.5] box."""
    return Polytope.from_bounds([-1.0, -0.5], [2.0, 1.5])


@pytest.fixture
def box_problem():
    """Path of a 2-D box problem with a start."""
    return os.path.join(DATA_DIR, "box.json")


@pytest.fixture
def gaussian_problem():
    """Path of a correlated normal problem without start."""
    return os.path.join(DATA_DIR, "gaussian.json")


def random_pairs(rng, m, grid=None):
    """Random angle pairs alpha <= beta, optionally snapped to a grid."""
    a = rng.uniform(0, 2 * numpy.pi, m)
    b = rng.uniform(0, 2 * numpy.pi, m)
    if grid:
        step = 2 * numpy.pi / grid
        a = numpy.round(a / step) * step
        b = numpy.round(b / step) * step
        a, b = numpy.minimum(a, 2 * numpy.pi), numpy.minimum(b, 2 * numpy.pi)
    return numpy.minimum(a, b), numpy.maximum(a, b)


def separated_pairs(rng, m, gap=1e-4):
    """Angle pairs with every endpoint at least `gap` from the others and from 0."""
    while True:
        points = numpy.sort(rng.uniform(0.01, 2 * numpy.pi - 0.01, 2 * m))
        if numpy.all(numpy.diff(points) >= gap):
            break

    pairs = rng.permutation(points).reshape(m, 2)
    return pairs.min(axis=1), pairs.max(axis=1)


def segments_close(left, right, atol=1e-12):
    """Compare two segment lists endpoint by endpoint."""
    if len(left) != len(right):
        return False

    return all(
        abs(a[0] - b[0]) <= atol and abs(a[1] - b[1]) <= atol for a, b in zip(left, right)
    )
