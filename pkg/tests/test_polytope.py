"""test tmvn.ess.polytope."""

import numpy
import pytest

from tmvn.ess.errors import CholeskyError, DimensionMismatch, InvalidProblem
from tmvn.ess.polytope import (
    GaussianSpec,
    Polytope,
    Problem,
    is_feasible,
    residuals,
    strict_feasibility_violation,
    to_whitened,
    unwhiten,
    whiten,
)


def random_spd(rng, d):
    """Random well conditioned SPD matrix."""
    m = rng.standard_normal((d, d))
    return m @ m.T + d * numpy.eye(d)


def test_polytope_validation():
    """Check shape and value validation."""
    poly = Polytope([[1.0, 2.0]], [3.0])
    assert poly.n_constraints == 1
    assert poly.dim == 2
    assert not poly.a_rows.flags.writeable

    with pytest.raises(DimensionMismatch):
        Polytope([[1.0], [2.0]], [1.0])

    with pytest.raises(DimensionMismatch):
        Polytope([1.0, 2.0], [1.0])

    with pytest.raises(InvalidProblem):
        Polytope([[numpy.nan]], [1.0])

    with pytest.raises(InvalidProblem):
        Polytope([[1.0]], [numpy.inf])

    # zero rows are accepted
    Polytope([[0.0, 0.0]], [-1.0])


def test_from_bounds():
    """Box polytopes skip infinite bounds."""
    poly = Polytope.from_bounds([-1.0], [3.0])
    numpy.testing.assert_array_equal(poly.a_rows, [[1.0], [-1.0]])
    numpy.testing.assert_array_equal(poly.b, [3.0, 1.0])

    poly = Polytope.from_bounds([0.5, -numpy.inf], [numpy.inf, 2.0])
    numpy.testing.assert_array_equal(poly.a_rows, [[-1.0, 0.0], [0.0, 1.0]])
    numpy.testing.assert_array_equal(poly.b, [-0.5, 2.0])

    with pytest.raises(InvalidProblem):
        Polytope.from_bounds([-numpy.inf], [numpy.inf])

    with pytest.raises(DimensionMismatch):
        Polytope.from_bounds([0.0, 1.0], [1.0])


def test_residuals():
    """Residuals are A x - b."""
    numpy.testing.assert_array_equal(residuals(Polytope([[1.0]], [0.0]), [0.0]), [0.0])
    numpy.testing.assert_allclose(
        residuals(Polytope([[1.0], [-1.0]], [3.0, 1.0]), [0.5]), [-2.5, -1.5]
    )

    rng = numpy.random.default_rng(0)
    a_rows, b, x = rng.standard_normal((7, 4)), rng.standard_normal(7), rng.standard_normal(4)
    res = residuals(Polytope(a_rows, b), x)
    numpy.testing.assert_allclose(res, [a_rows[i].dot(x) - b[i] for i in range(7)])

    # batches
    xs = rng.standard_normal((3, 4))
    assert residuals(Polytope(a_rows, b), xs).shape == (3, 7)

    with pytest.raises(DimensionMismatch):
        residuals(Polytope(a_rows, b), numpy.zeros(3))


def test_is_feasible():
    """Feasibility within tolerance."""
    assert is_feasible(Polytope([[1.0]], [0.0]), [0.0], tol=0.0)

    poly = Polytope(numpy.eye(2), [-1e-7, 1.0])
    assert is_feasible(poly, [0.0, 0.0], tol=1e-6)
    assert not is_feasible(poly, [0.0, 0.0], tol=0.0)

    poly = Polytope(numpy.eye(2), [-1e-3, 1.0])
    assert not is_feasible(poly, [0.0, 0.0], tol=1e-6)

    with pytest.raises(ValueError):
        is_feasible(poly, [0.0, 0.0], tol=-1.0)


def test_strict_feasibility_violation():
    """First constraint with a non-negative residual."""
    poly = Polytope.from_bounds([-1.0, -1.0], [1.0, 1.0])
    assert strict_feasibility_violation(poly, [0.0, 0.0]) is None
    # rows: x0 <= 1, -x0 <= 1, x1 <= 1, -x1 <= 1
    assert strict_feasibility_violation(poly, [0.0, 1.0]) == 2
    assert strict_feasibility_violation(poly, [-2.0, 1.0]) == 1


def test_gaussian_spec():
    """Cholesky is computed once and checked."""
    spec = GaussianSpec([0.0, 1.0], [[4.0, 0.0], [0.0, 9.0]])
    numpy.testing.assert_allclose(spec.cholesky, [[2.0, 0.0], [0.0, 3.0]])
    assert spec.dim == 2
    assert not spec.is_standard

    with pytest.raises(CholeskyError):
        GaussianSpec([0.0, 0.0], [[1.0, 2.0], [2.0, 1.0]])

    with pytest.raises(CholeskyError):
        GaussianSpec([0.0, 0.0], [[1.0, 0.1], [0.0, 1.0]])

    with pytest.raises(DimensionMismatch):
        GaussianSpec([0.0], [[1.0, 0.0], [0.0, 1.0]])

    std = GaussianSpec.standard(3)
    assert std.is_standard
    numpy.testing.assert_array_equal(std.cholesky, numpy.eye(3))


def test_whiten():
    """Whitening of the constraints."""
    spec = GaussianSpec([2.0], [[4.0]])
    white = whiten(spec, Polytope([[1.0]], [6.0]))
    numpy.testing.assert_allclose(white.a_rows, [[2.0]])
    numpy.testing.assert_allclose(white.b, [4.0])

    poly = Polytope([[1.0, 1.0]], [1.0])
    assert whiten(GaussianSpec.standard(2), poly) is poly

    with pytest.raises(DimensionMismatch):
        whiten(GaussianSpec.standard(3), poly)


def test_whitening_consistency(rng):
    """Feasible points stay feasible in whitened coordinates."""
    for d in (1, 3, 8, 20):
        spec = GaussianSpec(rng.standard_normal(d), random_spd(rng, d))
        a_rows = rng.standard_normal((2 * d, d))
        x = rng.standard_normal(d)
        poly = Polytope(a_rows, a_rows @ x + rng.uniform(0, 1, 2 * d))

        white = whiten(spec, poly)
        u = to_whitened(spec, x)
        assert numpy.all(residuals(white, u) <= 1e-5)
        numpy.testing.assert_allclose(residuals(white, u), residuals(poly, x), atol=1e-8)
        numpy.testing.assert_allclose(unwhiten(spec, u), x, atol=1e-10)

    # batches
    spec = GaussianSpec(rng.standard_normal(4), random_spd(rng, 4))
    xs = rng.standard_normal((5, 4))
    numpy.testing.assert_allclose(unwhiten(spec, to_whitened(spec, xs)), xs, atol=1e-10)


def test_problem():
    """Problem bundles polytope, normal and start."""
    poly = Polytope.from_bounds([-1.0, -1.0], [1.0, 1.0])
    problem = Problem(poly, GaussianSpec.standard(2), [0.0, 0.5])
    assert problem.dim == 2
    assert not problem.x0.flags.writeable

    with pytest.raises(DimensionMismatch):
        Problem(poly, GaussianSpec.standard(3))

    with pytest.raises(DimensionMismatch):
        Problem(poly, GaussianSpec.standard(2), [0.0])
