"""test tmvn.ess.angles."""

import numpy
import pytest

from tmvn.ess.angles import (
    NO_INTERSECTION,
    TANGENT_INSIDE,
    TANGENT_OUTSIDE,
    TWO_ROOTS,
    EllipseProjection,
    NoIntersection,
    Tangent,
    TwoRoots,
    interval_pairs,
    project,
    project_arrays,
    solve_root_arrays,
    solve_roots,
    to_interval_pair,
)
from tmvn.ess.errors import DimensionMismatch, InfeasibleCurrentPoint, InvalidConstraint
from tmvn.ess.intervals import ConstraintAngles, active_intervals_fast
from tmvn.ess.polytope import Polytope

TWO_PI = 2 * numpy.pi


def proj(p, q, offset):
    """Projection helper."""
    return EllipseProjection(p, q, offset, float(numpy.hypot(p, q)))


def random_feasible(rng, m):
    """Random (p, q, offset) with offset >= p."""
    p = rng.standard_normal(m)
    q = rng.standard_normal(m)
    offset = p + rng.exponential(1.0, m)
    return p, q, offset


def test_project():
    """Projections of the ellipse on each row."""
    poly = Polytope([[1.0, 0.0], [0.0, 2.0], [0.0, 0.0]], [1.0, 2.0, 3.0])
    out = project(poly, [1.0, 1.0], [0.5, -1.0])
    assert out[0] == EllipseProjection(1.0, 0.5, 1.0, float(numpy.hypot(1.0, 0.5)))
    assert out[1].p == 2.0 and out[1].q == -2.0
    assert out[2] == EllipseProjection(0.0, 0.0, 3.0, 0.0)

    p, q = project_arrays(poly, numpy.ones((4, 2)), numpy.zeros((4, 2)))
    assert p.shape == q.shape == (4, 3)

    with pytest.raises(DimensionMismatch):
        project(poly, [1.0, 1.0, 1.0], [0.0, 0.0, 0.0])


def test_solve_roots_examples():
    """Two roots, no intersection and zero rows."""
    res = solve_roots(proj(-1.0, 0.0, 0.0))
    assert isinstance(res, TwoRoots)
    assert res.alpha == pytest.approx(numpy.pi / 2)
    assert res.beta == pytest.approx(3 * numpy.pi / 2)

    assert solve_roots(proj(0.3, 0.4, 1.0)) == NoIntersection()

    res = solve_roots(proj(0.5, 0.5, 0.6))
    half = numpy.arccos(0.6 / numpy.sqrt(0.5))
    assert res.alpha == pytest.approx(numpy.pi / 4 - half, abs=1e-12)
    assert res.beta == pytest.approx(numpy.pi / 4 + half, abs=1e-12)
    for theta in (res.alpha, res.beta):
        assert abs(0.5 * numpy.cos(theta) + 0.5 * numpy.sin(theta) - 0.6) < 1e-12

    assert solve_roots(EllipseProjection(0.0, 0.0, 0.0, 0.0)) == NoIntersection()
    with pytest.raises(InvalidConstraint):
        solve_roots(EllipseProjection(0.0, 0.0, -1.0, 0.0))


def test_solve_roots_infeasible():
    """Current point outside of the halfspace."""
    with pytest.raises(InfeasibleCurrentPoint):
        solve_roots(proj(2.0, 0.0, 1.0))

    # within tolerance
    res = solve_roots(proj(1.0 + 1e-10, 0.5, 1.0), tol=1e-9)
    assert isinstance(res, TwoRoots)
    assert res.alpha == 0.0


def test_solve_roots_on_boundary():
    """Current point on the boundary, arc ending at angle 0."""
    res = solve_roots(proj(0.0, -1.0, 0.0))
    assert res == TwoRoots(numpy.pi, TWO_PI)

    # same arc, mirrored: it starts at the current point
    res = solve_roots(proj(0.0, 1.0, 0.0))
    assert res == TwoRoots(0.0, numpy.pi)

    # the constraint is kept: 3 pi / 2 is not active
    poly = Polytope([[0.0, -1.0]], [0.0])
    p, q = project_arrays(poly, [1.0, 0.0], [0.0, 1.0])
    alphas, betas, infeasible = interval_pairs(p, q, poly.b)
    assert not infeasible.any()
    lo, hi = numpy.sort(alphas), numpy.sort(betas)
    assert lo[0] == pytest.approx(numpy.pi)
    assert hi[0] == TWO_PI

    intervals = active_intervals_fast(ConstraintAngles(alphas, betas))
    assert intervals.segments == ((0.0, alphas[0]),)
    assert not intervals.contains(3 * numpy.pi / 2)


def test_tangents():
    """rho = 1 and rho = -1."""
    res = solve_roots(proj(0.0, 1.0, 1.0))
    assert res == Tangent(numpy.pi / 2, 1.0)
    assert to_interval_pair(res) == (0.0, 0.0)

    res = solve_roots(proj(0.0, -1.0, 1.0))
    assert res.rho == 1.0
    assert res.angle == pytest.approx(3 * numpy.pi / 2)

    # the single feasible angle of rho = -1 is the current point
    res = solve_roots(proj(-2.0, 0.0, -2.0))
    assert res == Tangent(0.0, -1.0)
    assert to_interval_pair(res) == (0.0, 0.0)


def test_to_interval_pair():
    """Root results as angle pairs."""
    assert to_interval_pair(NoIntersection()) == (0.0, 0.0)
    assert to_interval_pair(TwoRoots(1.0, 2.0)) == (1.0, 2.0)
    assert to_interval_pair(Tangent(1.5, -1.0)) == (1.5, 1.5)
    assert to_interval_pair(Tangent(1.5, 1.0)) == (0.0, 0.0)


def test_root_properties(rng):
    """Residuals, ordering, midpoint violation and theta = 0 feasibility."""
    p, q, offset = random_feasible(rng, 2000)
    for pi, qi, bi in zip(p, q, offset):
        res = solve_roots(proj(pi, qi, bi))
        if not isinstance(res, TwoRoots):
            assert bi >= numpy.hypot(pi, qi)
            continue

        assert 0 <= res.alpha < res.beta <= TWO_PI
        r = numpy.hypot(pi, qi)
        for theta in (res.alpha, res.beta):
            assert abs(pi * numpy.cos(theta) + qi * numpy.sin(theta) - bi) <= 1e-6 * max(1.0, r)

        mid = 0.5 * (res.alpha + res.beta)
        assert pi * numpy.cos(mid) + qi * numpy.sin(mid) > bi
        assert pi <= bi


def test_root_residuals_vectorized(rng):
    """Residuals of 1e5 random projections."""
    p, q, offset = random_feasible(rng, 100_000)
    roots = solve_root_arrays(p, q, offset)
    two = roots.kind == TWO_ROOTS
    assert two.sum() > 10_000

    r = numpy.hypot(p, q)[two]
    for angle in (roots.alphas[two], roots.betas[two]):
        res = numpy.abs(p[two] * numpy.cos(angle) + q[two] * numpy.sin(angle) - offset[two])
        assert numpy.all(res <= 1e-6 * numpy.maximum(1.0, r))


def test_root_classification_grid(rng):
    """Infeasible angles of a dense grid lie inside (alpha, beta)."""
    grid = numpy.linspace(0, TWO_PI, 10_001)
    p, q, offset = random_feasible(rng, 200)
    alphas, betas, _ = interval_pairs(p, q, offset)
    for i in range(200):
        values = p[i] * numpy.cos(grid) + q[i] * numpy.sin(grid) - offset[i]
        outside = grid[values > 1e-9]
        if alphas[i] == betas[i]:
            assert outside.size == 0
        else:
            assert numpy.all((outside > alphas[i]) & (outside < betas[i]))
            inside = grid[(grid > alphas[i] + 1e-6) & (grid < betas[i] - 1e-6)]
            assert numpy.all(
                p[i] * numpy.cos(inside) + q[i] * numpy.sin(inside) > offset[i]
            )


def test_vectorized_agrees(rng):
    """Scalar and vectorized paths agree exactly."""
    p, q, offset = random_feasible(rng, 500)
    # add tangents and misses
    p = numpy.concatenate([p, [0.0, 0.3, -2.0]])
    q = numpy.concatenate([q, [1.0, 0.4, 0.0]])
    offset = numpy.concatenate([offset, [1.0, 1.0, -2.0]])

    roots = solve_root_arrays(p, q, offset)
    assert roots.kind[-3] == TANGENT_OUTSIDE
    assert roots.kind[-2] == NO_INTERSECTION
    assert roots.kind[-1] == TANGENT_INSIDE
    assert numpy.sum(roots.kind == TWO_ROOTS) > 0

    for i in range(len(p)):
        pair = to_interval_pair(solve_roots(proj(p[i], q[i], offset[i])))
        assert pair == (roots.alphas[i], roots.betas[i])


def test_batches_and_infeasible_mask(rng):
    """Leading batch dimensions and the infeasible mask."""
    p = rng.standard_normal((3, 4))
    q = rng.standard_normal((3, 4))
    offset = numpy.full(4, 0.5)
    alphas, betas, infeasible = interval_pairs(p, q, offset)
    assert alphas.shape == betas.shape == infeasible.shape == (3, 4)
    numpy.testing.assert_array_equal(infeasible, p > 0.5)

    with pytest.raises(InvalidConstraint):
        interval_pairs(numpy.zeros((2, 1)), numpy.zeros((2, 1)), [-1.0])


def test_no_nan_near_tangency(rng):
    """Ratios just outside [-1, 1] are clamped."""
    for eps in (1e-3, 1e-8, 1e-15):
        p, q = rng.standard_normal(100), rng.standard_normal(100)
        r = numpy.hypot(p, q)
        for offset in (r * (1 + eps), r * (1 - eps)):
            alphas, betas, _ = interval_pairs(p, q, numpy.maximum(offset, p))
            assert not numpy.isnan(alphas).any()
            assert not numpy.isnan(betas).any()
            assert numpy.all(alphas <= betas)


def test_single_precision(rng):
    """float32 inputs stay float32."""
    p, q, offset = random_feasible(rng, 50)
    alphas, betas, _ = interval_pairs(
        p.astype(numpy.float32), q.astype(numpy.float32), offset.astype(numpy.float32)
    )
    assert alphas.dtype == numpy.float32
    assert betas.dtype == numpy.float32
    assert numpy.all(alphas <= betas)
    assert numpy.all((alphas >= 0) & (betas <= numpy.float32(TWO_PI)))
