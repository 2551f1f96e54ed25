"""Ellipse / hyperplane intersection angles.

For a row (a, b) of the polytope and the ellipse x cos(t) + nu sin(t), the
intersection angles solve

    p cos(t) + q sin(t) = b,    p = a.x, q = a.nu,

whose roots are `tau +/- arccos(b / r)` with `tau = atan2(q, p)` and
`r = sqrt(p^2 + q^2)`. The roots are normalized to [0, 2pi] and ordered so
that the feasible part of the ellipse is [0, alpha] U [beta, 2pi].

"""

from typing import List, NamedTuple, Tuple, Union

import attr
import numpy
from numpy.typing import ArrayLike, NDArray

from tmvn.ess.errors import DimensionMismatch, InfeasibleCurrentPoint, InvalidConstraint
from tmvn.ess.polytope import Polytope

# Root classification codes
NO_INTERSECTION = 0
TANGENT_OUTSIDE = 1  # b / r == 1, the ellipse touches the hyperplane from inside
TANGENT_INSIDE = 2  # b / r == -1, a single feasible angle
TWO_ROOTS = 3


@attr.s(frozen=True)
class EllipseProjection:
    """Projection of the ellipse on one constraint row."""

    p: float = attr.ib()
    q: float = attr.ib()
    offset: float = attr.ib()
    r: float = attr.ib()


@attr.s(frozen=True)
class NoIntersection:
    """The ellipse lies inside the halfspace."""


@attr.s(frozen=True)
class Tangent:
    """The ellipse touches the hyperplane at a single angle."""

    angle: float = attr.ib()
    rho: float = attr.ib()


@attr.s(frozen=True)
class TwoRoots:
    """Two distinct intersection angles, alpha < beta."""

    alpha: float = attr.ib()
    beta: float = attr.ib()


RootResult = Union[NoIntersection, Tangent, TwoRoots]


class RootArrays(NamedTuple):
    """Vectorized root classification."""

    kind: NDArray
    alphas: NDArray
    betas: NDArray
    tangent: NDArray
    infeasible: NDArray


def project_arrays(poly: Polytope, x: ArrayLike, nu: ArrayLike) -> Tuple[NDArray, NDArray]:
    """Return (A x, A nu) for points of shape (..., d)."""
    x = numpy.asarray(x)
    nu = numpy.asarray(nu)
    if x.shape != nu.shape or x.shape[-1:] != (poly.dim,):
        raise DimensionMismatch(
            f"x {x.shape} and nu {nu.shape} should both end with dimension {poly.dim}"
        )

    a_rows = poly.a_rows.astype(x.dtype, copy=False)
    return x @ a_rows.T, nu @ a_rows.T


def project(poly: Polytope, x: ArrayLike, nu: ArrayLike) -> List[EllipseProjection]:
    """Per-constraint projections (p, q, offset, r)."""
    p, q = project_arrays(poly, numpy.asarray(x, dtype=float), numpy.asarray(nu, dtype=float))
    r = numpy.sqrt(p * p + q * q)
    return [
        EllipseProjection(float(pi), float(qi), float(bi), float(ri))
        for pi, qi, bi, ri in zip(p, q, poly.b, r)
    ]


def solve_root_arrays(
    p: ArrayLike,
    q: ArrayLike,
    offset: ArrayLike,
    tol: float = 0.0,
) -> RootArrays:
    """Classify and solve every constraint of a (batch of) ellipse(s).

    `p` and `q` have shape (..., m) and `offset` broadcasts against them. The
    computation stays in the dtype of `p`.

    """
    p = numpy.asarray(p)
    q = numpy.asarray(q, dtype=p.dtype)
    offset = numpy.asarray(offset, dtype=p.dtype)
    dtype = p.dtype.type
    two_pi = dtype(2 * numpy.pi)
    zero = dtype(0)

    r = numpy.sqrt(p * p + q * q)
    degenerate = r == 0
    if numpy.any(degenerate & (offset < 0)):
        raise InvalidConstraint(
            "Constraint with a zero projection and a negative offset cannot be satisfied"
        )

    infeasible = p > offset + dtype(tol)

    with numpy.errstate(divide="ignore", invalid="ignore"):
        rho = numpy.where(degenerate, dtype(numpy.inf), offset / numpy.where(degenerate, 1, r))

    missing = rho > 1
    rho = numpy.clip(rho, -1, 1)

    tau = numpy.arctan2(q, p)
    half = numpy.arccos(rho)

    alphas = tau - half
    betas = tau + half

    # Arc ending at or before 0: shift the whole arc, so it ends at 2 pi at most
    wrapped = betas <= 0
    alphas = numpy.where(wrapped, alphas + two_pi, alphas)
    betas = numpy.where(wrapped, betas + two_pi, betas)

    # Arc across 0 (current point on or past the boundary): keep [0, beta]
    alphas = numpy.where(alphas < 0, zero, alphas)

    tangent = tau + dtype(numpy.pi)
    tangent = numpy.where(tangent >= two_pi, tangent - two_pi, tangent)

    outside = ~missing & (rho == 1)
    inside = ~missing & (rho == -1)

    kind = numpy.full(p.shape, TWO_ROOTS, dtype=numpy.int8)
    kind[missing] = NO_INTERSECTION
    kind[outside] = TANGENT_OUTSIDE
    kind[inside] = TANGENT_INSIDE

    ignorable = missing | outside
    alphas = numpy.where(ignorable, zero, numpy.where(inside, tangent, alphas))
    betas = numpy.where(ignorable, zero, numpy.where(inside, tangent, betas))

    return RootArrays(kind, alphas, betas, tangent, infeasible)


def interval_pairs(
    p: ArrayLike,
    q: ArrayLike,
    offset: ArrayLike,
    tol: float = 0.0,
) -> Tuple[NDArray, NDArray, NDArray]:
    """Padded angle pairs (alphas, betas) and the infeasible-row mask."""
    roots = solve_root_arrays(p, q, offset, tol)
    return roots.alphas, roots.betas, roots.infeasible


def solve_roots(proj: EllipseProjection, tol: float = 0.0) -> RootResult:
    """Solve p cos(t) + q sin(t) = offset for one constraint."""
    roots = solve_root_arrays([proj.p], [proj.q], [proj.offset], tol)
    if roots.infeasible[0]:
        raise InfeasibleCurrentPoint(
            f"Current point violates the constraint: p={proj.p} > offset={proj.offset}"
        )

    kind = roots.kind[0]
    if kind == NO_INTERSECTION:
        return NoIntersection()

    if kind == TANGENT_OUTSIDE:
        tau = float(numpy.arctan2(proj.q, proj.p))
        return Tangent(tau + 2 * numpy.pi if tau < 0 else tau, 1.0)

    if kind == TANGENT_INSIDE:
        return Tangent(float(roots.tangent[0]), -1.0)

    return TwoRoots(float(roots.alphas[0]), float(roots.betas[0]))


def to_interval_pair(result: RootResult) -> Tuple[float, float]:
    """Angle pair (alpha, beta) of a root result, with (0, 0) padding."""
    if isinstance(result, TwoRoots):
        return result.alpha, result.beta

    if isinstance(result, Tangent) and result.rho == -1:
        return result.angle, result.angle

    return 0.0, 0.0
