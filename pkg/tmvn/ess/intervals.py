"""Active intervals: the angles of an ellipse that lie inside the polytope.

Every constraint i contributes the feasible angles [0, alpha_i] U [beta_i, 2pi]
and the active intervals are the intersection over all constraints.

The constructions are:

- `active_intervals_fast`: sort the alphas, take the cumulative max of the
  co-sorted betas (gamma) and read the answer off directly:

      [0, alpha_(1)] U [gamma_1, alpha_(2)] U ... U [gamma_m, 2pi]

  where a segment with gamma_(k-1) > alpha_(k) is empty. O(m log m), and only
  comparisons are involved so the endpoints are exactly input angles.
- `active_intervals_brute`: sequential intersection starting from [0, 2pi].
- `active_intervals_likelihood`: sort all intersection angles and keep the
  arcs whose midpoint lies inside the polytope.
- `active_intervals_likelihood_jump`: test the feasibility of t - eps and
  t + eps around every intersection angle t, for a fixed eps. Benchmark
  baseline only.

"""

from functools import cmp_to_key
from typing import Iterable, List, Optional, Tuple

import attr
import numpy
from numpy.typing import ArrayLike, NDArray

from tmvn.ess.angles import project_arrays
from tmvn.ess.errors import DimensionMismatch, DuplicateAngles, EmptyIntervalSet
from tmvn.ess.polytope import Polytope

TWO_PI = 2 * numpy.pi

Segment = Tuple[float, float]


@attr.s
class OpCounter:
    """Elementary operation counts (benchmarks and tests only)."""

    comparisons: int = attr.ib(default=0)
    segment_ops: int = attr.ib(default=0)
    segment_counts: List[int] = attr.ib(factory=list)

    @property
    def total(self) -> int:
        """All counted operations."""
        return self.comparisons + self.segment_ops


def _check_angles(instance, attribute, value):
    if value.ndim != 1:
        raise DimensionMismatch(f"{attribute.name} should be a vector")


@attr.s(eq=False)
class ConstraintAngles:
    """Per-constraint angle pairs, alpha_i <= beta_i, all in [0, 2pi]."""

    alphas: NDArray = attr.ib(converter=numpy.asarray, validator=_check_angles)
    betas: NDArray = attr.ib(converter=numpy.asarray, validator=_check_angles)

    def __attrs_post_init__(self):
        """Check pairs."""
        if self.alphas.shape != self.betas.shape:
            raise DimensionMismatch("alphas and betas should have the same length")

        if numpy.any(self.alphas > self.betas):
            raise ValueError("alpha should not exceed beta")

        if self.alphas.size and (self.alphas.min() < 0 or self.betas.max() > TWO_PI):
            raise ValueError("angles should lie in [0, 2pi]")

    def __len__(self) -> int:
        """Number of constraints."""
        return self.alphas.shape[0]

    @classmethod
    def from_pairs(cls, pairs: Iterable[Segment]) -> "ConstraintAngles":
        """Build from (alpha, beta) pairs."""
        pairs = list(pairs)
        if not pairs:
            return cls(numpy.zeros(0), numpy.zeros(0))

        alphas, betas = zip(*pairs)
        return cls(numpy.array(alphas, dtype=float), numpy.array(betas, dtype=float))


def _merge_sorted(segments: Iterable[Segment]) -> Tuple[Segment, ...]:
    """Merge segments already ordered by their lower endpoint."""
    merged: List[List[float]] = []
    for lo, hi in segments:
        if merged and lo <= merged[-1][1]:
            if hi > merged[-1][1]:
                merged[-1][1] = hi
        else:
            merged.append([lo, hi])

    return tuple((lo, hi) for lo, hi in merged)


@attr.s(frozen=True)
class AngleIntervalSet:
    """Canonical union of disjoint closed segments of [0, 2pi], sorted."""

    segments: Tuple[Segment, ...] = attr.ib(factory=tuple)

    @classmethod
    def canonical(cls, segments: Iterable[Segment]) -> "AngleIntervalSet":
        """Sort and merge overlapping or touching segments; drop empty ones."""
        kept = sorted((float(lo), float(hi)) for lo, hi in segments if lo <= hi)
        return cls(_merge_sorted(kept))

    @classmethod
    def from_pieces(cls, lo: ArrayLike, hi: ArrayLike) -> "AngleIntervalSet":
        """Canonical set from candidate pieces (lo > hi marks an empty piece)."""
        return cls.canonical(zip(numpy.ravel(lo).tolist(), numpy.ravel(hi).tolist()))

    def __len__(self) -> int:
        """Number of segments."""
        return len(self.segments)

    def __iter__(self):
        """Iterate over segments."""
        return iter(self.segments)

    @property
    def total_length(self) -> float:
        """Sum of segment lengths."""
        return float(sum(hi - lo for lo, hi in self.segments))

    @property
    def is_empty(self) -> bool:
        """True when there is no segment at all."""
        return not self.segments

    def contains(self, theta: float) -> bool:
        """Membership test."""
        return any(lo <= theta <= hi for lo, hi in self.segments)

    def midpoints(self) -> List[float]:
        """Midpoint of every segment."""
        return [0.5 * (lo + hi) for lo, hi in self.segments]

    def complement_midpoints(self) -> List[float]:
        """Midpoint of every gap of [0, 2pi] not covered by the set."""
        gaps = []
        cursor = 0.0
        for lo, hi in self.segments:
            if lo > cursor:
                gaps.append(0.5 * (cursor + lo))
            cursor = hi

        if cursor < TWO_PI:
            gaps.append(0.5 * (cursor + TWO_PI))

        return gaps


def fast_segments(alphas: ArrayLike, betas: ArrayLike) -> Tuple[NDArray, NDArray]:
    """Candidate segments of the sort/cumulative-max construction.

    Works on any leading batch shape: inputs (..., m), outputs (..., m + 1).
    Piece k is [lo_k, hi_k]; it is empty when lo_k > hi_k. Nonempty pieces are
    ordered and can only touch, never overlap.

    """
    alphas = numpy.asarray(alphas)
    betas = numpy.asarray(betas, dtype=alphas.dtype)
    return _segments_from_order(
        alphas, betas, numpy.argsort(alphas, axis=-1, kind="stable")
    )


def _segments_from_order(
    alphas: NDArray, betas: NDArray, order: NDArray
) -> Tuple[NDArray, NDArray]:
    dtype = alphas.dtype.type
    sorted_alphas = numpy.take_along_axis(alphas, order, axis=-1)
    gammas = numpy.maximum.accumulate(
        numpy.take_along_axis(betas, order, axis=-1), axis=-1
    )

    batch = alphas.shape[:-1]
    lo = numpy.concatenate([numpy.zeros(batch + (1,), dtype=dtype), gammas], axis=-1)
    hi = numpy.concatenate(
        [sorted_alphas, numpy.full(batch + (1,), TWO_PI, dtype=dtype)], axis=-1
    )
    return lo, hi


def active_intervals_fast(
    angles: ConstraintAngles,
    counter: Optional[OpCounter] = None,
) -> AngleIntervalSet:
    """Active intervals by sorting and cumulative max, O(m log m)."""
    alphas, betas = angles.alphas, angles.betas
    if counter is None:
        lo, hi = fast_segments(alphas, betas)
        return AngleIntervalSet.from_pieces(lo, hi)

    def compare(i: int, j: int) -> int:
        counter.comparisons += 1
        if alphas[i] < alphas[j]:
            return -1
        return 1 if alphas[i] > alphas[j] else 0

    # stable, like numpy's argsort(kind="stable")
    order = numpy.array(sorted(range(len(alphas)), key=cmp_to_key(compare)), dtype=int)
    lo, hi = _segments_from_order(alphas, betas, order)

    m = len(alphas)
    # cumulative max, emptiness check and merge scan
    counter.comparisons += max(m - 1, 0) + 2 * (m + 1)
    return AngleIntervalSet.from_pieces(lo, hi)


def active_intervals_brute(
    angles: ConstraintAngles,
    counter: Optional[OpCounter] = None,
) -> AngleIntervalSet:
    """Active intervals by intersecting one constraint at a time, O(m^2)."""
    current: Tuple[Segment, ...] = ((0.0, TWO_PI),)
    for alpha, beta in zip(angles.alphas.tolist(), angles.betas.tolist()):
        pieces: List[Segment] = []
        for lo, hi in current:
            # [lo, hi] & [0, alpha]
            if lo <= alpha:
                pieces.append((lo, min(hi, alpha)))
            # [lo, hi] & [beta, 2pi]
            if hi >= beta:
                pieces.append((max(lo, beta), hi))

        if counter is not None:
            counter.segment_ops += len(current)

        current = _merge_sorted(pieces)
        if counter is not None:
            counter.segment_counts.append(len(current))

    return AngleIntervalSet(current)


def _intersection_angles(angles: ConstraintAngles) -> NDArray:
    """Sorted genuine intersection angles; DuplicateAngles if two coincide."""
    genuine = angles.alphas != angles.betas
    thetas = numpy.sort(
        numpy.concatenate([angles.alphas[genuine], angles.betas[genuine]])
    )
    if thetas.size > 1 and numpy.any(numpy.diff(thetas) == 0):
        raise DuplicateAngles("Likelihood testing requires distinct intersection angles")

    return thetas


def _inside(poly: Polytope, p: NDArray, q: NDArray, thetas: NDArray, tol: float) -> NDArray:
    values = numpy.outer(numpy.cos(thetas), p) + numpy.outer(numpy.sin(thetas), q)
    return numpy.all(values <= poly.b + tol, axis=1)


def active_intervals_likelihood(
    poly: Polytope,
    x: ArrayLike,
    nu: ArrayLike,
    angles: ConstraintAngles,
    tol: float = 0.0,
) -> AngleIntervalSet:
    """Active intervals by testing the midpoint between consecutive angles.

    Pairs with alpha == beta (padding or tangency) are not intersection
    angles and are skipped. The projections A x and A nu are computed once,
    so testing all 2m + 1 arcs costs O(m^2).

    """
    p, q = project_arrays(poly, numpy.asarray(x, dtype=float), numpy.asarray(nu, dtype=float))
    thetas = _intersection_angles(angles)

    bounds = numpy.concatenate([[0.0], thetas, [TWO_PI]])
    mids = 0.5 * (bounds[:-1] + bounds[1:])
    inside = _inside(poly, p, q, mids, tol)

    return AngleIntervalSet.canonical(
        (bounds[j], bounds[j + 1]) for j in numpy.flatnonzero(inside)
    )


def active_intervals_likelihood_jump(
    poly: Polytope,
    x: ArrayLike,
    nu: ArrayLike,
    angles: ConstraintAngles,
    eps: float,
    tol: float = 0.0,
) -> AngleIntervalSet:
    """Active intervals from the likelihood jump at every intersection angle.

    An angle t is active when the feasibility of t - eps and t + eps differ;
    the sign of the jump tells whether a segment starts or ends there. The
    answer is only right when `eps` is below the smallest gap between angles
    and large enough for the feasibility test to resolve the jump.

    """
    if eps <= 0:
        raise ValueError("eps must be positive")

    p, q = project_arrays(poly, numpy.asarray(x, dtype=float), numpy.asarray(nu, dtype=float))
    thetas = _intersection_angles(angles)

    before = _inside(poly, p, q, thetas - eps, tol)
    after = _inside(poly, p, q, thetas + eps, tol)
    start = bool(_inside(poly, p, q, numpy.zeros(1), tol)[0])

    segments: List[Segment] = []
    lo: Optional[float] = 0.0 if start else None
    for theta, b, a in zip(thetas, before, after):
        if a and not b and theta < TWO_PI:
            lo = float(theta)
        elif b and not a and lo is not None:
            if theta > lo:
                segments.append((lo, float(theta)))
            lo = None

    if lo is not None:
        segments.append((lo, TWO_PI))

    return AngleIntervalSet.canonical(segments)


def _trim_bounds(
    comp_lo: NDArray,
    comp_hi: NDArray,
    first: NDArray,
    last: NDArray,
    eps: float,
) -> Tuple[NDArray, NDArray, NDArray]:
    dtype = comp_lo.dtype.type
    eps = dtype(eps)
    keep = comp_hi - comp_lo > 2 * eps
    new_lo = numpy.where(first, comp_lo, comp_lo + eps)
    new_hi = numpy.where(last, comp_hi, comp_hi - eps)
    return new_lo, new_hi, keep


def trim(intervals: AngleIntervalSet, eps: float) -> AngleIntervalSet:
    """Shrink every segment by `eps` on each side.

    Segments of length <= 2 eps are dropped. The first segment keeps its lower
    endpoint and the last keeps its upper endpoint: for active intervals these
    are 0 and 2pi, which stand for the current (feasible) iterate.

    """
    if eps < 0:
        raise ValueError("eps must be non-negative")

    if eps == 0 or intervals.is_empty:
        return intervals

    lo = numpy.array([s[0] for s in intervals.segments])
    hi = numpy.array([s[1] for s in intervals.segments])
    first = numpy.arange(len(lo)) == 0
    last = numpy.arange(len(lo)) == len(lo) - 1

    new_lo, new_hi, keep = _trim_bounds(lo, hi, first, last, eps)
    return AngleIntervalSet(
        tuple((float(a), float(b)) for a, b, k in zip(new_lo, new_hi, keep) if k)
    )


def trim_pieces(lo: NDArray, hi: NDArray, eps: float) -> Tuple[NDArray, NDArray]:
    """Trim candidate pieces from `fast_segments` as `trim` trims the merged set.

    Pieces that touch form one merged segment; each piece is clipped to the
    trimmed bounds of its merged segment, so the union of the returned pieces
    equals `trim(AngleIntervalSet.from_pieces(lo, hi), eps)`.

    """
    if eps == 0:
        return lo, hi

    dtype = lo.dtype.type
    neg_inf, pos_inf = dtype(-numpy.inf), dtype(numpy.inf)

    nonempty = lo <= hi

    # upper endpoint of the closest nonempty piece on the left
    prev_hi = numpy.maximum.accumulate(numpy.where(nonempty, hi, neg_inf), axis=-1)
    prev_hi = numpy.concatenate([numpy.full(lo.shape[:-1] + (1,), neg_inf), prev_hi[..., :-1]], axis=-1)

    # lower endpoint of the closest nonempty piece on the right
    next_lo = numpy.minimum.accumulate(
        numpy.where(nonempty, lo, pos_inf)[..., ::-1], axis=-1
    )[..., ::-1]
    next_lo = numpy.concatenate([next_lo[..., 1:], numpy.full(lo.shape[:-1] + (1,), pos_inf)], axis=-1)

    starts = nonempty & (lo > prev_hi)
    ends = nonempty & (hi < next_lo)

    comp_lo = numpy.maximum.accumulate(numpy.where(starts, lo, neg_inf), axis=-1)
    comp_hi = numpy.minimum.accumulate(
        numpy.where(ends, hi, pos_inf)[..., ::-1], axis=-1
    )[..., ::-1]

    first_lo = numpy.min(numpy.where(starts, lo, pos_inf), axis=-1, keepdims=True)
    last_hi = numpy.max(numpy.where(ends, hi, neg_inf), axis=-1, keepdims=True)

    with numpy.errstate(invalid="ignore"):
        new_lo, new_hi, keep = _trim_bounds(
            comp_lo, comp_hi, comp_lo == first_lo, comp_hi == last_hi, eps
        )

    keep &= nonempty
    out_lo = numpy.where(keep, numpy.maximum(lo, new_lo), dtype(TWO_PI))
    out_hi = numpy.where(keep, numpy.minimum(hi, new_hi), dtype(0))
    return out_lo, out_hi


def sample_pieces(lo: NDArray, hi: NDArray, u: ArrayLike) -> Tuple[NDArray, NDArray]:
    """Map uniforms `u` (shape (...,)) to angles uniform on the pieces.

    Returns the angles and the total lengths; rows with zero total length get
    a meaningless angle and must be handled by the caller.

    """
    u = numpy.asarray(u, dtype=lo.dtype)
    lengths = numpy.maximum(hi - lo, 0)
    cum = numpy.cumsum(lengths, axis=-1)
    total = cum[..., -1]
    target = u * total

    positive = lengths > 0
    n = lo.shape[-1]
    last_positive = n - 1 - numpy.argmax(positive[..., ::-1], axis=-1)

    idx = numpy.sum(cum <= target[..., None], axis=-1)
    idx = numpy.minimum(idx, last_positive)[..., None]

    piece_lo = numpy.take_along_axis(lo, idx, axis=-1)[..., 0]
    piece_hi = numpy.take_along_axis(hi, idx, axis=-1)[..., 0]
    before = (
        numpy.take_along_axis(cum, idx, axis=-1) - numpy.take_along_axis(lengths, idx, axis=-1)
    )[..., 0]

    theta = numpy.clip(piece_lo + (target - before), piece_lo, piece_hi)
    return theta, total


def sample_theta(intervals: AngleIntervalSet, u: float) -> float:
    """Angle uniform on the union, by inverting its piecewise-linear CDF."""
    if intervals.total_length <= 0:
        raise EmptyIntervalSet("Cannot sample from an empty set of angles")

    lo = numpy.array([s[0] for s in intervals.segments])
    hi = numpy.array([s[1] for s in intervals.segments])
    theta, _ = sample_pieces(lo, hi, u)
    return float(theta)


def realize_angles(angles: ConstraintAngles) -> Tuple[Polytope, NDArray, NDArray]:
    """A 2-D polytope, start and direction whose intersection angles are `angles`.

    With x = (1, 0) and nu = (0, 1) the ellipse is the unit circle; the
    constraint with normal (cos tau, sin tau) and offset cos(h) cuts out the
    arc (tau - h, tau + h), i.e. exactly (alpha, beta). Padding pairs become a
    constraint that misses the circle.

    """
    alphas = numpy.asarray(angles.alphas, dtype=float)
    betas = numpy.asarray(angles.betas, dtype=float)
    tau = 0.5 * (alphas + betas)
    half = 0.5 * (betas - alphas)

    padding = (alphas == 0) & (betas == 0)
    a_rows = numpy.stack([numpy.cos(tau), numpy.sin(tau)], axis=1)
    offsets = numpy.where(padding, 2.0, numpy.cos(half))

    return Polytope(a_rows, offsets), numpy.array([1.0, 0.0]), numpy.array([0.0, 1.0])
