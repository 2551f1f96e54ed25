"""Truncation domain, feasibility checks and whitening."""

from typing import Optional, Sequence

import attr
import numpy
from numpy.typing import ArrayLike, NDArray
from scipy.linalg import solve_triangular

from tmvn.ess.errors import CholeskyError, DimensionMismatch, InvalidProblem


def _readonly(values: ArrayLike, ndim: int, name: str) -> NDArray:
    arr = numpy.array(values, dtype=float)
    if arr.ndim != ndim:
        raise DimensionMismatch(f"{name} should have {ndim} dimension(s), got {arr.ndim}")

    if arr.size and not numpy.isfinite(arr).all():
        raise InvalidProblem(f"{name} has non-finite entries")

    arr.setflags(write=False)
    return arr


@attr.s(eq=False)
class Polytope:
    """Polytope {x : A x <= b}.

    Rows of `A` are not checked for a nonzero norm; a zero row is either a
    tautology (b_i >= 0) or invalid (b_i < 0) and is classified when the
    intersection angles are solved.

    """

    a_rows: NDArray = attr.ib(converter=lambda v: _readonly(v, 2, "A"))
    b: NDArray = attr.ib(converter=lambda v: _readonly(v, 1, "b"))

    def __attrs_post_init__(self):
        """Check shapes."""
        m, d = self.a_rows.shape
        if m < 1 or d < 1:
            raise InvalidProblem(f"A should be non-empty, got shape {(m, d)}")

        if self.b.shape != (m,):
            raise DimensionMismatch(
                f"b has {self.b.shape[0]} entries but A has {m} rows"
            )

    @property
    def n_constraints(self) -> int:
        """Number of inequalities (m)."""
        return self.a_rows.shape[0]

    @property
    def dim(self) -> int:
        """Ambient dimension (d)."""
        return self.a_rows.shape[1]

    @classmethod
    def from_bounds(
        cls,
        lower: Sequence[float],
        upper: Sequence[float],
    ) -> "Polytope":
        """Box polytope lower <= x <= upper (infinite bounds are skipped)."""
        lower = numpy.atleast_1d(numpy.asarray(lower, dtype=float))
        upper = numpy.atleast_1d(numpy.asarray(upper, dtype=float))
        if lower.shape != upper.shape:
            raise DimensionMismatch("lower and upper bounds have different lengths")

        d = lower.shape[0]
        rows, offsets = [], []
        for i in range(d):
            if numpy.isfinite(upper[i]):
                row = numpy.zeros(d)
                row[i] = 1.0
                rows.append(row)
                offsets.append(upper[i])

            if numpy.isfinite(lower[i]):
                row = numpy.zeros(d)
                row[i] = -1.0
                rows.append(row)
                offsets.append(-lower[i])

        if not rows:
            raise InvalidProblem("At least one finite bound is needed")

        return cls(numpy.array(rows), numpy.array(offsets))


def _check_point(poly: Polytope, x: ArrayLike) -> NDArray:
    x = numpy.asarray(x)
    if x.shape[-1:] != (poly.dim,):
        raise DimensionMismatch(
            f"Point has {x.shape[-1] if x.ndim else 0} coordinates, polytope has dimension {poly.dim}"
        )

    return x


def residuals(poly: Polytope, x: ArrayLike) -> NDArray:
    """Return A x - b.

    `x` may also be an (n, d) batch, in which case an (n, m) array is returned.
    """
    x = _check_point(poly, x)
    return x @ poly.a_rows.T - poly.b


def is_feasible(poly: Polytope, x: ArrayLike, tol: float = 0.0) -> bool:
    """Check that every residual is at most `tol`."""
    if tol < 0:
        raise ValueError("tol must be non-negative")

    return bool(numpy.max(residuals(poly, x)) <= tol)


def strict_feasibility_violation(poly: Polytope, x: ArrayLike) -> Optional[int]:
    """Index of the first constraint with residual >= 0, None if strictly feasible."""
    res = residuals(poly, x)
    bad = numpy.flatnonzero(~(res < 0))
    return int(bad[0]) if bad.size else None


@attr.s(eq=False)
class GaussianSpec:
    """Normal distribution N(mean, covariance).

    The Cholesky factor is computed once at construction. A spec built with
    `GaussianSpec.standard(d)` is flagged so whitening is a no-op.

    """

    mean: NDArray = attr.ib(converter=lambda v: _readonly(v, 1, "mean"))
    covariance: NDArray = attr.ib(converter=lambda v: _readonly(v, 2, "covariance"))
    is_standard: bool = attr.ib(default=False)

    cholesky: NDArray = attr.ib(init=False)

    def __attrs_post_init__(self):
        """Validate and factorize the covariance."""
        d = self.mean.shape[0]
        if self.covariance.shape != (d, d):
            raise DimensionMismatch(
                f"covariance should be {d}x{d}, got {self.covariance.shape}"
            )

        scale = max(1.0, float(numpy.abs(self.covariance).max()))
        if not numpy.allclose(self.covariance, self.covariance.T, rtol=0, atol=1e-10 * scale):
            raise CholeskyError("covariance is not symmetric")

        try:
            chol = numpy.linalg.cholesky(self.covariance)
        except numpy.linalg.LinAlgError as exc:
            raise CholeskyError("covariance is not positive definite") from exc

        chol.setflags(write=False)
        self.cholesky = chol

    @classmethod
    def standard(cls, d: int) -> "GaussianSpec":
        """Standard normal N(0, I_d)."""
        return cls(numpy.zeros(d), numpy.eye(d), is_standard=True)

    @property
    def dim(self) -> int:
        """Dimension."""
        return self.mean.shape[0]


def whiten(spec: GaussianSpec, poly: Polytope) -> Polytope:
    """Polytope {u : (A L) u <= b - A mean} for u ~ N(0, I)."""
    if spec.dim != poly.dim:
        raise DimensionMismatch(
            f"Gaussian has dimension {spec.dim}, polytope has dimension {poly.dim}"
        )

    if spec.is_standard:
        return poly

    return Polytope(
        poly.a_rows @ spec.cholesky,
        poly.b - poly.a_rows @ spec.mean,
    )


def unwhiten(spec: GaussianSpec, u: ArrayLike) -> NDArray:
    """Map whitened point(s) back: L u + mean. Accepts (d,) or (n, d)."""
    u = numpy.asarray(u, dtype=float)
    if spec.is_standard:
        return u

    return u @ spec.cholesky.T + spec.mean


def to_whitened(spec: GaussianSpec, x: ArrayLike) -> NDArray:
    """Whitened coordinates L^-1 (x - mean). Accepts (d,) or (n, d)."""
    x = numpy.asarray(x, dtype=float)
    if spec.is_standard:
        return x

    centered = (x - spec.mean).T
    return solve_triangular(spec.cholesky, centered, lower=True).T


@attr.s(eq=False)
class Problem:
    """Truncated normal N(spec) restricted to `poly`, with an optional start."""

    poly: Polytope = attr.ib()
    spec: GaussianSpec = attr.ib()
    x0: Optional[NDArray] = attr.ib(default=None)

    def __attrs_post_init__(self):
        """Check dimensions."""
        if self.spec.dim != self.poly.dim:
            raise DimensionMismatch(
                f"Gaussian has dimension {self.spec.dim}, polytope has dimension {self.poly.dim}"
            )

        if self.x0 is not None:
            self.x0 = _readonly(self.x0, 1, "x0")
            _check_point(self.poly, self.x0)

    @property
    def dim(self) -> int:
        """Dimension."""
        return self.poly.dim
