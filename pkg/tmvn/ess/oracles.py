"""Reference distributions used to validate the sampler."""

import math
from typing import Tuple

import attr
import numpy
from numpy.typing import NDArray
from scipy.special import log_ndtr, ndtr

from tmvn.ess.errors import AcceptanceTooLow, UnderflowingMass
from tmvn.ess.logger import logger
from tmvn.ess.polytope import Polytope

# Normalizing constants at or below this are reported as underflowing
MIN_MASS = 1e-300

MIN_ACCEPTANCE = 1e-3

LOG_SQRT_2PI = 0.5 * math.log(2 * math.pi)


def _check_bounds(instance, attribute, value):
    if math.isnan(value):
        raise ValueError(f"{attribute.name} should not be NaN")


@attr.s(frozen=True)
class TruncatedNormal1D:
    """Standard normal truncated to [lower, upper]; bounds may be infinite."""

    lower: float = attr.ib(converter=float, validator=_check_bounds)
    upper: float = attr.ib(converter=float, validator=_check_bounds)

    def __attrs_post_init__(self):
        """Check bounds order."""
        if not self.lower < self.upper:
            raise ValueError(f"lower ({self.lower}) should be < upper ({self.upper})")

    def log_normalizer(self) -> float:
        """log(Phi(upper) - Phi(lower)), stable in both tails."""
        lower, upper = self.lower, self.upper
        if lower > 0:
            # Difference of upper tails: Phi(-lower) - Phi(-upper)
            big, small = log_ndtr(-lower), log_ndtr(-upper)
        elif upper < 0:
            big, small = log_ndtr(upper), log_ndtr(lower)
        else:
            return math.log(ndtr(upper) - ndtr(lower))

        if small == -math.inf:
            return float(big)

        return float(big + math.log1p(-math.exp(small - big)))

    def polytope(self) -> Polytope:
        """The interval as a 1-D polytope."""
        return Polytope.from_bounds([self.lower], [self.upper])

    def pdf(self, x: float) -> float:
        """Density of the truncated normal."""
        if not self.lower <= x <= self.upper:
            return 0.0

        return math.exp(-0.5 * x * x - LOG_SQRT_2PI - self.log_normalizer())


def _phi_ratio(x: float, log_z: float) -> Tuple[float, float]:
    """(phi(x) / Z, x phi(x) / Z), zero at infinite x."""
    if math.isinf(x):
        return 0.0, 0.0

    ratio = math.exp(-0.5 * x * x - LOG_SQRT_2PI - log_z)
    return ratio, x * ratio


def moments_1d(t: TruncatedNormal1D) -> Tuple[float, float]:
    """Mean and variance of a standard normal truncated to [lower, upper]."""
    log_z = t.log_normalizer()
    if log_z <= math.log(MIN_MASS):
        raise UnderflowingMass(
            f"Normalizing constant of [{t.lower}, {t.upper}] underflows"
        )

    phi_lower, xphi_lower = _phi_ratio(t.lower, log_z)
    phi_upper, xphi_upper = _phi_ratio(t.upper, log_z)

    mean = phi_lower - phi_upper
    variance = 1.0 + xphi_lower - xphi_upper - mean * mean
    return mean, variance


def rejection_sample(
    poly: Polytope,
    n: int,
    rng: numpy.random.Generator,
    pilot: int = 10_000,
) -> NDArray:
    """Exact samples of N(0, I) restricted to `poly` by rejection.

    A pilot batch estimates the acceptance rate; the sampler refuses to run
    when that rate is below 1e-3.

    """
    d = poly.dim
    draws = rng.standard_normal((pilot, d))
    inside = numpy.all(draws @ poly.a_rows.T <= poly.b, axis=1)
    rate = inside.mean()
    if rate < MIN_ACCEPTANCE:
        raise AcceptanceTooLow(
            f"Estimated acceptance rate {rate:.2e} is below {MIN_ACCEPTANCE:.0e}"
        )

    logger.debug(f"Rejection sampling with acceptance rate {rate:.3f}")

    accepted = [draws[inside]]
    have = int(inside.sum())
    while have < n:
        size = int(math.ceil(1.2 * (n - have) / rate)) + 16
        draws = rng.standard_normal((size, d))
        inside = numpy.all(draws @ poly.a_rows.T <= poly.b, axis=1)
        accepted.append(draws[inside])
        have += int(inside.sum())

    return numpy.concatenate(accepted, axis=0)[:n]
