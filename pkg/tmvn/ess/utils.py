"""tmvn.ess utilities."""

import time
from typing import Optional, Sequence

import attr
import numpy


class Timer(object):
    """Time a code block."""

    def __enter__(self):
        """Starts timer."""
        self.start = time.perf_counter_ns()
        return self

    def __exit__(self, ty, val, tb):
        """Stops timer."""
        self.end = time.perf_counter_ns()
        self.elapsed_ns = self.end - self.start
        self.elapsed = self.elapsed_ns / 1e9


def draw_seed() -> int:
    """Draw a 64-bit seed from system entropy."""
    return int(numpy.random.SeedSequence().generate_state(1, numpy.uint64)[0])


@attr.s
class ChainRNG:
    """Random streams of one Markov chain.

    `nu` drives the ellipse directions and `theta` the uniform variates used to
    pick an angle. Both are derived from `SeedSequence(seed, spawn_key=(chain,))`
    so a chain's draws do not depend on how chains are scheduled.

    """

    nu: numpy.random.Generator = attr.ib()
    theta: numpy.random.Generator = attr.ib()

    @classmethod
    def from_seed(cls, seed: int, chain: int = 0) -> "ChainRNG":
        """Derive the streams of chain `chain`."""
        root = numpy.random.SeedSequence(seed, spawn_key=(chain,))
        nu_seq, theta_seq = root.spawn(2)
        return cls(
            nu=numpy.random.default_rng(nu_seq),
            theta=numpy.random.default_rng(theta_seq),
        )


def loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of log(ys) against log(xs)."""
    slope, _ = numpy.polyfit(numpy.log(xs), numpy.log(ys), 1)
    return float(slope)


def median_ns(samples: Sequence[int], warmup: int = 1) -> Optional[float]:
    """Median of timings with the first `warmup` values discarded."""
    kept = list(samples)[warmup:] or list(samples)
    if not kept:
        return None

    return float(numpy.median(kept))
