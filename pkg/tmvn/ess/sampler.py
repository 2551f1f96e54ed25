"""Rejection-free elliptical slice sampler for N(0, I) truncated to a polytope.

Each step draws a direction nu, computes the active intervals of the ellipse
x cos(t) + nu sin(t) and samples t uniformly on them, so no bracket shrinking
is needed. Chains are advanced in blocks: a block of k chains is one (k, d)
array and every array operation works along the last axis.

"""

import math
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Tuple

import attr
import numpy
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, Field, model_validator
from typing_extensions import Annotated

from tmvn.ess.angles import interval_pairs
from tmvn.ess.enums import Precision
from tmvn.ess.errors import DimensionMismatch, InfeasibleStart, InvalidProblem
from tmvn.ess.intervals import fast_segments, sample_pieces, trim_pieces
from tmvn.ess.logger import logger
from tmvn.ess.polytope import (
    Polytope,
    Problem,
    strict_feasibility_violation,
    to_whitened,
    unwhiten,
    whiten,
)
from tmvn.ess.settings import SamplerSettings
from tmvn.ess.utils import ChainRNG, draw_seed

DEFAULT_TRIM_EPS = {Precision.f32: 1e-6, Precision.f64: 0.0}
DEFAULT_TOL = {Precision.f32: 1e-5, Precision.f64: 1e-9}

# Maximum number of pre-drawn direction entries held by one block
DRAW_BUDGET = 1 << 22


class SamplerConfig(BaseModel):
    """Sampler configuration.

    `trim_eps` and `feasibility_tol` default to values that depend on the
    precision; a missing seed is drawn from system entropy.

    """

    precision: Precision = Precision.f64
    trim_eps: Optional[Annotated[float, Field(ge=0.0, lt=math.pi)]] = None
    feasibility_tol: Optional[Annotated[float, Field(ge=0.0)]] = None
    burn_in: Annotated[int, Field(ge=0)] = 0
    thinning: Annotated[int, Field(ge=1)] = 1
    seed: Optional[Annotated[int, Field(ge=0, lt=2**64)]] = None
    workers: Annotated[int, Field(ge=1)] = 1
    block_size: Annotated[int, Field(ge=1)] = 256

    @model_validator(mode="after")
    def resolve_defaults(self):
        """Fill precision defaults and the seed."""
        if self.trim_eps is None:
            self.trim_eps = DEFAULT_TRIM_EPS[self.precision]

        if self.feasibility_tol is None:
            self.feasibility_tol = DEFAULT_TOL[self.precision]

        if self.seed is None:
            self.seed = draw_seed()

        return self

    @classmethod
    def from_settings(
        cls, settings: Optional[SamplerSettings] = None, **overrides
    ) -> "SamplerConfig":
        """Build from `SamplerSettings`; `None` overrides are ignored."""
        settings = settings or SamplerSettings()
        values = settings.model_dump()
        values["feasibility_tol"] = values.pop("tol")
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    @property
    def dtype(self) -> numpy.dtype:
        """Numpy dtype of the run."""
        return self.precision.dtype

    def total_steps(self, n_samples: int) -> int:
        """Steps needed per chain for `n_samples` recorded samples."""
        return self.burn_in + self.thinning * n_samples


@attr.s
class ChainState:
    """Current iterate (whitened coordinates) of one chain."""

    x: NDArray = attr.ib(converter=numpy.asarray)
    step: int = attr.ib(default=0)
    rejections: int = attr.ib(default=0)


@attr.s(eq=False)
class RunResult:
    """Samples of one or many chains, chain-major."""

    samples: NDArray = attr.ib()
    chains: int = attr.ib()
    steps: int = attr.ib()
    rejections: int = attr.ib()
    seed: int = attr.ib()
    chain_rejections: NDArray = attr.ib()

    @property
    def n_samples(self) -> int:
        """Number of recorded samples, all chains."""
        return self.samples.shape[0]

    @property
    def rejection_rate(self) -> float:
        """Safeguard rejections per step."""
        total = self.chains * self.steps
        return self.rejections / total if total else 0.0


@attr.s
class StepKernel:
    """One vectorized ESS step for a block of chains.

    Constraint data is cast once to the run precision; every array built by
    `step` keeps that dtype.

    """

    poly: Polytope = attr.ib()
    config: SamplerConfig = attr.ib()

    a_t: NDArray = attr.ib(init=False)
    b: NDArray = attr.ib(init=False)
    tol: numpy.floating = attr.ib(init=False)

    def __attrs_post_init__(self):
        """Cast constraint data."""
        dtype = self.config.dtype
        self.a_t = numpy.ascontiguousarray(self.poly.a_rows.T, dtype=dtype)
        self.b = self.poly.b.astype(dtype)
        self.tol = dtype.type(self.config.feasibility_tol)

    def step(self, x: NDArray, nu: NDArray, u: NDArray) -> Tuple[NDArray, NDArray]:
        """Advance chains `x` (k, d) along directions `nu` (k, d) with uniforms `u` (k,).

        Returns the new iterates and the mask of safeguard rejections.

        """
        p = x @ self.a_t
        q = nu @ self.a_t
        alphas, betas, infeasible = interval_pairs(p, q, self.b, self.tol)

        lo, hi = fast_segments(alphas, betas)
        trim_lo, trim_hi = trim_pieces(lo, hi, self.config.trim_eps)
        theta, total = sample_pieces(trim_lo, trim_hi, u)

        # Trimming removed everything: fall back to the untrimmed set
        fallback = total <= 0
        if fallback.any():
            theta[fallback], total[fallback] = sample_pieces(
                lo[fallback], hi[fallback], u[fallback]
            )

        reject = (total <= 0) | infeasible.any(axis=-1)

        proposal = x * numpy.cos(theta)[:, None] + nu * numpy.sin(theta)[:, None]
        violation = numpy.max(proposal @ self.a_t - self.b, axis=-1)
        accept = ~reject & (violation <= self.tol)

        return numpy.where(accept[:, None], proposal, x), ~accept


def _check_start(poly: Polytope, x0: ArrayLike, chain: Optional[int] = None) -> NDArray:
    x0 = numpy.asarray(x0, dtype=float)
    if x0.shape != (poly.dim,):
        raise DimensionMismatch(
            f"Start has shape {x0.shape}, polytope has dimension {poly.dim}"
        )

    index = strict_feasibility_violation(poly, x0)
    if index is not None:
        where = f"chain {chain}: " if chain is not None else ""
        raise InfeasibleStart(
            f"{where}start is not strictly feasible for constraint {index}",
            index=index,
        )

    return x0


def _run_block(
    kernel: StepKernel,
    starts: NDArray,
    rngs: List[ChainRNG],
    n_samples: int,
) -> Tuple[NDArray, NDArray]:
    """Run a block of chains; return samples (k, n, d) and rejections (k,)."""
    cfg = kernel.config
    k, d = starts.shape
    dtype = cfg.dtype

    samples = numpy.zeros((k, n_samples, d), dtype=float)
    rejections = numpy.zeros(k, dtype=numpy.int64)
    x = starts.astype(dtype)

    total = cfg.total_steps(n_samples)
    chunk = max(1, DRAW_BUDGET // (k * d))

    step = 0
    while step < total:
        size = min(chunk, total - step)
        nus = numpy.stack([rng.nu.standard_normal((size, d)) for rng in rngs], axis=1)
        us = numpy.stack([rng.theta.random(size) for rng in rngs], axis=1)
        nus = nus.astype(dtype, copy=False)
        us = us.astype(dtype, copy=False)

        for t in range(size):
            x, rejected = kernel.step(x, nus[t], us[t])
            rejections += rejected
            step += 1

            kept = step - cfg.burn_in
            if kept > 0 and kept % cfg.thinning == 0:
                samples[:, kept // cfg.thinning - 1] = x

    return samples, rejections


def ess_step(
    poly: Polytope,
    state: ChainState,
    rng: ChainRNG,
    cfg: SamplerConfig,
) -> ChainState:
    """One rejection-free ESS iteration for a single chain."""
    kernel = StepKernel(poly, cfg)
    d = poly.dim
    nu = rng.nu.standard_normal((1, d)).astype(cfg.dtype, copy=False)
    u = rng.theta.random(1).astype(cfg.dtype, copy=False)

    x = numpy.asarray(state.x, dtype=cfg.dtype).reshape(1, d)
    x, rejected = kernel.step(x, nu, u)

    return ChainState(
        x=x[0],
        step=state.step + 1,
        rejections=state.rejections + int(rejected[0]),
    )


def run_chain(
    poly: Polytope,
    x0: ArrayLike,
    n_samples: int,
    cfg: SamplerConfig,
    rng: Optional[ChainRNG] = None,
) -> RunResult:
    """Run one chain from a strictly feasible start."""
    if n_samples < 0:
        raise ValueError("n_samples must be non-negative")

    x0 = _check_start(poly, x0)
    rng = rng or ChainRNG.from_seed(cfg.seed, 0)

    samples, rejections = _run_block(StepKernel(poly, cfg), x0[None, :], [rng], n_samples)
    return RunResult(
        samples=samples[0],
        chains=1,
        steps=cfg.total_steps(n_samples),
        rejections=int(rejections.sum()),
        seed=cfg.seed,
        chain_rejections=rejections,
    )


def run_parallel(
    poly: Polytope,
    starts: ArrayLike,
    per_chain: int,
    cfg: SamplerConfig,
) -> RunResult:
    """Run k independent chains, chain i seeded from (cfg.seed, i).

    Chains are grouped into blocks of `cfg.block_size` and blocks are run by
    `cfg.workers` threads. Outputs are concatenated in chain order, so the
    result does not depend on the number of workers.

    """
    if per_chain < 0:
        raise ValueError("per_chain must be non-negative")

    starts = numpy.atleast_2d(numpy.asarray(starts, dtype=float))
    k = starts.shape[0]
    if k < 1:
        raise ValueError("At least one chain is needed")

    for i, x0 in enumerate(starts):
        _check_start(poly, x0, chain=i)

    kernel = StepKernel(poly, cfg)
    blocks = [range(s, min(s + cfg.block_size, k)) for s in range(0, k, cfg.block_size)]

    def run(block: range) -> Tuple[NDArray, NDArray]:
        logger.debug(f"Starting chains {block.start}..{block.stop - 1}")
        rngs = [ChainRNG.from_seed(cfg.seed, i) for i in block]
        samples, rejections = _run_block(kernel, starts[block.start : block.stop], rngs, per_chain)

        if rejections.sum():
            logger.info(
                f"Chains {block.start}..{block.stop - 1}: {int(rejections.sum())} safeguard rejection(s)"
            )
        logger.debug(f"Finished chains {block.start}..{block.stop - 1}")
        return samples, rejections

    if cfg.workers == 1 or len(blocks) == 1:
        outputs = [run(block) for block in blocks]
    else:
        with ThreadPoolExecutor(max_workers=cfg.workers) as executor:
            outputs = list(executor.map(run, blocks))

    samples = numpy.concatenate([out[0] for out in outputs], axis=0)
    rejections = numpy.concatenate([out[1] for out in outputs])

    return RunResult(
        samples=samples.reshape(k * per_chain, poly.dim),
        chains=k,
        steps=cfg.total_steps(per_chain),
        rejections=int(rejections.sum()),
        seed=cfg.seed,
        chain_rejections=rejections,
    )


def sample_gaussian(
    problem: Problem,
    n_samples: int,
    chains: int,
    cfg: SamplerConfig,
    start: Optional[ArrayLike] = None,
) -> RunResult:
    """Sample N(mean, covariance) truncated to the problem's polytope.

    `n_samples` is per chain. The start (original coordinates) defaults to the
    problem's `x0`, then to the mean when the mean is strictly feasible.

    """
    if start is None:
        start = problem.x0
    if start is None:
        if strict_feasibility_violation(problem.poly, problem.spec.mean) is not None:
            raise InvalidProblem(
                "No start given and the mean is not strictly feasible; provide x0"
            )
        start = problem.spec.mean

    _check_start(problem.poly, start)

    white = whiten(problem.spec, problem.poly)
    u0 = to_whitened(problem.spec, start)
    result = run_parallel(white, numpy.tile(u0, (chains, 1)), n_samples, cfg)

    return attr.evolve(result, samples=unwhiten(problem.spec, result.samples))
