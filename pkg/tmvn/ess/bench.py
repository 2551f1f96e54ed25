"""Benchmark instances, operation counts and timing harness."""

import math
from typing import List, Optional, Sequence, Tuple

import attr
import numpy
from numpy.typing import NDArray

from tmvn.ess.angles import interval_pairs, project_arrays
from tmvn.ess.enums import IntervalMethod, Precision
from tmvn.ess.errors import DuplicateAngles, WorstCaseTooLarge
from tmvn.ess.intervals import (
    ConstraintAngles,
    OpCounter,
    active_intervals_brute,
    active_intervals_fast,
    active_intervals_likelihood,
    active_intervals_likelihood_jump,
    realize_angles,
)
from tmvn.ess.logger import logger
from tmvn.ess.models import BenchRow
from tmvn.ess.oracles import TruncatedNormal1D, moments_1d
from tmvn.ess.polytope import Polytope, strict_feasibility_violation
from tmvn.ess.sampler import SamplerConfig, run_chain, run_parallel
from tmvn.ess.utils import Timer, median_ns

# 3**-i stays well above the smallest double for i <= 300
MAX_WORST_CASE = 300

SAMPLE_1 = "sample_1"
SAMPLE_K = "sample_k"

# Fixed angular step of the likelihood jump baseline
DEFAULT_JUMP_EPS = 1e-6


@attr.s(eq=False)
class BenchInstance:
    """Benchmark problem: a polytope and a start inside it.

    `nu` fixes the direction used by the interval-construction timings and
    `angles`, when set, bypasses root solving entirely.

    """

    poly: Polytope = attr.ib()
    x0: NDArray = attr.ib(converter=lambda v: numpy.asarray(v, dtype=float))
    label: str = attr.ib()
    nu: Optional[NDArray] = attr.ib(default=None)
    angles: Optional[ConstraintAngles] = attr.ib(default=None)

    @property
    def dims(self) -> Tuple[int, int]:
        """(d, m)."""
        return self.poly.dim, self.poly.n_constraints

    @property
    def strictly_feasible(self) -> bool:
        """True when x0 can start a chain."""
        return strict_feasibility_violation(self.poly, self.x0) is None


def gen_random_instance(d: int, rng: numpy.random.Generator) -> BenchInstance:
    """Random polytope with d constraints whose interior contains x0 ~ N(0, I).

    A has standard normal entries and b = A x0 + u with u ~ U[0, 1]^d; entries
    of u are redrawn until every residual is negative.

    """
    if d < 1:
        raise ValueError("d must be >= 1")

    a_rows = rng.standard_normal((d, d))
    x0 = rng.standard_normal(d)
    ax = a_rows @ x0

    u = rng.random(d)
    while True:
        bad = (ax - (ax + u)) >= 0
        if not bad.any():
            break
        u[bad] = rng.random(int(bad.sum()))

    return BenchInstance(Polytope(a_rows, ax + u), x0, label=f"random-d{d}")


def gen_worst_case_angles(m: int) -> ConstraintAngles:
    """Nested angle pairs alpha_i = 2pi 3^-i, beta_i = 2 alpha_i, i = 1..m.

    Intersected in this order the running set gains one segment per
    constraint, which makes sequential intersection quadratic.

    """
    if m < 1:
        raise ValueError("m must be >= 1")

    if m > MAX_WORST_CASE:
        raise WorstCaseTooLarge(f"m={m} exceeds {MAX_WORST_CASE}")

    alphas = 2 * numpy.pi * 3.0 ** -numpy.arange(1, m + 1)
    return ConstraintAngles(alphas, 2 * alphas)


def worst_case_instance(m: int) -> BenchInstance:
    """2-D instance whose intersection angles are the worst-case family.

    Arcs beyond ~3^-17 round away in double precision, so for large m the
    start sits on the boundary of the realized polytope; the instance is used
    for interval-construction timings only.

    """
    angles = gen_worst_case_angles(m)
    poly, x, nu = realize_angles(angles)
    return BenchInstance(poly, x, label=f"worst-case-m{m}", nu=nu, angles=angles)


def count_operations(angles: ConstraintAngles) -> Tuple[int, int]:
    """(fast comparisons, brute segment operations) for one construction."""
    fast, brute = OpCounter(), OpCounter()
    active_intervals_fast(angles, counter=fast)
    active_intervals_brute(angles, counter=brute)
    return fast.comparisons, brute.segment_ops


def _direction(inst: BenchInstance, rng: numpy.random.Generator) -> NDArray:
    return inst.nu if inst.nu is not None else rng.standard_normal(inst.poly.dim)


def _angles(inst: BenchInstance, nu: NDArray) -> ConstraintAngles:
    if inst.angles is not None:
        return inst.angles

    p, q = project_arrays(inst.poly, inst.x0, nu)
    alphas, betas, _ = interval_pairs(p, q, inst.poly.b)
    return ConstraintAngles(alphas, betas)


def _time_calls(func, reps: int) -> Optional[float]:
    """Median ns per call over `reps` calls after one warm-up call."""
    timings = []
    for _ in range(reps + 1):
        with Timer() as t:
            func()
        timings.append(t.elapsed_ns)

    return median_ns(timings, warmup=1)


def time_methods(
    instances: Sequence[BenchInstance],
    reps: int = 5,
    chains: int = 10,
    steps: int = 100,
    workers: int = 4,
    precision: Precision = Precision.f64,
    seed: int = 0,
    jump_eps: float = DEFAULT_JUMP_EPS,
) -> List[BenchRow]:
    """Time the interval constructions and the sampler on every instance.

    Sampler throughput uses no burn-in and no thinning. One chain runs
    `chains * steps` steps and each of `chains` parallel chains runs `steps`
    steps, so both rows report the same number of samples.

    """
    if reps < 3:
        raise ValueError("reps must be >= 3")

    rng = numpy.random.default_rng(seed)
    rows: List[BenchRow] = []

    def add(inst: BenchInstance, method: str, ns: Optional[float], sps=None, n_workers=1, eps=None):
        d, m = inst.dims
        row = BenchRow(
            label=inst.label,
            d=d,
            m=m,
            method=method,
            reps=reps,
            median_ns_per_call=ns,
            samples_per_sec=sps,
            workers=n_workers,
            precision=precision,
            seed=seed,
            eps=eps,
        )
        logger.info(
            f"{row.label} {row.method}: {row.median_ns_per_call} ns/call, {row.samples_per_sec} samples/s"
        )
        rows.append(row)

    for inst in instances:
        nu = _direction(inst, rng)
        angles = _angles(inst, nu)

        add(inst, IntervalMethod.fast.value, _time_calls(lambda: active_intervals_fast(angles), reps))
        add(inst, IntervalMethod.brute.value, _time_calls(lambda: active_intervals_brute(angles), reps))

        baselines = [
            (
                IntervalMethod.likelihood,
                None,
                lambda: active_intervals_likelihood(inst.poly, inst.x0, nu, angles),
            ),
            (
                IntervalMethod.likelihood_jump,
                jump_eps,
                lambda: active_intervals_likelihood_jump(inst.poly, inst.x0, nu, angles, jump_eps),
            ),
        ]
        for method, eps, func in baselines:
            try:
                ns = _time_calls(func, reps)
            except DuplicateAngles as e:
                logger.warning(f"{inst.label}: {method.value} baseline skipped ({e})")
                ns = None
            add(inst, method.value, ns, eps=eps)

        if not inst.strictly_feasible:
            logger.warning(f"{inst.label}: start on the boundary, sampler timings skipped")
            continue

        cfg = SamplerConfig(precision=precision, seed=seed, workers=1)
        ns = _time_calls(lambda: run_chain(inst.poly, inst.x0, chains * steps, cfg), reps)
        add(inst, SAMPLE_1, ns / (chains * steps), 1e9 * chains * steps / ns)

        cfg = SamplerConfig(
            precision=precision,
            seed=seed,
            workers=workers,
            block_size=max(1, math.ceil(chains / workers)),
        )
        starts = numpy.tile(inst.x0, (chains, 1))
        ns = _time_calls(lambda: run_parallel(inst.poly, starts, steps, cfg), reps)
        add(inst, SAMPLE_K, ns / (chains * steps), 1e9 * chains * steps / ns, workers)

    return rows


@attr.s(frozen=True)
class UnivariateResult:
    """Estimated and closed-form moments of a univariate run."""

    lower: float = attr.ib()
    upper: float = attr.ib()
    mean: float = attr.ib()
    variance: float = attr.ib()
    true_mean: float = attr.ib()
    true_variance: float = attr.ib()
    n_samples: int = attr.ib()
    rejections: int = attr.ib()
    steps: int = attr.ib()

    @property
    def mean_stderr(self) -> float:
        """Standard error of the mean for independent draws."""
        return math.sqrt(self.true_variance / self.n_samples)


def univariate_experiment(
    lower: float,
    upper: float,
    chains: int = 2000,
    per_chain: int = 50,
    burn_in: int = 500,
    thinning: int = 10,
    precision: Precision = Precision.f32,
    seed: int = 0,
    workers: int = 1,
) -> UnivariateResult:
    """Sample N(0, 1) truncated to [lower, upper] with parallel chains.

    Defaults draw 2000 x 50 = 1e5 samples with 500 burn-in steps and a
    thinning of 10, i.e. 2e6 steps in total.

    """
    target = TruncatedNormal1D(lower, upper)
    true_mean, true_variance = moments_1d(target)

    if math.isinf(lower) and math.isinf(upper):
        start = 0.0
    elif math.isinf(lower):
        start = upper - 1.0
    elif math.isinf(upper):
        start = lower + 1.0
    else:
        start = 0.5 * (lower + upper)

    cfg = SamplerConfig(
        precision=precision,
        seed=seed,
        burn_in=burn_in,
        thinning=thinning,
        workers=workers,
    )
    result = run_parallel(target.polytope(), numpy.full((chains, 1), start), per_chain, cfg)

    values = result.samples[:, 0]
    return UnivariateResult(
        lower=lower,
        upper=upper,
        mean=float(values.mean()),
        variance=float(values.var()),
        true_mean=true_mean,
        true_variance=true_variance,
        n_samples=values.shape[0],
        rejections=result.rejections,
        steps=result.chains * result.steps,
    )
