"""tmvn.ess pydantic models: problem files, run statistics, bench rows and API bodies."""

from typing import List, Optional

from pydantic import BaseModel, Field, model_validator
from typing_extensions import Annotated

from tmvn.ess.enums import MediaType, Precision


class Link(BaseModel):
    """Link model."""

    href: Annotated[
        str,
        Field(
            description="Supplies the URI to a remote resource (or resource fragment).",
            json_schema_extra={"example": "http://localhost:8000/api"},
        ),
    ]
    rel: Annotated[
        str,
        Field(
            description="The type or semantics of the relation.",
            json_schema_extra={"example": "service-desc"},
        ),
    ]
    type: Annotated[
        Optional[MediaType],
        Field(
            description="A hint indicating what the media type of the result of dereferencing the link should be.",
        ),
    ] = None
    title: Annotated[
        Optional[str],
        Field(
            description="Used to label the destination of a link such that it can be used as a human-readable identifier.",
        ),
    ] = None

    model_config = {"use_enum_values": True}


class Landing(BaseModel):
    """Landing page model."""

    title: Optional[str] = None
    description: Optional[str] = None
    links: List[Link]


class ProblemFile(BaseModel):
    """Truncated normal problem: N(mean, covariance) restricted to {x : A x <= b}.

    `mean` and `covariance` default to the standard normal. `x0` is an optional
    strictly feasible start, in original coordinates.

    """

    A: Annotated[
        List[List[float]],
        Field(description="Constraint matrix, row-major (m x d).", min_length=1),
    ]
    b: Annotated[List[float], Field(description="Constraint offsets (m).")]
    mean: Annotated[Optional[List[float]], Field(description="Mean (d).")] = None
    covariance: Annotated[
        Optional[List[List[float]]], Field(description="Covariance (d x d).")
    ] = None
    x0: Annotated[
        Optional[List[float]], Field(description="Strictly feasible start (d).")
    ] = None

    @model_validator(mode="after")
    def check_dimensions(self):
        """Check that every array agrees with the shape of A."""
        m = len(self.A)
        d = len(self.A[0])
        if d == 0 or any(len(row) != d for row in self.A):
            raise ValueError("A should be a non-empty rectangular matrix")

        if len(self.b) != m:
            raise ValueError(f"b has {len(self.b)} entries but A has {m} rows")

        if self.mean is not None and len(self.mean) != d:
            raise ValueError(f"mean should have {d} entries")

        if self.covariance is not None and (
            len(self.covariance) != d or any(len(row) != d for row in self.covariance)
        ):
            raise ValueError(f"covariance should be {d}x{d}")

        if self.x0 is not None and len(self.x0) != d:
            raise ValueError(f"x0 should have {d} entries")

        return self

    @property
    def dim(self) -> int:
        """Dimension."""
        return len(self.A[0])

    @property
    def is_standard(self) -> bool:
        """True when no mean nor covariance is given."""
        return self.mean is None and self.covariance is None


class RunStats(BaseModel):
    """Sampling run statistics (written next to the samples)."""

    n: int
    chains: int
    burn_in: int
    thinning: int
    rejections: int
    steps: int
    seed: int
    precision: Precision
    wall_time: float
    mean: List[float]
    variance: List[float]

    model_config = {"use_enum_values": True}


class BenchRow(BaseModel):
    """One benchmark measurement."""

    label: str
    d: int
    m: int
    method: str
    reps: int
    median_ns_per_call: Optional[float] = None
    samples_per_sec: Optional[float] = None
    workers: int = 1
    precision: Precision = Precision.f64
    seed: int
    # angular step of the likelihood jump baseline
    eps: Optional[float] = None

    model_config = {"use_enum_values": True}


class SampleResponse(BaseModel):
    """Samples (chain-major) and run statistics."""

    samples: List[List[float]]
    stats: RunStats


class CheckRequest(BaseModel):
    """Samples to check against a problem."""

    problem: ProblemFile
    samples: List[List[float]]
    tol: Annotated[float, Field(ge=0.0)] = 1e-9


class CheckResponse(BaseModel):
    """Feasibility report."""

    passed: bool
    n: int
    max_violation: Optional[float] = None
    first_violation: Optional[int] = None
