"""tmvn-ess enums."""

from enum import Enum

import numpy


class Precision(str, Enum):
    """Floating point precision of a sampling run."""

    f32 = "f32"
    f64 = "f64"

    @property
    def dtype(self) -> numpy.dtype:
        """Numpy dtype."""
        return numpy.dtype(numpy.float32 if self is Precision.f32 else numpy.float64)


class IntervalMethod(str, Enum):
    """Active interval construction methods."""

    fast = "fast"
    brute = "brute"
    likelihood = "likelihood"
    likelihood_jump = "likelihood_jump"


class BenchFamily(str, Enum):
    """Benchmark instance families."""

    random = "random"
    worst_case = "worst-case"


class MediaType(str, Enum):
    """Responses Media types formerly known as MIME types."""

    json = "application/json"
    csv = "text/csv"
    html = "text/html"
    openapi30_json = "application/vnd.oai.openapi+json;version=3.0"
