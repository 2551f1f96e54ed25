"""tmvn-ess settings."""

from typing import Optional

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings
from typing_extensions import Annotated

from tmvn.ess.enums import Precision


class SamplerSettings(BaseSettings):
    """Sampler settings"""

    precision: Precision = Precision.f64

    # None means "use the precision default"
    trim_eps: Optional[Annotated[float, Field(ge=0.0)]] = None
    tol: Optional[Annotated[float, Field(ge=0.0)]] = None

    burn_in: Annotated[int, Field(ge=0)] = 0
    thinning: Annotated[int, Field(ge=1)] = 1

    # Number of threads running chain blocks
    workers: Annotated[int, Field(ge=1)] = 1

    # Number of chains advanced together by one vectorized block
    block_size: Annotated[int, Field(ge=1)] = 256

    model_config = {
        "env_prefix": "TMVN_ESS_SAMPLER_",
        "env_file": ".env",
        "extra": "ignore",
    }


class BenchSettings(BaseSettings):
    """Benchmark settings"""

    reps: Annotated[int, Field(ge=3)] = 5
    chains: Annotated[int, Field(ge=1)] = 10
    steps: Annotated[int, Field(ge=1)] = 100
    workers: Annotated[int, Field(ge=1)] = 4

    # Fixed angular step of the likelihood jump baseline
    jump_eps: Annotated[float, Field(gt=0.0)] = 1e-6

    model_config = {
        "env_prefix": "TMVN_ESS_BENCH_",
        "env_file": ".env",
        "extra": "ignore",
    }


class ApiSettings(BaseSettings):
    """API settings"""

    name: str = "tmvn-ess"
    cors_origins: str = "*"
    root_path: str = ""
    debug: bool = False

    # Maximum number of samples (chains * samples) served by one request
    max_samples: Annotated[int, Field(ge=1)] = 1_000_000

    model_config = {
        "env_prefix": "TMVN_ESS_API_",
        "env_file": ".env",
        "extra": "ignore",
    }

    @field_validator("cors_origins")
    def parse_cors_origin(cls, v):
        """Parse CORS origins."""
        return [origin.strip() for origin in v.split(",")]
