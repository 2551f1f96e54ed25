"""tmvn-ess FastAPI dependencies."""

import math
from typing import List, Literal, Optional, get_args

import attr
from fastapi import HTTPException, Query
from starlette.requests import Request
from typing_extensions import Annotated

from tmvn.ess.enums import MediaType, Precision
from tmvn.ess.sampler import SamplerConfig
from tmvn.ess.settings import SamplerSettings

ResponseType = Literal["json", "csv"]


@attr.s
class SampleParams:
    """Sampling request parameters."""

    samples: int = attr.ib()
    chains: int = attr.ib()
    config: SamplerConfig = attr.ib()


def accept_media_type(accept: str, mediatypes: List[MediaType]) -> Optional[MediaType]:
    """Return the preferred MediaType among `mediatypes` for an Accept header."""
    accept_values = {}
    for m in accept.replace(" ", "").split(","):
        values = m.split(";")
        name = values[0]
        quality = 1.0
        if len(values) > 1:
            params = dict(p.split("=", 1) for p in values[1:] if "=" in p)
            try:
                quality = float(params.get("q", 1.0))
            except ValueError:
                quality = 0

        # q=0 means "not acceptable"
        if name and quality:
            accept_values[name] = max(quality, accept_values.get(name, 0))

    for quality in sorted(set(accept_values.values()), reverse=True):
        preferred = [n for n, q in accept_values.items() if q == quality]
        for media in mediatypes:
            if media.value in preferred:
                return media

    if ("*" in accept_values or "*/*" in accept_values) and mediatypes:
        return mediatypes[0]

    return None


def OutputType(
    request: Request,
    f: Annotated[
        Optional[ResponseType],
        Query(
            description="Response MediaType. Defaults to JSON or the value defined in the `accept` header."
        ),
    ] = None,
) -> Optional[MediaType]:
    """Output MediaType: json or csv."""
    if f:
        return MediaType[f]

    accepted_media = [MediaType[v] for v in get_args(ResponseType)]
    return accept_media_type(request.headers.get("accept", ""), accepted_media)


def SamplerParams(
    request: Request,
    samples: Annotated[int, Query(ge=0, description="Samples per chain.")] = 100,
    chains: Annotated[int, Query(ge=1, description="Number of chains.")] = 1,
    burn_in: Annotated[Optional[int], Query(ge=0)] = None,
    thinning: Annotated[Optional[int], Query(ge=1)] = None,
    trim_eps: Annotated[Optional[float], Query(ge=0, lt=math.pi)] = None,
    tol: Annotated[Optional[float], Query(ge=0)] = None,
    seed: Annotated[Optional[int], Query(ge=0)] = None,
    precision: Annotated[Optional[Precision], Query()] = None,
) -> SampleParams:
    """Sampler configuration from query parameters (settings fill the gaps)."""
    max_samples = request.app.state.max_samples
    if samples * chains > max_samples:
        raise HTTPException(
            status_code=400,
            detail=f"chains * samples should not exceed {max_samples}",
        )

    config = SamplerConfig.from_settings(
        SamplerSettings(),
        burn_in=burn_in,
        thinning=thinning,
        trim_eps=trim_eps,
        feasibility_tol=tol,
        seed=seed,
        precision=precision,
    )
    return SampleParams(samples=samples, chains=chains, config=config)
