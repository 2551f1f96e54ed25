"""tmvn-ess FastAPI application."""

import io
from typing import Dict, Optional

import numpy
from fastapi import Body, Depends, FastAPI
from fastapi.responses import ORJSONResponse
from starlette.middleware.cors import CORSMiddleware
from starlette.requests import Request
from starlette.responses import Response
from typing_extensions import Annotated

from tmvn.ess import __version__ as tmvn_ess_version
from tmvn.ess import models
from tmvn.ess.dependencies import OutputType, SampleParams, SamplerParams
from tmvn.ess.enums import MediaType
from tmvn.ess.errors import DEFAULT_STATUS_CODES, add_exception_handlers
from tmvn.ess.io import to_problem, write_samples
from tmvn.ess.polytope import residuals
from tmvn.ess.sampler import sample_gaussian
from tmvn.ess.settings import ApiSettings
from tmvn.ess.utils import Timer

settings = ApiSettings()

app = FastAPI(
    title=settings.name,
    openapi_url="/api",
    docs_url="/api.html",
    description="""Rejection-free elliptical slice sampling of truncated multivariate normal distributions.

---

Post a problem `{"A": [[...]], "b": [...], "mean": [...], "covariance": [[...]], "x0": [...]}`
to `/sample` and get samples back as JSON or CSV.

---
    """,
    version=tmvn_ess_version,
    root_path=settings.root_path,
)

app.state.max_samples = settings.max_samples

add_exception_handlers(app, DEFAULT_STATUS_CODES)

# Set all CORS enabled origins
if settings.cors_origins:
    app.add_middleware(
        CORSMiddleware,
        allow_origins=settings.cors_origins,
        allow_credentials=True,
        allow_methods=["GET", "POST"],
        allow_headers=["*"],
    )


###############################################################################
# Sampling Endpoints
@app.post(
    "/sample",
    response_model=models.SampleResponse,
    response_class=ORJSONResponse,
    responses={
        200: {
            "content": {
                MediaType.json.value: {},
                MediaType.csv.value: {},
            }
        },
    },
    operation_id="sample",
    summary="Sample a truncated normal problem",
    tags=["Sampling"],
)
def sample(
    problem: Annotated[models.ProblemFile, Body(description="Problem definition.")],
    params: Annotated[SampleParams, Depends(SamplerParams)],
    output_type: Annotated[Optional[MediaType], Depends(OutputType)] = None,
):
    """Run `chains` chains and return `samples` samples per chain (chain-major)."""
    cfg = params.config
    with Timer() as t:
        result = sample_gaussian(to_problem(problem), params.samples, params.chains, cfg)

    if output_type == MediaType.csv:
        buffer = io.StringIO()
        write_samples(buffer, result.samples)
        return Response(buffer.getvalue(), media_type=MediaType.csv.value)

    n = result.n_samples
    return models.SampleResponse(
        samples=result.samples.tolist(),
        stats=models.RunStats(
            n=n,
            chains=result.chains,
            burn_in=cfg.burn_in,
            thinning=cfg.thinning,
            rejections=result.rejections,
            steps=result.steps * result.chains,
            seed=result.seed,
            precision=cfg.precision,
            wall_time=t.elapsed,
            mean=result.samples.mean(axis=0).tolist() if n else [],
            variance=result.samples.var(axis=0).tolist() if n else [],
        ),
    )


@app.post(
    "/check",
    response_model=models.CheckResponse,
    response_class=ORJSONResponse,
    operation_id="check",
    summary="Check samples against a problem's constraints",
    tags=["Sampling"],
)
def check(body: models.CheckRequest):
    """Report the largest constraint violation and the first violating row."""
    problem = to_problem(body.problem)
    if not body.samples:
        return models.CheckResponse(passed=True, n=0)

    worst = residuals(problem.poly, numpy.asarray(body.samples, dtype=float)).max(axis=1)
    bad = numpy.flatnonzero(worst > body.tol)
    return models.CheckResponse(
        passed=not bad.size,
        n=len(body.samples),
        max_violation=float(worst.max()),
        first_violation=int(bad[0]) if bad.size else None,
    )


###############################################################################
# Health Check Endpoint
@app.get("/healthz", description="Health Check", tags=["Health Check"])
def ping() -> Dict:
    """Health check."""
    return {"ping": "pong!"}


###############################################################################
# Landing page
@app.get(
    "/",
    response_model=models.Landing,
    response_model_exclude_none=True,
    response_class=ORJSONResponse,
    operation_id="getLandingPage",
    summary="landing page",
    tags=["Landing Page"],
)
def landing(request: Request):
    """The landing page provides links to the API definition and documentation."""
    return models.Landing(
        title=settings.name,
        description="Rejection-free elliptical slice sampling",
        links=[
            models.Link(
                title="Landing Page",
                href=str(request.url_for("landing")),
                type=MediaType.json,
                rel="self",
            ),
            models.Link(
                title="the API definition (JSON)",
                href=str(request.url_for("openapi")),
                type=MediaType.openapi30_json,
                rel="service-desc",
            ),
            models.Link(
                title="the API documentation",
                href=str(request.url_for("swagger_ui_html")),
                type=MediaType.html,
                rel="service-doc",
            ),
            models.Link(
                title="Sample a problem",
                href=str(request.url_for("sample")),
                type=MediaType.json,
                rel="data",
            ),
        ],
    )


if settings.debug:

    @app.get("/debug", include_in_schema=False, tags=["DEBUG"])
    def debug(request: Request) -> Dict:
        """APP Info."""

        import scipy
        from fastapi import __version__ as fastapi_version
        from pydantic import __version__ as pydantic_version
        from starlette import __version__ as starlette_version

        return {
            "max_samples": request.app.state.max_samples,
            "versions": {
                "tmvn.ess": tmvn_ess_version,
                "numpy": numpy.__version__,
                "scipy": scipy.__version__,
                "fastapi": fastapi_version,
                "starlette": starlette_version,
                "pydantic": pydantic_version,
            },
        }
