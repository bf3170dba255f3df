"""FastAPI service wrapping the construction pipeline and sub-algorithms.

Every operation the CLI exposes is a POST endpoint with a pydantic
request/response pair; big integers travel as decimal strings.  Compute
outcomes that are legitimate results (a non-square input, a composite
modulus, an unsolvable norm equation) come back as ok=False payloads,
not transport errors.
"""

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import __version__
from .config import load_config
from .curve import CurveOverPrimeRing
from .errors import CompositeSignal, DomainError, NotASquare, ResourceError
from .fib import fib
from .forms import (
    bound_B,
    class_number,
    ggz_lower_bound,
    prime_forms,
    reduced_forms,
)
from .modular import cornacchia, sqrt_mod
from .pipeline import canonical_json, check_index, construct, verify_certificate
from .schoof import schoof_trace

app = FastAPI(title="fibcurve", version=__version__)


class FibRequest(BaseModel):
    n: int = Field(ge=0, le=200000)


class FibResponse(BaseModel):
    n: int
    value: str
    digits: int


@app.get("/health")
def health():
    return {"status": "ok", "version": __version__}


@app.post("/fib", response_model=FibResponse)
def fib_endpoint(req: FibRequest):
    import sys

    value = fib(req.n)
    if value.bit_length() // 3 > sys.get_int_max_str_digits():
        sys.set_int_max_str_digits(value.bit_length())
    text = str(value)
    return FibResponse(n=req.n, value=text, digits=len(text))


class ConstructRequest(BaseModel):
    index: int = Field(ge=5, le=1000)
    seed: int = 0
    config: dict | None = None


class ConstructResponse(BaseModel):
    verdict: str
    exit_code: int
    reason: str = ""
    certificate: dict | None = None
    canonical: str = ""


@app.post("/construct", response_model=ConstructResponse)
def construct_endpoint(req: ConstructRequest):
    overrides = dict(req.config or {})
    overrides["seed"] = req.seed
    try:
        cfg = load_config(None, overrides)
    except (ValueError, TypeError) as e:
        raise HTTPException(status_code=400, detail=str(e))
    result = construct(req.index, config=cfg)
    return ConstructResponse(
        verdict=result.verdict,
        exit_code=result.exit_code,
        reason=result.reason,
        certificate=result.certificate,
        canonical=canonical_json(result.certificate) if result.certificate else "",
    )


class CheckRequest(BaseModel):
    index: int = Field(ge=5, le=100000)
    seed: int = 0


class CheckResponse(BaseModel):
    verdict: str
    exit_code: int
    report: dict


@app.post("/check", response_model=CheckResponse)
def check_endpoint(req: CheckRequest):
    verdict, report = check_index(req.index, seed=req.seed)
    code = {"prime": 0, "probable prime": 0, "composite": 1}.get(verdict, 2)
    return CheckResponse(verdict=verdict, exit_code=code, report=report)


class VerifyRequest(BaseModel):
    certificate: dict


class VerifyResponse(BaseModel):
    accepted: bool
    reason: str = ""
    exit_code: int


@app.post("/verify-cert", response_model=VerifyResponse)
def verify_endpoint(req: VerifyRequest):
    out = verify_certificate(req.certificate)
    return VerifyResponse(accepted=out.accepted, reason=out.reason, exit_code=out.exit_code)


class VerifyPassesResponse(BaseModel):
    survived: bool
    elkies: list = []
    eigenvalue: list = []
    witnesses: list = []
    error: str = ""


@app.post("/verify-passes", response_model=VerifyPassesResponse)
def verify_passes_endpoint(req: VerifyRequest):
    from .pipeline import run_verification_passes

    out = run_verification_passes(req.certificate)
    return VerifyPassesResponse(**out)


class HilbertRequest(BaseModel):
    discriminant: int = Field(lt=0)
    method: str = "analytic"  # "analytic" | "crt" | "both"
    modulus: int | None = None


class HilbertResponse(BaseModel):
    ok: bool
    discriminant: int
    degree: int | None = None
    methods: dict = {}
    agree: bool | None = None
    error: str = ""


@app.post("/hilbert", response_model=HilbertResponse)
def hilbert_endpoint(req: HilbertRequest):
    from .classpoly import hilbert_analytic, hilbert_crt, hilbert_crt_integer

    D = req.discriminant
    if req.method not in ("analytic", "crt", "both"):
        raise HTTPException(status_code=400, detail="method must be analytic|crt|both")
    methods = {}
    try:
        if req.method in ("analytic", "both"):
            H = hilbert_analytic(D)
            H = H.reduce_mod(req.modulus) if req.modulus else H
            methods["analytic"] = [str(c) for c in H.coeffs]
        if req.method in ("crt", "both"):
            H = hilbert_crt(D, req.modulus) if req.modulus else hilbert_crt_integer(D)
            methods["crt"] = [str(c) for c in H.coeffs]
    except (DomainError, ResourceError) as e:
        return HilbertResponse(ok=False, discriminant=D, error=str(e))
    agree = None
    if len(methods) == 2:
        agree = methods["analytic"] == methods["crt"]
    degree = len(next(iter(methods.values()))) - 1
    return HilbertResponse(ok=True, discriminant=D, degree=degree, methods=methods, agree=agree)


class CornacchiaRequest(BaseModel):
    d: int = Field(gt=0)
    m: str  # decimal; may be large


class CornacchiaResponse(BaseModel):
    ok: bool
    solvable: bool = False
    x: str | None = None
    y: str | None = None
    error: str = ""


@app.post("/cornacchia", response_model=CornacchiaResponse)
def cornacchia_endpoint(req: CornacchiaRequest):
    try:
        m = int(req.m)
        sol = cornacchia(req.d, m)
    except (DomainError, ValueError) as e:
        return CornacchiaResponse(ok=False, error=str(e))
    if sol:
        return CornacchiaResponse(ok=True, solvable=True, x=str(sol[0]), y=str(sol[1]))
    return CornacchiaResponse(ok=True, solvable=False, error=sol.reason)


class SqrtModRequest(BaseModel):
    a: str
    p: str


class SqrtModResponse(BaseModel):
    ok: bool
    root: str | None = None
    error: str = ""
    composite_factor: str | None = None


@app.post("/sqrtmod", response_model=SqrtModResponse)
def sqrtmod_endpoint(req: SqrtModRequest):
    try:
        root = sqrt_mod(int(req.a), int(req.p))
        return SqrtModResponse(ok=True, root=str(root))
    except NotASquare as e:
        return SqrtModResponse(ok=False, error=f"not-a-square: {e}")
    except CompositeSignal as e:
        return SqrtModResponse(
            ok=False,
            error=f"composite-modulus: {e.stage}",
            composite_factor=str(e.factor) if e.factor else None,
        )
    except (DomainError, ValueError) as e:
        raise HTTPException(status_code=400, detail=str(e))


class ClassGroupRequest(BaseModel):
    discriminant: int = Field(lt=0)


class ClassGroupResponse(BaseModel):
    ok: bool
    discriminant: int
    class_number: int | None = None
    reduced_forms: list = []
    prime_forms: list = []
    prime_form_bound: int | None = None
    ggz_lower_bound: float | None = None
    error: str = ""


@app.post("/classgroup", response_model=ClassGroupResponse)
def classgroup_endpoint(req: ClassGroupRequest):
    D = req.discriminant
    try:
        forms = reduced_forms(D)
        bound = bound_B(D)
        pforms = prime_forms(D, bound)
        ggz = ggz_lower_bound(D)
    except (DomainError, ResourceError) as e:
        return ClassGroupResponse(ok=False, discriminant=D, error=str(e))
    return ClassGroupResponse(
        ok=True,
        discriminant=D,
        class_number=len(forms),
        reduced_forms=[[f.a, f.b, f.c] for f in forms],
        prime_forms=[[pf.form.a, pf.form.b, pf.form.c] for pf in pforms],
        prime_form_bound=bound,
        ggz_lower_bound=ggz,
    )


class SchoofRequest(BaseModel):
    a: int
    b: int
    p: int = Field(gt=3, le=10**7)


class SchoofResponse(BaseModel):
    ok: bool
    trace: int | None = None
    order: str | None = None
    error: str = ""


@app.post("/schoof", response_model=SchoofResponse)
def schoof_endpoint(req: SchoofRequest):
    try:
        E = CurveOverPrimeRing(req.p, req.a % req.p, req.b % req.p)
        t = schoof_trace(E)
    except (DomainError, ResourceError) as e:
        return SchoofResponse(ok=False, error=str(e))
    except CompositeSignal as e:
        return SchoofResponse(ok=False, error=f"composite-modulus: {e.stage}")
    return SchoofResponse(ok=True, trace=t, order=str(req.p + 1 - t))
