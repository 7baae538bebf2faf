"""FastAPI app exposing the checker over HTTP.

Model sources are sent inline; results carry exact rationals as
strings.  Error kinds map onto status codes so thin clients can turn
them into exit codes: parse/validation 422, precondition 409,
usage 400, internal 500.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from fastapi import FastAPI
from fastapi.responses import JSONResponse

from .. import dsl, engines, lu, model
from . import schemas

app = FastAPI(title="ppta", version="0.1.0",
              description="Model checking and parameter synthesis for "
                          "parametric probabilistic timed automata")


class ServiceError(Exception):
    def __init__(self, kind: str, message: str, status: int):
        super().__init__(message)
        self.kind = kind
        self.message = message
        self.status = status


@app.exception_handler(ServiceError)
async def _service_error(_request, exc: ServiceError):
    return JSONResponse(status_code=exc.status,
                        content={"error": {"kind": exc.kind,
                                           "message": exc.message}})


def _parse_model(source: str):
    try:
        return dsl.parse(source)
    except dsl.DslError as e:
        raise ServiceError("parse", str(e), 422) from None


def _rat(text) -> Fraction:
    try:
        return Fraction(str(text))
    except (ValueError, ZeroDivisionError) as e:
        raise ServiceError("usage", f"bad rational {text!r}: {e}", 400) from None


def _rho(d):
    return {p: _rat(v) for p, v in (d or {}).items()}


def _region(spec):
    if spec is None:
        return None
    try:
        if spec.explicit is not None:
            return lu.ClockRegion.from_points(spec.explicit)
        return lu.ClockRegion(rectangular={p: (lo, hi) for p, (lo, hi)
                                           in (spec.rectangular or {}).items()})
    except lu.LuError as e:
        raise ServiceError("usage", str(e), 400) from None


def _run(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except engines.ValidationError as e:
        raise ServiceError("validation", str(e), 422) from None
    except engines.PreconditionError as e:
        raise ServiceError("precondition", str(e), 409) from None
    except lu.LuError as e:
        raise ServiceError("precondition", str(e), 409) from None
    except (model.ModelError, ValueError) as e:
        raise ServiceError("usage", str(e), 400) from None


def _rat_str(v: Fraction) -> str:
    v = Fraction(v)
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


@app.post("/info", response_model=schemas.InfoResponse)
def info(req: schemas.ModelRequest):
    m = _parse_model(req.source)
    diags = model.validate(m)
    corners = {}
    names = sorted(m.clock_params)
    axes = [sorted(set(m.clock_params[p])) for p in names]
    for pt in itertools.product(*axes) if names else [()]:
        gamma = dict(zip(names, pt))
        label = ",".join(f"{p}={v}" for p, v in gamma.items()) or "-"
        corners[label] = model.max_constants(m, gamma)
    return schemas.InfoResponse(
        name=m.name, clocks=list(m.clocks), locations=list(m.locations),
        initial=m.initial, actions=list(m.actions),
        clock_params=dict(m.clock_params),
        prob_params={p: (_rat_str(lo), _rat_str(hi))
                     for p, (lo, hi) in m.prob_params.items()},
        classification=model.classify_lu(m),
        closed=model.is_closed(m),
        diagnostics=[d.render() for d in diags],
        max_constants=corners)


@app.post("/check", response_model=schemas.CheckResponse)
def check(req: schemas.CheckRequest):
    m = _parse_model(req.source)
    kwargs = {} if req.cap is None else {"cap": req.cap}
    res = _run(engines.run_check, m, req.targets, req.objective, req.engine,
               req.mode, gamma=req.gamma, rho=_rho(req.rho), **kwargs)
    return schemas.CheckResponse(value=_rat_str(res.value),
                                 value_float=float(res.value),
                                 objective=res.objective, engine=res.engine,
                                 mode=res.mode, flags=res.flags)


def _point_row(pt: engines.SynthPoint) -> schemas.SynthPointRow:
    return schemas.SynthPointRow(
        gamma=dict(pt.gamma),
        rho={p: _rat_str(v) for p, v in pt.rho.items()},
        value=_rat_str(pt.value), value_float=float(pt.value), flags=pt.flags)


@app.post("/synth", response_model=schemas.SynthResponse)
def synth(req: schemas.SynthRequest):
    m = _parse_model(req.source)
    rho_spec = {}
    for p, entry in (req.rho_grid or {}).items():
        rho_spec[p] = entry if isinstance(entry, int) else [_rat(v) for v in entry]
    kwargs = {} if req.cap is None else {"cap": req.cap}
    res = _run(engines.run_synth, m, req.targets, req.objective, req.engine,
               req.mode, region=_region(req.region), rho_spec=rho_spec,
               apply_reduction=req.reduction, **kwargs)
    return schemas.SynthResponse(best=_point_row(res.best),
                                 table=[_point_row(pt) for pt in res.table],
                                 fixed=res.fixed, flags=res.flags)


@app.post("/reduce", response_model=schemas.ReduceResponse)
def reduce_endpoint(req: schemas.ReduceRequest):
    m = _parse_model(req.source)
    diags = model.validate(m)
    if diags:
        raise ServiceError("validation",
                           "; ".join(d.render() for d in diags), 422)
    region = _region(req.region) or lu.ClockRegion.from_model(m)
    try:
        report = lu.reduce(m, region, req.objective)
    except lu.LuError as e:
        raise ServiceError("precondition", str(e), 409) from None
    return schemas.ReduceResponse(
        fixed=report.fixed,
        residual_region=dict(report.residual_region.rectangular or {}),
        classification=report.classification,
        report=report.render())


@app.post("/export", response_model=schemas.ExportResponse)
def export(req: schemas.ExportRequest):
    m = _parse_model(req.source)
    kwargs = {} if req.cap is None else {"cap": req.cap}
    doc = _run(engines.run_export, m, req.targets, req.engine,
               gamma=req.gamma, rho=_rho(req.rho), **kwargs)
    return schemas.ExportResponse(document=doc)
