"""HTTP service running checks, listings and the toy benchmark."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor

from fastapi import FastAPI
from fastapi.responses import JSONResponse

from . import checker, scenarios
from .models import (BenchRequest, BenchResponse, BenchRow, CheckRequest, CheckResponse, ErrorDetail,
                     ExploreRequest, ExploreResponse, QueryResult, TraceLine)
from .process import ParseError, parse
from .reduction import LEX, ChannelOrder

app = FastAPI(title="porverif")


class InputError(Exception):
    def __init__(self, message, line=0, col=0):
        super().__init__(message)
        self.detail = ErrorDetail(message=message, line=line, col=col)


@app.exception_handler(InputError)
async def _input_error(request, exc):
    return JSONResponse(status_code=422, content={"detail": exc.detail.model_dump()})


def _parse(source):
    try:
        return parse(source)
    except ParseError as e:
        raise InputError(e.msg, e.line, e.col)


def _order(text):
    return ChannelOrder.parse(text) if text else LEX


def _result(q, v):
    r = v.record()
    return QueryResult(query=str(q), line=q.line, mode=v.mode, verdict=r["verdict"], witness=r["witness"],
                       stats=r["stats"], notice=v.notice)


def _run_one(job):
    source, qi, mode, depth, order, non_blocking = job
    pf = parse(source)
    q = pf.queries[qi]
    a, b = pf.sides(q)
    v = checker.explore(a, b, mode, depth=depth, consts=pf.consts, order=_order(order), non_blocking=non_blocking)
    return _result(q, v)


def run_check(req: CheckRequest) -> CheckResponse:
    pf = _parse(req.source)
    warnings = []
    if req.non_blocking:
        for q in pf.queries:
            if not all(checker.non_blocking_safe(s) for s in pf.sides(q)):
                warnings.append(f"line {q.line}: an output may be invalid, the non-blocking assumption looks unsafe")
    jobs = [(req.source, i, m, req.depth, req.order, req.non_blocking)
            for i, q in enumerate(pf.queries) for m in (req.modes or [q.mode])]
    if req.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(req.jobs) as pool:
            results = list(pool.map(_run_one, jobs))
    else:
        results = [_run_one(j) for j in jobs]
    return CheckResponse(results=results, warnings=warnings)


def run_explore(req: ExploreRequest) -> ExploreResponse:
    pf = _parse(req.source)
    if req.query >= len(pf.queries):
        raise InputError(f"the file has {len(pf.queries)} queries, index {req.query} is out of range")
    a, _ = pf.sides(pf.queries[req.query])
    lines = checker.symbolic_traces(a, req.mode, req.depth, pf.consts, _order(req.order), req.non_blocking)
    return ExploreResponse(traces=[TraceLine(trace=t, solved=s) for t, s in lines])


def run_bench(req: BenchRequest) -> BenchResponse:
    rows = []
    for n in range(1, req.n_max + 1):
        p = scenarios.toy(n)
        for mode in req.modes:
            v = checker.explore(p, p, mode, depth=req.depth, consts=scenarios.TOY_CONSTS)
            rows.append(BenchRow(n=n, mode=mode, verdict=v.record()["verdict"], **v.stats.record()))
    return BenchResponse(rows=rows)


@app.post("/check", response_model=CheckResponse)
def check(req: CheckRequest):
    return run_check(req)


@app.post("/explore", response_model=ExploreResponse)
def explore(req: ExploreRequest):
    return run_explore(req)


@app.post("/bench", response_model=BenchResponse)
def bench(req: BenchRequest):
    return run_bench(req)


@app.get("/health")
def health():
    return {"status": "ok"}
