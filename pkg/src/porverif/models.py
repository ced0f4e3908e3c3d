"""Request and response models of the verification service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field

Mode = Literal["reference", "compressed", "reduced"]
MODES = ("reference", "compressed", "reduced")


class Stats(BaseModel):
    pairs: int
    solver_branches: int
    max_traces: int
    pruned: int
    wall_ms: float


class Witness(BaseModel):
    trace: str
    side: str
    reason: str
    theta: dict[str, str] = {}
    revalidated: bool


class CheckRequest(BaseModel):
    source: str
    modes: Optional[list[Mode]] = None  # None keeps the mode each query declares
    depth: int = Field(3, ge=1)
    order: Optional[str] = None
    non_blocking: bool = False
    jobs: int = Field(1, ge=1)


class QueryResult(BaseModel):
    query: str
    line: int
    mode: Mode
    verdict: Literal["EQUIVALENT", "NOT EQUIVALENT"]
    witness: Optional[Witness] = None
    stats: Stats
    notice: str = ""


class CheckResponse(BaseModel):
    results: list[QueryResult]
    warnings: list[str] = []

    @property
    def all_equivalent(self):
        return all(r.verdict == "EQUIVALENT" for r in self.results)


class ExploreRequest(BaseModel):
    source: str
    mode: Mode = "compressed"
    query: int = Field(0, ge=0)
    depth: int = Field(3, ge=1)
    order: Optional[str] = None
    non_blocking: bool = False


class TraceLine(BaseModel):
    trace: str
    solved: bool


class ExploreResponse(BaseModel):
    traces: list[TraceLine]


class BenchRequest(BaseModel):
    scenario: Literal["toy"] = "toy"
    n_max: int = Field(4, ge=1)
    modes: list[Mode] = list(MODES)
    depth: int = Field(3, ge=1)


class BenchRow(BaseModel):
    n: int
    mode: Mode
    verdict: Literal["EQUIVALENT", "NOT EQUIVALENT"]
    max_traces: int
    pairs: int
    solver_branches: int
    pruned: int
    wall_ms: float


class BenchResponse(BaseModel):
    rows: list[BenchRow]


class ErrorDetail(BaseModel):
    message: str
    line: int = 0
    col: int = 0
