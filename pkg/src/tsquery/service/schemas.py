"""Pydantic request/response models for the query service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class GenerateRequest(BaseModel):
    count: int = Field(ge=1)
    length: int = Field(ge=2)
    seed: int
    out_path: str
    uniform_start: bool = False


class GenerateResponse(BaseModel):
    path: str
    count: int
    length: int


class IngestRequest(BaseModel):
    in_path: str
    format: str = "auto"
    out_path: str


class IngestResponse(BaseModel):
    path: str
    count: int
    length: int | None


class BuildRequest(BaseModel):
    in_path: str
    out_path: str
    mode: str = "normal"
    k: int = Field(default=2, ge=1)
    capacity: int = Field(default=16, ge=4)
    format: str = "auto"


class BuildResponse(BaseModel):
    path: str
    entries: int
    skipped: list[str]
    height: int
    nodes: int
    dims: int


class CountersModel(BaseModel):
    nodes_visited: int
    leaf_points: int
    candidates: int
    postprocessed: int
    coefficient_touches: int


class MatchRow(BaseModel):
    rank: int
    id: str
    distance: float


class RangeRequest(BaseModel):
    index_path: str
    epsilon: float = Field(ge=0)
    query_id: str | None = None
    query_values: list[float] | None = None
    transform: str | None = None  # None descends the index untransformed
    transforms_file: str | None = None


class KnnRequest(BaseModel):
    index_path: str
    count: int = Field(ge=1)
    query_id: str | None = None
    query_values: list[float] | None = None
    transform: str | None = None
    transforms_file: str | None = None


class QueryResponse(BaseModel):
    matches: list[MatchRow]
    counters: CountersModel
    elapsed_ms: float


class JoinRequest(BaseModel):
    index_path: str
    epsilon: float = Field(ge=0)
    transform: str | None = None
    transforms_file: str | None = None
    sides: str = "both"
    raw_pairs: bool = False


class PairRow(BaseModel):
    id_a: str
    id_b: str
    distance: float


class JoinResponse(BaseModel):
    pairs: list[PairRow]
    counters: CountersModel
    elapsed_ms: float


class BenchRequest(BaseModel):
    index_path: str
    workload: str = "range"
    methods: list[str] = ["a", "b", "c", "d"]
    epsilon: float = Field(ge=0)
    transform: str = "identity"
    transforms_file: str | None = None
    queries: int = Field(default=20, ge=1)
    seed: int = 0


class BenchRowModel(BaseModel):
    method: str
    label: str
    wall_ms: float
    nodes_visited: int
    coefficient_touches: int
    candidates: int
    answers: int


class BenchResponse(BaseModel):
    workload: str
    queries: int
    epsilon: float
    transform: str
    consistent: bool
    rows: list[BenchRowModel]


class AuditRequest(BaseModel):
    index_path: str


class AuditResponse(BaseModel):
    ok: bool
    problems: list[str]
    nodes: int
    height: int
    entries: int


class DumpRequest(BaseModel):
    index_path: str
    out_path: str


class DumpResponse(BaseModel):
    path: str
    count: int


class TransformsResponse(BaseModel):
    builtins: list[str]


class ErrorBody(BaseModel):
    error: str
    detail: str
