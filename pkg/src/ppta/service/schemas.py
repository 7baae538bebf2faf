"""Request and response bodies for the HTTP service.

Exact rationals travel as strings ("7/8") so nothing is lost to
floating point on the wire.
"""

from __future__ import annotations

from typing import Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, Field


class ModelRequest(BaseModel):
    source: str


class InfoResponse(BaseModel):
    name: str
    clocks: List[str]
    locations: List[str]
    initial: str
    actions: List[str]
    clock_params: Dict[str, Tuple[int, int]]
    prob_params: Dict[str, Tuple[str, str]]
    classification: Dict[str, str]
    closed: bool
    diagnostics: List[str]
    max_constants: Dict[str, Dict[str, int]]  # corner rendering -> per clock


class CheckRequest(BaseModel):
    source: str
    targets: List[str]
    objective: str = "max"
    engine: str = "digital"
    mode: str = "exact"
    gamma: Dict[str, int] = Field(default_factory=dict)
    rho: Dict[str, str] = Field(default_factory=dict)
    cap: Optional[int] = None


class CheckResponse(BaseModel):
    value: str
    value_float: float
    objective: str
    engine: str
    mode: str
    flags: Dict[str, object] = Field(default_factory=dict)


class RegionSpec(BaseModel):
    rectangular: Optional[Dict[str, Tuple[int, int]]] = None
    explicit: Optional[List[Dict[str, int]]] = None


class SynthRequest(BaseModel):
    source: str
    targets: List[str]
    objective: str = "max"
    engine: str = "digital"
    mode: str = "exact"
    region: Optional[RegionSpec] = None
    rho_grid: Dict[str, Union[int, List[str]]] = Field(default_factory=dict)
    reduction: bool = True
    cap: Optional[int] = None


class SynthPointRow(BaseModel):
    gamma: Dict[str, int]
    rho: Dict[str, str]
    value: str
    value_float: float
    flags: Dict[str, object] = Field(default_factory=dict)


class SynthResponse(BaseModel):
    best: SynthPointRow
    table: List[SynthPointRow]
    fixed: Dict[str, int]
    flags: Dict[str, object] = Field(default_factory=dict)


class ReduceRequest(BaseModel):
    source: str
    objective: str = "max"
    region: Optional[RegionSpec] = None


class ReduceResponse(BaseModel):
    fixed: Dict[str, int]
    residual_region: Dict[str, Tuple[int, int]]
    classification: Dict[str, str]
    report: str


class ExportRequest(BaseModel):
    source: str
    targets: List[str]
    engine: str = "digital"
    gamma: Dict[str, int] = Field(default_factory=dict)
    rho: Dict[str, str] = Field(default_factory=dict)
    cap: Optional[int] = None


class ExportResponse(BaseModel):
    document: str


class ErrorBody(BaseModel):
    kind: str  # parse | validation | precondition | usage | internal
    message: str
