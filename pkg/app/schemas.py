from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field


class Verdict(BaseModel):
    """Outcome of a verification; witness is present on failure."""

    check: str = Field(..., description="Name of the verified property")
    passed: bool
    witness: Optional[Dict[str, Any]] = None
    detail: Optional[str] = None

    model_config = ConfigDict(frozen=True)

    def __bool__(self) -> bool:
        return self.passed

    @classmethod
    def ok(cls, check: str, detail: Optional[str] = None) -> "Verdict":
        return cls(check=check, passed=True, detail=detail)

    @classmethod
    def fail(cls, check: str, detail: Optional[str] = None, **witness: Any) -> "Verdict":
        return cls(check=check, passed=False, witness=witness or None, detail=detail)


class MatroidSummary(BaseModel):
    name: str
    ground: int
    rank: int
    circuits: List[List[int]]
    table_hash: Optional[str] = None


class CycleOut(BaseModel):
    index: int
    edges: List[int]
    vertices: List[int]
    values: List[str]
    balanced: bool


class TildeReport(BaseModel):
    classes: List[List[str]]
    verdicts: List[Verdict]

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)


LabStatus = Literal["CONFIRMED", "NO_WITNESS_WITHIN_CAPACITY", "COUNTEREXAMPLE-CANDIDATE"]


class LabReport(BaseModel):
    instance: str
    conjecture: str
    status: LabStatus
    circuit_count: int
    family_size: Optional[int] = None
    family: Optional[List[List[int]]] = None
    is_matroid: Optional[Verdict] = None
    star: Optional[Verdict] = None
    n_rank: Optional[int] = None
    isomorphic: Optional[bool] = None
    permutation: Optional[List[int]] = None
    witnesses: List[Dict[str, Any]] = Field(default_factory=list)
    runtimes: Dict[str, float] = Field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == "CONFIRMED"


class CriterionResult(BaseModel):
    number: int
    name: str
    tags: List[str]
    passed: bool
    seconds: float
    detail: Optional[str] = None


class AcceptanceReport(BaseModel):
    results: List[CriterionResult]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)


class CommandConfig(BaseModel):
    """Resolved command-line invocation."""

    path: List[str]
    inputs: Dict[str, Optional[str]] = Field(default_factory=dict)
    overrides: Dict[str, Optional[int]] = Field(default_factory=dict)
    as_json: bool = False
    seed: int = 0

    model_config = ConfigDict(extra="forbid")
