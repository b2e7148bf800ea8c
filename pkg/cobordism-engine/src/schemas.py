from pydantic import BaseModel, Field, field_validator, ConfigDict
from typing import List, Optional
from enum import Enum
import re

_BITS = re.compile(r"^[01]*$")


class Variant(str, Enum):
    NONORIENTABLE = "nonorientable"
    ORIENTABLE = "orientable"


class VerificationMode(str, Enum):
    EXHAUSTIVE = "exhaustive"
    SAMPLED = "sampled"


class Parity(str, Enum):
    EVEN = "even"
    ODD = "odd"


class BandRelation(str, Enum):
    EQUIVALENT = "equivalent"
    EQUIVALENT_UP_TO_REPARAMETRIZATION = "equivalent_up_to_reparametrization"
    INEQUIVALENT = "inequivalent"
    INCOMPARABLE = "incomparable"


class ComponentKind(str, Enum):
    EMBEDDING = "embedding"
    KINKED_TUBE = "kinked_tube"
    BALL = "ball"


class OutputFormat(str, Enum):
    TEXT = "text"
    JSON = "json"


class Settings(BaseModel):
    model_config = ConfigDict(frozen=True)

    exhaustive_bound: int = Field(4096, gt=0, description="Max group order for exhaustive verification")
    structure_bound: int = Field(65536, gt=0, description="Max group order for the structure census")
    sample_count: int = Field(2000, gt=0)
    sample_seed: int = Field(1999, ge=0)
    cayley_csv_bound: int = Field(64, gt=0)
    context_cache_size: int = Field(32, gt=0, description="Homology contexts kept before the least recently used is evicted")
    log_level: str = "WARNING"


class ValidationIssue(BaseModel):
    code: str
    message: str
    simplex: Optional[List[int]] = None


class ValidationReport(BaseModel):
    valid: bool
    dim: int
    vertex_count: int
    top_simplex_count: int
    euler_characteristic: Optional[int] = None
    orientable: Optional[bool] = None
    issues: List[ValidationIssue] = Field(default_factory=list)


class GroupElementModel(BaseModel):
    h: str = Field(..., description="H2 coordinates, coordinate 0 first")
    d: str = Field(..., description="H1 coordinates, coordinate 0 first")
    n: int = Field(..., ge=0)

    @field_validator('h', 'd')
    @classmethod
    def validate_bits(cls, v):
        if not _BITS.match(v):
            raise ValueError("Coordinates must be a string of 0/1 characters")
        return v


class BasisModel(BaseModel):
    dimension: int
    cycles: List[List[List[int]]] = Field(default_factory=list, description="Basis cycles as lists of simplices")


class PairingEntry(BaseModel):
    i: int
    j: int
    product: str


class HomologyReport(BaseModel):
    manifold: str
    context_hash: str
    dim: int
    orientable: bool
    betti: List[int]
    bases: List[BasisModel]
    w1: str
    pairing: List[PairingEntry] = Field(default_factory=list)


class AxiomCheck(BaseModel):
    name: str
    passed: bool
    checked: int
    counterexample: Optional[List[GroupElementModel]] = None


class VerificationReport(BaseModel):
    context_hash: str
    variant: Variant
    mode: VerificationMode
    order: int
    samples: Optional[int] = None
    seed: Optional[int] = None
    passed: bool
    checks: List[AxiomCheck] = Field(default_factory=list)


class GroupReport(BaseModel):
    manifold: str
    context_hash: str
    variant: Variant
    modulus: int
    dim_h2: int
    dim_h1: int
    order: int
    structure: List[int]
    exponent: int
    disk_subgroup_order: int
    verification: Optional[VerificationReport] = None
    cayley_csv: Optional[str] = None


class ComponentModel(BaseModel):
    kind: ComponentKind
    surface: Optional[str] = None
    n_share: int = 0


class PsiReport(BaseModel):
    manifold: str
    context_hash: str
    label: str
    variant: Variant
    element: GroupElementModel
    h_basis: BasisModel
    d_basis: BasisModel


class CobordantReport(BaseModel):
    manifold: str
    context_hash: str
    first: GroupElementModel
    second: GroupElementModel
    cobordant: bool


class RealizeReport(BaseModel):
    manifold: str
    context_hash: str
    target: GroupElementModel
    components: List[ComponentModel]
    immersion: str
    round_trip: GroupElementModel


class BandReport(BaseModel):
    source: str
    vertex_count: int
    return_sign: int
    mobius: bool
    boundary_components: int
    epsilon: str
    half_twists: int
    half_twists_mod4: int


class BandComparison(BaseModel):
    first: int
    second: int
    relation: BandRelation


class BandClassReport(BaseModel):
    core_orientable_in_m: bool
    odd_self_homotopy: bool
    ambient_orientable: bool
    class_count: int
    classes: List[List[str]]
    reparametrized: List[List[str]] = Field(default_factory=list)
    comparisons: List[BandComparison] = Field(default_factory=list)


class XBundleRow(BaseModel):
    monodromy: str
    index: int
    orientable: bool
    preserves_figure8: bool
    fiber8_surface: Optional[str] = None
    fiber8_neighborhood: Optional[str] = None


class XBundleReport(BaseModel):
    rows: List[XBundleRow]


class IsotropyReport(BaseModel):
    surface: str
    parity: Parity
    orientable: bool
    dim_h1: int
    w1: str
    subgroup: List[str]
    class_count: int


class CatalogRow(BaseModel):
    name: str
    dim: int
    orientable: bool
    betti: List[int]
    variant: Optional[Variant] = None
    order: Optional[int] = None
    structure: Optional[List[int]] = None


class CatalogReport(BaseModel):
    rows: List[CatalogRow]
