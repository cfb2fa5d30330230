from fractions import Fraction
from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from budgetgraph.graph import complete_edge_count


StrategyName = Literal[
    "buy_all", "fixed_subgraph", "forest", "min_degree_greedy", "partition_factor", "ham_power"
]
CheckerName = Literal[
    "nonempty", "min_degree", "connected", "acyclic", "f_factor", "alpha_factor", "ham_power"
]
PartitionMode = Literal["full_strictly_balanced", "partial", "full_nonbalanced"]


class ProcessConfig(BaseModel):
    """The [process] section of an experiment config."""
    model_config = ConfigDict(extra="forbid")

    n: int = Field(..., ge=1, description="Number of vertices")
    t: Optional[int] = Field(None, ge=0, description="Number of presented edges")
    t_fraction: Optional[float] = Field(None, ge=0, le=1, description="t as a fraction of M, floored")
    trials: int = Field(1, ge=0, description="Number of independent trials")

    @model_validator(mode="after")
    def _one_time_spec(self):
        if (self.t is None) == (self.t_fraction is None):
            raise ValueError("exactly one of t and t_fraction must be given")
        if self.t is not None and self.t > complete_edge_count(self.n):
            raise ValueError(f"t={self.t} exceeds M={complete_edge_count(self.n)}")
        return self

    @property
    def resolved_t(self) -> int:
        if self.t is not None:
            return self.t
        return int(self.t_fraction * complete_edge_count(self.n))


class StrategyConfig(BaseModel):
    """The [strategy] section; only the keys of the named strategy are read."""
    model_config = ConfigDict(extra="forbid")

    name: StrategyName = Field(..., description="Strategy name")
    budget: Optional[int] = Field(None, ge=0, description="Budget b; defaults to t or the strategy's own formula")
    subgraph: Optional[str] = Field(None, description="fixed_subgraph target: edge-list path, clique_factor:r=<r> or perfect_matching")
    kdeg: int = Field(1, ge=1, description="min_degree_greedy degree target")
    pattern: Optional[str] = Field(None, description="partition_factor pattern F")
    mode: Optional[PartitionMode] = Field(None, description="partition_factor mode")
    K: float = Field(1.0, gt=0, description="Part-count tuning constant")
    alpha: float = Field(1.0, gt=0, le=1, description="Covered fraction for partial mode")
    k: int = Field(2, ge=1, description="Power of the Hamilton cycle")
    epsilon: float = Field(0.5, gt=0, lt=2, description="Budget slack exponent")
    epsilon_prime: float = Field(1 / 3, gt=0, description="Density slack delta used for part sizing")
    j: int = Field(3, ge=3, description="Absorber gadget parameter j")
    ell: int = Field(4, ge=2, description="Absorber gadget parameter ell")
    q: int = Field(43, ge=2, description="Length of the P_q^k paths (prime)")
    r: int = Field(0, ge=0, description="Linkage length")
    k_pi: float = Field(1.0, gt=0, description="Stage I part-count constant")
    k_sigma: float = Field(1.0, gt=0, description="Stage III part-count constant")
    threshold_scale: float = Field(2.0, gt=0, description="Stage IV threshold as a multiple of p*zeta/ln n")
    search_budget: int = Field(1_000_000, ge=1, description="Node budget for every search")
    eta: Optional[int] = Field(None, ge=1, description="Absorber count; the residue window picks it when unset")
    stage_weights: Tuple[float, float, float, float] = Field(
        (1.0, 1.0, 1.0, 1.0), description="Relative lengths of stages I-IV, comma separated"
    )
    pool_slack: int = Field(0, ge=0, description="Extra vertices stage I may draw absorbers from")
    search_restarts: int = Field(8, ge=1, description="Rounds of every randomized search")
    search_seed: int = Field(0, ge=0, description="Seed of the randomized searches")

    @field_validator("stage_weights", mode="before")
    @classmethod
    def _split_weights(cls, value):
        if isinstance(value, str):
            return tuple(part.strip() for part in value.split(","))
        return value

    @field_validator("stage_weights")
    @classmethod
    def _positive_weights(cls, value):
        if any(w <= 0 for w in value):
            raise ValueError("stage weights must be positive")
        return value


class CheckerConfig(BaseModel):
    """The [checker] section."""
    model_config = ConfigDict(extra="forbid")

    name: CheckerName = Field(..., description="Property checked on the final bought graph")
    k: int = Field(1, ge=1, description="Degree target or Hamilton power")
    pattern: Optional[str] = Field(None, description="Pattern for factor checkers")
    alpha: float = Field(1.0, gt=0, le=1, description="Covered fraction for alpha_factor")


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    process: ProcessConfig
    strategy: StrategyConfig
    checker: CheckerConfig


class StageLogEntry(BaseModel):
    stage: str = Field(..., description="Stage label")
    success: bool = Field(..., description="Whether the stage reached its goal")
    detail: str = Field("", description="Free-form detail")


class TrialRecord(BaseModel):
    """One line of trials.jsonl."""
    index: int = Field(..., description="Trial index within the batch")
    seed: int = Field(..., description="Child seed the trial ran with")
    t: int = Field(..., description="Presented edges")
    b: int = Field(..., description="Budget")
    budget_used: int = Field(..., description="Edges bought")
    success: bool = Field(..., description="Checker verdict on the bought graph")
    errored: bool = Field(False, description="The checker raised instead of answering")
    error: Optional[str] = Field(None, description="Error text when errored")
    stage_log: List[StageLogEntry] = Field(default_factory=list, description="Strategy stage outcomes")
    witness: Optional[list] = Field(None, description="Structure witness emitted by the strategy")


class SummaryRow(BaseModel):
    """One row of summary.csv."""
    strategy: str
    n: int
    t: int
    b: int
    trials: int
    successes: int
    mean_budget_used: float
    seconds: float


class PartitionStrategyParams(BaseModel):
    """Derived parameters of a partition strategy, written next to the trial log."""
    pattern: str = Field(..., description="Pattern name")
    mode: PartitionMode
    n: int
    t: int
    K: float
    p: float = Field(..., description="Edge density t/M")
    density: str = Field(..., description="Exact density used in the formulas (d or d*)")
    k: int = Field(..., description="Number of parts")
    part_sizes: List[int]
    b: int = Field(..., description="Budget from the mode's formula")
    alpha: float = 1.0


class HamPowerParams(BaseModel):
    """Stage parameters of the power-of-Hamilton-cycle strategy."""
    n: int
    t: int
    k: int
    epsilon: float
    epsilon_prime: float
    j: int
    ell: int
    s: int = Field(..., description="Spine length j(2*ell+4)+ell")
    q: int
    r: int
    eta: int = Field(..., description="Number of absorbers")
    nu: int = Field(..., description="Number of P_q^k paths")
    xi_formula: int = Field(..., description="Linkage group count from its formula")
    xi: int = Field(..., description="Linkage group count after clamping")
    pi: int = Field(..., description="Stage I part count")
    sigma: int = Field(..., description="Stage III part count")
    stage_lengths: List[int] = Field(..., description="t_1..t_4")
    budget: int
    k_pi: float = 1.0
    k_sigma: float = 1.0
    threshold_scale: float = 2.0
    search_budget: int = 1_000_000
    pool_slack: int = Field(0, description="Stage I pool size beyond eta*(s+1)")
    search_restarts: int = 8
    search_seed: int = 0


class ChiSquareReport(BaseModel):
    """Validator output for a sampler checked against an exact law."""
    test: str
    samples: int
    statistic: float
    dof: int
    p_value: float
    failures: int = Field(0, description="Samples rejected by a failure event")
    containment_violations: int = Field(0, description="Samples violating a containment that must hold")


class FKGReport(BaseModel):
    n: int
    p: str
    f: str
    g: str
    e_fg: str
    e_f: str
    e_g: str
    holds: bool


class OracleReport(BaseModel):
    n: int
    t: int
    b: int
    checker: str
    value: str = Field(..., description="Exact optimal success probability as a fraction")
    value_float: float
    states: int = Field(..., description="Memoised states visited")


class CopyCountReport(BaseModel):
    n: int
    threshold: float = Field(..., description="lambda * b^(v-1) * t^(e-v+1) * n^(v-2e-1)")
    surviving: List[int]
    max_count: int
    fraction_below: float
    lambda_needed: float = Field(..., description="Smallest lambda for which no vertex needs removal")


def fraction_text(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"
