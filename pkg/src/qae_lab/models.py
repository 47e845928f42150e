from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Tuple

Interval = Tuple[float, float]


@dataclass
class EstimationResult:
    """Outcome of one amplitude-estimation run (amplitude domain)."""

    a_hat: float
    ci: Interval
    oracle_queries_A: int
    grover_applications: int
    shots_total: int
    rounds: int
    max_circuit_depth: int
    max_k: int
    seed: Optional[int]
    algorithm: str
    converged: bool = True
    extras: Dict[str, Any] = field(default_factory=dict)

    @property
    def ci_width(self) -> float:
        return self.ci[1] - self.ci[0]


@dataclass
class Probe:
    """One bisection probe of the VaR search."""

    index: int
    probability: float
    ci: Interval


@dataclass
class RiskReport:
    statistic: str
    estimate: float
    ci: Interval
    results: List[EstimationResult]
    classical_reference: float
    continuous_reference: Optional[float] = None
    achieved_level: Optional[float] = None
    var_index: Optional[int] = None
    continuous_at_achieved: Optional[float] = None
    probes: List[Probe] = field(default_factory=list)
    flags: List[str] = field(default_factory=list)
    candidates: List[float] = field(default_factory=list)
    classical_samples: int = 0

    @property
    def grover_applications(self) -> int:
        return sum(r.grover_applications for r in self.results)

    @property
    def oracle_queries_A(self) -> int:
        return sum(r.oracle_queries_A for r in self.results)

    @property
    def shots_total(self) -> int:
        return sum(r.shots_total for r in self.results)

    @property
    def max_k(self) -> int:
        return max((r.max_k for r in self.results), default=0)

    @property
    def max_circuit_depth(self) -> int:
        return max((r.max_circuit_depth for r in self.results), default=0)

    @property
    def converged(self) -> bool:
        return all(r.converged for r in self.results)


@dataclass
class SweepRow:
    row_key: str
    estimator: str
    distribution: str
    statistic: str
    budget_param: str
    budget: float
    repetition: int
    seed: int
    grover_applications: int = 0
    oracle_queries_A: int = 0
    shots_total: int = 0
    max_k: int = 0
    max_circuit_depth: int = 0
    estimate: Optional[float] = None
    reference: Optional[float] = None
    relative_error: Optional[float] = None
    ci_low: Optional[float] = None
    ci_high: Optional[float] = None
    ci_width: Optional[float] = None
    converged: bool = True
    error: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)
