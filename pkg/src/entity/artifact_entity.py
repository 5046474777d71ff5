from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple


@dataclass(frozen=True)
class LabelCount:
    value: int
    vertex_count: int
    nodes_visited: int = 0


@dataclass(frozen=True)
class IntegralEstimate:
    mean: float
    stderr: float
    samples: int


@dataclass(frozen=True)
class MomentResult:
    ell: int
    exact_value: Fraction
    catalan_term: Fraction
    correction: Fraction

    @property
    def exact_float(self) -> float:
        return float(self.exact_value)

    @property
    def correction_float(self) -> float:
        return float(self.correction)


@dataclass(frozen=True)
class PartitionContribution:
    partition: str
    is_tree: bool
    integral: IntegralEstimate
    contribution: float


@dataclass(frozen=True)
class LimitCorrection:
    ell: int
    c: float
    sigma2: float
    value: float
    stderr: float
    genus_one_count: int = 0
    contributions: Tuple[PartitionContribution, ...] = ()


@dataclass(frozen=True)
class RegimeRow:
    N: int
    b: int
    xi: int
    correction: Fraction


@dataclass(frozen=True)
class RegimeReport:
    ell: int
    rows: Tuple[RegimeRow, ...]
    trend: str


@dataclass(frozen=True)
class RealizationRecord:
    rep: int
    lambda1: float
    F: float


@dataclass
class RunSummary:
    records: List[RealizationRecord]
    mean: Optional[float]
    variance: Optional[float]
    ks_distance: Optional[float]
    manifest: Dict = field(default_factory=dict)

    @property
    def lambda1_mean(self) -> Optional[float]:
        if not self.records:
            return None
        return sum(r.lambda1 for r in self.records) / len(self.records)


@dataclass
class SimulationArtifact:
    realizations_file_path: str
    histogram_file_path: str
    manifest_file_path: str
    summary_object_file_path: str
    summary: RunSummary


@dataclass
class ConvolutionArtifact:
    density_file_path: str
    atoms_file_path: str
    manifest_file_path: str
    max_residual: float
    atoms: List[Tuple[float, float]]
    nu_atoms: List[Tuple[float, float]] = field(default_factory=list)
