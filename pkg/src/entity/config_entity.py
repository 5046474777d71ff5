import os
import sys
from dataclasses import dataclass, field
from datetime import datetime
from typing import Optional, Tuple

import numpy as np

from src.constants import *
from src.entity.measure import PerturbationSpec
from src.exception import DomainError

TIMESTAMP: str = datetime.now().strftime("%m_%d_%Y_%H_%M_%S")


@dataclass(frozen=True)
class BandGeometry:
    """
    Band pattern of an N x N matrix: entries (j, k) are kept iff dist(j, k) <= b,
    with the circular distance min(|j-k|, N-|j-k|) in periodic mode and |j-k| in
    regular mode. The effective width is xi = min(2b+1, N) in both modes.
    """
    N: int
    b: int
    mode: str = PERIODIC_MODE

    def __post_init__(self):
        if self.N < 1:
            raise DomainError(f"N must be positive, got {self.N}", sys)
        if self.b < 0:
            raise DomainError(f"band width must be non-negative, got {self.b}", sys)
        if self.mode not in BAND_MODES:
            raise DomainError(f"mode must be one of {BAND_MODES}, got {self.mode!r}", sys)

    @property
    def xi(self) -> int:
        return min(2 * self.b + 1, self.N)

    @property
    def periodic(self) -> bool:
        return self.mode == PERIODIC_MODE

    def distance(self, j, k):
        d = np.abs(np.asarray(j) - np.asarray(k))
        if self.periodic:
            return np.minimum(d, self.N - d)
        return d

    def mask(self) -> np.ndarray:
        idx = np.arange(self.N)
        return self.distance(idx[:, None], idx[None, :]) <= self.b


@dataclass(frozen=True)
class EnsembleSpec:
    N: int
    band: BandGeometry
    sigma2: float = SIMULATION_DEFAULT_SIGMA2
    perturbation: PerturbationSpec = PerturbationSpec()
    seed: int = SIMULATION_DEFAULT_SEED
    reps: int = SIMULATION_DEFAULT_REPS

    def __post_init__(self):
        if self.band.N != self.N:
            raise DomainError(f"band geometry is for N={self.band.N}, ensemble has N={self.N}", sys)
        if len(self.perturbation.thetas) > self.N:
            raise DomainError("more diagonal perturbation entries than rows", sys)
        if self.sigma2 <= 0:
            raise DomainError("sigma2 must be positive", sys)
        if self.reps < 0:
            raise DomainError("reps must be non-negative", sys)

    @property
    def sigma(self) -> float:
        return float(np.sqrt(self.sigma2))

    @property
    def theta(self) -> Optional[float]:
        """The spike of largest magnitude; its outlier is the one the F statistics track."""
        thetas = self.perturbation.all_thetas
        return max(thetas, key=abs) if thetas else None


@dataclass(frozen=True)
class GridSpec:
    lo: float = DEFAULT_GRID_LO
    hi: float = DEFAULT_GRID_HI
    n: int = DEFAULT_GRID_N
    eta_ladder: Tuple[float, ...] = SUBORDINATION_ETA_LADDER

    def __post_init__(self):
        if not self.hi > self.lo or self.n < 2:
            raise DomainError(f"invalid grid [{self.lo}, {self.hi}] with {self.n} points", sys)
        if len(self.eta_ladder) < 2 or any(e <= 0 for e in self.eta_ladder):
            raise DomainError("eta ladder needs at least two positive rungs", sys)

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.n)


@dataclass
class SimulationConfig:
    artifact_dir: str = os.path.join(ARTIFACT_DIR, TIMESTAMP, "simulation")
    kind: int = 1
    threads: int = field(default_factory=lambda: os.cpu_count() or 1)
    histogram_bins: int = HISTOGRAM_BINS
    histogram_range: Tuple[float, float] = HISTOGRAM_RANGE
    preset: Optional[str] = None

    @property
    def realizations_file_path(self) -> str:
        return os.path.join(self.artifact_dir, REALIZATIONS_FILE_NAME)

    @property
    def histogram_file_path(self) -> str:
        return os.path.join(self.artifact_dir, HISTOGRAM_FILE_NAME)

    @property
    def manifest_file_path(self) -> str:
        return os.path.join(self.artifact_dir, MANIFEST_FILE_NAME)

    @property
    def summary_object_file_path(self) -> str:
        return os.path.join(self.artifact_dir, SUMMARY_OBJECT_FILE_NAME)


@dataclass
class ConvolutionConfig:
    artifact_dir: str = os.path.join(ARTIFACT_DIR, TIMESTAMP, "convolution")
    grid: GridSpec = field(default_factory=GridSpec)
    threads: int = 1

    @property
    def density_file_path(self) -> str:
        return os.path.join(self.artifact_dir, DENSITY_FILE_NAME)

    @property
    def atoms_file_path(self) -> str:
        return os.path.join(self.artifact_dir, ATOMS_FILE_NAME)

    @property
    def manifest_file_path(self) -> str:
        return os.path.join(self.artifact_dir, MANIFEST_FILE_NAME)
