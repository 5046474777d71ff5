import sys
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from src.exception import DomainError

Atom = Tuple[float, float]
ComplexMap = Callable[[complex], complex]


@dataclass(frozen=True, eq=False)
class Measure:
    """
    A finite measure on the real line: atoms plus an absolutely continuous part.

    The ac part is described by ``density`` on ``support``; ``kind``/``params``
    name a closed form when there is one so that Cauchy transforms can be
    evaluated analytically. ``ac_transform`` is the Cauchy transform of the ac
    part alone, ``transform`` the transform of the whole measure (used for
    measures that only exist through their transform, e.g. convolution outputs).
    ``grid`` holds a tabulated density (x, values) when the density was
    recovered numerically, with ``grid_error`` its per-point error estimate.
    """
    atoms: Tuple[Atom, ...] = ()
    density: Optional[Callable[[np.ndarray], np.ndarray]] = None
    support: Optional[Tuple[float, float]] = None
    kind: str = "generic"
    params: Tuple[Tuple[str, float], ...] = ()
    ac_transform: Optional[ComplexMap] = None
    transform: Optional[ComplexMap] = None
    grid: Optional[Tuple[np.ndarray, np.ndarray]] = None
    grid_error: Optional[np.ndarray] = None
    signed: bool = False

    def __post_init__(self):
        if not self.signed:
            for loc, weight in self.atoms:
                if weight <= 0:
                    raise DomainError(f"probability measure has non-positive atom {weight} at {loc}", sys)
        if self.density is not None and self.support is None:
            raise DomainError("a density needs a support interval", sys)

    def param(self, name: str) -> float:
        return dict(self.params)[name]

    @property
    def atom_mass(self) -> float:
        return float(sum(w for _, w in self.atoms))

    @property
    def has_ac_part(self) -> bool:
        return self.density is not None or self.grid is not None


@dataclass(frozen=True, eq=False)
class SignedMeasure(Measure):
    """
    A measure with weights of either sign (infinitesimal corrections).

    ``positive_part`` is the interval carrying the positive Jordan component when known.
    """
    signed: bool = True
    positive_part: Optional[Tuple[float, float]] = None


ZERO_MEASURE = SignedMeasure(kind="zero")


@dataclass(frozen=True)
class TypeBDistribution:
    """The pair (mu, nu): a probability distribution and its 1/N correction."""
    mu: Measure
    nu: SignedMeasure = ZERO_MEASURE


@dataclass(frozen=True)
class SubordinationPair:
    """
    Evaluators of the subordination functions omega_1, omega_2 of a free convolution
    together with their complex derivatives (central differences) and the residuals
    of the two defining relations.
    """
    omega1: ComplexMap
    omega2: ComplexMap
    omega1_prime: ComplexMap
    omega2_prime: ComplexMap
    residual: Optional[Callable[[complex], Tuple[float, float]]] = None


@dataclass(frozen=True)
class PerturbationSpec:
    """
    Finite-rank deformation sum_j theta_j E^(j,j) (+ (theta'/N) J_N when delocalized_theta is set).
    """
    thetas: Tuple[float, ...] = ()
    delocalized_theta: Optional[float] = None

    def __post_init__(self):
        for theta in self.all_thetas:
            if theta == 0:
                raise DomainError("perturbation eigenvalue theta must be nonzero", sys)

    @property
    def includes_delocalized(self) -> bool:
        return self.delocalized_theta is not None

    @property
    def all_thetas(self) -> Tuple[float, ...]:
        # (theta/N) J_N has the same type B distribution as theta E^(j,j)
        if self.delocalized_theta is None:
            return tuple(self.thetas)
        return tuple(self.thetas) + (self.delocalized_theta,)


@dataclass(frozen=True)
class WignerMomentParams:
    beta: int = 2
    sigma2: float = 1.0
    s2: float = 1.0
    alpha: float = 2.0

    def __post_init__(self):
        if self.beta not in (1, 2):
            raise DomainError(f"beta must be 1 or 2, got {self.beta}", sys)
        if self.sigma2 <= 0:
            raise DomainError("sigma2 must be positive", sys)
        if self.alpha < self.sigma2 ** 2:
            raise DomainError(f"alpha={self.alpha} violates alpha >= sigma2^2", sys)
