"""
Monte Carlo sampling of periodically banded GUE matrices X = (1/sqrt xi) B o G,
finite-rank deformations and the normalised largest-eigenvalue statistics

    F_1 = sqrt(xi) / (sigma sqrt((theta^2 - sigma^2)/theta^2)) [lambda_1(X + theta E^(1,1)) - rho_theta]
    F_2 = sqrt(N)  / (sigma sqrt((theta^2 - sigma^2)/theta^2)) [lambda_1(X + (theta/N) J_N) - rho_theta]

with rho_theta = theta + sigma^2/theta.
"""
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import scipy.linalg
from scipy.stats import kstest, norm

from src import __version__
from src.constants import *
from src.entity.artifact_entity import RealizationRecord, RunSummary
from src.entity.config_entity import BandGeometry, EnsembleSpec
from src.entity.measure import PerturbationSpec
from src.exception import DomainError, NumericalSolverError
from src.logger import logging
from src.utils.main_utils import read_yaml_file


def realization_rng(seed: int, rep: int) -> np.random.Generator:
    """Counter-based stream for realization ``rep``: Philox keyed by SeedSequence(seed, spawn_key=(rep,))."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(rep,))))


def sample_banded_gue(spec: EnsembleSpec, rng: np.random.Generator) -> np.ndarray:
    """
    Hermitian N x N sample: diagonal N(0, sigma^2), off-diagonal real and imaginary
    parts N(0, sigma^2/2) each, masked to the band and divided by sqrt(xi).
    """
    N, sigma = spec.N, spec.sigma
    diagonal = rng.normal(0.0, sigma, size=N)
    scale = sigma / np.sqrt(2.0)
    upper = np.triu(rng.normal(0.0, scale, size=(N, N)) + 1j * rng.normal(0.0, scale, size=(N, N)), k=1)
    matrix = upper + upper.conj().T + np.diag(diagonal).astype(complex)
    matrix *= spec.band.mask()
    return matrix / np.sqrt(spec.band.xi)


def deform(matrix: np.ndarray, perturbation: PerturbationSpec) -> np.ndarray:
    """Adds sum_j theta_j E^(j,j) and, when set, (theta/N) J_N."""
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DomainError(f"deformation needs a square matrix, got shape {matrix.shape}", sys)
    N = matrix.shape[0]
    if len(perturbation.thetas) > N:
        raise DomainError(f"{len(perturbation.thetas)} diagonal entries for a {N} x {N} matrix", sys)

    out = matrix.astype(complex if np.iscomplexobj(matrix) else float, copy=True)
    for j, theta in enumerate(perturbation.thetas):
        out[j, j] += theta
    if perturbation.includes_delocalized:
        out += perturbation.delocalized_theta / N
    return out


def largest_eigenvalue(matrix: np.ndarray) -> float:
    matrix = np.asarray(matrix)
    N = matrix.shape[0]
    try:
        values = scipy.linalg.eigvalsh(matrix, subset_by_index=[N - 1, N - 1])
    except (np.linalg.LinAlgError, ValueError) as e:
        finite = bool(np.all(np.isfinite(matrix)))
        hermitian = finite and bool(np.allclose(matrix, matrix.conj().T))
        raise NumericalSolverError(
            f"eigensolver failed on a {matrix.shape} matrix (finite={finite}, hermitian={hermitian}): {e}",
            sys) from e
    return float(values[-1])


def _normalisation(kind: int, spec: EnsembleSpec) -> Tuple[float, float]:
    """(prefactor / (sigma sqrt((theta^2 - sigma^2)/theta^2)), rho_theta)."""
    theta, sigma = spec.theta, spec.sigma
    if theta is None:
        raise DomainError("F statistics need a perturbation theta", sys)
    if abs(theta) <= sigma:
        raise DomainError(f"F statistics need |theta| > sigma, got theta={theta}, sigma={sigma}", sys)
    if kind == 1:
        prefactor = np.sqrt(spec.band.xi)
    elif kind == 2:
        prefactor = np.sqrt(spec.N)
    else:
        raise DomainError(f"kind must be 1 or 2, got {kind}", sys)
    normalisation = sigma * np.sqrt((theta * theta - sigma * sigma) / (theta * theta))
    return float(prefactor / normalisation), theta + sigma * sigma / theta


def f_statistic(kind: int, lambda1: float, spec: EnsembleSpec) -> float:
    scale, centre = _normalisation(kind, spec)
    return float(scale * (lambda1 - centre))


def esd_moments(matrix: np.ndarray, max_order: int) -> np.ndarray:
    """Unnormalised power sums Tr(M^k) = sum_i lambda_i^k for k = 1..max_order."""
    eigenvalues = scipy.linalg.eigvalsh(np.asarray(matrix))
    return np.array([float(np.sum(eigenvalues ** k)) for k in range(1, max_order + 1)])


def _spec_echo(spec: EnsembleSpec, kind: int) -> dict:
    return {
        "N": spec.N,
        "b": spec.band.b,
        "mode": spec.band.mode,
        "xi": spec.band.xi,
        "sigma2": spec.sigma2,
        "thetas": list(spec.perturbation.thetas),
        "delocalized_theta": spec.perturbation.delocalized_theta,
        "seed": spec.seed,
        "reps": spec.reps,
        "kind": kind,
    }


def run_experiment(spec: EnsembleSpec, kind: int = 1, threads: int = 1) -> RunSummary:
    """
    ``spec.reps`` realizations on independent streams; records are ordered by
    realization index whatever the thread count.
    """
    _normalisation(kind, spec)
    cost = float(spec.N) ** 3 * spec.reps
    if cost > SIMULATION_COST_WARNING:
        logging.warning(f"Estimated cost ~{cost:.2e} flops-equivalent (N={spec.N}, reps={spec.reps}); "
                        f"this run is long")
    logging.info(f"Simulating {spec.reps} realizations: N={spec.N}, b={spec.band.b}, kind={kind}")

    def _one(rep: int) -> RealizationRecord:
        matrix = deform(sample_banded_gue(spec, realization_rng(spec.seed, rep)), spec.perturbation)
        lambda1 = largest_eigenvalue(matrix)
        return RealizationRecord(rep=rep, lambda1=lambda1, F=f_statistic(kind, lambda1, spec))

    if threads > 1 and spec.reps > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(_one, range(spec.reps)))
    else:
        records = [_one(rep) for rep in range(spec.reps)]

    values = np.array([r.F for r in records])
    mean = float(values.mean()) if len(values) else None
    variance = float(values.var(ddof=1)) if len(values) > 1 else None
    ks = float(kstest(values, "norm").statistic) if len(values) else None

    manifest = {"spec": _spec_echo(spec, kind), "seed": spec.seed, "version": __version__}
    logging.info(f"F statistics: mean={mean}, variance={variance}, KS={ks}")
    return RunSummary(records=records, mean=mean, variance=variance, ks_distance=ks, manifest=manifest)


def histogram(samples: Sequence[float], bins: int = HISTOGRAM_BINS,
              value_range: Optional[Tuple[float, float]] = HISTOGRAM_RANGE) -> pd.DataFrame:
    """Equal-width counts with the expected standard normal count n * phi(centre) * width."""
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise DomainError("histogram of an empty sample", sys)
    counts, edges = np.histogram(samples, bins=bins, range=value_range)
    centres = (edges[:-1] + edges[1:]) / 2.0
    widths = np.diff(edges)
    return pd.DataFrame({
        "bin_lo": edges[:-1],
        "bin_hi": edges[1:],
        "count": counts,
        "normal_ref": norm.pdf(centres) * widths * samples.size,
    })


def qq_pairs(sample: Sequence[float], baseline: Sequence[float]) -> pd.DataFrame:
    """Matched quantiles of two runs at levels (i + 1/2)/n, n the smaller sample size."""
    sample = np.asarray(sample, dtype=float)
    baseline = np.asarray(baseline, dtype=float)
    if sample.size == 0 or baseline.size == 0:
        raise DomainError("QQ pairs need two non-empty samples", sys)
    n = min(sample.size, baseline.size)
    levels = (np.arange(n) + 0.5) / n
    return pd.DataFrame({
        "p": levels,
        "sample": np.quantile(sample, levels),
        "baseline": np.quantile(baseline, levels),
    })


def ensemble_for(N: int, b: int, theta: float = SIMULATION_DEFAULT_THETA,
                 sigma2: float = SIMULATION_DEFAULT_SIGMA2, kind: int = 1,
                 seed: int = SIMULATION_DEFAULT_SEED, reps: int = SIMULATION_DEFAULT_REPS,
                 mode: str = PERIODIC_MODE) -> EnsembleSpec:
    """Kind 1 deforms by theta E^(1,1), kind 2 by (theta/N) J_N."""
    if kind == 1:
        perturbation = PerturbationSpec(thetas=(theta,))
    elif kind == 2:
        perturbation = PerturbationSpec(delocalized_theta=theta)
    else:
        raise DomainError(f"kind must be 1 or 2, got {kind}", sys)
    return EnsembleSpec(N=N, band=BandGeometry(N=N, b=b, mode=mode), sigma2=sigma2,
                        perturbation=perturbation, seed=seed, reps=reps)


def resolve_preset(preset: str, config_path: str = EXPERIMENT_CONFIG_FILE_PATH) -> Tuple[EnsembleSpec, int]:
    """Resolves a named preset of the experiment config into (EnsembleSpec, kind)."""
    presets = read_yaml_file(config_path).get("presets", {})
    if preset not in presets:
        raise DomainError(f"unknown preset {preset!r}; known: {sorted(presets)}", sys)
    entry = presets[preset]
    kind = int(entry.get("kind", 1))
    spec = ensemble_for(N=int(entry["N"]), b=int(entry["b"]), theta=float(entry["theta"]),
                        sigma2=float(entry["sigma2"]), kind=kind, seed=int(entry["seed"]),
                        reps=int(entry["reps"]), mode=entry.get("mode", PERIODIC_MODE))
    return spec, kind
