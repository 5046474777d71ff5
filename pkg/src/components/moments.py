"""
Exact finite-N trace moments of banded GUE matrices through the genus expansion

    E[Tr X^(2l)] = sigma^(2l) xi^(-l) sum_{pi in P_2(2l)} Q(l, N, b, pi),

their 1/N corrections, the critical-regime limits m_2l(sigma^2, c) and mixed
moments of independent banded matrices.
"""
import sys
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
import pandas as pd

from src.components.combinat import (catalan, enumerate_pair_partitions, epsilon_1_closed_form,
                                     genus, genus_census, iter_chunks)
from src.components.counting import count_admissible, integral_I
from src.components.quotient import build_quotient, underlying_simple
from src.constants import (ENUMERATION_CHUNK_SIZE, INTEGRAL_DEFAULT_SAMPLES,
                           INTEGRAL_DEFAULT_SEED, PERIODIC_MODE)
from src.entity.artifact_entity import (IntegralEstimate, LimitCorrection, MomentResult, PartitionContribution,
                                        RegimeReport, RegimeRow)
from src.entity.config_entity import BandGeometry
from src.entity.partition import PairPartition
from src.exception import DomainError
from src.logger import logging


def _as_fraction(value) -> Fraction:
    return value if isinstance(value, Fraction) else Fraction(value)


def _chunk_total(task: Tuple[List[PairPartition], BandGeometry]) -> int:
    chunk, geom = task
    return sum(count_admissible(pp, geom).value for pp in chunk)


def _sum_counts(ell: int, geom: BandGeometry, max_ell: Optional[int], workers: int) -> int:
    tasks = ((chunk, geom) for chunk in iter_chunks(ell, ENUMERATION_CHUNK_SIZE, max_ell=max_ell))
    if workers <= 1:
        return sum(map(_chunk_total, tasks))
    # counting is pure Python, so chunks go to worker processes
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return sum(pool.map(_chunk_total, tasks))


def exact_trace_moment(ell: int, geom: BandGeometry, sigma2=1,
                       max_ell: Optional[int] = None, workers: int = 1) -> MomentResult:
    """
    sigma^(2l) xi^(-l) sum_pi Q(l, N, b, pi), exact.

    ``sigma2`` may be an int, a Fraction or a float (taken at its exact binary value).
    """
    s2 = _as_fraction(sigma2)
    if s2 <= 0:
        raise DomainError(f"sigma2 must be positive, got {sigma2}", sys)
    logging.info(f"Exact moment E[Tr X^{2 * ell}] at N={geom.N}, b={geom.b}, {geom.mode}")

    total = _sum_counts(ell, geom, max_ell, workers)
    exact = s2 ** ell * Fraction(total, geom.xi ** ell)
    catalan_term = s2 ** ell * geom.N * catalan(ell)
    return MomentResult(ell=ell, exact_value=exact, catalan_term=catalan_term,
                        correction=exact - catalan_term)


def trace_moment(power: int, geom: BandGeometry, sigma2=1, max_ell: Optional[int] = None) -> Fraction:
    """E[Tr X^power]; odd powers vanish exactly."""
    if power < 0:
        raise DomainError(f"power must be non-negative, got {power}", sys)
    if power == 0:
        return Fraction(geom.N)
    if power % 2:
        return Fraction(0)
    return exact_trace_moment(power // 2, geom, sigma2, max_ell=max_ell).exact_value


def full_band_moment(ell: int, N: int, sigma2=1, max_ell: Optional[int] = None) -> Fraction:
    """sum_g eps_g(l) N^(1-2g) sigma^(2l): the GUE(N, sigma^2/N) moment."""
    s2 = _as_fraction(sigma2)
    census = genus_census(ell, max_ell=max_ell)
    return s2 ** ell * sum(count * Fraction(N) ** (1 - 2 * g) for g, count in census.items())


def band_genus_bounds(ell: int, geom: BandGeometry,
                      max_ell: Optional[int] = None) -> Tuple[Fraction, Fraction]:
    """
    (N / l^l) sum_{g>=1} eps_g / xi^(2g)  <=  Delta_2l(N)  <=  N sum_{g>=1} eps_g / xi^(2g),
    at sigma = 1 in periodic mode.
    """
    if not geom.periodic:
        raise DomainError("the band-genus sandwich holds in periodic mode only", sys)
    census = genus_census(ell, max_ell=max_ell)
    series = sum((Fraction(count, geom.xi ** (2 * g)) for g, count in census.items() if g >= 1),
                 Fraction(0))
    upper = geom.N * series
    return upper / Fraction(ell ** ell), upper


def limit_sandwich(ell: int, c: float, sigma2: float = 1.0) -> Tuple[float, float]:
    """eps_1(l) sigma^(2l) / (4 c^2 l^l) <= m_2l(sigma^2, c) <= eps_1(l) sigma^(2l) / (4 c^2)."""
    if c <= 0:
        raise DomainError(f"band ratio c must be positive, got {c}", sys)
    upper = epsilon_1_closed_form(ell) * sigma2 ** ell / (4.0 * c * c)
    return upper / ell ** ell, upper


def _partition_integral(task: Tuple[PairPartition, int, int, int]) -> IntegralEstimate:
    pp, samples, seed, stream = task
    return integral_I(pp, samples, seed=seed, stream=stream)


def infinitesimal_correction_limit(ell: int, c: float, sigma2: float = 1.0,
                                   samples: int = INTEGRAL_DEFAULT_SAMPLES,
                                   seed: int = INTEGRAL_DEFAULT_SEED,
                                   max_ell: Optional[int] = None, workers: int = 1) -> LimitCorrection:
    """
    m_2l(sigma^2, c) = sigma^(2l) / (2^l c^2) * sum_{genus(pi) = 1} I_l^pi,
    for b_N / sqrt(N) -> c. Partition i of the genus-one list integrates on stream i,
    so the estimate does not depend on ``workers``.
    """
    if c <= 0:
        raise DomainError(f"band ratio c must be positive, got {c}", sys)
    if ell < 1:
        raise DomainError(f"ell must be at least 1, got {ell}", sys)
    if ell == 1:
        return LimitCorrection(ell=1, c=c, sigma2=sigma2, value=0.0, stderr=0.0)

    scale = sigma2 ** ell / (2.0 ** ell * c * c)
    genus_one = [pp for pp in enumerate_pair_partitions(ell, max_ell=max_ell) if genus(pp).genus == 1]
    tasks = [(pp, samples, seed, stream) for stream, pp in enumerate(genus_one)]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            estimates = list(pool.map(_partition_integral, tasks))
    else:
        estimates = [_partition_integral(task) for task in tasks]

    contributions: List[PartitionContribution] = []
    variance = 0.0
    for pp, estimate in zip(genus_one, estimates):
        simple = underlying_simple(build_quotient(pp)).to_networkx()
        contributions.append(PartitionContribution(
            partition=str(pp),
            is_tree=nx.is_tree(simple),
            integral=estimate,
            contribution=scale * estimate.mean,
        ))
        variance += (scale * estimate.stderr) ** 2

    value = float(sum(item.contribution for item in contributions))
    logging.info(f"m_{2 * ell}(sigma2={sigma2}, c={c}) ~ {value:.6f} over {len(contributions)} genus-one partitions")
    return LimitCorrection(ell=ell, c=c, sigma2=sigma2, value=value, stderr=float(np.sqrt(variance)),
                           genus_one_count=len(contributions), contributions=tuple(contributions))


def _trend(corrections: Sequence[Fraction]) -> str:
    if len(corrections) < 2:
        return "stabilizing"
    first, last = corrections[0], corrections[-1]
    steps = [b - a for a, b in zip(corrections, corrections[1:])]
    if all(s <= 0 for s in steps) and last <= first / 2:
        return "vanishing"
    if all(s >= 0 for s in steps) and last >= 2 * first:
        return "diverging"
    return "stabilizing"


def regime_classify(ell: int, sizes: Iterable[Tuple[int, int]], sigma2=1,
                    mode: str = PERIODIC_MODE, max_ell: Optional[int] = None) -> RegimeReport:
    """
    Tabulates Delta_2l(N) along (N, b) pairs with increasing N and names the trend:
    "vanishing" (b >> sqrt N), "diverging" (b << sqrt N) or "stabilizing" (b ~ c sqrt N).
    """
    sizes = list(sizes)
    if any(n2 <= n1 for (n1, _), (n2, _) in zip(sizes, sizes[1:])):
        raise DomainError("regime sequence needs strictly increasing N", sys)

    rows = []
    for N, b in sizes:
        geom = BandGeometry(N=N, b=b, mode=mode)
        result = exact_trace_moment(ell, geom, sigma2, max_ell=max_ell)
        rows.append(RegimeRow(N=N, b=b, xi=geom.xi, correction=result.correction))
        logging.debug(f"Delta_{2 * ell}(N={N}, b={b}) = {float(result.correction):.6g}")

    trend = _trend([row.correction for row in rows])
    logging.info(f"Regime trend for ell={ell}: {trend}")
    return RegimeReport(ell=ell, rows=tuple(rows), trend=trend)


def mixed_trace_moment(colors: Sequence[int], geoms: Mapping[int, BandGeometry], sigma2=1,
                       max_ell: Optional[int] = None) -> Fraction:
    """
    E[Tr X^(c_1) X^(c_2) ... X^(c_2l)] for independent banded matrices X^(c) sharing N.

    Only pairings that match equal colours contribute; every edge e_j carries the
    band of colour c_j. The normalisation is prod_j xi^(c_j)^(-1/2).
    """
    colors = list(colors)
    missing = set(colors) - set(geoms)
    if missing:
        raise DomainError(f"no band geometry for colours {sorted(missing)}", sys)
    shapes = {(g.N, g.mode) for g in geoms.values()}
    if len(shapes) != 1:
        raise DomainError(f"coloured geometries must share N and mode, got {sorted(shapes)}", sys)

    multiplicity = Counter(colors)
    if not colors or any(count % 2 for count in multiplicity.values()):
        return Fraction(0)

    ell = len(colors) // 2
    (N, mode), = shapes
    base = BandGeometry(N=N, b=0, mode=mode)
    edge_bands: Dict[int, int] = {j: geoms[color].b for j, color in enumerate(colors, start=1)}

    total = 0
    matched = 0
    for pp in enumerate_pair_partitions(ell, max_ell=max_ell):
        if any(colors[a - 1] != colors[b - 1] for a, b in pp.blocks):
            continue
        matched += 1
        total += count_admissible(pp, base, edge_bands=edge_bands).value

    normalisation = 1
    for color, count in multiplicity.items():
        normalisation *= geoms[color].xi ** (count // 2)
    logging.debug(f"Mixed moment {colors}: {matched} colour-matched pairings")
    return _as_fraction(sigma2) ** ell * Fraction(total, normalisation)


def growth_trend(c: float, sigma2: float = 1.0, ells: Iterable[int] = range(2, 7),
                 samples: int = INTEGRAL_DEFAULT_SAMPLES, seed: int = INTEGRAL_DEFAULT_SEED,
                 max_ell: Optional[int] = None) -> pd.DataFrame:
    """m_2l and m_2l^(1/2l) over l; the root is expected, not known, to approach 2 sigma."""
    records = []
    for ell in ells:
        limit = infinitesimal_correction_limit(ell, c, sigma2, samples=samples, seed=seed, max_ell=max_ell)
        lower, upper = limit_sandwich(ell, c, sigma2)
        records.append({
            "ell": ell,
            "m": limit.value,
            "stderr": limit.stderr,
            "root": limit.value ** (1.0 / (2 * ell)) if limit.value > 0 else 0.0,
            "lower": lower,
            "upper": upper,
        })
    return pd.DataFrame.from_records(records, columns=["ell", "m", "stderr", "root", "lower", "upper"])
