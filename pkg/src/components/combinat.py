"""
Pair partitions of [2*ell], the cycles of gamma o pi and the genus counts epsilon_g(ell).

gamma is the rotation (1, 2, ..., 2*ell); gamma o pi means "apply pi, then gamma".
"""
import math
import sys
from functools import lru_cache
from itertools import islice
from typing import Dict, Iterator, List, Optional

from src.constants import ENUMERATION_MAX_ELL
from src.entity.partition import GenusProfile, PairPartition
from src.exception import DomainError, EnumerationTooLargeError
from src.logger import logging


def _check_cap(ell: int, max_ell: Optional[int]) -> None:
    cap = ENUMERATION_MAX_ELL if max_ell is None else max_ell
    if ell < 1:
        raise DomainError(f"ell must be at least 1, got {ell}", sys)
    if ell > cap:
        raise EnumerationTooLargeError(ell, cap, sys)


def enumerate_pair_partitions(ell: int, max_ell: Optional[int] = None) -> Iterator[PairPartition]:
    """
    Lazily yields the (2*ell - 1)!! pair partitions of [2*ell].

    Order: the smallest unpaired element is matched with each larger unpaired
    element in increasing order, recursively.
    """
    _check_cap(ell, max_ell)
    n = 2 * ell
    partner = [0] * n

    def _extend(unpaired: List[int]) -> Iterator[PairPartition]:
        if not unpaired:
            yield PairPartition(ell=ell, partner=tuple(partner))
            return
        first, rest = unpaired[0], unpaired[1:]
        for pos, mate in enumerate(rest):
            partner[first - 1], partner[mate - 1] = mate, first
            yield from _extend(rest[:pos] + rest[pos + 1:])
        partner[first - 1] = 0

    yield from _extend(list(range(1, n + 1)))


def iter_chunks(ell: int, chunk_size: int, max_ell: Optional[int] = None) -> Iterator[List[PairPartition]]:
    """Consecutive chunks of the enumeration, for consumers that fan out work."""
    iterator = enumerate_pair_partitions(ell, max_ell=max_ell)
    while True:
        chunk = list(islice(iterator, chunk_size))
        if not chunk:
            return
        yield chunk


def cycles_gamma_pi(pp: PairPartition) -> List[List[int]]:
    """
    Cycles of gamma o pi, each listed from its smallest element in successor order,
    cycles sorted by their smallest element.
    """
    n = 2 * pp.ell
    successor = [0] * (n + 1)
    for i in range(1, n + 1):
        successor[i] = pp.partner[i - 1] % n + 1

    seen = [False] * (n + 1)
    cycles = []
    for start in range(1, n + 1):
        if seen[start]:
            continue
        cycle = []
        i = start
        while not seen[i]:
            seen[i] = True
            cycle.append(i)
            i = successor[i]
        cycles.append(cycle)
    return cycles


def genus(pp: PairPartition) -> GenusProfile:
    cycle_count = len(cycles_gamma_pi(pp))
    excess = pp.ell + 1 - cycle_count
    assert excess >= 0 and excess % 2 == 0, \
        f"cycle count {cycle_count} has the wrong parity for ell={pp.ell} ({pp})"
    return GenusProfile(ell=pp.ell, cycle_count=cycle_count, genus=excess // 2)


def has_crossing(pp: PairPartition) -> bool:
    """Direct test: blocks (a, b), (c, d) with a < c < b < d."""
    blocks = pp.blocks
    for a, b in blocks:
        for c, d in blocks:
            if a < c < b < d:
                return True
    return False


def is_noncrossing(pp: PairPartition) -> bool:
    return genus(pp).genus == 0


def catalan(ell: int) -> int:
    if ell < 0:
        raise DomainError(f"Catalan index must be non-negative, got {ell}", sys)
    return math.comb(2 * ell, ell) // (ell + 1)


def double_factorial(n: int) -> int:
    """n!! for odd or even n >= -1."""
    if n < -1:
        raise DomainError(f"double factorial undefined for {n}", sys)
    return math.prod(range(n, 0, -2)) if n > 0 else 1


@lru_cache(maxsize=None)
def _census(ell: int) -> Dict[int, int]:
    logging.info(f"Computing genus census for ell={ell}")
    counts: Dict[int, int] = {}
    for pp in enumerate_pair_partitions(ell, max_ell=ell):
        g = genus(pp).genus
        counts[g] = counts.get(g, 0) + 1
    logging.debug(f"Genus census ell={ell}: {counts}")
    return counts


def genus_census(ell: int, max_ell: Optional[int] = None) -> Dict[int, int]:
    """{g: epsilon_g(ell)} by exhaustive enumeration."""
    _check_cap(ell, max_ell)
    return dict(_census(ell))


def epsilon_g(ell: int, g: int, max_ell: Optional[int] = None) -> int:
    if g < 0:
        raise DomainError(f"genus must be non-negative, got {g}", sys)
    return genus_census(ell, max_ell=max_ell).get(g, 0)


def epsilon_1_closed_form(ell: int) -> int:
    """(2l-1)! / (6 (l-2)! (l-1)!), with epsilon_1(0) = epsilon_1(1) = 0."""
    if ell < 2:
        return 0
    numerator = math.factorial(2 * ell - 1)
    denominator = 6 * math.factorial(ell - 2) * math.factorial(ell - 1)
    assert numerator % denominator == 0
    return numerator // denominator


def epsilon_1_asymptotic(ell: int) -> float:
    return 0.5 * math.sqrt(ell / math.pi) * (ell - 1) * 4.0 ** ell


def star_partition(ell: int) -> PairPartition:
    """The one-crossing partition (1,3)(2,4)(5,6)(7,8)...(2l-1,2l)."""
    if ell < 2:
        raise DomainError(f"the star partition needs ell >= 2, got {ell}", sys)
    blocks = [(1, 3), (2, 4)] + [(j, j + 1) for j in range(5, 2 * ell, 2)]
    return PairPartition.from_blocks(blocks)
