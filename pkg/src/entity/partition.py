import sys
from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple

from src.exception import DomainError


@dataclass(frozen=True)
class PairPartition:
    """
    A perfect matching of [2*ell], stored 1-based as ``partner[i-1] = block-mate of i``.

    Acts as a fixed-point-free involution when composed with the rotation
    gamma = (1, 2, ..., 2*ell).
    """
    ell: int
    partner: Tuple[int, ...]

    def __post_init__(self):
        n = 2 * self.ell
        if self.ell < 1 or len(self.partner) != n:
            raise DomainError(f"partner must have length 2*ell={n}, got {len(self.partner)}", sys)
        for i, j in enumerate(self.partner, start=1):
            if not 1 <= j <= n:
                raise DomainError(f"partner[{i}]={j} outside [1, {n}]", sys)
            if j == i:
                raise DomainError(f"{i} is a fixed point of the pairing", sys)
            if self.partner[j - 1] != i:
                raise DomainError(f"partner is not an involution at {i}", sys)

    @classmethod
    def from_blocks(cls, blocks: Iterable[Sequence[int]]) -> "PairPartition":
        blocks = [tuple(b) for b in blocks]
        n = 2 * len(blocks)
        partner = [0] * n
        for block in blocks:
            if len(block) != 2:
                raise DomainError(f"block {block} is not a pair", sys)
            a, b = block
            if not (1 <= a <= n and 1 <= b <= n) or partner[a - 1] or partner[b - 1]:
                raise DomainError(f"blocks {blocks} do not form a matching of [1, {n}]", sys)
            partner[a - 1], partner[b - 1] = b, a
        return cls(ell=len(blocks), partner=tuple(partner))

    @property
    def blocks(self) -> Tuple[Tuple[int, int], ...]:
        """Canonical block listing: (a, b) with a < b, sorted by a."""
        return tuple((i, j) for i, j in enumerate(self.partner, start=1) if i < j)

    def __str__(self) -> str:
        return "".join(f"({a},{b})" for a, b in self.blocks)


@dataclass(frozen=True)
class GenusProfile:
    ell: int
    cycle_count: int
    genus: int
