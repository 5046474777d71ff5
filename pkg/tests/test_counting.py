import itertools

import numpy as np
import pytest

from src.components.combinat import enumerate_pair_partitions, genus, star_partition
from src.components.counting import (check_bounds, count_admissible, count_rooted, integral_I,
                                     label_bounds)
from src.constants import PERIODIC_MODE, REGULAR_MODE
from src.entity.config_entity import BandGeometry
from src.entity.partition import PairPartition
from src.exception import DomainError, ResourceBudgetError


def _index_classes(pp: PairPartition):
    """Classes of indices i_1..i_2l forced equal by the pairing: i_j = i_(k+1), i_(j+1) = i_k."""
    n = 2 * pp.ell
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for j, k in pp.blocks:
        for a, b in ((j - 1, k % n), (j % n, k - 1)):
            parent[find(a)] = find(b)
    roots = sorted({find(i) for i in range(n)})
    return [roots.index(find(i)) for i in range(n)], len(roots)


def brute_force_count(pp: PairPartition, geom: BandGeometry) -> int:
    """Index tuples in [N]^(2l) respecting the pairing and the band on every factor."""
    cls, k = _index_classes(pp)
    labels = np.indices((geom.N,) * k).reshape(k, -1)
    ok = np.ones(labels.shape[1], dtype=bool)
    n = 2 * pp.ell
    for j in range(n):
        d = np.abs(labels[cls[j]] - labels[cls[(j + 1) % n]])
        if geom.periodic:
            d = np.minimum(d, geom.N - d)
        ok &= d <= geom.b
    return int(ok.sum())


@pytest.mark.parametrize("mode", [PERIODIC_MODE, REGULAR_MODE])
@pytest.mark.parametrize("N, b", list(itertools.product([10, 20, 30], [1, 2, 5])))
def test_count_matches_brute_force(N, b, mode):
    geom = BandGeometry(N=N, b=b, mode=mode)
    for ell in (1, 2, 3):
        for pp in enumerate_pair_partitions(ell):
            assert count_admissible(pp, geom).value == brute_force_count(pp, geom), (str(pp), N, b, mode)


def test_double_tree_formula():
    for N, b in [(20, 2), (30, 5), (11, 5)]:
        geom = BandGeometry(N=N, b=b)
        for ell in range(1, 5):
            for pp in enumerate_pair_partitions(ell):
                if genus(pp).genus == 0:
                    assert count_admissible(pp, geom).value == N * geom.xi ** ell


def test_single_pair_in_both_modes():
    pp = PairPartition.from_blocks([(1, 2)])
    assert count_admissible(pp, BandGeometry(N=100, b=10)).value == 100 * 21
    assert count_admissible(pp, BandGeometry(N=100, b=10, mode=REGULAR_MODE)).value == 100 * 21 - 110


def test_crossing_pair_counts_every_label(crossing_pair):
    assert count_admissible(crossing_pair, BandGeometry(N=37, b=3)).value == 37


def test_rooted_counts_sum_to_total(worked_partition):
    for mode in (PERIODIC_MODE, REGULAR_MODE):
        geom = BandGeometry(N=12, b=2, mode=mode)
        total = count_admissible(worked_partition, geom).value
        rooted = [count_rooted(worked_partition, geom, r).value for r in range(1, 13)]
        assert sum(rooted) == total
        if mode == PERIODIC_MODE:
            assert len(set(rooted)) == 1
    with pytest.raises(DomainError):
        count_rooted(worked_partition, BandGeometry(N=12, b=2), 13)


def test_per_edge_bands_use_the_tightest_parallel_edge(worked_partition):
    geom = BandGeometry(N=15, b=3)
    # e_2 and e_8 both join vertices 1 and 3
    narrowed = count_admissible(worked_partition, geom, edge_bands={2: 1}).value
    expected = count_admissible(worked_partition, geom, edge_bands={2: 1, 8: 1}).value
    assert narrowed == expected < count_admissible(worked_partition, geom).value


def test_worked_partition_count(worked_partition):
    # vertices 1, 3, 4 pairwise within b of each other: N (3 b^2 + 3 b + 1)
    assert count_admissible(worked_partition, BandGeometry(N=40, b=4)).value == 40 * (3 * 16 + 3 * 4 + 1) == 2440


def test_worked_count_approaches_the_genus_one_limit(worked_partition):
    ratios = []
    for b in (8, 16, 32):
        N = 100 * b
        ratio = count_admissible(worked_partition, BandGeometry(N=N, b=b)).value / (N * b ** 2)
        assert ratio == pytest.approx(3 + 3 / b + 1 / b ** 2)
        assert abs(ratio - 3.0) / 3.0 < 10 / b
        ratios.append(ratio)
    assert ratios[0] > ratios[1] > ratios[2] > 3.0


def test_node_budget(worked_partition):
    with pytest.raises(ResourceBudgetError) as info:
        count_admissible(worked_partition, BandGeometry(N=20, b=2), node_budget=1)
    assert info.value.exit_code == 3


def test_label_bounds():
    for N, b in [(20, 2), (30, 5)]:
        geom = BandGeometry(N=N, b=b)
        for ell in range(1, 5):
            for pp in enumerate_pair_partitions(ell):
                assert check_bounds(pp, geom)
    assert label_bounds(PairPartition.from_blocks([(1, 3), (2, 4)]), BandGeometry(N=20, b=2)) == (20, 20)
    with pytest.raises(DomainError):
        label_bounds(star_partition(2), BandGeometry(N=20, b=2, mode=REGULAR_MODE))


def test_integral_for_ell_two_is_one(crossing_pair):
    estimate = integral_I(crossing_pair, samples=10)
    assert estimate.mean == 1.0
    assert estimate.stderr == 0.0


def test_worked_integral_is_three(worked_partition):
    estimate = integral_I(worked_partition, samples=1_000_000)
    assert abs(estimate.mean - 3.0) <= 3 * estimate.stderr
    assert estimate.samples == 1_000_000


@pytest.mark.parametrize("ell", [3, 4, 5])
def test_star_integrals(ell):
    estimate = integral_I(star_partition(ell), samples=1_000_000)
    assert abs(estimate.mean - 2.0 ** (ell - 2)) <= 3 * estimate.stderr


def test_integral_is_reproducible_and_stream_dependent(worked_partition):
    a = integral_I(worked_partition, samples=50_000, seed=5)
    b = integral_I(worked_partition, samples=50_000, seed=5)
    c = integral_I(worked_partition, samples=50_000, seed=5, stream=1)
    assert a == b
    assert a.mean != c.mean


def test_integral_does_not_depend_on_the_root(worked_partition):
    # quotient vertices are 1, 3 and 4
    a = integral_I(worked_partition, samples=200_000, root=1)
    b = integral_I(worked_partition, samples=200_000, root=4, stream=7)
    assert abs(a.mean - b.mean) <= 4 * np.hypot(a.stderr, b.stderr)
    with pytest.raises(DomainError):
        integral_I(worked_partition, samples=100, root=2)


def test_integral_rejects_other_genera():
    with pytest.raises(DomainError):
        integral_I(PairPartition.from_blocks([(1, 2), (3, 4)]), samples=100)
