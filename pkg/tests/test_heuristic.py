import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mbofs.heuristic import (
    ChangeSchedule,
    FeatureMask,
    FitnessFn,
    HeuristicError,
    RngStream,
    change_count,
    flip,
    generate_neighbor,
)
from mbofs.synth import make_planted_matrix

TABLE_MASK = "1100100110"  # the worked 10-feature example
TABLE_NEIGHBOR = "0100100111"  # same solution with f0 dropped and f9 added


class TestFeatureMask:
    def test_bitstring_roundtrip(self):
        m = FeatureMask.from_bitstring(TABLE_MASK)
        assert m.to_bitstring() == TABLE_MASK
        assert m.universe == 10
        assert m.popcount == 5

    def test_array_roundtrip(self):
        arr = np.array([True, False, True])
        m = FeatureMask.from_array(arr)
        np.testing.assert_array_equal(m.to_array(), arr)


class TestFlip:
    def test_table_example(self):
        m = FeatureMask.from_bitstring(TABLE_MASK)
        assert flip(flip(m, 0), 9).to_bitstring() == TABLE_NEIGHBOR

    def test_single_bit_from_zeros(self):
        m = flip(FeatureMask.zeros(8), 3)
        assert m.popcount == 1
        assert m.to_array()[3]

    def test_out_of_range(self):
        with pytest.raises(HeuristicError):
            flip(FeatureMask.zeros(4), 4)

    @given(st.integers(1, 64).flatmap(
        lambda m: st.tuples(st.just(m), st.integers(0, m - 1),
                            st.lists(st.booleans(), min_size=m, max_size=m))))
    def test_involution(self, args):
        m, pos, bits = args
        mask = FeatureMask.from_array(bits)
        assert flip(flip(mask, pos), pos) == mask


class TestRngStream:
    def test_same_path_same_draws(self):
        a = RngStream(42).child("x", 1).generator().random(5)
        b = RngStream(42).child("x", 1).generator().random(5)
        np.testing.assert_array_equal(a, b)

    def test_distinct_paths_differ(self):
        a = RngStream(42).child("x", 1).generator().random(5)
        b = RngStream(42).child("x", 2).generator().random(5)
        assert not np.array_equal(a, b)


class TestGenerateNeighbor:
    def test_table_example_is_reachable(self):
        # some seed draws exactly positions {0, 9}
        m = FeatureMask.from_bitstring(TABLE_MASK)
        for seed in range(500):
            n = generate_neighbor(m, 2, RngStream(seed))
            if n.to_bitstring() == TABLE_NEIGHBOR:
                return
        pytest.fail("positions {0,9} never drawn in 500 seeds")

    def test_all_ones_full_change_errors(self):
        with pytest.raises(HeuristicError, match="degenerate"):
            generate_neighbor(FeatureMask.ones(6), 6, RngStream(0))

    def test_change_out_of_range(self):
        with pytest.raises(HeuristicError):
            generate_neighbor(FeatureMask.ones(6), 7, RngStream(0))

    def test_hamming_distance_1000_seeds(self):
        rng = np.random.default_rng(0)
        for seed in range(1000):
            m_len = int(rng.integers(4, 40))
            change = int(rng.integers(1, m_len))  # change <= M-1
            bits = rng.random(m_len) < 0.5
            mask = FeatureMask.from_array(bits)
            n = generate_neighbor(mask, change, RngStream(seed))
            hamming = int((mask.to_array() != n.to_array()).sum())
            assert hamming == change
            assert n.popcount >= 1

    def test_deterministic(self):
        m = FeatureMask.ones(30)
        a = generate_neighbor(m, 4, RngStream(7).child("t", 3))
        b = generate_neighbor(m, 4, RngStream(7).child("t", 3))
        assert a == b


class TestChangeCount:
    def test_base_value(self):
        assert change_count(0, 2000, ChangeSchedule()) == 40

    def test_floors_at_one(self):
        assert change_count(6, 2000, ChangeSchedule()) == 1
        assert change_count(50, 2000, ChangeSchedule()) == 1

    def test_m_prime_one(self):
        for counter in range(10):
            assert change_count(counter, 1, ChangeSchedule()) == 1

    @given(st.integers(0, 20), st.integers(1, 10000))
    def test_non_increasing_and_positive(self, counter, m_prime):
        sched = ChangeSchedule()
        c0 = change_count(counter, m_prime, sched)
        c1 = change_count(counter + 1, m_prime, sched)
        assert c0 >= c1 >= 1


@pytest.fixture(scope="module")
def matrix():
    m, _ = make_planted_matrix(n_docs=80, n_features=40, n_informative=8, seed=2)
    return m


class TestFitness:
    def test_separable_mask_perfect(self):
        import scipy.sparse as sp
        from mbofs.corpus import DocTermMatrix
        x = np.zeros((20, 3))
        y = np.arange(20) % 2
        x[y == 0, 0] = 1.0
        x[y == 1, 1] = 1.0
        m = DocTermMatrix(weights=sp.csr_matrix(x), labels=y)
        fit = FitnessFn(m, seed=0)
        assert fit(FeatureMask.from_bitstring("110")) == 1.0

    def test_empty_mask_is_zero(self, matrix):
        fit = FitnessFn(matrix, seed=0)
        assert fit(FeatureMask.zeros(matrix.n_features)) == 0.0

    def test_bounds(self, matrix):
        fit = FitnessFn(matrix, seed=0)
        v = fit(FeatureMask.ones(matrix.n_features))
        assert 0.0 <= v <= 1.0

    def test_memo_transparent(self, matrix):
        rng = np.random.default_rng(4)
        masks = [FeatureMask.from_array(rng.random(matrix.n_features) < 0.5)
                 for _ in range(10)]
        memo = FitnessFn(matrix, seed=3, memoize=True)
        plain = FitnessFn(matrix, seed=3, memoize=False)
        for m in masks + masks:  # revisit to hit the cache
            assert memo(m) == plain(m)
        assert memo.evaluations < plain.evaluations

    def test_fixed_seed_repeatable(self, matrix):
        mask = FeatureMask.ones(matrix.n_features)
        assert FitnessFn(matrix, seed=5)(mask) == FitnessFn(matrix, seed=5)(mask)
