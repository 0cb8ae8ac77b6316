"""
Unit tests for mel-cepstral distortion and DTW alignment
"""
import sys
import os
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from inflect_align import (MCD_CONSTANT, AlignmentPath, dtw, map_frames, map_track, mcd_frame, mcd_matrix,
                           write_path_csv)
from inflect_pitch import PitchTrack


def path_cost(cost, pairs):
    """Summed local cost along a path"""
    return float(sum(cost[i, j] for i, j in pairs))


def all_paths(n_ref, n_hyp):
    """Every monotonic path from (0, 0) to (n_ref - 1, n_hyp - 1)"""
    def extend(path):
        i, j = path[-1]
        if (i, j) == (n_ref - 1, n_hyp - 1):
            yield path
            return
        for di, dj in ((1, 1), (1, 0), (0, 1)):
            if i + di < n_ref and j + dj < n_hyp:
                yield from extend(path + [(i + di, j + dj)])
    return list(extend([(0, 0)]))


def assert_valid_path(pairs, n_ref, n_hyp):
    assert pairs[0] == (0, 0)
    assert pairs[-1] == (n_ref - 1, n_hyp - 1)
    for (i0, j0), (i1, j1) in zip(pairs, pairs[1:]):
        assert (i1 - i0, j1 - j0) in ((1, 1), (1, 0), (0, 1))


@pytest.mark.unit
class TestMcd:
    """Frame distortion"""

    def test_identical(self):
        """Identical vectors have zero distortion"""
        c = np.array([0.3, -1.2, 4.0])
        assert mcd_frame(c, c) == 0.0

    def test_unit_difference(self):
        """A unit difference in one coefficient is 10 sqrt(2) / ln 10 dB"""
        a = np.zeros(13)
        b = a.copy()
        b[4] = 1.0
        assert mcd_frame(a, b) == pytest.approx(6.1418, abs=1e-3)
        assert MCD_CONSTANT == pytest.approx(10.0 * math.sqrt(2.0) / math.log(10.0))

    def test_symmetric(self):
        """Swapping arguments gives the same value"""
        rng = np.random.default_rng(0)
        a, b = rng.normal(size=13), rng.normal(size=13)
        assert mcd_frame(a, b) == pytest.approx(mcd_frame(b, a))

    def test_length_mismatch(self):
        """Vectors must have equal length"""
        with pytest.raises(ValueError):
            mcd_frame(np.zeros(3), np.zeros(4))

    def test_matrix_matches_frames(self):
        """mcd_matrix entries equal mcd_frame"""
        rng = np.random.default_rng(1)
        ref, hyp = rng.normal(size=(4, 5)), rng.normal(size=(3, 5))
        cost = mcd_matrix(ref, hyp)
        for i, j in itertools.product(range(4), range(3)):
            assert cost[i, j] == pytest.approx(mcd_frame(ref[i], hyp[j]))

    def test_matrix_order_mismatch(self):
        """Cepstral orders must agree"""
        with pytest.raises(ValueError, match="order"):
            mcd_matrix(np.zeros((2, 3)), np.zeros((2, 4)))

    def test_matrix_empty(self):
        """Empty sequences cannot be aligned"""
        with pytest.raises(ValueError):
            dtw(np.zeros((0, 3)), np.zeros((2, 3)))


@pytest.mark.unit
class TestDtw:
    """Alignment optimality and tie-breaking"""

    def test_identical_sequences(self):
        """Identical sequences align on the diagonal at zero cost"""
        seq = np.random.default_rng(2).normal(size=(6, 4))
        path = dtw(seq, seq)
        assert path.pairs == [(k, k) for k in range(6)]
        assert path.total_cost == 0.0
        assert path.mean_mcd == 0.0

    def test_duplicate_frame_absorbed(self):
        """A duplicated hyp frame costs nothing"""
        ref = np.random.default_rng(3).normal(size=(5, 4))
        hyp = np.insert(ref, 2, ref[2], axis=0)
        path = dtw(ref, hyp)
        assert path.total_cost == pytest.approx(0.0, abs=1e-12)
        assert_valid_path(path.pairs, 5, 6)

    def test_two_by_three_exhaustive(self):
        """2 x 3 random sequences match the brute-force optimum"""
        rng = np.random.default_rng(4)
        ref, hyp = rng.normal(size=(2, 3)), rng.normal(size=(3, 3))
        cost = mcd_matrix(ref, hyp)
        best = min(path_cost(cost, p) for p in all_paths(2, 3))
        assert dtw(ref, hyp).total_cost == pytest.approx(best)

    @given(n_ref=st.integers(1, 6), n_hyp=st.integers(1, 6), seed=st.integers(0, 2 ** 32 - 1))
    @settings(max_examples=60, deadline=None)
    def test_optimal_against_enumeration(self, n_ref, n_hyp, seed):
        """DTW cost equals the minimum over all monotonic paths"""
        rng = np.random.default_rng(seed)
        ref, hyp = rng.normal(size=(n_ref, 3)), rng.normal(size=(n_hyp, 3))
        cost = mcd_matrix(ref, hyp)

        path = dtw(ref, hyp)

        assert_valid_path(path.pairs, n_ref, n_hyp)
        assert path.total_cost == pytest.approx(path_cost(cost, path.pairs), rel=1e-9, abs=1e-9)
        best = min(path_cost(cost, p) for p in all_paths(n_ref, n_hyp))
        assert path.total_cost == pytest.approx(best, rel=1e-9, abs=1e-9)

    @given(n_ref=st.integers(1, 15), n_hyp=st.integers(1, 15), seed=st.integers(0, 2 ** 32 - 1))
    @settings(max_examples=100, deadline=None)
    def test_cost_symmetric(self, n_ref, n_hyp, seed):
        """Swapping reference and hypothesis leaves the optimal cost unchanged"""
        rng = np.random.default_rng(seed)
        a, b = rng.normal(size=(n_ref, 4)), rng.normal(size=(n_hyp, 4))
        assert dtw(a, b).total_cost == pytest.approx(dtw(b, a).total_cost, rel=1e-12, abs=1e-12)

    @given(n=st.integers(1, 20), seed=st.integers(0, 2 ** 32 - 1))
    @settings(max_examples=50, deadline=None)
    def test_self_alignment_is_free(self, n, seed):
        """A sequence aligned with itself costs nothing"""
        a = np.random.default_rng(seed).normal(0, 5, size=(n, 6))
        assert dtw(a, a).total_cost == pytest.approx(0.0, abs=1e-12)

    @given(n=st.integers(1, 20), seed=st.integers(0, 2 ** 32 - 1))
    @settings(max_examples=50, deadline=None)
    def test_at_most_diagonal_cost(self, n, seed):
        """For equal lengths the optimum never exceeds the pure diagonal path"""
        rng = np.random.default_rng(seed)
        a, b = rng.normal(size=(n, 4)), rng.normal(size=(n, 4))
        diagonal = path_cost(mcd_matrix(a, b), [(k, k) for k in range(n)])
        assert dtw(a, b).total_cost <= diagonal + 1e-9

    def test_tie_prefers_diagonal(self):
        """With all-equal frames the path is as diagonal as possible, then vertical"""
        ref = np.zeros((4, 2))
        hyp = np.zeros((3, 2))
        path = dtw(ref, hyp)
        assert path.pairs == [(0, 0), (1, 0), (2, 1), (3, 2)]

    def test_deterministic(self):
        """Same inputs give the same path"""
        rng = np.random.default_rng(5)
        ref, hyp = rng.normal(size=(7, 3)), rng.normal(size=(9, 3))
        assert dtw(ref, hyp).pairs == dtw(ref, hyp).pairs


@pytest.mark.unit
class TestMapFrames:
    """Reference-frame mapping"""

    def test_diagonal_identity(self):
        """A diagonal path maps each frame to itself"""
        path = AlignmentPath([(k, k) for k in range(5)], 0.0)
        assert map_frames(path).tolist() == [0, 1, 2, 3, 4]

    def test_first_pair_wins(self):
        """Each ref frame takes the hyp index of its first pair"""
        path = AlignmentPath([(0, 0), (1, 0), (2, 1)], 0.0)
        assert map_frames(path).tolist() == [0, 0, 1]
        path = AlignmentPath([(0, 0), (0, 1), (1, 2), (1, 3)], 0.0)
        assert map_frames(path).tolist() == [0, 2]

    @pytest.mark.parametrize("shape", [(3, 3), (4, 2), (2, 5), (5, 5)])
    def test_every_enumerated_path(self, shape):
        """Mappings are complete and non-decreasing for every valid path"""
        for pairs in all_paths(*shape):
            mapping = map_frames(AlignmentPath(pairs, 0.0))
            assert len(mapping) == shape[0]
            assert np.all(np.diff(mapping) >= 0)
            assert mapping.min() >= 0 and mapping.max() < shape[1]

    def test_map_track(self):
        """Tracks are re-indexed through the mapping"""
        track = PitchTrack.from_f0(0.01, [100.0, 0.0, 120.0])
        mapped = map_track(track, np.array([0, 0, 1, 2]))
        assert mapped.f0.tolist() == [100.0, 100.0, 0.0, 120.0]
        assert mapped.voiced.tolist() == [True, True, False, True]
        with pytest.raises(ValueError):
            map_track(track, np.array([0, 3]))

    def test_path_csv(self, tmp_path):
        """Paths are written as ref_idx,hyp_idx rows"""
        write_path_csv(AlignmentPath([(0, 0), (1, 0), (2, 1)], 1.5), tmp_path / "p.csv")
        assert (tmp_path / "p.csv").read_text(encoding="utf-8") == "ref_idx,hyp_idx\n0,0\n1,0\n2,1\n"


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
