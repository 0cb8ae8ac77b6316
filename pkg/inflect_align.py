# Copyright 2025 The Inflect Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""
Inflect Align

Dynamic time warping of a hypothesis onto a reference in mel-cepstral space,
with mel-cepstral distortion (MCD) as the local cost.
"""
import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import List, Tuple

import numpy as np
from scipy.spatial.distance import cdist

from inflect_pitch import PitchTrack

# dB scale of the cepstral Euclidean distance: (10 / ln 10) * sqrt(2)
MCD_CONSTANT = 10.0 / math.log(10.0) * math.sqrt(2.0)


@dataclass
class AlignmentPath:
    """Monotonic (ref, hyp) frame pairs from (0, 0) to (R-1, H-1)"""

    pairs: List[Tuple[int, int]]
    total_cost: float

    def __len__(self):
        return len(self.pairs)

    @property
    def mean_mcd(self):
        """Total cost normalized by path length"""
        return self.total_cost / len(self.pairs)


def _coefficients(cepstra):
    return getattr(cepstra, "coefficients", cepstra)


def mcd_frame(c_ref, c_hyp):
    """
    Mel-cepstral distortion between two frames (c_1..c_K, c_0 excluded)

    Returns:
        (10 / ln 10) * sqrt(2 * sum_k (c_ref,k - c_hyp,k)^2) in dB
    """
    c_ref = np.asarray(c_ref, dtype=np.float64)
    c_hyp = np.asarray(c_hyp, dtype=np.float64)
    if c_ref.shape != c_hyp.shape or c_ref.ndim != 1 or c_ref.size == 0:
        raise ValueError(f"mcd_frame needs equal-length nonempty vectors, got {c_ref.shape} and {c_hyp.shape}")
    diff = c_ref - c_hyp
    return MCD_CONSTANT * math.sqrt(float(np.dot(diff, diff)))


def mcd_matrix(ref, hyp):
    """R x H matrix of mcd_frame over all frame pairs"""
    a = np.asarray(_coefficients(ref), dtype=np.float64)
    b = np.asarray(_coefficients(hyp), dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[0] == 0 or b.shape[0] == 0:
        raise ValueError(f"DTW needs nonempty frame sequences, got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[1]:
        raise ValueError(f"Cepstral order mismatch: {a.shape[1]} vs {b.shape[1]}")
    return MCD_CONSTANT * cdist(a, b, metric="euclidean")


def dtw(ref, hyp):
    """
    Globally optimal alignment with steps (1,0), (0,1), (1,1)

    No band constraint. During backtrace, ties between predecessors prefer
    the diagonal, then (1,0), then (0,1).

    Args:
        ref, hyp: MelCepstra (or frames x K arrays) of equal order

    Returns:
        AlignmentPath whose total_cost is the summed mcd_frame along the path
    """
    cost = mcd_matrix(ref, hyp)
    n_ref, n_hyp = cost.shape

    acc = np.full((n_ref, n_hyp), np.inf)
    acc[0, 0] = cost[0, 0]
    for j in range(1, n_hyp):
        acc[0, j] = acc[0, j - 1] + cost[0, j]
    for i in range(1, n_ref):
        prev = acc[i - 1]
        row = acc[i]
        c = cost[i]
        row[0] = prev[0] + c[0]
        # diagonal and vertical predecessors are known for the whole row
        best = np.minimum(prev[1:], prev[:-1]) + c[1:]
        left = row[0]
        for j in range(1, n_hyp):
            left = min(best[j - 1], left + c[j])
            row[j] = left

    i, j = n_ref - 1, n_hyp - 1
    pairs = [(i, j)]
    while i > 0 or j > 0:
        if i == 0:
            j -= 1
        elif j == 0:
            i -= 1
        else:
            diag, up, left = acc[i - 1, j - 1], acc[i - 1, j], acc[i, j - 1]
            if diag <= up and diag <= left:
                i, j = i - 1, j - 1
            elif up <= left:
                i -= 1
            else:
                j -= 1
        pairs.append((i, j))
    pairs.reverse()

    return AlignmentPath(pairs=pairs, total_cost=float(acc[-1, -1]))


def map_frames(path):
    """
    For each reference frame i, the hyp index of the first path pair with i

    Returns:
        int array of length R, non-decreasing
    """
    n_ref = path.pairs[-1][0] + 1
    mapping = np.full(n_ref, -1, dtype=np.int64)
    for i, j in path.pairs:
        if mapping[i] < 0:
            mapping[i] = j
    return mapping


def map_track(track, mapping):
    """Hypothesis pitch track re-indexed onto the reference frame grid"""
    mapping = np.asarray(mapping, dtype=np.int64)
    if len(mapping) and mapping.max() >= len(track):
        raise ValueError(f"Frame mapping reaches index {mapping.max()} but track has {len(track)} frames")
    return PitchTrack(track.hop_seconds, track.f0[mapping], track.voiced[mapping])


def write_path_csv(path, file):
    file = Path(file)
    file.parent.mkdir(parents=True, exist_ok=True)
    with open(file, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["ref_idx", "hyp_idx"])
        writer.writerows(path.pairs)
