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
Inflect Pitch

YIN-style F0 and voicing estimation on the same frame grid as the spectral
front-end, so pitch rows line up one-to-one with mel-cepstra rows.
"""
import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from inflect_signal import SignalTooShortError, SpectralConfig, frame_count, frame_signal

DEFAULT_SEARCH_RANGE = (60.0, 500.0)
DEFAULT_THRESHOLD = 0.15


@dataclass(frozen=True)
class PitchConfig:
    fmin_search: float = DEFAULT_SEARCH_RANGE[0]
    fmax_search: float = DEFAULT_SEARCH_RANGE[1]
    threshold: float = DEFAULT_THRESHOLD

    def __post_init__(self):
        if not 0 < self.fmin_search < self.fmax_search:
            raise ValueError(
                f"Invalid search range: need 0 < fmin ({self.fmin_search}) < fmax ({self.fmax_search})")
        if self.threshold <= 0:
            raise ValueError(f"Invalid YIN threshold: {self.threshold} (must be positive)")

    @property
    def search_range(self):
        return (self.fmin_search, self.fmax_search)


@dataclass
class PitchTrack:
    """Per-frame F0 in Hz (0 where unvoiced) and voicing flags"""

    hop_seconds: float
    f0: np.ndarray
    voiced: np.ndarray

    def __post_init__(self):
        self.f0 = np.asarray(self.f0, dtype=np.float64)
        self.voiced = np.asarray(self.voiced, dtype=bool)
        if self.f0.shape != self.voiced.shape or self.f0.ndim != 1:
            raise ValueError(f"f0 {self.f0.shape} and voiced {self.voiced.shape} must be equal-length 1-D arrays")
        if self.hop_seconds <= 0:
            raise ValueError(f"Invalid hop: {self.hop_seconds} s (must be positive)")
        if not np.array_equal(self.f0 > 0, self.voiced):
            raise ValueError("PitchTrack requires f0 > 0 exactly on voiced frames")

    def __len__(self):
        return len(self.f0)

    @property
    def times(self):
        return np.arange(len(self.f0)) * self.hop_seconds

    @property
    def voiced_fraction(self):
        return float(np.mean(self.voiced)) if len(self.voiced) else 0.0

    @classmethod
    def from_f0(cls, hop_seconds, f0):
        """Build a track whose voicing is f0 > 0"""
        f0 = np.where(np.asarray(f0, dtype=np.float64) > 0, f0, 0.0)
        return cls(hop_seconds, f0, f0 > 0)


def _difference_function(frames, window, max_lag):
    """
    d(tau) = sum_{j<W} (x[j] - x[j + tau])^2 for tau = 0..max_lag, all frames at once

    Expanded as r_t(0) + r_{t+tau}(0) - 2 r_t(tau); the cross term comes from
    an FFT correlation of the first W samples against the whole frame.
    """
    n_frames, length = frames.shape
    energy = np.concatenate([np.zeros((n_frames, 1)), np.cumsum(frames ** 2, axis=1)], axis=1)
    lags = np.arange(max_lag + 1)
    e_head = energy[:, window] - energy[:, 0]
    e_shift = energy[:, lags + window] - energy[:, lags]

    n_fft = 1 << int(np.ceil(np.log2(length + window)))
    head = np.fft.rfft(frames[:, :window], n=n_fft, axis=1)
    full = np.fft.rfft(frames, n=n_fft, axis=1)
    cross = np.fft.irfft(np.conj(head) * full, n=n_fft, axis=1)[:, :max_lag + 1]

    d = e_head[:, None] + e_shift - 2.0 * cross
    return np.maximum(d, 0.0)


def _cumulative_mean_normalized(d):
    """d'(0) = 1, d'(tau) = d(tau) * tau / sum_{j=1..tau} d(j); silent frames map to 1"""
    out = np.ones_like(d)
    running = np.cumsum(d[:, 1:], axis=1)
    lags = np.arange(1, d.shape[1])
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = d[:, 1:] * lags / running
    out[:, 1:] = np.where(running > 0, ratio, 1.0)
    return out


def _parabolic_offset(left, center, right):
    denom = left - 2.0 * center + right
    if denom <= 0:
        return 0.0
    return float(np.clip(0.5 * (left - right) / denom, -0.5, 0.5))


def extract_f0(audio, search_range=DEFAULT_SEARCH_RANGE, threshold=DEFAULT_THRESHOLD, spectral=None):
    """
    Estimate F0 per frame with the YIN cumulative-mean-normalized difference

    A frame is voiced iff the minimum normalized difference inside the lag
    search range is below threshold. The selected lag is the first dip below
    threshold followed down to its local minimum, refined by parabolic
    interpolation. Estimates that land outside search_range are marked
    unvoiced.

    Args:
        audio: AudioBuffer
        search_range: (fmin_search, fmax_search) in Hz
        threshold: YIN absolute threshold
        spectral: SpectralConfig giving frame and hop lengths

    Returns:
        PitchTrack with hop_seconds = hop_length / sample_rate

    Raises:
        ValueError: invalid search range for this sample rate, or a frame too
            short to hold the longest lag
        SignalTooShortError: audio shorter than two periods at fmin_search
    """
    cfg = PitchConfig(search_range[0], search_range[1], threshold)
    spectral = spectral or SpectralConfig()
    sr = audio.sample_rate
    if cfg.fmax_search >= sr / 2.0:
        raise ValueError(f"fmax_search ({cfg.fmax_search} Hz) must be below Nyquist ({sr / 2.0} Hz)")

    min_lag = max(1, int(np.floor(sr / cfg.fmax_search)))
    max_lag = int(np.ceil(sr / cfg.fmin_search))
    window = spectral.frame_length - max_lag
    if window < 1:
        raise ValueError(
            f"frame_length {spectral.frame_length} cannot hold lags up to {max_lag} samples "
            f"(fmin_search {cfg.fmin_search} Hz); raise the frame length or fmin_search")

    samples = audio.samples
    if len(samples) < 2.0 * sr / cfg.fmin_search:
        raise SignalTooShortError(
            f"Audio of {len(samples)} samples is shorter than two pitch periods at {cfg.fmin_search} Hz")
    if frame_count(len(samples), spectral.frame_length, spectral.hop_length) == 0:
        samples = np.pad(samples, (0, spectral.frame_length - len(samples)))

    frames = frame_signal(samples, spectral.frame_length, spectral.hop_length)
    cmnd = _cumulative_mean_normalized(_difference_function(frames, window, max_lag))

    f0 = np.zeros(frames.shape[0])
    search = cmnd[:, min_lag:max_lag + 1]
    below = search < cfg.threshold
    for i in np.flatnonzero(below.any(axis=1)):
        tau = min_lag + int(np.argmax(below[i]))
        while tau < max_lag and cmnd[i, tau + 1] < cmnd[i, tau]:
            tau += 1
        offset = 0.0
        if 0 < tau < max_lag:
            offset = _parabolic_offset(cmnd[i, tau - 1], cmnd[i, tau], cmnd[i, tau + 1])
        estimate = sr / (tau + offset)
        # out-of-range estimates are clamped to unvoiced
        if cfg.fmin_search <= estimate <= cfg.fmax_search:
            f0[i] = estimate

    return PitchTrack(spectral.hop_length / sr, f0, f0 > 0)


def write_pitch_csv(track, path):
    """CSV with columns frame,time_s,f0_hz,voiced"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["frame", "time_s", "f0_hz", "voiced"])
        for i, (t, hz, v) in enumerate(zip(track.times, track.f0, track.voiced)):
            writer.writerow([i, f"{t:.6f}", f"{hz:.4f}", int(v)])


def read_pitch_csv(path):
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Pitch CSV not found: {path}")
    with open(path, "r", encoding="utf-8", newline="") as f:
        rows = list(csv.DictReader(f))
    if len(rows) < 2:
        raise ValueError(f"{path}: need at least two frames to recover the hop")
    times = np.array([float(r["time_s"]) for r in rows])
    f0 = np.array([float(r["f0_hz"]) for r in rows])
    voiced = np.array([r["voiced"].strip() == "1" for r in rows])
    return PitchTrack(float(times[1] - times[0]), np.where(voiced, f0, 0.0), voiced)
