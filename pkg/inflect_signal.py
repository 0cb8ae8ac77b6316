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
Inflect Signal

Audio loading and the spectral front-end: framing, Hann-windowed power
spectrum, HTK mel filterbank, log compression and mel-cepstra.
"""
import json
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.fft import dct
from scipy.io import wavfile
from scipy.signal import get_window

DEFAULT_SAMPLE_RATE = 22050
LOG_FLOOR = 1e-10
PCM16_SCALE = 32768.0


class AudioFormatError(ValueError):
    """WAV file is not mono 16-bit PCM, or is truncated"""


class SignalTooShortError(ValueError):
    """Signal does not cover one analysis frame"""


@dataclass
class AudioBuffer:
    """Mono samples in [-1, 1] at sample_rate Hz"""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1:
            raise ValueError(f"AudioBuffer expects 1-D samples, got shape {self.samples.shape}")
        if self.sample_rate <= 0:
            raise ValueError(f"Invalid sample rate: {self.sample_rate} Hz (must be positive)")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("AudioBuffer samples must be finite")

    @property
    def duration(self):
        return len(self.samples) / self.sample_rate


@dataclass(frozen=True)
class SpectralConfig:
    """
    Front-end settings shared by the mel, cepstra and pitch paths

    fmax=None means the Nyquist frequency of the analysed audio.
    """

    frame_length: int = 1024
    hop_length: int = 256
    fft_size: int = 1024
    mel_bands: int = 80
    fmin: float = 0.0
    fmax: Optional[float] = None
    cepstral_order: int = 13

    def __post_init__(self):
        if not 0 < self.hop_length <= self.frame_length <= self.fft_size:
            raise ValueError(
                f"Invalid framing: need 0 < hop ({self.hop_length}) <= frame ({self.frame_length}) "
                f"<= fft ({self.fft_size})")
        if self.mel_bands <= 0:
            raise ValueError(f"Invalid mel_bands: {self.mel_bands} (must be positive)")
        if self.fmin < 0:
            raise ValueError(f"Invalid fmin: {self.fmin} Hz (must be >= 0)")
        if self.fmax is not None and self.fmax <= self.fmin:
            raise ValueError(f"Invalid band: fmax ({self.fmax}) must be greater than fmin ({self.fmin})")
        # c_0 is kept aside, so c_1..c_K needs K < mel_bands
        if not 0 < self.cepstral_order < self.mel_bands:
            raise ValueError(
                f"Invalid cepstral_order: {self.cepstral_order} (need 0 < order < mel_bands={self.mel_bands})")

    def band_edges(self, sample_rate):
        """(fmin, fmax) resolved against a sample rate"""
        nyquist = sample_rate / 2.0
        fmax = nyquist if self.fmax is None else self.fmax
        if fmax > nyquist:
            raise ValueError(f"fmax ({fmax} Hz) exceeds the Nyquist frequency ({nyquist} Hz)")
        if self.fmin >= fmax:
            raise ValueError(f"fmin ({self.fmin} Hz) must be below fmax ({fmax} Hz)")
        return self.fmin, fmax


@dataclass
class MelCepstra:
    """c_1..c_K per frame (frames x K); c_0 stored separately"""

    coefficients: np.ndarray
    c0: np.ndarray

    @property
    def frames(self):
        return self.coefficients.shape[0]

    @property
    def order(self):
        return self.coefficients.shape[1]


def _riff_length(path):
    """Total length the RIFF header declares, or None if there is no RIFF header"""
    with open(path, "rb") as f:
        head = f.read(8)
    if len(head) < 8 or head[:4] != b"RIFF":
        return None
    return int.from_bytes(head[4:8], "little") + 8


def load_audio(path):
    """
    Load a mono 16-bit PCM WAV file

    Returns:
        AudioBuffer with samples scaled by 1/32768

    Raises:
        FileNotFoundError: path does not exist
        AudioFormatError: not RIFF/PCM, not mono, not 16-bit, or truncated
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Audio file not found: {path}")

    declared = _riff_length(path)
    if declared is not None and path.stat().st_size < declared:
        raise AudioFormatError(
            f"{path}: truncated file, header declares {declared} bytes but only {path.stat().st_size} are present")

    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", wavfile.WavFileWarning)
            sample_rate, data = wavfile.read(str(path))
    except (ValueError, EOFError) as e:
        raise AudioFormatError(f"{path}: unsupported or corrupt WAV ({e})") from None

    if data.ndim != 1:
        raise AudioFormatError(f"{path}: mono required, file has {data.shape[1]} channels")
    if data.dtype != np.int16:
        raise AudioFormatError(f"{path}: 16-bit PCM required, file has {data.dtype} samples")

    return AudioBuffer(data.astype(np.float64) / PCM16_SCALE, int(sample_rate))


def write_audio(path, audio):
    """Write an AudioBuffer as mono 16-bit PCM"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pcm = np.clip(np.round(audio.samples * PCM16_SCALE), -32768, 32767).astype(np.int16)
    wavfile.write(str(path), int(audio.sample_rate), pcm)


def frame_count(n_samples, frame_length, hop_length):
    """Number of full frames: floor((N - frame) / hop) + 1, or 0 when N < frame"""
    if n_samples < frame_length:
        return 0
    return (n_samples - frame_length) // hop_length + 1


def frame_signal(samples, frame_length, hop_length):
    """Frames x frame_length view; frame i starts at sample i * hop"""
    n = frame_count(len(samples), frame_length, hop_length)
    if n == 0:
        raise SignalTooShortError(
            f"Signal of {len(samples)} samples is shorter than one frame ({frame_length} samples)")
    return sliding_window_view(samples, frame_length)[::hop_length][:n]


def hz_to_mel(f):
    """HTK mel scale"""
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_center_frequencies(cfg, sample_rate):
    """Centre frequency (Hz) of each triangular band"""
    fmin, fmax = cfg.band_edges(sample_rate)
    mel_points = np.linspace(hz_to_mel(fmin), hz_to_mel(fmax), cfg.mel_bands + 2)
    return mel_to_hz(mel_points[1:-1])


def mel_filterbank(cfg, sample_rate):
    """
    Triangular filters on the HTK mel scale, unit peak

    Returns:
        mel_bands x (fft_size // 2 + 1) weight matrix
    """
    fmin, fmax = cfg.band_edges(sample_rate)
    mel_points = np.linspace(hz_to_mel(fmin), hz_to_mel(fmax), cfg.mel_bands + 2)
    hz_points = mel_to_hz(mel_points)
    bin_freqs = np.arange(cfg.fft_size // 2 + 1) * sample_rate / cfg.fft_size

    lower = hz_points[:-2, None]
    center = hz_points[1:-1, None]
    upper = hz_points[2:, None]
    rising = (bin_freqs[None, :] - lower) / (center - lower)
    falling = (upper - bin_freqs[None, :]) / (upper - center)
    return np.maximum(0.0, np.minimum(rising, falling))


def mel_spectrogram(audio, cfg=None):
    """
    Natural-log mel spectrogram

    Hann window, |FFT|^2, HTK mel filterbank, log with floor 1e-10.
    No pre-emphasis and no centring: frame i covers samples
    [i * hop, i * hop + frame_length).

    Returns:
        frames x mel_bands matrix
    """
    cfg = cfg or SpectralConfig()
    frames = frame_signal(audio.samples, cfg.frame_length, cfg.hop_length)
    window = get_window("hann", cfg.frame_length, fftbins=True)
    spectrum = np.fft.rfft(frames * window, n=cfg.fft_size, axis=1)
    power = spectrum.real ** 2 + spectrum.imag ** 2
    mel_power = power @ mel_filterbank(cfg, audio.sample_rate).T
    return np.log(np.maximum(mel_power, LOG_FLOOR))


def mel_cepstra(melspec, cepstral_order):
    """
    Orthonormal DCT-II of each log-mel row

    Returns:
        MelCepstra with c_1..c_K and c_0 kept aside
    """
    melspec = np.atleast_2d(np.asarray(melspec, dtype=np.float64))
    n_bands = melspec.shape[1]
    if not 0 < cepstral_order < n_bands:
        raise ValueError(f"cepstral_order {cepstral_order} needs 0 < order < mel_bands ({n_bands})")
    c = dct(melspec, type=2, norm="ortho", axis=1)
    return MelCepstra(coefficients=c[:, 1:cepstral_order + 1].copy(), c0=c[:, 0].copy())


def audio_cepstra(audio, cfg=None):
    cfg = cfg or SpectralConfig()
    return mel_cepstra(mel_spectrogram(audio, cfg), cfg.cepstral_order)


def dump_matrix(prefix, matrix):
    """
    Write <prefix>.bin (little-endian float64, row-major) and <prefix>.json
    with shape and dtype
    """
    prefix = Path(prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    data = np.ascontiguousarray(matrix, dtype="<f8")
    data.tofile(str(prefix.with_suffix(".bin")))
    with open(prefix.with_suffix(".json"), "w", encoding="utf-8") as f:
        json.dump({"shape": list(data.shape), "dtype": "float64", "byte_order": "little"}, f)


def load_matrix(prefix):
    prefix = Path(prefix)
    with open(prefix.with_suffix(".json"), "r", encoding="utf-8") as f:
        meta = json.load(f)
    data = np.fromfile(str(prefix.with_suffix(".bin")), dtype="<f8")
    return data.reshape(meta["shape"])
