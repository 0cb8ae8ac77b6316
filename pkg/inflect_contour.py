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
Inflect Contour

Parametric F0 contours conditioned on sentence type, harmonic tone rendering
of a contour, and a toy-grammar synthetic corpus for end-to-end runs.
"""
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from tqdm import tqdm

from inflect_corpus import SentenceType, Utterance, write_manifest
from inflect_pitch import PitchTrack
from inflect_signal import DEFAULT_SAMPLE_RATE, AudioBuffer, SpectralConfig, write_audio

logger = logging.getLogger(__name__)

DEFAULT_HOP_SECONDS = SpectralConfig().hop_length / DEFAULT_SAMPLE_RATE
DEFAULT_HARMONICS = 3
TONE_PEAK = 0.5
SECONDS_PER_CHAR = 0.15
SECONDS_PADDING = 0.3

# toy grammar; the normal-question form uses the A-not-A particle
SUBJECTS = ["他", "她", "我", "你", "佢", "我哋", "老师", "妈妈"]
VERBS = ["去", "食", "睇", "买", "要", "讲"]
OBJECTS = ["学校", "饭", "书", "电影", "衫", "广东话", "嘢", "生果"]
QUESTION_NEGATOR = "不"


@dataclass(frozen=True)
class ContourSpec:
    base_f0: float = 200.0
    declination: float = -20.0
    duration: float = 1.0
    rise_onset_fraction: float = 0.8
    rise_ratio: float = 1.3
    jitter_std: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.base_f0 <= 0:
            raise ValueError(f"Invalid base_f0: {self.base_f0} Hz (must be positive)")
        if self.duration <= 0:
            raise ValueError(f"Invalid duration: {self.duration} s (must be positive)")
        if not 0.0 < self.rise_onset_fraction < 1.0:
            raise ValueError(f"Invalid rise_onset_fraction: {self.rise_onset_fraction} (must be in (0, 1))")
        if self.rise_ratio < 1.0:
            raise ValueError(f"Invalid rise_ratio: {self.rise_ratio} (must be >= 1)")
        if self.jitter_std < 0:
            raise ValueError(f"Invalid jitter_std: {self.jitter_std} Hz (must be >= 0)")


def boundary_tone(n_frames, rise_onset_fraction, rise_ratio):
    """
    Multiplier per frame: 1 before the onset, a linear ramp to rise_ratio over
    the first half of the rise region, then held at rise_ratio
    """
    x = np.arange(n_frames) / n_frames
    span = (1.0 - rise_onset_fraction) / 2.0
    progress = np.clip((x - rise_onset_fraction) / span, 0.0, 1.0)
    return 1.0 + (rise_ratio - 1.0) * progress


def render_contour(spec, t, hop_seconds=DEFAULT_HOP_SECONDS):
    """
    F0 contour for a sentence type; every frame voiced

    Declination line base_f0 + declination * time; declarative questions get
    the multiplicative boundary tone, statements and normal questions share
    the non-rising shape. Optional seeded Gaussian jitter.
    """
    t = SentenceType(t)
    n_frames = max(1, int(round(spec.duration / hop_seconds)))
    times = np.arange(n_frames) * hop_seconds
    f0 = spec.base_f0 + spec.declination * times

    if t == SentenceType.DECLARATIVE_QUESTION:
        f0 = f0 * boundary_tone(n_frames, spec.rise_onset_fraction, spec.rise_ratio)
    if spec.jitter_std > 0:
        f0 = f0 + np.random.default_rng(spec.seed).normal(0.0, spec.jitter_std, size=n_frames)

    if np.any(f0 <= 0):
        raise ValueError(f"Contour falls to {f0.min():.1f} Hz; reduce the declination or duration")
    return PitchTrack(hop_seconds, f0, np.ones(n_frames, dtype=bool))


def tone_from_contour(track, sample_rate=DEFAULT_SAMPLE_RATE, harmonics=DEFAULT_HARMONICS,
                      frame_length=SpectralConfig().frame_length):
    """
    Phase-continuous harmonic tone following a pitch track

    Frame i's value sits at the centre of analysis frame i
    (i * hop + frame_length / 2), so extract_f0 on the result lands on the
    same frame grid. Unvoiced frames are silent; a harmonic whose frequency
    would reach Nyquist anywhere is dropped.
    """
    n_frames = len(track)
    if n_frames == 0:
        raise ValueError("Cannot render an empty pitch track")
    hop = int(round(track.hop_seconds * sample_rate))
    n_samples = (n_frames - 1) * hop + frame_length
    centers = np.arange(n_frames) * hop + frame_length / 2.0
    positions = np.arange(n_samples)

    voiced_f0 = track.f0[track.voiced]
    if voiced_f0.size == 0:
        return AudioBuffer(np.zeros(n_samples), sample_rate)

    # unvoiced gaps are bridged for phase continuity, then gated
    filled = np.interp(np.arange(n_frames), np.flatnonzero(track.voiced), voiced_f0)
    f0 = np.interp(positions, centers, filled)
    gate = track.voiced[np.clip(np.round((positions - frame_length / 2.0) / hop).astype(int), 0, n_frames - 1)]

    nyquist = sample_rate / 2.0
    usable = [k for k in range(1, harmonics + 1) if k * voiced_f0.max() < nyquist]
    dropped = harmonics - len(usable)
    if dropped:
        logger.warning("tone_from_contour dropped %d harmonic(s) above Nyquist", dropped)
    if not usable:
        return AudioBuffer(np.zeros(n_samples), sample_rate)

    phase = 2.0 * np.pi * np.cumsum(f0) / sample_rate
    tone = sum(np.sin(k * phase) / k for k in usable)
    tone *= TONE_PEAK / sum(1.0 / k for k in usable)
    return AudioBuffer(np.where(gate, tone, 0.0), sample_rate)


def duration_for_text(text):
    return SECONDS_PER_CHAR * len(text) + SECONDS_PADDING


def toy_sentence_triples(n, seed):
    """n (statement, normal question, declarative question) text triples"""
    rng = np.random.default_rng(seed)
    triples = []
    for _ in range(n):
        subj = SUBJECTS[rng.integers(len(SUBJECTS))]
        verb = VERBS[rng.integers(len(VERBS))]
        obj = OBJECTS[rng.integers(len(OBJECTS))]
        core = subj + verb + obj
        triples.append((core + "。", subj + verb + QUESTION_NEGATOR + verb + obj + "？", core + "？"))
    return triples


def make_synthetic_dataset(n_per_class, seed=0, jitter_std=0.0, render_as=None,
                           sample_rate=DEFAULT_SAMPLE_RATE, harmonics=DEFAULT_HARMONICS,
                           spectral=None, progress=False):
    """
    Toy-grammar corpus with rendered audio

    Args:
        n_per_class: utterances per sentence type
        seed: grammar and prosody seed
        jitter_std: Gaussian F0 jitter (Hz)
        render_as: optional SentenceType forcing every contour shape while the
            labels stay true (the no-conditioning baseline)

    Returns:
        list of (Utterance, AudioBuffer), ids sta-0000 / que-0000 / decq-0000
    """
    if n_per_class <= 0:
        raise ValueError(f"n_per_class must be positive, got {n_per_class}")
    spectral = spectral or SpectralConfig()
    hop_seconds = spectral.hop_length / sample_rate
    rng = np.random.default_rng(seed + 1)

    items = []
    triples = toy_sentence_triples(n_per_class, seed)
    for k, texts in enumerate(tqdm(triples, desc="synthesizing", unit="triple", disable=not progress)):
        base = float(rng.uniform(170.0, 250.0))
        decl = float(rng.uniform(-25.0, -5.0))
        for t, text in zip(SentenceType, texts):
            utt_id = f"{t.tag}-{k:04d}"
            spec = ContourSpec(base_f0=base, declination=decl, duration=duration_for_text(text),
                               jitter_std=jitter_std, seed=seed * 100003 + k * 3 + int(t))
            track = render_contour(spec, render_as if render_as is not None else t, hop_seconds)
            audio = tone_from_contour(track, sample_rate, harmonics, spectral.frame_length)
            items.append((Utterance(utt_id, text, t, f"wav/{utt_id}.wav"), audio))
    return items


def write_synthetic_corpus(out_dir, items):
    """manifest.tsv plus wav/<id>.wav under out_dir; returns the manifest path"""
    out_dir = Path(out_dir)
    for utt, audio in items:
        write_audio(out_dir / utt.audio_path, audio)
    manifest = out_dir / "manifest.tsv"
    write_manifest([u for u, _ in items], manifest)
    return manifest
