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
Inflect Metrics

Intonation metrics: F0 frame error (FFE) with its gross pitch error (GPE)
and voicing decision error (VDE) parts over DTW-mapped pitch tracks,
rising-intonation detection, perception accuracy, and batch evaluation.
"""
import csv
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
from tqdm import tqdm

from inflect_align import dtw, map_frames, map_track
from inflect_corpus import SentenceType
from inflect_pitch import PitchConfig, extract_f0
from inflect_signal import SpectralConfig, audio_cepstra, load_audio

logger = logging.getLogger(__name__)

DEFAULT_DEVIATION_TOL = 0.20
BATCH_COLUMNS = ["id", "class", "ffe", "gpe", "vde", "mean_mcd", "rising_ref", "rising_hyp"]


class UndecidableRiseError(ValueError):
    """Too few voiced frames in the tail or before it to judge a rise"""


@dataclass(frozen=True)
class RiseConfig:
    tail_fraction: float = 0.2
    rise_ratio_threshold: float = 1.10
    min_voiced_tail: int = 3

    def __post_init__(self):
        if not 0.0 < self.tail_fraction <= 0.5:
            raise ValueError(f"Invalid tail_fraction: {self.tail_fraction} (must be in (0, 0.5])")
        if self.rise_ratio_threshold <= 1.0:
            raise ValueError(f"Invalid rise_ratio_threshold: {self.rise_ratio_threshold} (must be > 1)")
        if self.min_voiced_tail < 1:
            raise ValueError(f"Invalid min_voiced_tail: {self.min_voiced_tail} (must be >= 1)")


@dataclass(frozen=True)
class RiseVerdict:
    is_rising: bool
    rise_ratio: float


@dataclass(frozen=True)
class FrameErrors:
    ffe: float
    gpe: float
    vde: float
    frames: int


@dataclass
class MetricReport:
    ffe: float
    gpe: float
    vde: float
    mean_mcd: float
    frames: int
    rising_ref: Optional[bool]
    rising_hyp: Optional[bool]
    rise_ratio_ref: Optional[float] = None
    rise_ratio_hyp: Optional[float] = None

    def __post_init__(self):
        if self.frames <= 0:
            raise ValueError(f"MetricReport needs frames > 0, got {self.frames}")
        for name in ("ffe", "gpe", "vde"):
            value = getattr(self, name)
            if not -1e-12 <= value <= 1.0 + 1e-12:
                raise ValueError(f"{name} = {value} is outside [0, 1]")
        if self.ffe < self.vde:
            raise ValueError(f"ffe ({self.ffe}) must not be below vde ({self.vde})")

    def to_dict(self):
        return asdict(self)


def ffe_report(ref, hyp_mapped, deviation_tol=DEFAULT_DEVIATION_TOL):
    """
    Frame error rates over N reference frames

    VDE = voicing disagreements / N
    GPE = frames voiced in both with |f0_hyp - f0_ref| / f0_ref > tol, / N
    FFE = VDE + GPE

    Args:
        ref: reference PitchTrack
        hyp_mapped: hypothesis PitchTrack already mapped onto the ref frames
        deviation_tol: relative pitch deviation counted as a gross error

    Returns:
        FrameErrors
    """
    n = len(ref)
    if len(hyp_mapped) != n:
        raise ValueError(f"Frame count mismatch: ref has {n} frames, hyp has {len(hyp_mapped)}")
    if n == 0:
        raise ValueError("ffe_report needs at least one frame")

    voicing_errors = int(np.count_nonzero(ref.voiced != hyp_mapped.voiced))
    both = ref.voiced & hyp_mapped.voiced
    deviation = np.zeros(n)
    deviation[both] = np.abs(hyp_mapped.f0[both] - ref.f0[both]) / ref.f0[both]
    pitch_errors = int(np.count_nonzero(both & (deviation > deviation_tol)))

    vde = voicing_errors / n
    gpe = pitch_errors / n
    return FrameErrors(ffe=vde + gpe, gpe=gpe, vde=vde, frames=n)


def detect_rising(track, cfg=None):
    """
    Compare the final tail of a contour against everything before it

    rise_ratio = median(voiced f0 in the last tail_fraction of frames)
                 / median(voiced f0 before the tail)

    Returns:
        RiseVerdict(is_rising = rise_ratio > threshold, rise_ratio)

    Raises:
        UndecidableRiseError: fewer than min_voiced_tail voiced frames in
            either region
    """
    cfg = cfg or RiseConfig()
    n = len(track)
    n_tail = max(1, int(np.floor(cfg.tail_fraction * n + 0.5)))
    split = n - n_tail

    tail = track.f0[split:][track.voiced[split:]]
    head = track.f0[:split][track.voiced[:split]]
    if len(tail) < cfg.min_voiced_tail or len(head) < cfg.min_voiced_tail:
        raise UndecidableRiseError(
            f"Undecidable: {len(tail)} voiced tail frames and {len(head)} voiced frames before the tail "
            f"(need {cfg.min_voiced_tail} each)")

    ratio = float(np.median(tail) / np.median(head))
    return RiseVerdict(is_rising=ratio > cfg.rise_ratio_threshold, rise_ratio=ratio)


def _try_rising(track, cfg):
    try:
        return detect_rising(track, cfg)
    except UndecidableRiseError as e:
        logger.debug("%s", e)
        return None


def verdict_to_type(is_rising):
    """Perceived class under the two-way protocol"""
    return SentenceType.DECLARATIVE_QUESTION if is_rising else SentenceType.STATEMENT


def perception_accuracy(verdicts):
    """
    Percentage of correctly perceived sentences, Statement vs DecQue

    Args:
        verdicts: sequence of (predicted, true) where predicted is a
            SentenceType or a rising flag (True reads as DecQue)

    Returns:
        dict with Sta, DecQue and All accuracies (None for an absent class)
        and the per-class counts
    """
    verdicts = list(verdicts)
    if not verdicts:
        raise ValueError("perception_accuracy needs at least one verdict")

    allowed = (SentenceType.STATEMENT, SentenceType.DECLARATIVE_QUESTION)
    correct = {t: 0 for t in allowed}
    total = {t: 0 for t in allowed}
    for predicted, true in verdicts:
        true = SentenceType(true)
        if true not in allowed:
            raise ValueError(f"Perception protocol only covers Sta and DecQue, got {true.short}")
        if not isinstance(predicted, SentenceType):
            predicted = verdict_to_type(bool(predicted))
        total[true] += 1
        correct[true] += int(predicted == true)

    result = {t.short: (correct[t] / total[t] if total[t] else None) for t in allowed}
    result["All"] = sum(correct.values()) / sum(total.values())
    result["counts"] = {t.short: total[t] for t in allowed}
    return result


def evaluate_pair(ref_audio, hyp_audio, spectral=None, pitch=None, rise=None,
                  deviation_tol=DEFAULT_DEVIATION_TOL, return_path=False):
    """
    Full objective comparison of one synthesized utterance against its reference

    cepstra -> dtw -> map_frames -> per-frame pitch comparison -> ffe_report;
    mean MCD from the alignment; rising verdicts on both tracks (None when
    undecidable).
    """
    spectral = spectral or SpectralConfig()
    pitch = pitch or PitchConfig()
    rise = rise or RiseConfig()

    path = dtw(audio_cepstra(ref_audio, spectral), audio_cepstra(hyp_audio, spectral))
    ref_track = extract_f0(ref_audio, pitch.search_range, pitch.threshold, spectral)
    hyp_track = extract_f0(hyp_audio, pitch.search_range, pitch.threshold, spectral)
    errors = ffe_report(ref_track, map_track(hyp_track, map_frames(path)), deviation_tol)

    verdict_ref = _try_rising(ref_track, rise)
    verdict_hyp = _try_rising(hyp_track, rise)
    report = MetricReport(
        ffe=errors.ffe, gpe=errors.gpe, vde=errors.vde,
        mean_mcd=path.mean_mcd, frames=errors.frames,
        rising_ref=None if verdict_ref is None else verdict_ref.is_rising,
        rising_hyp=None if verdict_hyp is None else verdict_hyp.is_rising,
        rise_ratio_ref=None if verdict_ref is None else verdict_ref.rise_ratio,
        rise_ratio_hyp=None if verdict_hyp is None else verdict_hyp.rise_ratio,
    )
    return (report, path) if return_path else report


@dataclass(frozen=True)
class BatchItem:
    utt_id: str
    label: SentenceType
    ref_path: str
    hyp_path: str


@dataclass
class BatchResult:
    rows: List[Dict]
    summary: Dict[str, Dict]
    paths: Dict[str, object]
    reports: Dict[str, MetricReport]


def _evaluate_item(item, spectral, pitch, rise, deviation_tol):
    report, path = evaluate_pair(load_audio(item.ref_path), load_audio(item.hyp_path),
                                 spectral, pitch, rise, deviation_tol, return_path=True)
    return item, report, path


def summarize_rows(rows):
    """Per-class and overall means, a fold over rows sorted by id"""
    rows = sorted(rows, key=lambda r: r["id"])
    groups = {t.short: [r for r in rows if r["class"] == t.short] for t in SentenceType}
    groups["All"] = rows
    summary = {}
    for name, members in groups.items():
        entry = {"count": len(members)}
        for metric in ("ffe", "gpe", "vde", "mean_mcd"):
            entry[metric] = float(np.mean([r[metric] for r in members])) if members else None
        summary[name] = entry
    return summary


def evaluate_batch(items, spectral=None, pitch=None, rise=None,
                   deviation_tol=DEFAULT_DEVIATION_TOL, workers=1, progress=True):
    """
    Evaluate many ref/hyp pairs; output is independent of worker count

    Returns:
        BatchResult with rows sorted by id, a Sta/Que/DecQue/All summary and
        the alignment path per id
    """
    items = sorted(items, key=lambda it: it.utt_id)
    results = []
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        futures = [pool.submit(_evaluate_item, it, spectral, pitch, rise, deviation_tol) for it in items]
        for future in tqdm(futures, desc="evaluating", unit="pair", disable=not progress):
            results.append(future.result())

    rows, paths, reports = [], {}, {}
    undecidable = 0
    for item, report, path in results:
        undecidable += int(report.rising_ref is None) + int(report.rising_hyp is None)
        rows.append({
            "id": item.utt_id,
            "class": item.label.short,
            "ffe": report.ffe,
            "gpe": report.gpe,
            "vde": report.vde,
            "mean_mcd": report.mean_mcd,
            "rising_ref": report.rising_ref,
            "rising_hyp": report.rising_hyp,
        })
        paths[item.utt_id] = path
        reports[item.utt_id] = report
    if undecidable:
        logger.warning("%d rising verdict(s) were undecidable (too few voiced frames)", undecidable)

    return BatchResult(rows=rows, summary=summarize_rows(rows), paths=paths, reports=reports)


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def write_batch_csv(rows, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(BATCH_COLUMNS)
        for row in sorted(rows, key=lambda r: r["id"]):
            writer.writerow([_cell(row[c]) for c in BATCH_COLUMNS])


def write_json(data, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, ensure_ascii=False, indent=2, sort_keys=True)
        f.write("\n")
