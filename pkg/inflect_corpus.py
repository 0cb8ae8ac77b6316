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
Inflect Corpus

Labeled text(+audio) manifests: parsing, writing, stratified train/test
splitting and the end-punctuation augmentation used to train the sentence
type classifier.
"""
import logging
from collections import Counter
from dataclasses import dataclass, replace
from decimal import ROUND_HALF_UP, Decimal
from enum import IntEnum
from pathlib import Path
from typing import List, Optional

import numpy as np

logger = logging.getLogger(__name__)

# trailing marks removed by strip_end_punctuation, full-width and ASCII
END_PUNCTUATION = "。，？！.,?!"
NOPUNCT_SUFFIX = "-nopunct"


class ManifestError(ValueError):
    """Malformed manifest record; carries the 1-based line number"""

    def __init__(self, path, line_no, message):
        self.path = str(path)
        self.line_no = line_no
        super().__init__(f"{path}:{line_no}: {message}")


class SentenceType(IntEnum):
    """The three sentence categories, with stable integer codes"""

    STATEMENT = 0
    NORMAL_QUESTION = 1
    DECLARATIVE_QUESTION = 2

    @property
    def tag(self):
        """Manifest label string (sta/que/decq)"""
        return _TAGS[self]

    @property
    def short(self):
        """Display name used in report tables (Sta/Que/DecQue)"""
        return _SHORT[self]

    @classmethod
    def from_tag(cls, tag):
        try:
            return _FROM_TAG[tag.strip().lower()]
        except KeyError:
            raise ValueError(f"Unknown sentence label '{tag}' (expected one of sta, que, decq)") from None

    @classmethod
    def from_code(cls, code):
        if int(code) not in (0, 1, 2):
            raise ValueError(f"Unknown sentence type code {code} (expected 0, 1 or 2)")
        return cls(int(code))


_TAGS = {SentenceType.STATEMENT: "sta",
         SentenceType.NORMAL_QUESTION: "que",
         SentenceType.DECLARATIVE_QUESTION: "decq"}
_SHORT = {SentenceType.STATEMENT: "Sta",
          SentenceType.NORMAL_QUESTION: "Que",
          SentenceType.DECLARATIVE_QUESTION: "DecQue"}
_FROM_TAG = {tag: t for t, tag in _TAGS.items()}


@dataclass(frozen=True)
class Utterance:
    """One corpus entry; punctuation is kept as part of the text"""

    id: str
    text: str
    label: SentenceType
    audio_path: Optional[str] = None

    def __post_init__(self):
        if not self.id:
            raise ValueError("Utterance id must be nonempty")
        if self.id != self.id.strip():
            raise ValueError(f"Utterance id '{self.id}' has leading or trailing whitespace")
        if not self.text:
            raise ValueError(f"Utterance '{self.id}' has empty text")
        if self.audio_path == "":
            object.__setattr__(self, "audio_path", None)
        elif self.audio_path is not None and self.audio_path != self.audio_path.strip():
            raise ValueError(f"Utterance '{self.id}' audio path has leading or trailing whitespace")


@dataclass(frozen=True)
class CorpusSplit:
    train: List[Utterance]
    test: List[Utterance]


def parse_manifest(path):
    """
    Read a TSV manifest: id<TAB>text<TAB>label[<TAB>audio_path]

    Args:
        path: Manifest file (UTF-8, LF line endings, no header)

    Returns:
        List of Utterance in file order

    Raises:
        FileNotFoundError: path does not exist
        ManifestError: malformed record, duplicate id or unknown label
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Manifest not found: {path}")

    utterances = []
    seen = set()
    with open(path, "r", encoding="utf-8", newline="") as f:
        for line_no, raw in enumerate(f, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line.strip():
                continue

            fields = line.split("\t")
            if len(fields) not in (3, 4):
                raise ManifestError(path, line_no, f"expected 3 or 4 tab-separated fields, got {len(fields)}")

            utt_id, text, tag = fields[0].strip(), fields[1], fields[2]
            audio = fields[3].strip() if len(fields) == 4 and fields[3].strip() else None
            if not utt_id:
                raise ManifestError(path, line_no, "empty id")
            if not text:
                raise ManifestError(path, line_no, f"empty text for id '{utt_id}'")
            if utt_id in seen:
                raise ManifestError(path, line_no, f"duplicate id '{utt_id}'")
            try:
                label = SentenceType.from_tag(tag)
            except ValueError as e:
                raise ManifestError(path, line_no, str(e)) from None

            seen.add(utt_id)
            utterances.append(Utterance(utt_id, text, label, audio))

    return utterances


def write_manifest(utts, path):
    """Write utterances in the format parse_manifest reads"""
    path = Path(path)
    lines = []
    for u in utts:
        for field in (u.id, u.text, u.audio_path or ""):
            if any(c in field for c in "\t\n\r"):
                raise ValueError(f"Utterance '{u.id}' contains a tab or line break and cannot be written as TSV")
        row = [u.id, u.text, u.label.tag]
        if u.audio_path:
            row.append(u.audio_path)
        lines.append("\t".join(row) + "\n")

    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.writelines(lines)


def _round_half_up(x):
    return int(Decimal(str(x)).quantize(Decimal(1), rounding=ROUND_HALF_UP))


def stratified_split(utts, test_fraction, seed):
    """
    Split per sentence type so that every class keeps the same proportion
    in the test side.

    Per class, round_half_up(test_fraction * class_count) utterances are drawn
    without replacement into test. Both sides keep input order.

    Raises:
        ValueError: test_fraction outside (0, 1), a class with no utterances,
            or a class whose train side would become empty
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must be in (0, 1), got {test_fraction}")

    by_class = {t: [] for t in SentenceType}
    for i, u in enumerate(utts):
        by_class[u.label].append(i)

    rng = np.random.default_rng(seed)
    test_idx = set()
    for t in SentenceType:
        members = by_class[t]
        if not members:
            raise ValueError(f"Class {t.short} has no utterances; stratified split needs all three classes")

        n_test = _round_half_up(Decimal(str(test_fraction)) * len(members))
        if n_test >= len(members):
            raise ValueError(
                f"test_fraction {test_fraction} puts all {len(members)} {t.short} utterances in test, "
                f"leaving none for training")
        chosen = rng.choice(len(members), size=n_test, replace=False)
        test_idx.update(members[k] for k in chosen)

    train = [u for i, u in enumerate(utts) if i not in test_idx]
    test = [u for i, u in enumerate(utts) if i in test_idx]
    return CorpusSplit(train=train, test=test)


def _strip_text(text):
    return text.rstrip().rstrip(END_PUNCTUATION + " \t").rstrip()


def strip_end_punctuation(utts):
    """
    Augmentation pass: remove trailing end punctuation from every utterance.

    Declarative questions lose their only written cue and are relabeled as
    statements; normal questions and statements keep their labels. Returns new
    utterances with ids suffixed '-nopunct'; utterances whose text becomes
    empty are dropped.
    """
    out = []
    dropped = 0
    for u in utts:
        text = _strip_text(u.text)
        if not text:
            dropped += 1
            continue
        label = SentenceType.STATEMENT if u.label == SentenceType.DECLARATIVE_QUESTION else u.label
        out.append(replace(u, id=u.id + NOPUNCT_SUFFIX, text=text, label=label))

    if dropped:
        logger.warning("strip_end_punctuation dropped %d utterance(s) left empty after stripping", dropped)
    return out


def filter_utterances(utts, keep):
    """Hook for corpus exclusion rules (e.g. code-mixed samples)"""
    utts = list(utts)
    kept = [u for u in utts if keep(u)]
    excluded = len(utts) - len(kept)
    if excluded:
        logger.info("filter_utterances excluded %d utterance(s)", excluded)
    return kept


def corpus_stats(utts):
    """Per-class counts and ratios, keyed by display name"""
    counts = Counter(u.label for u in utts)
    total = sum(counts.values())
    return {
        "total": total,
        "counts": {t.short: counts.get(t, 0) for t in SentenceType},
        "ratios": {t.short: (counts.get(t, 0) / total if total else 0.0) for t in SentenceType},
    }
