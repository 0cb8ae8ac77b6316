"""
Unit tests for manifest parsing, stratified splits and punctuation augmentation
"""
import sys
import os
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from inflect_corpus import (ManifestError, SentenceType, Utterance, corpus_stats, filter_utterances,
                            parse_manifest, stratified_split, strip_end_punctuation, write_manifest)


# any printable-or-not character except surrogates and the TSV delimiters
FIELD_TEXT = st.text(st.characters(blacklist_categories=("Cs",), blacklist_characters="\t\n\r"),
                     min_size=1, max_size=8)


def make_utts(n_sta, n_que, n_decq):
    utts = []
    for label, n in ((SentenceType.STATEMENT, n_sta), (SentenceType.NORMAL_QUESTION, n_que),
                     (SentenceType.DECLARATIVE_QUESTION, n_decq)):
        utts += [Utterance(f"{label.tag}-{k:03d}", f"句子{k}", label) for k in range(n)]
    return utts


@pytest.mark.unit
class TestSentenceType:
    """Label codes and display names"""

    def test_codes_are_stable(self):
        """Codes 0/1/2 map to Statement / NormalQuestion / DeclarativeQuestion"""
        assert SentenceType.from_code(0) == SentenceType.STATEMENT
        assert SentenceType.from_code(1) == SentenceType.NORMAL_QUESTION
        assert SentenceType.from_code(2) == SentenceType.DECLARATIVE_QUESTION

    def test_tags_and_short_names(self):
        """Manifest tags and report names"""
        assert [t.tag for t in SentenceType] == ["sta", "que", "decq"]
        assert [t.short for t in SentenceType] == ["Sta", "Que", "DecQue"]
        assert SentenceType.from_tag(" DECQ ") == SentenceType.DECLARATIVE_QUESTION

    def test_unknown_tag_and_code(self):
        """Unknown values raise ValueError"""
        with pytest.raises(ValueError, match="xyz"):
            SentenceType.from_tag("xyz")
        with pytest.raises(ValueError):
            SentenceType.from_code(3)


@pytest.mark.unit
class TestParseManifest:
    """Reading TSV manifests"""

    def test_three_line_manifest(self, tmp_path):
        """Labels sta/que/decq decode to types 0/1/2"""
        path = tmp_path / "m.tsv"
        path.write_text("a\t他去学校。\tsta\nb\t他去不去学校？\tque\nc\t他去学校？\tdecq\twav/c.wav\n",
                        encoding="utf-8")

        utts = parse_manifest(path)

        assert [u.id for u in utts] == ["a", "b", "c"]
        assert [int(u.label) for u in utts] == [0, 1, 2]
        assert utts[0].text == "他去学校。"
        assert utts[0].audio_path is None
        assert utts[2].audio_path == "wav/c.wav"

    def test_empty_file(self, tmp_path):
        """Empty file gives an empty sequence"""
        path = tmp_path / "empty.tsv"
        path.write_text("", encoding="utf-8")
        assert parse_manifest(path) == []

    def test_unknown_label_names_line(self, tmp_path):
        """Unknown label is reported with its line number"""
        path = tmp_path / "bad.tsv"
        path.write_text("a\t他去学校。\tsta\nb\t他去学校？\txyz\n", encoding="utf-8")

        with pytest.raises(ManifestError, match=":2:") as excinfo:
            parse_manifest(path)
        assert excinfo.value.line_no == 2

    def test_duplicate_id(self, tmp_path):
        """Duplicate ids are rejected"""
        path = tmp_path / "dup.tsv"
        path.write_text("a\t一。\tsta\na\t二。\tsta\n", encoding="utf-8")
        with pytest.raises(ManifestError, match="duplicate"):
            parse_manifest(path)

    def test_wrong_field_count(self, tmp_path):
        """Two fields is a malformed record"""
        path = tmp_path / "short.tsv"
        path.write_text("a\tsta\n", encoding="utf-8")
        with pytest.raises(ManifestError):
            parse_manifest(path)

    def test_missing_file(self, tmp_path):
        """Missing manifest raises FileNotFoundError"""
        with pytest.raises(FileNotFoundError):
            parse_manifest(tmp_path / "nope.tsv")

    def test_write_then_parse(self, tmp_path):
        """write_manifest output parses back to the same utterances"""
        utts = make_utts(2, 1, 1) + [Utterance("x", "他去学校？", SentenceType.DECLARATIVE_QUESTION, "wav/x.wav")]
        path = tmp_path / "out" / "m.tsv"
        write_manifest(utts, path)
        assert parse_manifest(path) == utts

    def test_carriage_return_is_rejected(self, tmp_path):
        """Text with a carriage return cannot be written"""
        with pytest.raises(ValueError, match="line break"):
            write_manifest([Utterance("b", "他去学校。\r", SentenceType.STATEMENT)], tmp_path / "m.tsv")

    def test_padded_fields_are_rejected(self):
        """Ids and audio paths are stored exactly as the parser reads them"""
        with pytest.raises(ValueError, match="whitespace"):
            Utterance(" a", "他去学校。", SentenceType.STATEMENT)
        with pytest.raises(ValueError, match="whitespace"):
            Utterance("d", "他去学校。", SentenceType.STATEMENT, " wav/d.wav")
        assert Utterance("e", "他去学校。", SentenceType.STATEMENT, "").audio_path is None

    @settings(max_examples=50, deadline=None)
    @given(utts=st.lists(
        st.builds(Utterance,
                  id=FIELD_TEXT.filter(lambda s: s == s.strip()),
                  text=FIELD_TEXT,
                  label=st.sampled_from(list(SentenceType)),
                  audio_path=st.none() | FIELD_TEXT.filter(lambda s: s == s.strip())),
        max_size=6, unique_by=lambda u: u.id))
    def test_round_trip_property(self, tmp_path_factory, utts):
        """parse_manifest inverts write_manifest for any writable utterances"""
        path = tmp_path_factory.mktemp("manifest") / "m.tsv"
        write_manifest(utts, path)
        assert parse_manifest(path) == utts


@pytest.mark.unit
class TestStratifiedSplit:
    """Per-class proportional splitting"""

    def test_counts_per_class(self):
        """80/10/10 with fraction 0.2 puts 16/2/2 in test"""
        split = stratified_split(make_utts(80, 10, 10), 0.2, seed=0)

        assert corpus_stats(split.test)["counts"] == {"Sta": 16, "Que": 2, "DecQue": 2}
        assert corpus_stats(split.train)["counts"] == {"Sta": 64, "Que": 8, "DecQue": 8}

    def test_round_half_up(self):
        """0.25 of 2 is 0.5, rounded up to one test utterance"""
        split = stratified_split(make_utts(2, 2, 2), 0.25, seed=0)
        assert corpus_stats(split.test)["counts"] == {"Sta": 1, "Que": 1, "DecQue": 1}

    def test_disjoint_and_complete(self):
        """Train and test partition the input and keep its order"""
        utts = make_utts(30, 20, 10)
        split = stratified_split(utts, 0.3, seed=7)

        train_ids = [u.id for u in split.train]
        test_ids = [u.id for u in split.test]
        assert not set(train_ids) & set(test_ids)
        assert sorted(train_ids + test_ids) == sorted(u.id for u in utts)
        order = {u.id: i for i, u in enumerate(utts)}
        assert train_ids == sorted(train_ids, key=order.get)
        assert test_ids == sorted(test_ids, key=order.get)

    def test_deterministic(self):
        """Same inputs and seed give identical splits"""
        utts = make_utts(40, 10, 10)
        assert stratified_split(utts, 0.2, seed=3) == stratified_split(utts, 0.2, seed=3)

    def test_empty_train_side(self):
        """A class moved entirely to test is an error"""
        with pytest.raises(ValueError, match="none for training"):
            stratified_split(make_utts(10, 1, 10), 0.5, seed=0)

    def test_missing_class(self):
        """Every class needs at least one utterance"""
        with pytest.raises(ValueError, match="Que"):
            stratified_split(make_utts(10, 0, 10), 0.2, seed=0)


@pytest.mark.unit
class TestStripEndPunctuation:
    """Punctuation-stripping augmentation"""

    def test_declarative_question_becomes_statement(self):
        """Without its question mark a declarative question reads as a statement"""
        out = strip_end_punctuation([Utterance("d", "他去学校？", SentenceType.DECLARATIVE_QUESTION)])
        assert out[0].text == "他去学校"
        assert out[0].label == SentenceType.STATEMENT
        assert out[0].id == "d-nopunct"

    def test_statement_and_normal_question_keep_labels(self):
        """Statements and particle questions keep their type"""
        out = strip_end_punctuation([Utterance("s", "他去学校。", SentenceType.STATEMENT),
                                     Utterance("q", "他去不去学校？", SentenceType.NORMAL_QUESTION)])
        assert [(u.text, u.label) for u in out] == [("他去学校", SentenceType.STATEMENT),
                                                   ("他去不去学校", SentenceType.NORMAL_QUESTION)]

    def test_punctuation_only_is_dropped(self):
        """Text left empty after stripping is dropped"""
        assert strip_end_punctuation([Utterance("p", "？！", SentenceType.STATEMENT)]) == []

    @given(text=st.text(alphabet="他去学校不吗。，？！.,?! ", min_size=1, max_size=12),
           label=st.sampled_from(list(SentenceType)))
    def test_idempotent(self, text, label):
        """A second pass changes neither text nor label"""
        once = strip_end_punctuation([Utterance("u", text, label)])
        twice = strip_end_punctuation(once)
        assert [(u.text, u.label) for u in twice] == [(u.text, u.label) for u in once]


@pytest.mark.unit
class TestCorpusStats:
    """Class counts and ratios"""

    def test_empty(self):
        """Empty input gives zeros"""
        stats = corpus_stats([])
        assert stats["total"] == 0
        assert stats["counts"] == {"Sta": 0, "Que": 0, "DecQue": 0}
        assert stats["ratios"] == {"Sta": 0.0, "Que": 0.0, "DecQue": 0.0}

    def test_statements_only(self):
        """10 statements only"""
        stats = corpus_stats(make_utts(10, 0, 0))
        assert stats["counts"] == {"Sta": 10, "Que": 0, "DecQue": 0}
        assert stats["ratios"] == {"Sta": 1.0, "Que": 0.0, "DecQue": 0.0}

    def test_test_set_proportions(self):
        """A 448/50/50 test set"""
        stats = corpus_stats(make_utts(448, 50, 50))
        assert stats["counts"] == {"Sta": 448, "Que": 50, "DecQue": 50}
        assert stats["ratios"]["Sta"] == pytest.approx(448 / 548)

    def test_filter_hook(self):
        """filter_utterances keeps what the predicate accepts"""
        utts = make_utts(3, 0, 0) + [Utterance("mixed", "我哋去shopping。", SentenceType.STATEMENT)]
        kept = filter_utterances(utts, lambda u: re.search("[A-Za-z]", u.text) is None)
        assert [u.id for u in kept] == ["sta-000", "sta-001", "sta-002"]


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
