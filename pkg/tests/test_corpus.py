"""Corpus preprocessing, tokenization, loading, and co-occurrence counts."""

import json

import numpy as np
import pytest

from emograph.corpus import (
    LabelSpace,
    Vocabulary,
    count_cooccurrence,
    load_corpus,
    preprocess,
    tokenize,
)
from emograph.errors import DataError
from emograph.numcore import Stream


class TestPreprocess:
    def test_reference_tweet(self):
        raw = (
            "@JessicaZ00 @ZRlondon ditto!! Such an amazing atmosphere! "
            "We have 10 people here. #LondonEvents #cheer"
        )
        expected = (
            "<user> <user> ditto!! such an amazing atmosphere! "
            "we have <num> people here. londonevents cheer"
        )
        assert preprocess(raw) == expected

    def test_empty(self):
        assert preprocess("") == ""

    def test_url(self):
        assert preprocess("Visit https://a.b/c NOW") == "visit <url> now"

    def test_www_url_and_case(self):
        assert preprocess("see WWW.Example.COM ok") == "see <url> ok"

    def test_numbers(self):
        assert preprocess("pay 1,000 or 3.5 now") == "pay <num> or <num> now"
        assert preprocess("route66 stays route66") == "route66 stays route66"

    def test_idempotent_on_tricky_strings(self):
        cases = [
            "@a@b #x#y 10.5 www.z.org",
            "i <3 u, see http://q.r",
            "100% of #2020 was @weird",
            "",
            "plain words only",
        ]
        for text in cases:
            once = preprocess(text)
            assert preprocess(once) == once

    def test_idempotent_on_random_ascii(self):
        alphabet = "ab @#.19!www:/h"
        stream = Stream(2024)
        for _ in range(200):
            n = int(stream.uniform() * 40)
            draws = stream.uniforms(max(n, 1))
            text = "".join(alphabet[int(d * len(alphabet))] for d in draws[:n])
            once = preprocess(text)
            assert preprocess(once) == once


class TestTokenize:
    def test_sentence(self):
        assert tokenize("we have <num> people here.") == [
            "we",
            "have",
            "<num>",
            "people",
            "here",
            ".",
        ]

    def test_reserved_intact(self):
        assert tokenize("<url>") == ["<url>"]

    def test_repeated_punct(self):
        assert tokenize("a!!") == ["a", "!", "!"]

    def test_leading_punct_and_inner_apostrophe(self):
        assert tokenize('"don\'t stop"') == ['"', "don't", 'stop', '"']


class TestVocabulary:
    def test_reserved_ids(self):
        v = Vocabulary.build([["hello", "world", "hello"]], min_freq=2)
        assert v.tokens[:5] == ["<pad>", "<unk>", "<url>", "<user>", "<num>"]
        assert v.id_of("hello") == 5
        assert v.id_of("world") == 1  # below min_freq -> <unk>

    def test_round_trip(self):
        v = Vocabulary.build([["a", "a", "b", "b", "c", "c"]], min_freq=2)
        for i, tok in enumerate(v.tokens):
            assert v.id_of(tok) == i
            assert v.token_of(i) == tok

    def test_json_round_trip(self, tmp_path):
        v = Vocabulary.build([["x", "x"]], min_freq=1)
        p = tmp_path / "vocab.json"
        v.save(p)
        assert Vocabulary.load(p).tokens == v.tokens

    def test_rejects_bad_reserved_prefix(self):
        with pytest.raises(DataError):
            Vocabulary(["<pad>", "<unk>", "oops"])


def _write_jsonl(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")


class TestLoadCorpus:
    def test_two_line_file(self, tmp_path):
        p = tmp_path / "c.jsonl"
        _write_jsonl(
            p,
            [
                {"text": "happy day", "labels": ["joy"]},
                {"text": "happy trusting day", "labels": ["joy", "trust"]},
            ],
        )
        examples, space, vocab = load_corpus(p, min_freq=1)
        assert space.names == ["joy", "trust"]
        m = count_cooccurrence(examples, 2).counts
        np.testing.assert_array_equal(m, [[2, 1], [1, 1]])

    def test_empty_file_errors(self, tmp_path):
        p = tmp_path / "empty.jsonl"
        p.write_text("")
        with pytest.raises(DataError, match="no examples"):
            load_corpus(p)

    def test_empty_label_list_accepted(self, tmp_path):
        p = tmp_path / "c.jsonl"
        _write_jsonl(
            p,
            [
                {"text": "neutral words", "labels": []},
                {"text": "joyful", "labels": ["joy"]},
                {"text": "sad", "labels": ["sadness"]},
            ],
        )
        examples, space, _ = load_corpus(p, min_freq=1)
        m = count_cooccurrence(examples, len(space)).counts
        np.testing.assert_array_equal(m, [[1, 0], [0, 1]])

    def test_malformed_line_reports_number(self, tmp_path):
        p = tmp_path / "bad.jsonl"
        p.write_text('{"text": "ok", "labels": ["a"]}\n{broken\n')
        with pytest.raises(DataError, match=":2:"):
            load_corpus(p)

    def test_unknown_label_named(self, tmp_path):
        p = tmp_path / "c.jsonl"
        _write_jsonl(p, [{"text": "hey", "labels": ["mystery"]}])
        with pytest.raises(DataError, match="mystery"):
            load_corpus(p, label_space=LabelSpace(["joy", "trust"]))

    def test_fixed_label_space_and_shared_vocab(self, tmp_path):
        train = tmp_path / "train.jsonl"
        _write_jsonl(
            train,
            [
                {"text": "aaa bbb aaa bbb", "labels": ["x"]},
                {"text": "aaa bbb", "labels": ["y"]},
            ],
        )
        test = tmp_path / "test.jsonl"
        _write_jsonl(test, [{"text": "aaa zzz", "labels": ["y"]}])
        _, space, vocab = load_corpus(train)
        examples, _, _ = load_corpus(test, label_space=space, vocab=vocab)
        assert examples[0].tokens == [vocab.id_of("aaa"), 1]  # zzz -> <unk>


class TestCooccurrence:
    def test_hand_count(self):
        from emograph.corpus import Example

        exs = [
            Example("", [0], np.array([1, 1, 0], dtype=np.uint8)),
            Example("", [0], np.array([1, 0, 0], dtype=np.uint8)),
        ]
        m = count_cooccurrence(exs, 3).counts
        np.testing.assert_array_equal(m, [[2, 1, 0], [1, 1, 0], [0, 0, 0]])

    def test_no_examples(self):
        np.testing.assert_array_equal(count_cooccurrence([], 2).counts, np.zeros((2, 2)))

    def test_reference_marginals(self):
        """425 anticipation, 1143 optimism, 197 together."""
        from emograph.corpus import Example

        rows = (
            [np.array([1, 1], dtype=np.uint8)] * 197
            + [np.array([1, 0], dtype=np.uint8)] * (425 - 197)
            + [np.array([0, 1], dtype=np.uint8)] * (1143 - 197)
        )
        exs = [Example("", [0], y) for y in rows]
        m = count_cooccurrence(exs, 2).counts
        assert m[0, 0] == 425 and m[1, 1] == 1143
        assert m[0, 1] == 197 and m[1, 0] == 197

    def test_symmetry_diag_dominance_shuffle_invariance(self):
        from emograph.corpus import Example

        stream = Stream(77)
        rows = [
            (stream.uniforms(6) < 0.4).astype(np.uint8) for _ in range(120)
        ]
        exs = [Example("", [0], y) for y in rows]
        m = count_cooccurrence(exs, 6).counts
        np.testing.assert_array_equal(m, m.T)
        off = m - np.diag(np.diag(m))
        assert (np.diag(m) >= off.max(axis=1)).all()
        shuffled = list(exs)
        stream.shuffle(shuffled)
        np.testing.assert_array_equal(count_cooccurrence(shuffled, 6).counts, m)
