"""Corpus ingestion: tweet cleanup, tokenization, vocab, label counts.

Input format is JSONL, one object per line: {"text": str, "labels": [str, ...]}.
An optional label file (one name per line) fixes the canonical label order;
otherwise labels are ordered by first appearance.

Cleanup note: repeated punctuation is preserved as-is ("ditto!!" stays
"ditto!!"); the replacement rules below never collapse characters.
"""

import json
import re
from dataclasses import dataclass

import numpy as np

from .errors import DataError

PAD, UNK, URL, USER, NUM = "<pad>", "<unk>", "<url>", "<user>", "<num>"
RESERVED = (PAD, UNK, URL, USER, NUM)

_URL_RE = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
_USER_RE = re.compile(r"@\w+")
_NUM_RE = re.compile(r"(?<![a-z0-9])\d+(?:[.,]\d+)?(?![a-z0-9])")
_PUNCT = set(".,!?;:'\"()")


def preprocess(raw_text):
    """Normalize raw text: URLs, @-mentions and numbers become reserved
    tokens, everything is lowercased, and '#' characters are dropped.

    '#' removal runs before the substitutions (it can expose a mention,
    as in "@#tag"), and mentions are replaced before numbers so "@19"
    reads as a mention; this ordering makes the function idempotent.
    """
    text = raw_text.lower()
    text = text.replace("#", "")
    text = _URL_RE.sub(URL, text)
    text = _USER_RE.sub(USER, text)
    text = _NUM_RE.sub(NUM, text)
    return text


def tokenize(clean_text):
    """Whitespace split, then peel leading/trailing punctuation into their
    own tokens. Reserved tokens pass through whole."""
    tokens = []
    for chunk in clean_text.split():
        if chunk in RESERVED:
            tokens.append(chunk)
            continue
        lead = []
        while chunk and chunk[0] in _PUNCT:
            lead.append(chunk[0])
            chunk = chunk[1:]
        trail = []
        while chunk and chunk[-1] in _PUNCT:
            trail.append(chunk[-1])
            chunk = chunk[:-1]
        tokens.extend(lead)
        if chunk:
            tokens.append(chunk)
        tokens.extend(reversed(trail))
    return tokens


class LabelSpace:
    """Ordered emotion names; the canonical axis order for every matrix."""

    def __init__(self, names):
        names = list(names)
        if len(set(names)) != len(names):
            raise DataError("duplicate label names")
        if len(names) < 2:
            raise DataError(f"need at least 2 labels, got {len(names)}")
        self.names = names
        self._index = {name: i for i, name in enumerate(names)}

    def __len__(self):
        return len(self.names)

    def __contains__(self, name):
        return name in self._index

    def __eq__(self, other):
        return isinstance(other, LabelSpace) and self.names == other.names

    def index(self, name):
        try:
            return self._index[name]
        except KeyError:
            raise DataError(f"unknown label {name!r}") from None

    def encode(self, labels):
        y = np.zeros(len(self.names), dtype=np.uint8)
        for name in labels:
            y[self.index(name)] = 1
        return y

    @classmethod
    def from_file(cls, path):
        with open(path, encoding="utf-8") as fh:
            names = [line.strip() for line in fh if line.strip()]
        return cls(names)


class Vocabulary:
    """token <-> id maps with the five reserved tokens at ids 0-4."""

    def __init__(self, tokens):
        tokens = list(tokens)
        if tuple(tokens[:5]) != RESERVED:
            raise DataError(f"vocabulary must start with the reserved tokens {RESERVED}")
        if len(set(tokens)) != len(tokens):
            raise DataError("duplicate vocabulary tokens")
        self.tokens = tokens
        self._index = {tok: i for i, tok in enumerate(tokens)}

    def __len__(self):
        return len(self.tokens)

    def id_of(self, token):
        return self._index.get(token, 1)  # unknown -> <unk>

    def token_of(self, token_id):
        return self.tokens[token_id]

    def encode(self, tokens):
        return [self._index.get(t, 1) for t in tokens]

    @classmethod
    def build(cls, token_lists, min_freq=2):
        """Vocabulary from training tokens: reserved first, then tokens with
        count >= min_freq in first-appearance order."""
        counts = {}
        order = []
        for toks in token_lists:
            for t in toks:
                if t in RESERVED:
                    continue
                if t not in counts:
                    counts[t] = 0
                    order.append(t)
                counts[t] += 1
        kept = [t for t in order if counts[t] >= min_freq]
        return cls(list(RESERVED) + kept)

    def to_json(self):
        return {"tokens": self.tokens}

    @classmethod
    def from_json(cls, obj):
        return cls(obj["tokens"])

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh)

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


@dataclass
class Example:
    raw_text: str
    tokens: list
    labels: np.ndarray  # uint8 vector over the label space


@dataclass
class CooccurrenceMatrix:
    counts: np.ndarray  # n x n int64; diagonal = per-class positives

    @property
    def n(self):
        return self.counts.shape[0]


def _read_records(path):
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{lineno}: malformed JSON ({exc.msg})") from None
            if not isinstance(obj, dict) or "text" not in obj or "labels" not in obj:
                raise DataError(f'{path}:{lineno}: expected {{"text", "labels"}} object')
            if not isinstance(obj["labels"], list):
                raise DataError(f"{path}:{lineno}: labels must be a list")
            records.append((lineno, str(obj["text"]), obj["labels"]))
    return records


def load_corpus(path, label_space=None, vocab=None, min_freq=2):
    """Read a JSONL corpus into (examples, label_space, vocabulary).

    Pass ``vocab`` for validation/test splits so ids match the training
    vocabulary; pass ``label_space`` to pin the label order. Records whose
    text is empty after preprocessing are skipped.
    """
    records = _read_records(path)
    if not records:
        raise DataError(f"{path}: no examples")

    if label_space is None:
        seen = []
        for _, _, labels in records:
            for name in labels:
                if name not in seen:
                    seen.append(name)
        label_space = LabelSpace(seen)
    else:
        for lineno, _, labels in records:
            for name in labels:
                if name not in label_space:
                    raise DataError(f"{path}:{lineno}: unknown label {name!r}")

    tokenized = []
    for lineno, text, labels in records:
        toks = tokenize(preprocess(text))
        if toks:
            tokenized.append((text, toks, labels))
    if not tokenized:
        raise DataError(f"{path}: no examples with non-empty text")

    if vocab is None:
        vocab = Vocabulary.build((toks for _, toks, _ in tokenized), min_freq=min_freq)

    examples = [
        Example(text, vocab.encode(toks), label_space.encode(labels))
        for text, toks, labels in tokenized
    ]
    return examples, label_space, vocab


def count_cooccurrence(examples, n):
    """M[i, j] = number of examples carrying both label i and label j."""
    if not examples:
        return CooccurrenceMatrix(np.zeros((n, n), dtype=np.int64))
    y = np.stack([ex.labels for ex in examples]).astype(np.int64)
    if y.shape[1] != n:
        raise DataError(f"label vectors have width {y.shape[1]}, expected {n}")
    return CooccurrenceMatrix(y.T @ y)
