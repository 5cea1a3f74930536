"""Deterministic synthetic corpora for tests and the CLI fixture.

Every generator draws from the package's counter RNG, so corpora are
identical across runs and platforms. Texts are built from per-label
indicator tokens plus background noise, which makes the labels learnable
by construction.
"""

import json

from emograph.numcore import Stream

SEMEVAL_LABELS = [
    "anger",
    "anticipation",
    "disgust",
    "fear",
    "joy",
    "love",
    "optimism",
    "pessimism",
    "sadness",
    "surprise",
    "trust",
]

# rough positive rates for the fixture corpus, nested pairs planted below
_FIXTURE_RATES = {
    "anger": 0.36,
    "anticipation": 0.14,
    "disgust": 0.37,
    "fear": 0.17,
    "joy": 0.39,
    "love": 0.12,
    "optimism": 0.31,
    "pessimism": 0.12,
    "sadness": 0.29,
    "surprise": 0.05,
    "trust": 0.05,
}
_FIXTURE_NESTED = {  # child mostly co-occurs with parent
    "love": "joy",
    "optimism": "joy",
    "surprise": "joy",
    "trust": "joy",
    "pessimism": "sadness",
    "anticipation": "optimism",
}


def write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")


def _tokens_for(label, count, stream, pool=3):
    return [f"{label}tok{int(stream.uniform() * pool)}" for _ in range(count)]


def _compose_text(positives, stream, background=2, signal=3):
    words = []
    for label in positives:
        words.extend(_tokens_for(label, signal, stream))
    for _ in range(background):
        words.append(f"noise{int(stream.uniform() * 8)}")
    stream.shuffle(words)
    return " ".join(words)


def gen_overfit_corpus(n_examples, seed):
    """4 labels with planted co-occurrence; memorizable from tokens."""
    labels = ["alpha", "beta", "gamma", "delta"]
    stream = Stream(seed)
    records = []
    for _ in range(n_examples):
        pos = []
        if stream.uniform() < 0.5:
            pos.append("alpha")
        if stream.uniform() < (0.7 if "alpha" in pos else 0.2):
            pos.append("beta")
        if stream.uniform() < 0.3:
            pos.append("gamma")
        if "gamma" in pos and stream.uniform() < 0.4:
            pos.append("delta")
        records.append({"text": _compose_text(pos, stream), "labels": pos})
    return records, labels


def gen_low_resource_corpus(n_examples, seed, rare_rate=0.03, common_rate=0.40, nest=0.8):
    """A rare label rides a frequent one: P(common | rare) = ``nest``.

    The rare label's own token signal is weak (one marker word, sometimes
    missing, and occasionally appearing in negatives), so a per-label
    classifier starves while a graph-coupled one can borrow the frequent
    label's signal.
    """
    labels = ["common", "rare", "filler"]
    stream = Stream(seed)
    records = []
    for _ in range(n_examples):
        pos = []
        is_rare = stream.uniform() < rare_rate
        if is_rare:
            pos.append("rare")
            if stream.uniform() < nest:
                pos.append("common")
        elif stream.uniform() < common_rate:
            pos.append("common")
        if stream.uniform() < 0.25:
            pos.append("filler")
        words = []
        if "common" in pos:
            words += _tokens_for("common", 3, stream, pool=6)
        if "filler" in pos:
            words += _tokens_for("filler", 2, stream, pool=4)
        if is_rare and stream.uniform() < 0.9:
            words.append(f"raremark{int(stream.uniform() * 2)}")
        if not is_rare and stream.uniform() < 0.04:
            words.append(f"raremark{int(stream.uniform() * 2)}")
        for _ in range(2):
            words.append(f"noise{int(stream.uniform() * 8)}")
        stream.shuffle(words)
        records.append({"text": " ".join(words), "labels": sorted(set(pos))})
    return records, labels


def gen_fixture_corpus(n_examples, seed):
    """SemEval-shaped 11-label corpus for the CLI fixture."""
    stream = Stream(seed)
    records = []
    for _ in range(n_examples):
        pos = []
        for label in SEMEVAL_LABELS:
            rate = _FIXTURE_RATES[label]
            parent = _FIXTURE_NESTED.get(label)
            if parent is not None and parent in pos:
                rate = min(0.9, rate * 2.5)
            if stream.uniform() < rate:
                pos.append(label)
        if not pos and stream.uniform() < 0.5:
            pos.append("joy")
        records.append({"text": _compose_text(pos, stream, signal=2), "labels": pos})
    return records, list(SEMEVAL_LABELS)


def gen_single_label_corpus(n_examples, seed, kept, all_labels):
    """Exactly one kept-positive per example over a wider label space."""
    stream = Stream(seed)
    records = []
    for _ in range(n_examples):
        choice = kept[int(stream.uniform() * len(kept))]
        records.append(
            {"text": _compose_text([choice], stream), "labels": [choice]}
        )
    return records, list(all_labels)
