"""Multi-label and single-label evaluation metrics plus k-fold splitting.

Edge conventions, applied everywhere and documented here once: a per-class
F1 with an empty denominator (no gold positives and no predictions) scores
0; a Jaccard example where prediction and gold are both empty scores 1.
Macro-F1 averages over the full label space, including classes that never
appear in the split.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ShapeError
from .numcore import Stream


def _as_binary(table):
    arr = np.asarray(table)
    return (arr != 0).astype(np.int64)


def _check_pair(preds, golds):
    p, g = _as_binary(preds), _as_binary(golds)
    if p.shape != g.shape:
        raise ShapeError(f"prediction table {p.shape} != gold table {g.shape}")
    if p.ndim != 2:
        raise ShapeError(f"expected 2-D tables, got {p.ndim}-D")
    return p, g


def jaccard_accuracy(preds, golds):
    """Mean over examples of |P intersect G| / |P union G|; 1 when both empty."""
    p, g = _check_pair(preds, golds)
    inter = (p & g).sum(axis=1).astype(np.float64)
    union = (p | g).sum(axis=1).astype(np.float64)
    scores = np.where(union > 0, inter / np.maximum(union, 1), 1.0)
    return float(scores.mean())


def micro_f1(preds, golds):
    """F1 of globally pooled true/false positives and false negatives."""
    p, g = _check_pair(preds, golds)
    tp = int((p & g).sum())
    fp = int((p & (1 - g)).sum())
    fn = int(((1 - p) & g).sum())
    denom = 2 * tp + fp + fn
    return 2.0 * tp / denom if denom > 0 else 0.0


def _prf(tp, fp, fn):
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    f1 = 2.0 * tp / (2 * tp + fp + fn) if 2 * tp + fp + fn > 0 else 0.0
    return precision, recall, f1


def macro_f1(preds, golds, labels=None):
    """Unweighted mean of per-class F1 over every class in the label space.

    Returns (macro, per_class) with per_class rows of
    (label, precision, recall, f1, support).
    """
    p, g = _check_pair(preds, golds)
    n_classes = p.shape[1]
    if labels is None:
        labels = [str(i) for i in range(n_classes)]
    per_class = []
    f1s = []
    for j in range(n_classes):
        tp = int((p[:, j] & g[:, j]).sum())
        fp = int((p[:, j] & (1 - g[:, j])).sum())
        fn = int(((1 - p[:, j]) & g[:, j]).sum())
        precision, recall, f1 = _prf(tp, fp, fn)
        per_class.append((labels[j], precision, recall, f1, int(g[:, j].sum())))
        f1s.append(f1)
    return float(np.mean(f1s)), per_class


@dataclass
class EvalReport:
    jaccard_accuracy: float
    micro_f1: float
    macro_f1: float
    per_class: list
    n_examples: int
    extra: dict = field(default_factory=dict)

    def to_json(self):
        obj = {
            "jaccard_accuracy": self.jaccard_accuracy,
            "micro_f1": self.micro_f1,
            "macro_f1": self.macro_f1,
            "n_examples": self.n_examples,
            "per_class": [
                {
                    "label": label,
                    "precision": precision,
                    "recall": recall,
                    "f1": f1,
                    "support": support,
                }
                for label, precision, recall, f1, support in self.per_class
            ],
        }
        obj.update(self.extra)
        return obj

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, indent=2)

    def render_table(self):
        width = max([len("label")] + [len(row[0]) for row in self.per_class])
        lines = [
            f"{'label':<{width}}  {'prec':>7}  {'recall':>7}  {'f1':>7}  {'support':>7}"
        ]
        for label, precision, recall, f1, support in self.per_class:
            lines.append(
                f"{label:<{width}}  {precision:>7.3f}  {recall:>7.3f}  {f1:>7.3f}  {support:>7d}"
            )
        lines.append("")
        lines.append(
            f"jaccard_accuracy={self.jaccard_accuracy:.4f}  "
            f"micro_f1={self.micro_f1:.4f}  macro_f1={self.macro_f1:.4f}  "
            f"n={self.n_examples}"
        )
        return "\n".join(lines)


def evaluate_multilabel(preds, golds, labels):
    p, g = _check_pair(preds, golds)
    macro, per_class = macro_f1(p, g, labels)
    return EvalReport(
        jaccard_accuracy=jaccard_accuracy(p, g),
        micro_f1=micro_f1(p, g),
        macro_f1=macro,
        per_class=per_class,
        n_examples=p.shape[0],
    )


@dataclass
class SingleLabelReport:
    accuracy: float
    average_f1: float
    per_class: list  # (label, f1, support, low_support)
    n_examples: int

    def to_json(self):
        return {
            "accuracy": self.accuracy,
            "average_f1": self.average_f1,
            "n_examples": self.n_examples,
            "per_class": [
                {"label": label, "f1": f1, "support": support, "low_support": low}
                for label, f1, support, low in self.per_class
            ],
        }

    def render_table(self):
        width = max([len("label")] + [len(row[0]) for row in self.per_class])
        lines = [f"{'label':<{width}}  {'f1':>7}  {'support':>7}"]
        for label, f1, support, low in self.per_class:
            flag = "  (low support)" if low else ""
            lines.append(f"{label:<{width}}  {f1:>7.3f}  {support:>7d}{flag}")
        lines.append("")
        lines.append(
            f"average_f1={self.average_f1:.4f}  accuracy={self.accuracy:.4f}  "
            f"n={self.n_examples}"
        )
        return "\n".join(lines)


def single_label_report(preds, golds, kept_labels, min_support=5):
    """Exact-match accuracy plus one-vs-rest F1 per kept class.

    ``preds`` and ``golds`` are class indices into ``kept_labels``'s
    positions; classes with support below ``min_support`` are flagged.
    """
    preds = np.asarray(preds, dtype=np.int64)
    golds = np.asarray(golds, dtype=np.int64)
    if preds.shape != golds.shape or preds.ndim != 1:
        raise ShapeError("prediction and gold index lists must be equal-length 1-D")
    labels, positions = list(kept_labels), None
    accuracy = float((preds == golds).mean()) if preds.size else 0.0
    per_class = []
    f1s = []
    for idx, label in enumerate(labels):
        tp = int(((preds == idx) & (golds == idx)).sum())
        fp = int(((preds == idx) & (golds != idx)).sum())
        fn = int(((preds != idx) & (golds == idx)).sum())
        _, _, f1 = _prf(tp, fp, fn)
        support = int((golds == idx).sum())
        per_class.append((label, f1, support, support < min_support))
        f1s.append(f1)
    return SingleLabelReport(
        accuracy=accuracy,
        average_f1=float(np.mean(f1s)) if f1s else 0.0,
        per_class=per_class,
        n_examples=int(preds.size),
    )


def kfold_split(n_examples, k, seed):
    """Deterministic k folds: sizes differ by at most one, every index is in
    exactly one test fold."""
    if k < 2:
        raise ConfigError(f"k must be >= 2, got {k}")
    if k > n_examples:
        raise ConfigError(f"k={k} exceeds the {n_examples} available examples")
    order = Stream(seed).permutation(n_examples)
    base, extra = divmod(n_examples, k)
    folds = []
    start = 0
    for i in range(k):
        size = base + (1 if i < extra else 0)
        test = np.sort(order[start : start + size])
        train = np.sort(np.concatenate([order[:start], order[start + size :]]))
        folds.append((train, test))
        start += size
    return folds
