"""Mini-batch training with two Adam optimizers and early stopping.

Graph-head parameters and encoder parameters (token embeddings included)
get independent Adam instances with their own learning rates; both step
on every batch. Early stopping watches validation Jaccard; when no
validation split is given, the training split stands in for it (the
logged val_* columns then report training-split metrics). The best
checkpoint by that metric is restored before returning.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError, DivergenceError
from .corpus import preprocess, tokenize
from .metrics import evaluate_multilabel, jaccard_accuracy, macro_f1, micro_f1
from .model import multilabel_loss, score, singlelabel_loss
from .numcore import Adam, Stream, Tape, add_n, clip_global_norm, scale


@dataclass
class TrainConfig:
    head_lr: float = 1e-3
    encoder_lr: float = 1e-3
    batch_size: int = 32
    epochs: int = 100
    patience: int = 5
    clip_norm: float = 5.0
    threshold: float = 0.5

    def __post_init__(self):
        if self.head_lr < 0 or self.encoder_lr < 0:
            raise ConfigError("learning rates must be non-negative")
        if self.batch_size < 1 or self.epochs < 1 or self.patience < 1:
            raise ConfigError("batch_size, epochs, and patience must be >= 1")
        if not 0.0 < self.threshold <= 1.0:
            raise ConfigError(f"threshold must be in (0, 1], got {self.threshold}")


@dataclass
class TrainResult:
    log: list = field(default_factory=list)
    best_epoch: int = 0
    best_metric: float = 0.0
    stopped_early: bool = False


def _gold_kept_index(labels_vec, keep_indices, where=""):
    hits = [int(i) for i in keep_indices if labels_vec[i]]
    if len(hits) != 1:
        raise DataError(
            f"single-label mode needs exactly one kept positive per example, "
            f"got {len(hits)}{where}"
        )
    return hits[0]


def _truncate(example, max_len):
    return np.asarray(example.tokens[:max_len], dtype=np.int64)


def predict_table(model, examples, threshold):
    """(probabilities, binary predictions, gold bits) for a multilabel split."""
    probs = np.stack(
        [model.predict_probs(_truncate(ex, model.enc_cfg.max_len)) for ex in examples]
    )
    golds = np.stack([ex.labels for ex in examples]).astype(np.int64)
    return probs, (probs >= threshold).astype(np.int64), golds


def predict_single(model, examples, keep_indices):
    """Restricted-argmax predictions: (pred indices, gold indices) into the
    label space, plus one-hot tables for the shared metric columns."""
    keep = np.asarray(keep_indices, dtype=np.int64)
    n = model.graph.n
    preds, golds = [], []
    for ex in examples:
        probs = model.predict_probs(_truncate(ex, model.enc_cfg.max_len))
        preds.append(int(keep[int(np.argmax(probs[keep]))]))
        golds.append(_gold_kept_index(ex.labels, keep))
    pred_bits = np.zeros((len(examples), n), dtype=np.int64)
    gold_bits = np.zeros((len(examples), n), dtype=np.int64)
    for row, (p, g) in enumerate(zip(preds, golds)):
        pred_bits[row, p] = 1
        gold_bits[row, g] = 1
    return np.asarray(preds), np.asarray(golds), pred_bits, gold_bits


def split_metrics(model, examples, threshold, keep_indices=None):
    if keep_indices is None:
        _, bits, golds = predict_table(model, examples, threshold)
    else:
        _, _, bits, golds = predict_single(model, examples, keep_indices)
    return {
        "jaccard": jaccard_accuracy(bits, golds),
        "micro_f1": micro_f1(bits, golds),
        "macro_f1": macro_f1(bits, golds)[0],
    }


def evaluation_report(model, examples, threshold, keep_indices=None):
    if keep_indices is not None:
        _, _, bits, golds = predict_single(model, examples, keep_indices)
    else:
        _, bits, golds = predict_table(model, examples, threshold)
    report = evaluate_multilabel(bits, golds, model.graph.labels)
    if keep_indices is not None:
        report.extra["mode"] = "singlelabel"
        report.extra["kept_labels"] = [model.graph.labels[i] for i in keep_indices]
    return report


def train_model(model, train_examples, cfg, seed, val_examples=None, keep_indices=None, log_fn=None):
    """Train in place; returns the per-epoch log and restores the best state."""
    if not train_examples:
        raise DataError("empty training split")
    if keep_indices is not None:
        keep_indices = np.asarray(keep_indices, dtype=np.int64)
        for i, ex in enumerate(train_examples):
            _gold_kept_index(ex.labels, keep_indices, where=f" (training example {i})")

    drop_stream = Stream(seed).spawn("dropout")
    shuffle_stream = Stream(seed).spawn("shuffle")
    head_opt = Adam(model.head_params(), cfg.head_lr)
    enc_opt = Adam(model.encoder_params(), cfg.encoder_lr)
    eval_split = val_examples if val_examples else train_examples
    max_len = model.enc_cfg.max_len

    result = TrainResult()
    best_state = model.state()
    best_metric = -math.inf
    bad_epochs = 0

    for epoch in range(1, cfg.epochs + 1):
        order = shuffle_stream.permutation(len(train_examples))
        loss_sum, n_batches = 0.0, 0
        for start in range(0, len(order), cfg.batch_size):
            batch = order[start : start + cfg.batch_size]
            with Tape() as tape:
                classifiers = model.classifiers()
                losses = []
                for i in batch:
                    ex = train_examples[int(i)]
                    logits = score(
                        model.encode(_truncate(ex, max_len), True, drop_stream),
                        classifiers,
                    )
                    if keep_indices is None:
                        losses.append(multilabel_loss(logits, ex.labels.astype(np.float64)))
                    else:
                        gold = _gold_kept_index(ex.labels, keep_indices)
                        losses.append(singlelabel_loss(logits, keep_indices, gold))
                batch_loss = scale(add_n(losses), 1.0 / len(batch))
            loss_value = batch_loss.item()
            if not math.isfinite(loss_value):
                raise DivergenceError(
                    f"non-finite loss at epoch {epoch}, batch {n_batches + 1}"
                )
            for p in model.all_params():
                p.grad = None
            tape.backward(batch_loss)
            clip_global_norm(model.all_params(), cfg.clip_norm)
            head_opt.step()
            enc_opt.step()
            loss_sum += loss_value
            n_batches += 1

        metrics = split_metrics(model, eval_split, cfg.threshold, keep_indices)
        row = {
            "epoch": epoch,
            "train_loss": loss_sum / n_batches,
            "val_jaccard": metrics["jaccard"],
            "val_micro_f1": metrics["micro_f1"],
            "val_macro_f1": metrics["macro_f1"],
        }
        result.log.append(row)
        if log_fn is not None:
            log_fn(row)

        if metrics["jaccard"] > best_metric:
            best_metric = metrics["jaccard"]
            best_state = model.state()
            result.best_epoch = epoch
            bad_epochs = 0
        else:
            bad_epochs += 1
            if bad_epochs >= cfg.patience:
                result.stopped_early = True
                break

    result.best_metric = best_metric
    model.load_state(best_state)
    return result


def predict_text(model, vocab, text, threshold=0.5, keep_indices=None):
    """One prediction record for a raw input line.

    Multilabel: every label whose probability reaches the threshold.
    Single-label: the argmax over the kept classifier subset.
    """
    tokens = tokenize(preprocess(text))
    if not tokens:
        return {"text": text, "error": "empty after preprocessing"}
    ids = np.asarray(vocab.encode(tokens), dtype=np.int64)[: model.enc_cfg.max_len]
    probs = model.predict_probs(ids)
    labels = model.graph.labels
    if keep_indices is None:
        chosen = [labels[i] for i in range(len(labels)) if probs[i] >= threshold]
    else:
        keep = np.asarray(keep_indices, dtype=np.int64)
        chosen = [labels[int(keep[int(np.argmax(probs[keep]))])]]
    return {
        "text": text,
        "labels": chosen,
        "probs": {labels[i]: float(probs[i]) for i in range(len(labels))},
    }
