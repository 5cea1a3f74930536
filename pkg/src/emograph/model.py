"""Sentence encoders, graph-generated classifiers, and the scoring rule.

A model encodes a token-id sequence into a vector s, builds one classifier
vector per emotion from the label embeddings through the configured head
(graph convolution, masked graph attention, or a flat linear bank), and
scores each emotion by the inner product of s with its classifier.
"""

from dataclasses import asdict, dataclass

import numpy as np

from .errors import ConfigError, ContractError, DataError
from .graph import EmotionGraph
from .numcore import (
    Stream,
    Tensor,
    add,
    add_bias,
    bce_with_logits,
    concat_cols,
    dropout,
    gather_rows,
    glorot_uniform,
    layer_norm,
    leaky_relu,
    masked_softmax_xent,
    matmul,
    mean_over_rows,
    outer_add,
    relu,
    scale,
    sigmoid,
    slice_cols,
    softmax_rows,
    transpose,
    zeros,
)

ENCODER_KINDS = ("meanpool", "selfattn")
HEAD_KINDS = ("gcn", "gat", "flat")


@dataclass
class EncoderConfig:
    kind: str = "selfattn"
    embed_dim: int = 64
    hidden_dim: int = 64
    heads: int = 4
    depth: int = 2
    dropout_p: float = 0.3
    max_len: int = 64

    def __post_init__(self):
        if self.kind not in ENCODER_KINDS:
            raise ConfigError(f"encoder kind must be one of {ENCODER_KINDS}, got {self.kind!r}")
        if min(self.embed_dim, self.hidden_dim, self.max_len) < 1:
            raise ConfigError("encoder dimensions must be positive")
        if not 0.0 <= self.dropout_p < 1.0:
            raise ConfigError(f"dropout_p must be in [0, 1), got {self.dropout_p}")
        if self.kind == "selfattn":
            if self.heads < 1 or self.depth < 1:
                raise ConfigError("selfattn needs heads >= 1 and depth >= 1")
            if self.hidden_dim % self.heads:
                raise ConfigError(
                    f"hidden_dim {self.hidden_dim} not divisible by heads {self.heads}"
                )


@dataclass
class HeadConfig:
    kind: str = "gcn"
    label_embed_dim: int = 64
    out_dim: int = 64
    gat_heads: int = 4
    leaky_slope: float = 0.2

    def __post_init__(self):
        if self.kind not in HEAD_KINDS:
            raise ConfigError(f"head kind must be one of {HEAD_KINDS}, got {self.kind!r}")
        if min(self.label_embed_dim, self.out_dim) < 1:
            raise ConfigError("head dimensions must be positive")
        if self.kind == "gat" and self.out_dim % self.gat_heads:
            raise ConfigError(
                f"gat heads x per-head size must equal out_dim "
                f"({self.gat_heads} does not divide {self.out_dim})"
            )


# ---------------------------------------------------------------------------
# ops
# ---------------------------------------------------------------------------


def encode(params, cfg, token_ids, train_mode=False, drop_stream=None):
    """Token ids -> sentence vector of size out_dim.

    meanpool: mean of token embeddings through one affine + ReLU.
    selfattn: learned positional embeddings, `depth` pre-pool blocks of
    (multi-head self-attention, residual, layer norm, feedforward,
    residual, layer norm), then mean pooling over positions.
    """
    ids = np.asarray(token_ids, dtype=np.int64)
    if ids.size == 0:
        raise ContractError("cannot encode an empty token list")
    if ids.size > cfg.max_len:
        raise ContractError(f"sequence length {ids.size} exceeds max_len {cfg.max_len}")
    p = cfg.dropout_p
    emb = gather_rows(params["token_embed"], ids)
    if cfg.kind == "meanpool":
        pooled = mean_over_rows(emb)
        pooled = dropout(pooled, p, drop_stream, train_mode)
        return relu(add_bias(matmul(pooled, params["enc.out_w"]), params["enc.out_b"]))

    x = add(emb, gather_rows(params["enc.pos_embed"], np.arange(ids.size)))
    x = dropout(x, p, drop_stream, train_mode)
    x = add_bias(matmul(x, params["enc.in_w"]), params["enc.in_b"])
    dh = cfg.hidden_dim // cfg.heads
    inv_sqrt_dh = 1.0 / np.sqrt(dh)
    for b in range(cfg.depth):
        pre = f"enc.b{b}."
        q = matmul(x, params[pre + "wq"])
        k = matmul(x, params[pre + "wk"])
        v = matmul(x, params[pre + "wv"])
        heads_out = []
        for h in range(cfg.heads):
            lo, hi = h * dh, (h + 1) * dh
            qh, kh, vh = (slice_cols(t, lo, hi) for t in (q, k, v))
            attn = softmax_rows(scale(matmul(qh, transpose(kh)), inv_sqrt_dh))
            heads_out.append(matmul(attn, vh))
        attn_out = matmul(concat_cols(heads_out), params[pre + "wo"])
        x = layer_norm(
            add(x, dropout(attn_out, p, drop_stream, train_mode)),
            params[pre + "ln1_g"],
            params[pre + "ln1_b"],
        )
        ff = relu(add_bias(matmul(x, params[pre + "ff1_w"]), params[pre + "ff1_b"]))
        ff = add_bias(matmul(ff, params[pre + "ff2_w"]), params[pre + "ff2_b"])
        x = layer_norm(
            add(x, dropout(ff, p, drop_stream, train_mode)),
            params[pre + "ln2_g"],
            params[pre + "ln2_b"],
        )
    return mean_over_rows(x)


def gcn_head(g_tilde, label_embed, weight):
    """One graph convolution over the label embeddings: ReLU(G~ E W)."""
    gt = g_tilde if isinstance(g_tilde, Tensor) else Tensor(g_tilde)
    return relu(matmul(matmul(gt, label_embed), weight))


def gat_head(mask, label_embed, head_params, slope=0.2):
    """Masked multi-head attention over emotion nodes.

    ``mask`` is the binary adjacency with self-connections; ``head_params``
    is a list of (proj, a_src, a_dst) per head. Attention logits follow the
    additive form LeakyReLU(a_src . We_i + a_dst . We_j), normalized over
    each node's masked neighborhood; head outputs are concatenated, then
    ReLU.
    """
    outs = []
    for proj, a_src, a_dst in head_params:
        p = matmul(label_embed, proj)
        scores = leaky_relu(outer_add(matmul(p, a_src), matmul(p, a_dst)), slope)
        alpha = softmax_rows(scores, mask)
        outs.append(matmul(alpha, p))
    return relu(concat_cols(outs))


def score(sentence_vec, classifiers):
    """Per-emotion logits: the inner product of s with each classifier row."""
    return matmul(classifiers, sentence_vec)


def multilabel_loss(logits, targets):
    """Mean over classes of sigmoid cross-entropy (stable log-sum form)."""
    return bce_with_logits(logits, targets)


def singlelabel_loss(logits, keep_indices, gold_index):
    """Softmax cross-entropy over the kept classifier subset only."""
    return masked_softmax_xent(logits, keep_indices, gold_index)


# ---------------------------------------------------------------------------
# the assembled model
# ---------------------------------------------------------------------------


def _param_specs(enc_cfg, head_cfg, vocab_size, n_labels):
    """Ordered (name, shape, scheme) for every trainable tensor."""
    specs = [("token_embed", (vocab_size, enc_cfg.embed_dim), "glorot")]
    if enc_cfg.kind == "meanpool":
        specs += [
            ("enc.out_w", (enc_cfg.embed_dim, head_cfg.out_dim), "glorot"),
            ("enc.out_b", (head_cfg.out_dim,), "zeros"),
        ]
    else:
        h = enc_cfg.hidden_dim
        specs += [
            ("enc.pos_embed", (enc_cfg.max_len, enc_cfg.embed_dim), "glorot"),
            ("enc.in_w", (enc_cfg.embed_dim, h), "glorot"),
            ("enc.in_b", (h,), "zeros"),
        ]
        for b in range(enc_cfg.depth):
            pre = f"enc.b{b}."
            specs += [
                (pre + "wq", (h, h), "glorot"),
                (pre + "wk", (h, h), "glorot"),
                (pre + "wv", (h, h), "glorot"),
                (pre + "wo", (h, h), "glorot"),
                (pre + "ln1_g", (h,), "ones"),
                (pre + "ln1_b", (h,), "zeros"),
                (pre + "ff1_w", (h, 2 * h), "glorot"),
                (pre + "ff1_b", (2 * h,), "zeros"),
                (pre + "ff2_w", (2 * h, h), "glorot"),
                (pre + "ff2_b", (h,), "zeros"),
                (pre + "ln2_g", (h,), "ones"),
                (pre + "ln2_b", (h,), "zeros"),
            ]
    if head_cfg.kind in ("gcn", "gat"):
        specs.append(("head.label_embed", (n_labels, head_cfg.label_embed_dim), "glorot"))
    if head_cfg.kind == "gcn":
        specs.append(("head.gcn_w", (head_cfg.label_embed_dim, head_cfg.out_dim), "glorot"))
    elif head_cfg.kind == "gat":
        dh = head_cfg.out_dim // head_cfg.gat_heads
        for g in range(head_cfg.gat_heads):
            pre = f"head.gat{g}."
            specs += [
                (pre + "w", (head_cfg.label_embed_dim, dh), "glorot"),
                (pre + "a_src", (dh,), "glorot"),
                (pre + "a_dst", (dh,), "glorot"),
            ]
    else:
        specs.append(("head.flat_w", (head_cfg.out_dim, n_labels), "glorot"))
    return specs


class Model:
    """Parameters plus forward paths for one (encoder, head, graph) triple."""

    def __init__(self, enc_cfg, head_cfg, graph, vocab_size, seed, params=None):
        if enc_cfg.kind == "selfattn" and enc_cfg.hidden_dim != head_cfg.out_dim:
            raise ConfigError(
                "selfattn pools directly to its hidden width, so head out_dim "
                f"({head_cfg.out_dim}) must equal hidden_dim ({enc_cfg.hidden_dim})"
            )
        self.enc_cfg = enc_cfg
        self.head_cfg = head_cfg
        self.graph = graph
        self.vocab_size = int(vocab_size)
        self.seed = int(seed)
        self._g_tilde = Tensor(graph.g_tilde)
        self._mask = graph.attention_mask()
        if params is None:
            root = Stream(seed)
            params = {}
            for name, shape, scheme in _param_specs(enc_cfg, head_cfg, vocab_size, graph.n):
                if scheme == "glorot":
                    data = glorot_uniform(shape, seed=int(root.spawn(name).seed))
                elif scheme == "ones":
                    data = np.ones(shape, dtype=np.float64)
                else:
                    data = zeros(shape)
                params[name] = Tensor.param(data, name=name)
        self.params = params

    # -- parameter groups ---------------------------------------------------

    def all_params(self):
        return list(self.params.values())

    def head_params(self):
        return [t for name, t in self.params.items() if name.startswith("head.")]

    def encoder_params(self):
        return [t for name, t in self.params.items() if not name.startswith("head.")]

    # -- forward ------------------------------------------------------------

    def classifiers(self):
        """The n x out_dim classifier matrix produced by the head."""
        kind = self.head_cfg.kind
        if kind == "gcn":
            return gcn_head(self._g_tilde, self.params["head.label_embed"], self.params["head.gcn_w"])
        if kind == "gat":
            head_params = [
                (
                    self.params[f"head.gat{g}.w"],
                    self.params[f"head.gat{g}.a_src"],
                    self.params[f"head.gat{g}.a_dst"],
                )
                for g in range(self.head_cfg.gat_heads)
            ]
            return gat_head(self._mask, self.params["head.label_embed"], head_params, self.head_cfg.leaky_slope)
        return transpose(self.params["head.flat_w"])

    def encode(self, token_ids, train_mode=False, drop_stream=None):
        return encode(self.params, self.enc_cfg, token_ids, train_mode, drop_stream)

    def logits(self, token_ids, train_mode=False, drop_stream=None, classifiers=None):
        c = self.classifiers() if classifiers is None else classifiers
        return score(self.encode(token_ids, train_mode, drop_stream), c)

    def predict_probs(self, token_ids):
        """Per-label sigmoid probabilities (inference mode, no tape)."""
        ids = np.asarray(token_ids, dtype=np.int64)[: self.enc_cfg.max_len]
        return sigmoid(self.logits(ids)).data

    def state(self):
        """Copy of every parameter array, keyed by name."""
        return {name: t.data.copy() for name, t in self.params.items()}

    def load_state(self, state):
        for name, t in self.params.items():
            if name not in state:
                raise DataError(f"missing tensor {name!r} in state")
            if state[name].shape != t.data.shape:
                raise DataError(
                    f"tensor {name!r} has shape {state[name].shape}, expected {t.data.shape}"
                )
            t.data = state[name].astype(np.float64).copy()

    def config_json(self):
        return {
            "encoder": asdict(self.enc_cfg),
            "head": asdict(self.head_cfg),
            "vocab_size": self.vocab_size,
            "seed": self.seed,
        }


def load_label_embeddings(path, labels, dim):
    """Optional pretrained label vectors from a text file of
    "name v1 v2 ..." lines; labels missing from the file keep zeros."""
    table = np.zeros((len(labels), dim), dtype=np.float64)
    index = {name: i for i, name in enumerate(labels)}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            parts = line.split()
            if not parts or parts[0] not in index:
                continue
            vec = np.asarray([float(x) for x in parts[1:]], dtype=np.float64)
            if vec.size != dim:
                raise DataError(
                    f"label vector for {parts[0]!r} has {vec.size} dims, expected {dim}"
                )
            table[index[parts[0]]] = vec
    return table
