"""The emotion graph chain: conditional ratios, thresholding, reweighting,
and degree normalization.

Stages, all n x n float64:

  g1  conditional co-occurrence: g1[i, j] = M[i, j] / M[i, i]
      (asymmetric; rows with M[i, i] = 0 are all zero, keeping labels that
      never occur as valid isolated nodes)
  g2  binary adjacency: 1 where g1 >= mu
  g   reweighted: off-diagonal entries are g2[i, j] divided by the row's
      off-diagonal survivor count, the diagonal is pinned to 1 - w
  g_tilde  symmetric degree normalization D^-1/2 g D^-1/2 used by the
      convolutional head; no extra self-loop is added because g already
      carries the 1 - w self-weight

Interpretation note (the most consequential choice in this library): the
reweighting denominator excludes the diagonal, so each row's off-diagonal
mass sums to exactly 1 whenever the node has any neighbor. Including the
diagonal would shrink every edge weight and double-count the self-weight.
"""

import json
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError

GRAPH_JSON_KEYS = ("labels", "mu", "w", "g1", "g2", "g", "g_tilde")


def _check_mu_w(mu, w):
    if not 0.0 <= mu <= 1.0:
        raise ConfigError(f"mu must be in [0, 1], got {mu}")
    if not 0.0 <= w < 1.0:
        raise ConfigError(f"w must be in [0, 1), got {w}")


def normalize_asymmetric(counts):
    """Row-normalize co-occurrence counts by the diagonal; zero rows stay zero."""
    m = np.asarray(counts, dtype=np.float64)
    g1 = np.zeros_like(m)
    for i in range(m.shape[0]):
        if m[i, i] > 0:
            g1[i, :] = m[i, :] / m[i, i]
    return g1


def binarize(g1, mu):
    """1.0 where the conditional ratio reaches mu, else 0.0."""
    _check_mu_w(mu, 0.0)
    return (np.asarray(g1, dtype=np.float64) >= mu).astype(np.float64)


def reweight(g2, w):
    """Spread each row's unit mass over its surviving neighbors; self-weight 1 - w."""
    _check_mu_w(0.0, w)
    g2 = np.asarray(g2, dtype=np.float64)
    n = g2.shape[0]
    g = np.zeros_like(g2)
    for i in range(n):
        s = g2[i, :].sum() - g2[i, i]
        for j in range(n):
            if i == j:
                g[i, j] = 1.0 - w
            elif s > 0:
                g[i, j] = g2[i, j] / s
    return g


def gcn_normalize(g):
    """Symmetric degree normalization; degrees are positive since the
    diagonal carries 1 - w > 0."""
    g = np.asarray(g, dtype=np.float64)
    inv_sqrt = 1.0 / np.sqrt(g.sum(axis=1))
    # one multiply by the (exactly symmetric) outer product keeps a
    # symmetric g bitwise symmetric after normalization
    return g * (inv_sqrt[:, None] * inv_sqrt[None, :])


@dataclass
class EmotionGraph:
    labels: list
    mu: float
    w: float
    g1: np.ndarray
    g2: np.ndarray
    g: np.ndarray
    g_tilde: np.ndarray

    @property
    def n(self):
        return len(self.labels)

    @classmethod
    def build(cls, counts, labels, mu, w):
        _check_mu_w(mu, w)
        counts = np.asarray(counts)
        labels = list(labels)
        if counts.shape != (len(labels), len(labels)):
            raise DataError(
                f"count matrix shape {counts.shape} does not match {len(labels)} labels"
            )
        g1 = normalize_asymmetric(counts)
        g2 = binarize(g1, mu)
        g = reweight(g2, w)
        return cls(labels, float(mu), float(w), g1, g2, g, gcn_normalize(g))

    def attention_mask(self):
        """Boolean n x n mask for the attention head: g2 edges plus self."""
        mask = self.g2 != 0.0
        np.fill_diagonal(mask, True)
        return mask

    def degree_summary(self):
        """Per-label (out_degree, in_degree) over the binary off-diagonal edges."""
        off = self.g2.copy()
        np.fill_diagonal(off, 0.0)
        out_deg = off.sum(axis=1).astype(int)
        in_deg = off.sum(axis=0).astype(int)
        return [
            (name, int(out_deg[i]), int(in_deg[i])) for i, name in enumerate(self.labels)
        ]

    def to_json(self):
        return {
            "labels": self.labels,
            "mu": self.mu,
            "w": self.w,
            "g1": self.g1.tolist(),
            "g2": self.g2.tolist(),
            "g": self.g.tolist(),
            "g_tilde": self.g_tilde.tolist(),
        }

    @classmethod
    def from_json(cls, obj):
        missing = [k for k in GRAPH_JSON_KEYS if k not in obj]
        if missing:
            raise DataError(f"graph JSON missing keys: {missing}")
        return cls(
            list(obj["labels"]),
            float(obj["mu"]),
            float(obj["w"]),
            np.asarray(obj["g1"], dtype=np.float64),
            np.asarray(obj["g2"], dtype=np.float64),
            np.asarray(obj["g"], dtype=np.float64),
            np.asarray(obj["g_tilde"], dtype=np.float64),
        )

    def save_json(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh)

    @classmethod
    def load_json(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))

    def to_dot(self):
        """Graphviz digraph: one edge i -> j per off-diagonal g2 entry,
        the arrow pointing from the conditioned label to its neighbor."""
        lines = ["digraph emotions {", "  rankdir=LR;"]
        for name in self.labels:
            lines.append(f'  "{_dot_escape(name)}";')
        for i in range(self.n):
            for j in range(self.n):
                if i != j and self.g2[i, j] != 0.0:
                    lines.append(
                        f'  "{_dot_escape(self.labels[i])}" -> "{_dot_escape(self.labels[j])}";'
                    )
        lines.append("}")
        return "\n".join(lines) + "\n"


def _dot_escape(name):
    return name.replace("\\", "\\\\").replace('"', '\\"')


def subgraph(graph_labels, keep, aliases=None):
    """Positions of the kept labels, ascending (label-space order preserved).

    ``graph_labels`` may be an EmotionGraph or a list of names. ``aliases``
    maps foreign names onto graph names, e.g. {"happiness": "joy"}.
    """
    labels = graph_labels.labels if isinstance(graph_labels, EmotionGraph) else list(graph_labels)
    aliases = aliases or {}
    index = {name: i for i, name in enumerate(labels)}
    positions = []
    for name in keep:
        resolved = aliases.get(name, name)
        if resolved not in index:
            raise DataError(f"label {name!r} is not in the graph label space")
        if index[resolved] not in positions:
            positions.append(index[resolved])
    return np.asarray(sorted(positions), dtype=np.int64)
