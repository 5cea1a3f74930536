"""Checkpoint container: one JSON manifest plus raw little-endian f64 blobs.

Layout: 8-byte magic, u32 format version, u64 manifest length, the UTF-8
manifest, then the concatenated tensor bytes. The manifest records configs,
label space, graph, vocabulary, prediction mode, and a tensor directory of
name -> (shape, byte offset, byte length) with offsets relative to the blob
region. Tensors round-trip bit-identically.
"""

import json
import struct
from dataclasses import dataclass

import numpy as np

from .corpus import Vocabulary
from .errors import CheckpointError
from .graph import EmotionGraph
from .model import EncoderConfig, HeadConfig, Model

MAGIC = b"EMOGCKPT"
FORMAT_VERSION = 1


def save_checkpoint(path, model, vocab, mode=None, threshold=0.5):
    """Write the model, its vocabulary, and the prediction mode to ``path``."""
    mode = mode or {"kind": "multilabel"}
    directory = {}
    blobs = []
    offset = 0
    for name, tensor in model.params.items():
        raw = np.ascontiguousarray(tensor.data, dtype="<f8").tobytes()
        directory[name] = {
            "shape": list(tensor.data.shape),
            "offset": offset,
            "length": len(raw),
        }
        blobs.append(raw)
        offset += len(raw)
    manifest = {
        "version": FORMAT_VERSION,
        "encoder": model.config_json()["encoder"],
        "head": model.config_json()["head"],
        "labels": model.graph.labels,
        "graph": model.graph.to_json(),
        "vocab": vocab.tokens,
        "mode": mode,
        "threshold": threshold,
        "seed": model.seed,
        "tensors": directory,
    }
    payload = json.dumps(manifest).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", FORMAT_VERSION))
        fh.write(struct.pack("<Q", len(payload)))
        fh.write(payload)
        for raw in blobs:
            fh.write(raw)


@dataclass
class Checkpoint:
    manifest: dict
    tensors: dict  # name -> ndarray

    @property
    def mode(self):
        return self.manifest["mode"]

    @property
    def labels(self):
        return self.manifest["labels"]

    def vocabulary(self):
        return Vocabulary(self.manifest["vocab"])

    def graph(self):
        return EmotionGraph.from_json(self.manifest["graph"])

    def build_model(self):
        model = Model(
            EncoderConfig(**self.manifest["encoder"]),
            HeadConfig(**self.manifest["head"]),
            self.graph(),
            vocab_size=len(self.manifest["vocab"]),
            seed=self.manifest.get("seed", 0),
        )
        model.load_state(self.tensors)
        return model


def load_checkpoint(path):
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[: len(MAGIC)] != MAGIC:
        raise CheckpointError(f"{path}: not a checkpoint file (bad magic)")
    (version,) = struct.unpack_from("<I", blob, len(MAGIC))
    if version != FORMAT_VERSION:
        raise CheckpointError(
            f"{path}: checkpoint format version {version} unsupported "
            f"(this build reads version {FORMAT_VERSION})"
        )
    (manifest_len,) = struct.unpack_from("<Q", blob, len(MAGIC) + 4)
    start = len(MAGIC) + 4 + 8
    try:
        manifest = json.loads(blob[start : start + manifest_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"{path}: corrupt manifest ({exc})") from None
    blob_start = start + manifest_len
    tensors = {}
    for name, entry in manifest["tensors"].items():
        lo = blob_start + entry["offset"]
        hi = lo + entry["length"]
        if hi > len(blob):
            raise CheckpointError(f"{path}: tensor {name!r} extends past end of file")
        arr = np.frombuffer(blob[lo:hi], dtype="<f8").reshape(entry["shape"])
        tensors[name] = arr.astype(np.float64)
    return Checkpoint(manifest=manifest, tensors=tensors)
