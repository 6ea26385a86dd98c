"""Seeds, class embeddings, blend interpolation, and per-layer conditioning.

A generation request is fully described by an integer seed (coarse image
identity) plus a conditioning schedule: one embedding vector per generator
layer. Blending two class embeddings, or assigning different classes to
different layer ranges, is how counterfactual imagery gets steered.
"""

from __future__ import annotations

import hashlib
import json
from collections.abc import Mapping
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .rng import SplitMix64

DEFAULT_Z_DIM = 64
DEFAULT_E_DIM = 16
DEFAULT_LAYERS = 12


def seed_to_latent(seed: int, z_dim: int = DEFAULT_Z_DIM) -> np.ndarray:
    """Expand an integer seed into a standard-normal latent vector.

    Pure function of (seed, z_dim): identical output across runs and
    platforms because the uniform stream underneath is bit-reproducible.
    """
    if z_dim < 1:
        raise ValueError("z_dim must be >= 1")
    return np.array(SplitMix64(seed).normals(z_dim), dtype=np.float64)


@dataclass
class ClassEmbedding:
    class_id: int
    name: str
    vector: np.ndarray

    def __post_init__(self):
        self.vector = np.asarray(self.vector, dtype=np.float64)
        if self.vector.ndim != 1 or self.vector.size == 0:
            raise ValueError("embedding vector must be a non-empty 1-D array")
        if not np.all(np.isfinite(self.vector)):
            raise ValueError("embedding vector must be finite")

    @property
    def e_dim(self) -> int:
        return int(self.vector.size)


@dataclass
class EmbeddingSet:
    classes: list[ClassEmbedding]

    def __post_init__(self):
        if not self.classes:
            raise ValueError("embedding set is empty")
        dims = {c.e_dim for c in self.classes}
        if len(dims) != 1:
            raise ValueError(f"embeddings disagree on e_dim: {sorted(dims)}")
        ids = [c.class_id for c in self.classes]
        if len(set(ids)) != len(ids):
            raise ValueError("class ids must be unique")

    @property
    def e_dim(self) -> int:
        return self.classes[0].e_dim

    def by_id(self, class_id: int) -> ClassEmbedding:
        for c in self.classes:
            if c.class_id == class_id:
                return c
        raise KeyError(f"no class with id {class_id}")

    def names(self) -> list[str]:
        return [c.name for c in self.classes]


def blend_embeddings(e_a: ClassEmbedding, e_b: ClassEmbedding, w: float) -> np.ndarray:
    """Linear interpolation (1-w)*a + w*b; w=0 is the first class, w=1 the second."""
    if not 0.0 <= w <= 1.0:
        raise ValueError(f"blend weight must be in [0, 1], got {w}")
    if e_a.e_dim != e_b.e_dim:
        raise ValueError(f"embedding dims differ: {e_a.e_dim} vs {e_b.e_dim}")
    if w == 0.0:
        return e_a.vector.copy()
    if w == 1.0:
        return e_b.vector.copy()
    return (1.0 - w) * e_a.vector + w * e_b.vector


@dataclass
class ConditioningSchedule:
    """One embedding vector per generator layer, shape (L, e_dim)."""

    layers: np.ndarray

    def __post_init__(self):
        self.layers = np.asarray(self.layers, dtype=np.float64)
        if self.layers.ndim != 2 or self.layers.shape[0] < 1 or self.layers.shape[1] < 1:
            raise ValueError("schedule must be a non-empty (L, e_dim) array")
        if not np.all(np.isfinite(self.layers)):
            raise ValueError("schedule entries must be finite")

    @property
    def num_layers(self) -> int:
        return int(self.layers.shape[0])

    @property
    def e_dim(self) -> int:
        return int(self.layers.shape[1])

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(f"{self.layers.shape[0]}x{self.layers.shape[1]}:".encode())
        h.update(np.ascontiguousarray(self.layers, dtype="<f8").tobytes())
        return h.hexdigest()


def uniform_schedule(vector, num_layers: int = DEFAULT_LAYERS) -> ConditioningSchedule:
    """The same embedding vector at every layer."""
    if num_layers < 1:
        raise ValueError("num_layers must be >= 1")
    v = np.asarray(vector, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError("embedding vector must be 1-D")
    return ConditioningSchedule(np.tile(v, (num_layers, 1)))


def layer_schedule(
    assignments: Mapping[tuple[int, int], np.ndarray], num_layers: int = DEFAULT_LAYERS
) -> ConditioningSchedule:
    """Build a schedule from 1-based inclusive layer ranges mapped to vectors.

    The ranges must be disjoint and jointly cover 1..num_layers; a gap or an
    overlap is a caller error.
    """
    if num_layers < 1:
        raise ValueError("num_layers must be >= 1")
    owner = [None] * num_layers
    vectors: dict[tuple[int, int], np.ndarray] = {}
    for (start, end), vec in assignments.items():
        if not (1 <= start <= end <= num_layers):
            raise ValueError(f"range {start}..{end} outside 1..{num_layers}")
        vectors[(start, end)] = np.asarray(vec, dtype=np.float64)
        for layer in range(start, end + 1):
            if owner[layer - 1] is not None:
                raise ValueError(f"layer {layer} assigned by overlapping ranges")
            owner[layer - 1] = (start, end)
    missing = [i + 1 for i, o in enumerate(owner) if o is None]
    if missing:
        raise ValueError(f"layers not covered by any range: {missing}")
    dims = {v.shape for v in vectors.values()}
    if len(dims) != 1:
        raise ValueError("all range vectors must share e_dim")
    rows = np.stack([vectors[owner[i]] for i in range(num_layers)])
    return ConditioningSchedule(rows)


def save_embeddings(path: str | Path, embeddings: EmbeddingSet) -> None:
    doc = {
        "version": 1,
        "e_dim": embeddings.e_dim,
        "classes": [
            {"id": c.class_id, "name": c.name, "vector": [float(x) for x in c.vector]}
            for c in embeddings.classes
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=2), encoding="utf-8")


def load_embeddings(path: str | Path) -> EmbeddingSet:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("version") != 1:
        raise ValueError(f"unsupported embeddings file version: {doc.get('version')!r}")
    classes = [
        ClassEmbedding(class_id=int(c["id"]), name=str(c["name"]), vector=c["vector"])
        for c in doc["classes"]
    ]
    out = EmbeddingSet(classes)
    if out.e_dim != int(doc["e_dim"]):
        raise ValueError("e_dim field disagrees with vector lengths")
    return out
