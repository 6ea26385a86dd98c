"""Class-blend sequences with prediction traces, and layer-blend experiments."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .backend import Backend, Prediction, SyntheticImage, generate_and_classify
from .imaging import png_encode
from .latent import EmbeddingSet, blend_embeddings, layer_schedule, uniform_schedule


@dataclass
class BlendStep:
    w: float
    image: SyntheticImage
    prediction: Prediction

    @property
    def digest(self) -> str:
        return self.image.digest()


@dataclass
class BlendTrace:
    seed: int
    steps: tuple[BlendStep, ...]


def blend_sequence(
    backend: Backend,
    seed: int,
    n_steps: int,
    embeddings: EmbeddingSet,
) -> BlendTrace:
    """Sweep the blend weight over n_steps equally spaced points in [0, 1].

    The first and last steps use the pure class embeddings, so trace
    endpoints reproduce the per-class generations byte for byte.
    """
    if n_steps < 2:
        raise ValueError("n_steps must be >= 2")
    desc = backend.describe()
    e_a, e_b = embeddings.classes[0], embeddings.classes[1]
    steps = []
    for i in range(n_steps):
        w = i / (n_steps - 1)
        schedule = uniform_schedule(blend_embeddings(e_a, e_b, w), desc.layers)
        image, pred = generate_and_classify(backend, seed, schedule)
        steps.append(BlendStep(w=w, image=image, prediction=pred))
    return BlendTrace(seed=seed, steps=tuple(steps))


@dataclass
class LayerBlendCell:
    label: str
    seed: int
    ranges: tuple[tuple[int, int, int], ...]  # (start, end, class index), 1-based inclusive
    image: SyntheticImage
    prediction: Prediction

    def describe_ranges(self, class_names: tuple[str, ...]) -> str:
        return ", ".join(
            f"layers {s}-{e}: {class_names[c]}" for s, e, c in self.ranges
        )


def layer_blend(
    backend: Backend,
    seed: int,
    ranges: tuple[tuple[int, int, int], ...],
    embeddings: EmbeddingSet,
    label: str = "",
) -> LayerBlendCell:
    """Generate with different class embeddings on different layer ranges."""
    desc = backend.describe()
    assignments = {
        (start, end): embeddings.classes[class_idx].vector
        for start, end, class_idx in ranges
    }
    schedule = layer_schedule(assignments, desc.layers)
    image, pred = generate_and_classify(backend, seed, schedule)
    return LayerBlendCell(
        label=label, seed=seed, ranges=tuple(ranges), image=image, prediction=pred
    )


# Six-cell preset grid over 12 conditioning layers: endpoints plus swaps of
# the 4-6, 7-9, 10-12, and 4-12 ranges to the second class.
FIG3_PRESETS: tuple[tuple[str, tuple[tuple[int, int, int], ...]], ...] = (
    ("B1", ((1, 12, 0),)),
    ("B2", ((1, 3, 0), (4, 6, 1), (7, 12, 0))),
    ("B3", ((1, 6, 0), (7, 9, 1), (10, 12, 0))),
    ("B4", ((1, 9, 0), (10, 12, 1))),
    ("B5", ((1, 3, 0), (4, 12, 1))),
    ("B6", ((1, 12, 1),)),
)


def fig3_grid(backend: Backend, seed: int, embeddings: EmbeddingSet) -> list[LayerBlendCell]:
    """The six-cell layer-blend preset grid; requires a 12-layer backend."""
    if backend.describe().layers != 12:
        raise ValueError("the preset grid is defined for 12 conditioning layers")
    return [
        layer_blend(backend, seed, ranges, embeddings, label=label)
        for label, ranges in FIG3_PRESETS
    ]


def write_trace(trace: BlendTrace, out_dir: str | Path) -> Path:
    """Write trace frames as PNGs plus a trace.json manifest; returns the manifest path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    steps = []
    for i, step in enumerate(trace.steps):
        frame = f"frame_{i:03d}.png"
        (out / frame).write_bytes(png_encode(step.image.pixels))
        steps.append({"w": step.w, "frame": frame, "pred": list(step.prediction.values)})
    manifest = out / "trace.json"
    manifest.write_text(
        json.dumps({"seed": trace.seed, "steps": steps}, indent=2), encoding="utf-8"
    )
    return manifest


def trace_predictions(trace: BlendTrace, class_index: int = 1) -> np.ndarray:
    """Per-step score for one class: post-softmax for categorical, raw for continuous."""
    if trace.steps[0].prediction.head == "categorical":
        return np.array([s.prediction.values[class_index] for s in trace.steps])
    return np.array([s.prediction.values[0] for s in trace.steps])
