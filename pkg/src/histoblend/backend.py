"""Generator/classifier pair contract plus a deterministic toy implementation.

The toy backend is an analytically tractable stand-in for a trained
generator and classifier. It synthesizes banded sinusoidal textures whose
orientation and scale react to the early and middle conditioning layers
while a red/blue tint, the only feature its classifier reads, reacts to the
late layers. Every downstream procedure (concordance screening, class
blending, layer blending, curriculum assembly) can therefore be verified in
closed form.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from .imaging import TileSpec, center_crop_resize
from .latent import ClassEmbedding, ConditioningSchedule, EmbeddingSet
from .rng import SplitMix64


@dataclass(frozen=True)
class Provenance:
    seed: int
    schedule_digest: str
    backend_id: str


@dataclass
class SyntheticImage:
    pixels: np.ndarray
    tile: TileSpec
    provenance: Provenance

    def __post_init__(self):
        arr = np.asarray(self.pixels)
        if arr.ndim != 3 or arr.shape[2] != 3 or arr.dtype != np.uint8:
            raise ValueError("pixels must be an (h, w, 3) uint8 array")
        if arr.shape[0] < 8 or arr.shape[1] < 8:
            raise ValueError("image must be at least 8x8")
        self.pixels = arr

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(f"{self.width}x{self.height}:".encode())
        h.update(self.pixels.tobytes())
        return h.hexdigest()


@dataclass
class Prediction:
    head: str  # "categorical" | "continuous"
    values: tuple[float, ...]

    def __post_init__(self):
        self.values = tuple(float(v) for v in self.values)
        if self.head == "categorical":
            if len(self.values) < 2:
                raise ValueError("categorical prediction needs per-class scores")
            if any(not 0.0 <= v <= 1.0 for v in self.values):
                raise ValueError("categorical scores must lie in [0, 1]")
            if abs(sum(self.values) - 1.0) > 1e-9:
                raise ValueError("categorical scores must sum to 1")
        elif self.head == "continuous":
            if len(self.values) != 1:
                raise ValueError("continuous prediction carries one score")
            if not math.isfinite(self.values[0]):
                raise ValueError("continuous score must be finite")
        else:
            raise ValueError(f"unknown prediction head {self.head!r}")


@dataclass(frozen=True)
class BackendDescriptor:
    id: str
    kind: str  # "toy" | "external"
    layers: int
    e_dim: int
    z_dim: int
    classes: tuple[str, ...]
    generator_tile: TileSpec
    classifier_tile: TileSpec

    def __post_init__(self):
        if min(self.layers, self.e_dim, self.z_dim) < 1:
            raise ValueError("layer and dimension counts must be positive")
        if len(self.classes) != 2:
            raise ValueError("this workbench handles exactly two classes")


class Backend(Protocol):
    def describe(self) -> BackendDescriptor: ...

    def generate(self, seed: int, schedule: ConditioningSchedule) -> SyntheticImage: ...

    def classify(self, pixels: np.ndarray) -> Prediction: ...


class ToyBackend:
    """Closed-form generator/classifier pair for desk-scale verification."""

    TINT_GAIN = 0.08

    def __init__(
        self,
        slope: float = 6.0,
        layers: int = 12,
        e_dim: int = 16,
        z_dim: int = 64,
        generator_tile: TileSpec = TileSpec(400.0, 256),
        classifier_tile: TileSpec = TileSpec(302.0, 299),
        class_names: tuple[str, str] = ("A", "B"),
        head: str = "categorical",
        backend_id: str = "toy",
    ):
        if slope <= 0:
            raise ValueError("slope must be positive")
        if head not in ("categorical", "continuous"):
            raise ValueError(f"unknown head {head!r}")
        if e_dim < 2:
            raise ValueError("toy embeddings need e_dim >= 2")
        self.slope = slope
        self.layers = layers
        self.e_dim = e_dim
        self.z_dim = z_dim
        self.generator_tile = generator_tile
        self.classifier_tile = classifier_tile
        self.class_names = tuple(class_names)
        self.head = head
        self.backend_id = backend_id

    def describe(self) -> BackendDescriptor:
        return BackendDescriptor(
            id=self.backend_id,
            kind="toy",
            layers=self.layers,
            e_dim=self.e_dim,
            z_dim=self.z_dim,
            classes=self.class_names,
            generator_tile=self.generator_tile,
            classifier_tile=self.classifier_tile,
        )

    def embeddings(self) -> EmbeddingSet:
        """Axis-unit class embeddings: class 0 on axis 0, class 1 on axis 1."""
        vectors = np.eye(2, self.e_dim)
        return EmbeddingSet(
            [
                ClassEmbedding(class_id=i, name=self.class_names[i], vector=vectors[i])
                for i in range(2)
            ]
        )

    def _class_coordinates(self, schedule: ConditioningSchedule) -> tuple[float, float, float]:
        # Per-layer class coordinate: -1 for pure class 0, +1 for pure class 1,
        # 2w-1 under a blend of weight w.
        c = schedule.layers[:, 1] - schedule.layers[:, 0]
        coarse, mid, fine = np.array_split(c, 3)
        # The tint only follows the fine group when every fine layer agrees,
        # so partial fine-range swaps leave the classifier untouched.
        return float(np.mean(coarse)), float(np.mean(mid)), float(np.min(fine))

    def generate(self, seed: int, schedule: ConditioningSchedule) -> SyntheticImage:
        desc = self.describe()
        if schedule.num_layers != desc.layers:
            raise ValueError(
                f"schedule has {schedule.num_layers} layers, backend expects {desc.layers}"
            )
        if schedule.e_dim != desc.e_dim:
            raise ValueError(
                f"schedule e_dim {schedule.e_dim} does not match backend e_dim {desc.e_dim}"
            )
        c_coarse, c_mid, c_fine = self._class_coordinates(schedule)
        rng = SplitMix64(seed)
        phases = [2.0 * math.pi * rng.next_double() for _ in range(4)]

        px = self.generator_tile.px
        coords = (np.arange(px) + 0.5) / px
        theta = math.pi / 4.0 + c_coarse * math.pi / 12.0
        m = 2.0 ** (0.5 * c_mid)
        # Luminance is a sum of four sine octaves (frequencies 2m..16m) of the
        # rotated coordinate u*cos(theta) + v*sin(theta). The angle addition
        # identity splits each octave into 1-D factors, so only 1-D arrays
        # ever hit a transcendental.
        col = coords * math.cos(theta)  # varies along x
        row = coords * math.sin(theta)  # varies along y
        g = np.full((px, px), 0.5)
        for k in range(4):
            freq = 2.0 * math.pi * m * (2.0 ** (k + 1))
            col_sin = 0.125 * np.sin(freq * col + phases[k])
            col_cos = 0.125 * np.cos(freq * col + phases[k])
            row_sin = np.sin(freq * row)[:, None]
            row_cos = np.cos(freq * row)[:, None]
            g += col_sin[None, :] * row_cos
            g += col_cos[None, :] * row_sin

        pixels = np.empty((px, px, 3), dtype=np.uint8)
        for channel, gain in ((0, 1.0 + self.TINT_GAIN * c_fine), (1, 1.0),
                              (2, 1.0 - self.TINT_GAIN * c_fine)):
            scaled = np.clip(g * gain, 0.0, 1.0)
            scaled *= 255.0
            scaled += 0.5
            pixels[:, :, channel] = np.floor(scaled).astype(np.uint8)
        return SyntheticImage(
            pixels=pixels,
            tile=self.generator_tile,
            provenance=Provenance(seed, schedule.digest(), self.backend_id),
        )

    def tint_statistic(self, pixels: np.ndarray) -> float:
        """Normalized red/blue split: mean(R - B) / (0.16 * mean(G)) on [0, 1] scale."""
        arr = np.asarray(pixels)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ValueError(f"expected (h, w, 3) pixels, got shape {arr.shape}")
        if arr.shape[0] == 0 or arr.shape[1] == 0:
            raise ValueError("image is empty")
        x = arr.astype(np.float64) / 255.0
        mean_g = float(np.mean(x[:, :, 1]))
        if mean_g == 0.0:
            raise ValueError("degenerate input: zero green channel")
        return float(
            (np.mean(x[:, :, 0]) - np.mean(x[:, :, 2])) / (2.0 * self.TINT_GAIN * mean_g)
        )

    def classify(self, pixels: np.ndarray) -> Prediction:
        arr = np.asarray(pixels)
        expected = self.classifier_tile.px
        if arr.ndim != 3 or arr.shape[:2] != (expected, expected):
            raise ValueError(
                f"classifier expects a {expected}x{expected} raster, got {arr.shape}"
            )
        tau = self.tint_statistic(arr)
        if self.head == "continuous":
            return Prediction("continuous", (max(-1.0, min(1.0, tau)),))
        p_b = 1.0 / (1.0 + math.exp(-self.slope * tau))
        return Prediction("categorical", (1.0 - p_b, p_b))


def generate_and_classify(
    backend: Backend, seed: int, schedule: ConditioningSchedule
) -> tuple[SyntheticImage, Prediction]:
    """Generate, magnification-match to the classifier raster, classify."""
    desc = backend.describe()
    image = backend.generate(seed, schedule)
    tile = center_crop_resize(image.pixels, desc.generator_tile, desc.classifier_tile)
    return image, backend.classify(tile)
