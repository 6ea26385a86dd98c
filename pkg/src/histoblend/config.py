"""Project configuration: backend selection, tile geometry, thresholds, QC."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .backend import Backend, ToyBackend
from .concordance import Thresholds
from .imaging import QCParams, TileSpec
from .latent import EmbeddingSet, load_embeddings


@dataclass
class ToyParams:
    slope: float = 6.0
    layers: int = 12
    e_dim: int = 16
    z_dim: int = 64
    head: str = "categorical"
    class_names: tuple[str, str] = ("A", "B")


@dataclass
class ProjectConfig:
    backend: str = "toy"  # "toy" or the base URL of an external model service
    generator_tile: TileSpec = field(default_factory=lambda: TileSpec(400.0, 256))
    classifier_tile: TileSpec = field(default_factory=lambda: TileSpec(302.0, 299))
    embeddings_path: str | None = None
    thresholds: Thresholds = field(default_factory=Thresholds)
    toy: ToyParams = field(default_factory=ToyParams)
    qc: QCParams = field(default_factory=QCParams)
    provenance: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "backend": self.backend,
            "generator_tile": {"um": self.generator_tile.um, "px": self.generator_tile.px},
            "classifier_tile": {"um": self.classifier_tile.um, "px": self.classifier_tile.px},
            "embeddings_path": self.embeddings_path,
            "thresholds": {
                "strong_confidence": self.thresholds.strong_confidence,
                "continuous_strength": self.thresholds.continuous_strength,
            },
            "toy": {
                "slope": self.toy.slope,
                "layers": self.toy.layers,
                "e_dim": self.toy.e_dim,
                "z_dim": self.toy.z_dim,
                "head": self.toy.head,
                "class_names": list(self.toy.class_names),
            },
            "qc": {
                "gray_delta": self.qc.gray_delta,
                "gray_frac": self.qc.gray_frac,
                "blur_sigma": self.qc.blur_sigma,
                "blur_threshold": self.qc.blur_threshold,
                "tissue_frac": self.qc.tissue_frac,
            },
            "provenance": self.provenance,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "ProjectConfig":
        cfg = cls()
        if "backend" in doc:
            cfg.backend = str(doc["backend"])
        for attr in ("generator_tile", "classifier_tile"):
            if attr in doc:
                setattr(cfg, attr, TileSpec(um=float(doc[attr]["um"]), px=int(doc[attr]["px"])))
        cfg.embeddings_path = doc.get("embeddings_path")
        if "thresholds" in doc:
            cfg.thresholds = Thresholds(
                strong_confidence=float(doc["thresholds"].get("strong_confidence", 0.75)),
                continuous_strength=float(doc["thresholds"].get("continuous_strength", 0.5)),
            )
        if "toy" in doc:
            t = doc["toy"]
            cfg.toy = ToyParams(
                slope=float(t.get("slope", 6.0)),
                layers=int(t.get("layers", 12)),
                e_dim=int(t.get("e_dim", 16)),
                z_dim=int(t.get("z_dim", 64)),
                head=str(t.get("head", "categorical")),
                class_names=tuple(t.get("class_names", ("A", "B"))),
            )
        if "qc" in doc:
            q = doc["qc"]
            cfg.qc = QCParams(
                gray_delta=int(q.get("gray_delta", 13)),
                gray_frac=float(q.get("gray_frac", 0.8)),
                blur_sigma=float(q.get("blur_sigma", 3.0)),
                blur_threshold=float(q.get("blur_threshold", 0.02)),
                tissue_frac=float(q.get("tissue_frac", 0.5)),
            )
        cfg.provenance = doc.get("provenance", {})
        return cfg


def load_config(path: str | Path) -> ProjectConfig:
    return ProjectConfig.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def save_config(config: ProjectConfig, path: str | Path) -> None:
    Path(path).write_text(json.dumps(config.to_json(), indent=2), encoding="utf-8")


def make_backend(config: ProjectConfig) -> Backend:
    """Instantiate the configured backend; external endpoints get a handshake."""
    if config.backend == "toy":
        return ToyBackend(
            slope=config.toy.slope,
            layers=config.toy.layers,
            e_dim=config.toy.e_dim,
            z_dim=config.toy.z_dim,
            generator_tile=config.generator_tile,
            classifier_tile=config.classifier_tile,
            class_names=config.toy.class_names,
            head=config.toy.head,
        )
    from .wire import HttpBackend  # deferred so toy projects never import requests

    backend = HttpBackend(config.backend)
    backend.describe()  # fail fast when the endpoint is unreachable
    return backend


def resolve_embeddings(config: ProjectConfig, backend: Backend) -> EmbeddingSet:
    """Class embeddings from the configured file, or the toy defaults."""
    if config.embeddings_path:
        return load_embeddings(config.embeddings_path)
    if isinstance(backend, ToyBackend):
        return backend.embeddings()
    raise ValueError("an embeddings file is required when using an external backend")
