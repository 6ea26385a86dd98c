"""Per-seed classifier-concordance assessment and dataset-level screening.

For one seed, the generator renders an image per class from the same noise;
the classifier scores both. A seed where both predictions match their
generating class and both are confident is strongly concordant; matching but
less confident is weak; any mismatch is non-concordant.
"""

from __future__ import annotations

import json
from collections.abc import Iterable, Iterator
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .backend import Backend, Prediction, generate_and_classify
from .latent import EmbeddingSet, uniform_schedule


class Strength(str, Enum):
    STRONG = "strong"
    WEAK = "weak"


class Bucket(str, Enum):
    STRONG = "strong"
    WEAK = "weak"
    NON = "non"


@dataclass(frozen=True)
class Thresholds:
    strong_confidence: float = 0.75   # categorical: strong above this post-softmax
    continuous_strength: float = 0.5  # continuous: strong outside +/- this band

    def __post_init__(self):
        if not 0.0 < self.strong_confidence < 1.0:
            raise ValueError("strong_confidence must be in (0, 1)")
        if not self.continuous_strength > 0.0:
            raise ValueError("continuous_strength must be positive")


def strength(pred: Prediction, thresholds: Thresholds = Thresholds()) -> Strength:
    """Strong only on a strict threshold crossing; boundary equality is weak."""
    if pred.head == "categorical":
        return (
            Strength.STRONG
            if max(pred.values) > thresholds.strong_confidence
            else Strength.WEAK
        )
    return (
        Strength.STRONG
        if abs(pred.values[0]) > thresholds.continuous_strength
        else Strength.WEAK
    )


def predicted_class(pred: Prediction) -> int | None:
    """Argmax for categorical heads, sign for continuous; exact ties pick nobody."""
    if pred.head == "categorical":
        top = max(pred.values)
        winners = [i for i, v in enumerate(pred.values) if v == top]
        return winners[0] if len(winners) == 1 else None
    score = pred.values[0]
    if score < 0.0:
        return 0
    if score > 0.0:
        return 1
    return None


@dataclass
class ClassOutcome:
    gan_class: int
    pred_class: int | None
    prediction: Prediction
    strength: Strength


@dataclass
class ConcordanceRecord:
    seed: int
    entries: tuple[ClassOutcome, ...]
    bucket: Bucket

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "entries": [
                {
                    "gan_class": e.gan_class,
                    "pred_class": e.pred_class,
                    "values": list(e.prediction.values),
                    "strength": e.strength.value,
                }
                for e in self.entries
            ],
            "bucket": self.bucket.value,
        }

    @classmethod
    def from_json(cls, doc: dict, head: str = "categorical") -> "ConcordanceRecord":
        entries = tuple(
            ClassOutcome(
                gan_class=int(e["gan_class"]),
                pred_class=None if e["pred_class"] is None else int(e["pred_class"]),
                prediction=Prediction(head, tuple(e["values"])),
                strength=Strength(e["strength"]),
            )
            for e in doc["entries"]
        )
        return cls(seed=int(doc["seed"]), entries=entries, bucket=Bucket(doc["bucket"]))


def assess_seed(
    backend: Backend,
    seed: int,
    embeddings: EmbeddingSet,
    thresholds: Thresholds = Thresholds(),
) -> ConcordanceRecord:
    """Generate one image per class from the same seed and bucket the outcome."""
    desc = backend.describe()
    entries = []
    for gan_class, emb in enumerate(embeddings.classes):
        schedule = uniform_schedule(emb.vector, desc.layers)
        try:
            _, pred = generate_and_classify(backend, seed, schedule)
        except Exception as exc:
            raise RuntimeError(
                f"seed {seed}, class {gan_class} ({emb.name}): {exc}"
            ) from exc
        entries.append(
            ClassOutcome(gan_class, predicted_class(pred), pred, strength(pred, thresholds))
        )
    if any(e.pred_class != e.gan_class for e in entries):
        bucket = Bucket.NON
    elif all(e.strength is Strength.STRONG for e in entries):
        bucket = Bucket.STRONG
    else:
        bucket = Bucket.WEAK
    return ConcordanceRecord(seed=seed, entries=tuple(entries), bucket=bucket)


@dataclass
class ScreeningSummary:
    total: int
    counts: dict[str, int]

    @property
    def fractions(self) -> dict[str, float]:
        return {k: v / self.total for k, v in self.counts.items()}

    @property
    def percents(self) -> dict[str, str]:
        return {k: f"{100.0 * v / self.total:.1f}%" for k, v in self.counts.items()}

    def line(self) -> str:
        p = self.percents
        return f"{p['strong']} strong, {p['weak']} weak, {p['non']} non-concordant"

    def to_json(self) -> dict:
        return {
            "total": self.total,
            "counts": dict(self.counts),
            "fractions": self.fractions,
            "percents": self.percents,
        }


def summarize(records: Iterable[ConcordanceRecord]) -> ScreeningSummary:
    counts = {b.value: 0 for b in Bucket}
    total = 0
    for record in records:
        counts[record.bucket.value] += 1
        total += 1
    if total == 0:
        raise ValueError("cannot summarize an empty record stream")
    return ScreeningSummary(total=total, counts=counts)


def iter_screen(
    backend: Backend,
    first_seed: int,
    last_seed: int,
    embeddings: EmbeddingSet,
    thresholds: Thresholds = Thresholds(),
) -> Iterator[ConcordanceRecord]:
    """Stream records for seeds first..last inclusive, ascending."""
    if last_seed < first_seed:
        raise ValueError(f"empty seed range {first_seed}..{last_seed}")
    for seed in range(first_seed, last_seed + 1):
        yield assess_seed(backend, seed, embeddings, thresholds)


def screen(
    backend: Backend,
    first_seed: int,
    last_seed: int,
    embeddings: EmbeddingSet,
    thresholds: Thresholds = Thresholds(),
) -> tuple[list[ConcordanceRecord], ScreeningSummary]:
    records = list(iter_screen(backend, first_seed, last_seed, embeddings, thresholds))
    return records, summarize(records)


def write_records_jsonl(records: Iterable[ConcordanceRecord], path: str | Path) -> int:
    n = 0
    with Path(path).open("w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record.to_json()) + "\n")
            n += 1
    return n


def read_records_jsonl(path: str | Path, head: str = "categorical") -> list[ConcordanceRecord]:
    records = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(ConcordanceRecord.from_json(json.loads(line), head))
    return records
