"""Append-only job ledger with idempotent submission and atomic outputs."""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import threading
import time
from collections.abc import Callable
from dataclasses import dataclass, field, replace
from pathlib import Path


def atomic_write_bytes(path: Path, data: bytes) -> None:
    """Write via a sibling temp file and rename, so readers never see partials."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path: Path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def job_id_for(kind: str, params: dict) -> str:
    digest = hashlib.sha256(
        json.dumps({"kind": kind, "params": params}, sort_keys=True).encode()
    ).hexdigest()
    return digest[:16]


@dataclass
class JobRecord:
    job_id: str
    kind: str
    status: str  # queued | running | done | failed
    params: dict
    outputs: list[str] = field(default_factory=list)
    error: str | None = None
    created_at: float = 0.0
    updated_at: float = 0.0

    def to_json(self) -> dict:
        return {
            "job_id": self.job_id,
            "kind": self.kind,
            "status": self.status,
            "params": self.params,
            "outputs": list(self.outputs),
            "error": self.error,
            "created_at": self.created_at,
            "updated_at": self.updated_at,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "JobRecord":
        return cls(
            job_id=doc["job_id"],
            kind=doc["kind"],
            status=doc["status"],
            params=doc["params"],
            outputs=list(doc.get("outputs", [])),
            error=doc.get("error"),
            created_at=float(doc.get("created_at", 0.0)),
            updated_at=float(doc.get("updated_at", 0.0)),
        )


class JobStore:
    """JSONL ledger of job states; the latest line per id wins on reload."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.ledger = self.root / "jobs.jsonl"
        self._lock = threading.Lock()
        self._jobs: dict[str, JobRecord] = {}
        if self.ledger.exists():
            with self.ledger.open("r", encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if line:
                        record = JobRecord.from_json(json.loads(line))
                        self._jobs[record.job_id] = record

    def upsert(self, record: JobRecord) -> None:
        record.updated_at = time.time()
        with self._lock:
            self._jobs[record.job_id] = record
            with self.ledger.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(record.to_json()) + "\n")

    def get(self, job_id: str) -> JobRecord | None:
        with self._lock:
            return self._jobs.get(job_id)

    def list(self) -> list[JobRecord]:
        with self._lock:
            return sorted(self._jobs.values(), key=lambda r: r.created_at)

    def job_dir(self, job_id: str) -> Path:
        return self.root / job_id


Runner = Callable[[dict, Path], list[str]]


def submit(
    store: JobStore,
    kind: str,
    params: dict,
    runner: Runner,
    background: bool = False,
) -> JobRecord:
    """Run a job, or return the existing record for identical inputs."""
    job_id = job_id_for(kind, params)
    existing = store.get(job_id)
    if existing is not None and existing.status in ("queued", "running", "done"):
        return existing

    record = JobRecord(
        job_id=job_id, kind=kind, status="queued", params=params, created_at=time.time()
    )
    store.upsert(record)

    def work() -> None:
        store.upsert(replace(record, status="running"))
        out_dir = store.job_dir(job_id)
        out_dir.mkdir(parents=True, exist_ok=True)
        try:
            outputs = runner(params, out_dir)
        except Exception as exc:
            store.upsert(replace(record, status="failed", error=str(exc)))
            return
        store.upsert(replace(record, status="done", outputs=outputs))

    if background:
        threading.Thread(target=work, daemon=True).start()
    else:
        work()
    return store.get(job_id)  # type: ignore[return-value]
