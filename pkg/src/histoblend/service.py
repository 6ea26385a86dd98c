"""HTTP studio service: generation, blending, screening jobs, and results."""

from __future__ import annotations

import base64
import json
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .backend import Backend, generate_and_classify
from .blendlab import blend_sequence, fig3_grid
from .concordance import Bucket, iter_screen, summarize
from .config import ProjectConfig, make_backend, resolve_embeddings
from .imaging import png_encode
from .jobs import JobStore, atomic_write_text, submit
from .latent import ConditioningSchedule, EmbeddingSet, blend_embeddings, uniform_schedule


class GenerateRequest(BaseModel):
    seed: int = Field(ge=0)
    w: float | None = None
    schedule: list[list[float]] | None = None


class BlendRequest(BaseModel):
    seed: int = Field(ge=0)
    steps: int = Field(default=11, ge=2)


class GridRequest(BaseModel):
    seed: int = Field(ge=0)


class ScreenRequest(BaseModel):
    from_seed: int = Field(alias="from", ge=0)
    to_seed: int = Field(alias="to", ge=0)


def _prediction_json(pred) -> dict:
    return {"head": pred.head, "values": list(pred.values)}


def create_app(
    config: ProjectConfig | None = None,
    data_dir: str | Path = "studio-data",
    frontend_dir: str | Path | None = None,
) -> FastAPI:
    config = config or ProjectConfig()
    backend: Backend = make_backend(config)
    embeddings: EmbeddingSet = resolve_embeddings(config, backend)
    descriptor = backend.describe()
    store = JobStore(data_dir)

    app = FastAPI(title="histoblend studio")

    @app.exception_handler(RequestValidationError)
    async def invalid_request(_: Request, exc: RequestValidationError) -> JSONResponse:
        return JSONResponse(status_code=400, content={"error": str(exc.errors())})

    def schedule_for(req: GenerateRequest) -> ConditioningSchedule:
        if (req.w is None) == (req.schedule is None):
            raise HTTPException(400, detail="provide exactly one of 'w' or 'schedule'")
        if req.w is not None:
            if not 0.0 <= req.w <= 1.0:
                raise HTTPException(400, detail=f"w must be in [0, 1], got {req.w}")
            vector = blend_embeddings(embeddings.classes[0], embeddings.classes[1], req.w)
            return uniform_schedule(vector, descriptor.layers)
        try:
            return ConditioningSchedule(np.array(req.schedule, dtype=np.float64))
        except ValueError as exc:
            raise HTTPException(400, detail=str(exc)) from exc

    def run_generate(req: GenerateRequest) -> tuple[bytes, dict]:
        try:
            image, pred = generate_and_classify(backend, req.seed, schedule_for(req))
        except ValueError as exc:
            raise HTTPException(400, detail=str(exc)) from exc
        return png_encode(image.pixels), _prediction_json(pred)

    @app.get("/api/project")
    def project() -> dict:
        return {
            "config": config.to_json(),
            "backend": {
                "id": descriptor.id,
                "kind": descriptor.kind,
                "layers": descriptor.layers,
                "e_dim": descriptor.e_dim,
                "z_dim": descriptor.z_dim,
                "classes": list(descriptor.classes),
                "gen_um": descriptor.generator_tile.um,
                "gen_px": descriptor.generator_tile.px,
                "clf_um": descriptor.classifier_tile.um,
                "clf_px": descriptor.classifier_tile.px,
            },
            "embeddings": [
                {"id": c.class_id, "name": c.name, "vector": c.vector.tolist()}
                for c in embeddings.classes
            ],
        }

    @app.post("/api/generate")
    def generate(req: GenerateRequest) -> dict:
        png, pred = run_generate(req)
        return {"png_b64": base64.b64encode(png).decode(), "prediction": pred}

    @app.post("/api/generate/raw")
    def generate_raw(req: GenerateRequest) -> Response:
        png, _ = run_generate(req)
        return Response(content=png, media_type="image/png")

    @app.post("/api/blend")
    def blend(req: BlendRequest) -> dict:
        trace = blend_sequence(backend, req.seed, req.steps, embeddings)
        return {
            "seed": trace.seed,
            "steps": [
                {
                    "w": step.w,
                    "png_b64": base64.b64encode(png_encode(step.image.pixels)).decode(),
                    "pred": list(step.prediction.values),
                }
                for step in trace.steps
            ],
        }

    @app.post("/api/fig3")
    def fig3(req: GridRequest) -> dict:
        try:
            cells = fig3_grid(backend, req.seed, embeddings)
        except ValueError as exc:
            raise HTTPException(400, detail=str(exc)) from exc
        return {
            "seed": req.seed,
            "cells": [
                {
                    "label": cell.label,
                    "ranges": [list(r) for r in cell.ranges],
                    "png_b64": base64.b64encode(png_encode(cell.image.pixels)).decode(),
                    "pred": list(cell.prediction.values),
                }
                for cell in cells
            ],
        }

    def screen_runner(params: dict, out_dir: Path) -> list[str]:
        lines = []
        records = []
        for record in iter_screen(
            backend, params["from"], params["to"], embeddings, config.thresholds
        ):
            records.append(record)
            lines.append(json.dumps(record.to_json()))
        records_path = out_dir / "concordance.jsonl"
        summary_path = out_dir / "summary.json"
        atomic_write_text(records_path, "\n".join(lines) + "\n")
        atomic_write_text(
            summary_path, json.dumps(summarize(records).to_json(), indent=2)
        )
        return [str(records_path), str(summary_path)]

    @app.post("/api/screen")
    def screen(req: ScreenRequest) -> dict:
        if req.to_seed < req.from_seed:
            raise HTTPException(400, detail="empty seed range")
        record = submit(
            store,
            "screen",
            {"from": req.from_seed, "to": req.to_seed},
            screen_runner,
            background=True,
        )
        return {"job_id": record.job_id, "status": record.status}

    @app.get("/api/jobs/{job_id}")
    def job_status(job_id: str) -> dict:
        record = store.get(job_id)
        if record is None:
            raise HTTPException(404, detail=f"no such job {job_id!r}")
        return record.to_json()

    def latest_screen_outputs() -> dict | None:
        done = [r for r in store.list() if r.kind == "screen" and r.status == "done"]
        if not done:
            return None
        record = max(done, key=lambda r: r.updated_at)
        return {path.rsplit("/", 1)[-1]: path for path in record.outputs}

    @app.get("/api/seeds")
    def seeds(bucket: str = "strong", limit: int = 100) -> dict:
        if bucket not in {b.value for b in Bucket}:
            raise HTTPException(400, detail=f"unknown bucket {bucket!r}")
        outputs = latest_screen_outputs()
        if outputs is None:
            raise HTTPException(404, detail="no finished screen job")
        matched = []
        with open(outputs["concordance.jsonl"], "r", encoding="utf-8") as fh:
            for line in fh:
                doc = json.loads(line)
                if doc["bucket"] == bucket:
                    matched.append(doc["seed"])
                    if len(matched) >= limit:
                        break
        return {"bucket": bucket, "seeds": matched}

    @app.get("/api/concordance/summary")
    def concordance_summary() -> dict:
        outputs = latest_screen_outputs()
        if outputs is None:
            raise HTTPException(404, detail="no finished screen job")
        with open(outputs["summary.json"], "r", encoding="utf-8") as fh:
            return json.load(fh)

    if frontend_dir is not None and Path(frontend_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(frontend_dir), html=True), name="studio")

    return app
