"""HTTP wire protocol for attaching external generator/classifier models.

Three JSON endpoints: POST /v1/describe, /v1/generate, /v1/classify. Images
travel as base64 of raw row-major RGB8 bytes. Contract violations come back
as HTTP 400 with {"error": text}.
"""

from __future__ import annotations

import base64

import numpy as np
import requests
from fastapi import FastAPI
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .backend import Backend, BackendDescriptor, Prediction, Provenance, SyntheticImage
from .imaging import TileSpec
from .latent import ConditioningSchedule


class WireError(RuntimeError):
    """A backend endpoint rejected the request or broke the protocol."""


def encode_rgb8(pixels: np.ndarray) -> str:
    return base64.b64encode(np.ascontiguousarray(pixels, dtype=np.uint8).tobytes()).decode()


def decode_rgb8(data: str, width: int, height: int) -> np.ndarray:
    raw = base64.b64decode(data)
    expected = width * height * 3
    if len(raw) != expected:
        raise WireError(f"payload carries {len(raw)} bytes, dims imply {expected}")
    return np.frombuffer(raw, dtype=np.uint8).reshape(height, width, 3).copy()


class HttpBackend:
    """Client for a model service speaking the /v1 protocol."""

    def __init__(self, base_url: str, timeout: float = 60.0):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self._session = requests.Session()
        self._session.trust_env = False  # never route localhost through proxies
        self._descriptor: BackendDescriptor | None = None

    def _post(self, path: str, body: dict) -> dict:
        resp = self._session.post(
            f"{self.base_url}{path}", json=body, timeout=self.timeout
        )
        if resp.status_code == 400:
            try:
                detail = resp.json().get("error", resp.text)
            except ValueError:
                detail = resp.text
            raise WireError(f"{path}: {detail}")
        resp.raise_for_status()
        return resp.json()

    def describe(self) -> BackendDescriptor:
        if self._descriptor is None:
            doc = self._post("/v1/describe", {})
            self._descriptor = BackendDescriptor(
                id=str(doc["id"]),
                kind="external",
                layers=int(doc["layers"]),
                e_dim=int(doc["e_dim"]),
                z_dim=int(doc["z_dim"]),
                classes=tuple(doc["classes"]),
                generator_tile=TileSpec(um=float(doc["gen_um"]), px=int(doc["gen_px"])),
                classifier_tile=TileSpec(um=float(doc["clf_um"]), px=int(doc["clf_px"])),
            )
        return self._descriptor

    def generate(self, seed: int, schedule: ConditioningSchedule) -> SyntheticImage:
        doc = self._post(
            "/v1/generate",
            {"seed": seed, "schedule": schedule.layers.tolist()},
        )
        pixels = decode_rgb8(doc["rgb8_b64"], int(doc["width"]), int(doc["height"]))
        desc = self.describe()
        return SyntheticImage(
            pixels=pixels,
            tile=desc.generator_tile,
            provenance=Provenance(seed, schedule.digest(), desc.id),
        )

    def classify(self, pixels: np.ndarray) -> Prediction:
        arr = np.asarray(pixels, dtype=np.uint8)
        doc = self._post(
            "/v1/classify",
            {
                "width": int(arr.shape[1]),
                "height": int(arr.shape[0]),
                "rgb8_b64": encode_rgb8(arr),
            },
        )
        # Raw continuous values pass through unmodified; only the local toy clamps.
        return Prediction(head=str(doc["head"]), values=tuple(doc["values"]))


class _GenerateBody(BaseModel):
    seed: int
    schedule: list[list[float]]


class _ClassifyBody(BaseModel):
    width: int
    height: int
    rgb8_b64: str


def create_wire_app(backend: Backend) -> FastAPI:
    """Serve any in-process backend over the /v1 protocol."""
    app = FastAPI(title="model-backend")

    def bad_request(message: str) -> JSONResponse:
        return JSONResponse(status_code=400, content={"error": message})

    @app.post("/v1/describe")
    def describe() -> dict:
        d = backend.describe()
        return {
            "id": d.id,
            "layers": d.layers,
            "e_dim": d.e_dim,
            "z_dim": d.z_dim,
            "classes": list(d.classes),
            "gen_px": d.generator_tile.px,
            "gen_um": d.generator_tile.um,
            "clf_px": d.classifier_tile.px,
            "clf_um": d.classifier_tile.um,
        }

    @app.post("/v1/generate")
    def generate(body: _GenerateBody):
        try:
            image = backend.generate(body.seed, ConditioningSchedule(np.array(body.schedule)))
        except ValueError as exc:
            return bad_request(str(exc))
        return {
            "width": image.width,
            "height": image.height,
            "rgb8_b64": encode_rgb8(image.pixels),
        }

    @app.post("/v1/classify")
    def classify(body: _ClassifyBody):
        try:
            pixels = decode_rgb8(body.rgb8_b64, body.width, body.height)
            pred = backend.classify(pixels)
        except (ValueError, WireError) as exc:
            return bad_request(str(exc))
        return {"head": pred.head, "values": list(pred.values)}

    return app
