import base64
import time

import pytest
from fastapi.testclient import TestClient

from histoblend.config import ProjectConfig
from histoblend.imaging import png_decode
from histoblend.service import create_app


@pytest.fixture()
def client(tmp_path):
    app = create_app(ProjectConfig(), data_dir=tmp_path / "data")
    with TestClient(app) as c:
        yield c


def wait_for_job(client, job_id, timeout=60.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        doc = client.get(f"/api/jobs/{job_id}").json()
        if doc["status"] in ("done", "failed"):
            return doc
        time.sleep(0.05)
    raise TimeoutError(f"job {job_id} did not finish")


class TestProject:
    def test_echo_includes_config_backend_embeddings(self, client):
        doc = client.get("/api/project").json()
        assert doc["config"]["backend"] == "toy"
        assert doc["backend"]["layers"] == 12
        assert len(doc["embeddings"]) == 2
        assert len(doc["embeddings"][0]["vector"]) == 16


class TestGenerate:
    def test_deterministic_png(self, client):
        body = {"seed": 5, "w": 0.5}
        first = client.post("/api/generate", json=body).json()
        second = client.post("/api/generate", json=body).json()
        assert first["png_b64"] == second["png_b64"]
        assert first["prediction"] == second["prediction"]

    def test_weight_out_of_range_is_400(self, client):
        resp = client.post("/api/generate", json={"seed": 5, "w": 1.5})
        assert resp.status_code == 400

    def test_both_or_neither_selector_is_400(self, client):
        assert client.post("/api/generate", json={"seed": 5}).status_code == 400
        schedule = [[0.0] * 16] * 12
        resp = client.post(
            "/api/generate", json={"seed": 5, "w": 0.5, "schedule": schedule}
        )
        assert resp.status_code == 400

    def test_malformed_body_is_400(self, client):
        assert client.post("/api/generate", json={"w": 0.5}).status_code == 400

    def test_schedule_equals_pure_weight(self, client):
        doc = client.get("/api/project").json()
        e_a = doc["embeddings"][0]["vector"]
        via_w = client.post("/api/generate", json={"seed": 7, "w": 0.0}).json()
        via_schedule = client.post(
            "/api/generate", json={"seed": 7, "schedule": [e_a] * 12}
        ).json()
        assert via_w["png_b64"] == via_schedule["png_b64"]

    def test_bad_schedule_shape_is_400(self, client):
        resp = client.post("/api/generate", json={"seed": 7, "schedule": [[0.0] * 5] * 12})
        assert resp.status_code == 400

    def test_raw_variant_returns_png_bytes(self, client):
        resp = client.post("/api/generate/raw", json={"seed": 7, "w": 0.0})
        assert resp.status_code == 200
        assert resp.headers["content-type"] == "image/png"
        assert png_decode(resp.content).shape == (256, 256, 3)

    def test_png_payload_decodes(self, client):
        doc = client.post("/api/generate", json={"seed": 7, "w": 1.0}).json()
        pixels = png_decode(base64.b64decode(doc["png_b64"]))
        assert pixels.shape == (256, 256, 3)


class TestBlendAndGrid:
    def test_blend_trace_shape_and_monotonicity(self, client):
        doc = client.post("/api/blend", json={"seed": 4, "steps": 11}).json()
        assert len(doc["steps"]) == 11
        p_b = [s["pred"][1] for s in doc["steps"]]
        assert all(b >= a - 0.01 for a, b in zip(p_b, p_b[1:]))
        assert doc["steps"][0]["w"] == 0.0 and doc["steps"][-1]["w"] == 1.0

    def test_blend_rejects_tiny_step_count(self, client):
        assert client.post("/api/blend", json={"seed": 4, "steps": 1}).status_code == 400

    def test_grid_has_six_cells(self, client):
        doc = client.post("/api/fig3", json={"seed": 4}).json()
        assert [c["label"] for c in doc["cells"]] == ["B1", "B2", "B3", "B4", "B5", "B6"]
        p = [c["pred"][1] for c in doc["cells"]]
        assert p[4] > 0.5 and p[5] > 0.5


class TestScreenJobs:
    def test_screen_job_lifecycle(self, client):
        resp = client.post("/api/screen", json={"from": 0, "to": 19}).json()
        record = wait_for_job(client, resp["job_id"])
        assert record["status"] == "done"
        assert len(record["outputs"]) == 2

        seeds = client.get("/api/seeds", params={"bucket": "strong", "limit": 50}).json()
        assert seeds["seeds"] == list(range(20))

        summary = client.get("/api/concordance/summary").json()
        assert summary["total"] == 20
        assert summary["counts"]["strong"] == 20
        assert sum(summary["fractions"].values()) == pytest.approx(1.0, abs=1e-9)

    def test_duplicate_submission_is_idempotent(self, client):
        first = client.post("/api/screen", json={"from": 0, "to": 3}).json()
        wait_for_job(client, first["job_id"])
        second = client.post("/api/screen", json={"from": 0, "to": 3}).json()
        assert second["job_id"] == first["job_id"]

    def test_empty_range_rejected(self, client):
        assert client.post("/api/screen", json={"from": 5, "to": 4}).status_code == 400

    def test_unknown_job_is_404(self, client):
        assert client.get("/api/jobs/nope").status_code == 404

    def test_seeds_requires_a_finished_screen(self, client):
        assert client.get("/api/seeds").status_code == 404

    def test_unknown_bucket_rejected(self, client):
        resp = client.post("/api/screen", json={"from": 0, "to": 1}).json()
        wait_for_job(client, resp["job_id"])
        assert client.get("/api/seeds", params={"bucket": "odd"}).status_code == 400


class TestPersistence:
    def test_restart_reproduces_job_listing(self, tmp_path):
        data_dir = tmp_path / "data"
        app = create_app(ProjectConfig(), data_dir=data_dir)
        with TestClient(app) as c:
            job_id = c.post("/api/screen", json={"from": 0, "to": 2}).json()["job_id"]
            wait_for_job(c, job_id)

        reborn = create_app(ProjectConfig(), data_dir=data_dir)
        with TestClient(reborn) as c:
            doc = c.get(f"/api/jobs/{job_id}").json()
            assert doc["status"] == "done"
            seeds = c.get("/api/seeds", params={"bucket": "strong"}).json()
            assert seeds["seeds"] == [0, 1, 2]
