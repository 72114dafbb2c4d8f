import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

from lumen.pde import DiffusionMethod, inpaint_diffusion
from lumen.png_io import (
    decode_image_bytes,
    decode_mask_bytes,
    encode_image_png,
    encode_mask_png,
)
from lumen.raster import BinaryMask, RasterImage
from lumen.service import create_app


def png_of(data: np.ndarray) -> bytes:
    return encode_image_png(RasterImage(data))


def wait_for_job(client, job_id, timeout=30.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        job = client.get(f"/api/jobs/{job_id}").json()
        if job["status"] in ("done", "failed"):
            return job
        time.sleep(0.02)
    raise AssertionError(f"job {job_id} did not finish in time")


@pytest.fixture()
def client(tmp_path):
    app = create_app(tmp_path / "data", workers=2)
    with TestClient(app) as c:
        yield c


@pytest.fixture()
def demo_image_bytes():
    rng = np.random.default_rng(0)
    return png_of(rng.random((20, 20, 3)))


def test_health(client):
    body = client.get("/api/health").json()
    assert body["status"] == "ok"
    assert "jobs" in body


def test_upload_image_and_fetch(client, demo_image_bytes):
    r = client.post("/api/images", content=demo_image_bytes,
                    headers={"content-type": "image/png"})
    assert r.status_code == 201
    meta = r.json()
    assert meta["width"] == 20 and meta["channels"] == 3
    fetched = client.get(f"/api/images/{meta['image_id']}")
    assert fetched.status_code == 200
    assert fetched.headers["content-type"] == "image/png"
    assert fetched.content == demo_image_bytes


def test_upload_idempotent(client, demo_image_bytes):
    a = client.post("/api/images", content=demo_image_bytes).json()
    b = client.post("/api/images", content=demo_image_bytes).json()
    assert a["image_id"] == b["image_id"]


def test_upload_rejects_non_png(client):
    r = client.post("/api/images", content=b"not an image")
    assert r.status_code == 400


def test_get_missing_image_404(client):
    assert client.get("/api/images/deadbeef").status_code == 404


def test_mask_from_seeds(client):
    data = np.full((16, 16), 0.2)
    data[:, 8:] = 0.9
    image_id = client.post("/api/images", content=png_of(data)).json()["image_id"]
    r = client.post(
        "/api/masks",
        json={"image_id": image_id, "seeds": [{"x": 2, "y": 3}], "tolerance": 0.1},
    )
    assert r.status_code == 201
    body = r.json()
    assert body["count_true"] == 16 * 8
    fetched = client.get(f"/api/masks/{body['mask_id']}")
    mask = decode_mask_bytes(fetched.content)
    assert mask.bits[:, :8].all() and not mask.bits[:, 8:].any()


def test_mask_empty_seed_list(client, demo_image_bytes):
    image_id = client.post("/api/images", content=demo_image_bytes).json()["image_id"]
    r = client.post("/api/masks", json={"image_id": image_id, "seeds": [],
                                        "tolerance": 0.2})
    assert r.status_code == 201
    assert r.json()["count_true"] == 0


def test_mask_out_of_bounds_seed_422(client, demo_image_bytes):
    image_id = client.post("/api/images", content=demo_image_bytes).json()["image_id"]
    r = client.post(
        "/api/masks",
        json={"image_id": image_id, "seeds": [{"x": -1, "y": 0}], "tolerance": 0.1},
    )
    assert r.status_code == 422


def test_mask_unknown_image_404(client):
    r = client.post("/api/masks", json={"image_id": "nope", "seeds": [],
                                        "tolerance": 0.1})
    assert r.status_code == 404


def test_mask_dilate_radius(client, demo_image_bytes):
    image_id = client.post("/api/images", content=demo_image_bytes).json()["image_id"]
    r0 = client.post("/api/masks", json={"image_id": image_id,
                                         "seeds": [{"x": 3, "y": 3}],
                                         "tolerance": 0.0})
    r1 = client.post("/api/masks", json={"image_id": image_id,
                                         "seeds": [{"x": 3, "y": 3}],
                                         "tolerance": 0.0,
                                         "dilate_radius": 1})
    assert r1.json()["count_true"] >= 9 * r0.json()["count_true"] // 2


def test_painted_mask_upload_round_trip(client):
    rng = np.random.default_rng(1)
    mask = BinaryMask(rng.random((14, 9)) < 0.35)
    payload = encode_mask_png(mask)
    r = client.post("/api/masks", content=payload,
                    headers={"content-type": "image/png"})
    assert r.status_code == 201
    body = r.json()
    assert body["count_true"] == int(mask.bits.sum())
    fetched = client.get(f"/api/masks/{body['mask_id']}").content
    assert decode_mask_bytes(fetched) == mask


def test_harmonic_job_lifecycle_and_bit_identical_result(client):
    rng = np.random.default_rng(2)
    # quantize up front: the job must be bit-identical to a direct library
    # call on the same decoded pixels the service sees
    image = decode_image_bytes(encode_image_png(RasterImage(rng.random((18, 18, 3)))))
    image_id = client.post("/api/images", content=encode_image_png(image)).json()["image_id"]
    bits = np.zeros((18, 18), bool)
    bits[5:10, 6:12] = True
    mask = BinaryMask(bits)
    mask_id = client.post("/api/masks", content=encode_mask_png(mask),
                          headers={"content-type": "image/png"}).json()["mask_id"]

    r = client.post("/api/jobs", json={
        "method": "harmonic",
        "params": {"solver_tol": 1e-10},
        "input_image_id": image_id,
        "mask_id": mask_id,
    })
    assert r.status_code == 202
    job = wait_for_job(client, r.json()["job_id"])
    assert job["status"] == "done", job.get("error")
    assert job["result_image_id"]
    assert job["finished_at"]

    served = client.get(f"/api/images/{job['result_image_id']}").content
    direct = inpaint_diffusion(
        image, mask, DiffusionMethod.harmonic(), solver_tol=1e-10
    ).image
    assert served == encode_image_png(direct)


def test_job_validation_errors(client, demo_image_bytes):
    image_id = client.post("/api/images", content=demo_image_bytes).json()["image_id"]
    # unknown method
    r = client.post("/api/jobs", json={"method": "magic",
                                       "input_image_id": image_id})
    assert r.status_code == 422
    # missing input image
    r = client.post("/api/jobs", json={"method": "harmonic",
                                       "input_image_id": "nope",
                                       "mask_id": "x"})
    assert r.status_code == 404
    # inpaint without mask
    r = client.post("/api/jobs", json={"method": "harmonic",
                                       "input_image_id": image_id})
    assert r.status_code == 422
    # osmosis without source
    r = client.post("/api/jobs", json={"method": "osmosis",
                                       "input_image_id": image_id})
    assert r.status_code == 422
    # bad parameter value
    mask_id = client.post(
        "/api/masks", json={"image_id": image_id, "seeds": [], "tolerance": 0.1}
    ).json()["mask_id"]
    r = client.post("/api/jobs", json={"method": "tv",
                                       "params": {"tv_epsilon": -1},
                                       "input_image_id": image_id,
                                       "mask_id": mask_id})
    assert r.status_code == 422
    # unknown parameter key
    r = client.post("/api/jobs", json={"method": "harmonic",
                                       "params": {"bogus": 1},
                                       "input_image_id": image_id,
                                       "mask_id": mask_id})
    assert r.status_code == 422


def test_failing_job_reports_error(client):
    image = RasterImage(np.random.default_rng(3).random((10, 10)))
    image_id = client.post("/api/images", content=encode_image_png(image)).json()["image_id"]
    mask = BinaryMask(np.ones((10, 10), bool))  # all damaged -> AllUnknown
    mask_id = client.post("/api/masks", content=encode_mask_png(mask),
                          headers={"content-type": "image/png"}).json()["mask_id"]
    r = client.post("/api/jobs", json={"method": "harmonic",
                                       "input_image_id": image_id,
                                       "mask_id": mask_id})
    job = wait_for_job(client, r.json()["job_id"])
    assert job["status"] == "failed"
    assert "entire image" in job["error"]
    assert job["result_image_id"] is None


def test_osmosis_job(client):
    rng = np.random.default_rng(4)
    visible_id = client.post(
        "/api/images", content=png_of(rng.random((12, 12, 3)))
    ).json()["image_id"]
    source_id = client.post(
        "/api/images", content=png_of(rng.random((12, 12)))
    ).json()["image_id"]
    r = client.post("/api/jobs", json={
        "method": "osmosis",
        "params": {"dt": 10, "steps": 5},
        "input_image_id": visible_id,
        "source_image_id": source_id,
    })
    assert r.status_code == 202
    job = wait_for_job(client, r.json()["job_id"])
    assert job["status"] == "done", job.get("error")


def test_feedback_rules(client, demo_image_bytes):
    image_id = client.post("/api/images", content=demo_image_bytes).json()["image_id"]
    bits = np.zeros((20, 20), bool)
    bits[4:8, 4:8] = True
    mask_id = client.post("/api/masks", content=encode_mask_png(BinaryMask(bits)),
                          headers={"content-type": "image/png"}).json()["mask_id"]
    job_id = client.post("/api/jobs", json={
        "method": "harmonic", "input_image_id": image_id, "mask_id": mask_id,
    }).json()["job_id"]

    wait_for_job(client, job_id)
    # out-of-range rating
    assert client.post(f"/api/jobs/{job_id}/feedback",
                       json={"rating": 0}).status_code == 422
    assert client.post(f"/api/jobs/{job_id}/feedback",
                       json={"rating": 6}).status_code == 422
    # happy path
    r = client.post(f"/api/jobs/{job_id}/feedback",
                    json={"rating": 5, "comment": "first folio looks right"})
    assert r.status_code == 200
    assert r.json()["feedback"] == {"rating": 5,
                                    "comment": "first folio looks right"}
    # visible in job listing
    listed = client.get("/api/jobs").json()
    entry = next(j for j in listed if j["job_id"] == job_id)
    assert entry["feedback"]["rating"] == 5
    # unknown job
    assert client.post("/api/jobs/zzz/feedback",
                       json={"rating": 3}).status_code == 404


def test_feedback_on_unfinished_job_409(tmp_path, demo_image_bytes):
    # zero progress: do not start the worker pool, so the job stays queued
    app = create_app(tmp_path / "data2", workers=1)
    client = TestClient(app)  # no context manager: lifespan never runs
    image_id = client.post("/api/images", content=demo_image_bytes).json()["image_id"]
    mask_id = client.post("/api/masks",
                          json={"image_id": image_id, "seeds": [], "tolerance": 0.1}
                          ).json()["mask_id"]
    job_id = client.post("/api/jobs", json={
        "method": "harmonic", "input_image_id": image_id, "mask_id": mask_id,
    }).json()["job_id"]
    r = client.post(f"/api/jobs/{job_id}/feedback", json={"rating": 4})
    assert r.status_code == 409


def test_restart_preserves_and_resumes_state(tmp_path, demo_image_bytes):
    data_dir = tmp_path / "persist"
    app1 = create_app(data_dir, workers=1)
    with TestClient(app1) as c1:
        image_id = c1.post("/api/images", content=demo_image_bytes).json()["image_id"]
        bits = np.zeros((20, 20), bool)
        bits[2:6, 3:9] = True
        mask_id = c1.post("/api/masks", content=encode_mask_png(BinaryMask(bits)),
                          headers={"content-type": "image/png"}).json()["mask_id"]
        job_id = c1.post("/api/jobs", json={
            "method": "harmonic", "input_image_id": image_id, "mask_id": mask_id,
        }).json()["job_id"]
        job = wait_for_job(c1, job_id)
        result_id = job["result_image_id"]
        c1.post(f"/api/jobs/{job_id}/feedback", json={"rating": 4, "comment": "ok"})
        result_bytes = c1.get(f"/api/images/{result_id}").content

    app2 = create_app(data_dir, workers=1)
    with TestClient(app2) as c2:
        job = c2.get(f"/api/jobs/{job_id}").json()
        assert job["status"] == "done"
        assert job["result_image_id"] == result_id
        assert job["feedback"] == {"rating": 4, "comment": "ok"}
        assert c2.get(f"/api/images/{image_id}").status_code == 200
        assert c2.get(f"/api/masks/{mask_id}").status_code == 200
        assert c2.get(f"/api/images/{result_id}").content == result_bytes


def test_queued_jobs_resume_after_restart(tmp_path, demo_image_bytes):
    data_dir = tmp_path / "resume"
    app1 = create_app(data_dir, workers=1)
    client = TestClient(app1)  # workers never started
    image_id = client.post("/api/images", content=demo_image_bytes).json()["image_id"]
    mask_id = client.post("/api/masks",
                          json={"image_id": image_id,
                                "seeds": [{"x": 0, "y": 0}],
                                "tolerance": 0.01}).json()["mask_id"]
    job_id = client.post("/api/jobs", json={
        "method": "harmonic", "input_image_id": image_id, "mask_id": mask_id,
    }).json()["job_id"]
    assert client.get(f"/api/jobs/{job_id}").json()["status"] == "queued"

    app2 = create_app(data_dir, workers=1)
    with TestClient(app2) as c2:
        job = wait_for_job(c2, job_id)
        assert job["status"] in ("done", "failed")


def test_oversized_upload_413(client, monkeypatch):
    import lumen.service as service_mod

    monkeypatch.setattr(service_mod, "MAX_UPLOAD_BYTES", 64)
    r = client.post("/api/images", content=b"\x89PNG" + b"0" * 100)
    assert r.status_code == 413


def test_static_ui_served_when_built(tmp_path):
    from pathlib import Path

    static_dir = Path(__file__).resolve().parents[1] / "src" / "lumen" / "static"
    app = create_app(tmp_path / "data3", workers=1)
    c = TestClient(app)
    r = c.get("/")
    assert r.status_code == 200
    if static_dir.is_dir():
        assert "lumen" in r.text.lower()
        assert c.get("/main.js").status_code == 200


def test_uploaded_images_never_mutated(client, demo_image_bytes):
    image_id = client.post("/api/images", content=demo_image_bytes).json()["image_id"]
    mask_id = client.post("/api/masks",
                          json={"image_id": image_id, "seeds": [{"x": 1, "y": 1}],
                                "tolerance": 0.05}).json()["mask_id"]
    job_id = client.post("/api/jobs", json={
        "method": "harmonic", "input_image_id": image_id, "mask_id": mask_id,
    }).json()["job_id"]
    job = wait_for_job(client, job_id)
    assert client.get(f"/api/images/{image_id}").content == demo_image_bytes
    if job["status"] == "done":
        assert job["result_image_id"] != image_id or decode_image_bytes(
            demo_image_bytes
        ) == decode_image_bytes(client.get(f"/api/images/{job['result_image_id']}").content)
