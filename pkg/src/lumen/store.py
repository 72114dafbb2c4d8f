"""Flat-directory persistence for the restoration service.

Everything lives under one data directory: ``images/<id>.png``,
``masks/<id>.png`` and ``jobs/<id>.json``. Images and masks are
content-addressed by a sha256 prefix, so re-uploads are idempotent and
results are tamper-evident. Writes go through temp-file-plus-rename so job
state transitions are atomic; the in-memory index is rebuilt from the
directory on boot.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import threading
import uuid
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .errors import DecodeError
from .png_io import decode_image_bytes, decode_mask_bytes, encode_mask_png
from .raster import BinaryMask

JOB_METHODS = ("harmonic", "tv", "exemplar", "osmosis")
JOB_STATES = ("queued", "running", "done", "failed")

_ID_BYTES = 16  # 32 hex chars of the sha256


def _utcnow() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass(frozen=True)
class StoredImage:
    image_id: str
    width: int
    height: int
    channels: int
    sha256: str


@dataclass
class RestorationJob:
    """One restoration request and its lifecycle record."""

    job_id: str
    method: str
    params: dict
    input_image_id: str
    mask_id: str | None = None
    source_image_id: str | None = None
    status: str = "queued"
    result_image_id: str | None = None
    error: str | None = None
    created_at: str = field(default_factory=_utcnow)
    finished_at: str | None = None
    feedback: dict | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, raw: dict) -> "RestorationJob":
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in raw.items() if k in known})

    def validate_state(self) -> None:
        if self.status not in JOB_STATES:
            raise ValueError(f"invalid job status {self.status!r}")
        if (self.status == "done") != (self.result_image_id is not None):
            raise ValueError("status=done iff a result image is present")
        if (self.status == "failed") != (self.error is not None):
            raise ValueError("status=failed iff an error is present")


def _atomic_write(path: Path, data: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class DataStore:
    """Thread-safe store over the flat data directory."""

    def __init__(self, root) -> None:
        self.root = Path(root)
        self.images_dir = self.root / "images"
        self.masks_dir = self.root / "masks"
        self.jobs_dir = self.root / "jobs"
        for d in (self.images_dir, self.masks_dir, self.jobs_dir):
            d.mkdir(parents=True, exist_ok=True)
        self._lock = threading.RLock()
        self._images: dict[str, StoredImage] = {}
        self._jobs: dict[str, RestorationJob] = {}
        self._mask_ids: set[str] = set()
        self._rebuild()

    def _rebuild(self) -> None:
        for path in sorted(self.images_dir.glob("*.png")):
            data = path.read_bytes()
            try:
                image = decode_image_bytes(data)
            except DecodeError:
                continue  # foreign file in the store directory
            self._images[path.stem] = StoredImage(
                path.stem,
                image.width,
                image.height,
                image.channels,
                hashlib.sha256(data).hexdigest(),
            )
        for path in sorted(self.masks_dir.glob("*.png")):
            self._mask_ids.add(path.stem)
        for path in sorted(self.jobs_dir.glob("*.json")):
            try:
                job = RestorationJob.from_dict(json.loads(path.read_text()))
            except (json.JSONDecodeError, TypeError):
                continue
            self._jobs[job.job_id] = job

    # ---- images ----

    def put_image(self, data: bytes) -> StoredImage:
        image = decode_image_bytes(data)  # raises DecodeError on bad input
        digest = hashlib.sha256(data).hexdigest()
        image_id = digest[: 2 * _ID_BYTES]
        with self._lock:
            if image_id in self._images:
                return self._images[image_id]
            _atomic_write(self.images_dir / f"{image_id}.png", data)
            meta = StoredImage(image_id, image.width, image.height, image.channels, digest)
            self._images[image_id] = meta
            return meta

    def get_image_meta(self, image_id: str) -> StoredImage | None:
        with self._lock:
            return self._images.get(image_id)

    def get_image_bytes(self, image_id: str) -> bytes | None:
        if self.get_image_meta(image_id) is None:
            return None
        return (self.images_dir / f"{image_id}.png").read_bytes()

    # ---- masks ----

    def put_mask(self, mask: BinaryMask) -> str:
        return self.put_mask_bytes(encode_mask_png(mask))[0]

    def put_mask_bytes(self, data: bytes) -> tuple[str, BinaryMask]:
        mask = decode_mask_bytes(data)  # raises DecodeError on bad input
        mask_id = hashlib.sha256(data).hexdigest()[: 2 * _ID_BYTES]
        with self._lock:
            if mask_id not in self._mask_ids:
                _atomic_write(self.masks_dir / f"{mask_id}.png", data)
                self._mask_ids.add(mask_id)
        return mask_id, mask

    def has_mask(self, mask_id: str) -> bool:
        with self._lock:
            return mask_id in self._mask_ids

    def get_mask_bytes(self, mask_id: str) -> bytes | None:
        if not self.has_mask(mask_id):
            return None
        return (self.masks_dir / f"{mask_id}.png").read_bytes()

    def get_mask(self, mask_id: str) -> BinaryMask | None:
        data = self.get_mask_bytes(mask_id)
        return None if data is None else decode_mask_bytes(data)

    # ---- jobs ----

    def new_job(self, **kwargs) -> RestorationJob:
        job = RestorationJob(job_id=uuid.uuid4().hex[:16], **kwargs)
        self.save_job(job)
        return job

    def save_job(self, job: RestorationJob) -> None:
        job.validate_state()
        payload = json.dumps(job.to_dict(), indent=2).encode()
        with self._lock:
            _atomic_write(self.jobs_dir / f"{job.job_id}.json", payload)
            self._jobs[job.job_id] = job

    def get_job(self, job_id: str) -> RestorationJob | None:
        with self._lock:
            return self._jobs.get(job_id)

    def list_jobs(self) -> list[RestorationJob]:
        with self._lock:
            return sorted(
                self._jobs.values(), key=lambda j: (j.created_at, j.job_id)
            )
