"""Artifact persistence: text payloads plus a manifest carrying version and checksum.

Every payload is written atomically under an exclusive lock and described by
``manifests/<kind>/<run>/<name>.json``. Loading verifies the manifest version
and the payload checksum before anything is parsed.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import time
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from filelock import FileLock

from .features.assemble import StageRow
from .features.schema import BASE_NAMES
from .lifecycle import CycleRecord, LifecycleEvent

DATA_DIR_ENV = "BURSTWATCH_DATA_DIR"

# Current payload version per artifact kind.
SCHEMA_VERSIONS = {
    "stream": 1,
    "truth": 1,
    "scenario": 1,
    "events": 1,
    "cycles": 1,
    "features": 1,
    "index": 1,
    "model": 1,
    "predictions": 1,
    "report": 1,
    "stats": 1,
}

_KIND_DIRS = {
    "stream": "data/streams",
    "truth": "data/streams",
    "scenario": "data/streams",
    "events": "data/events",
    "cycles": "data/events",
    "features": "data/features",
    "index": "models",
    "model": "models",
    "predictions": "reports",
    "report": "reports",
    "stats": "reports",
}


class StorageError(Exception):
    pass


class MissingArtifactError(StorageError, FileNotFoundError):
    pass


class ChecksumError(StorageError):
    pass


class SchemaVersionError(StorageError):
    def __init__(self, kind, found, expected):
        self.found = found
        self.expected = expected
        super().__init__(f"{kind} artifact has schema version {found}; this reader understands "
                         f"version {expected}")


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def config_hash(config) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return sha256_bytes(blob.encode())


def created_at() -> int:
    """Manifest timestamp; SOURCE_DATE_EPOCH pins it for reproducible output."""
    env = os.environ.get("SOURCE_DATE_EPOCH")
    return int(env) if env else int(time.time())


def default_root() -> Path:
    return Path(os.environ.get(DATA_DIR_ENV, "."))


@dataclass(frozen=True)
class ArtifactManifest:
    kind: str
    schema_version: int
    created_at: int
    config_hash: str
    path: str
    checksum: str

    def to_json(self) -> str:
        return json.dumps(self.__dict__, sort_keys=True, indent=1) + "\n"


class Store:
    """A data root laid out as data/streams, data/events, data/features, models, reports, manifests."""

    def __init__(self, root: str | Path | None = None):
        self.root = Path(root) if root is not None else default_root()

    def payload_path(self, kind: str, run: str, name: str) -> Path:
        return self.root / _KIND_DIRS[kind] / run / name

    def manifest_path(self, kind: str, run: str, name: str) -> Path:
        return self.root / "manifests" / kind / run / (name + ".json")

    def _lock(self, path: Path) -> FileLock:
        lock_dir = self.root / ".locks"
        lock_dir.mkdir(parents=True, exist_ok=True)
        return FileLock(str(lock_dir / (sha256_bytes(str(path).encode())[:16] + ".lock")))

    def exists(self, kind: str, run: str, name: str) -> bool:
        return self.manifest_path(kind, run, name).exists()

    def save(self, kind: str, run: str, name: str, payload: str | bytes, config=None,
             schema_version: int | None = None) -> ArtifactManifest:
        data = payload.encode("utf-8") if isinstance(payload, str) else payload
        path = self.payload_path(kind, run, name)
        mpath = self.manifest_path(kind, run, name)
        path.parent.mkdir(parents=True, exist_ok=True)
        mpath.parent.mkdir(parents=True, exist_ok=True)
        manifest = ArtifactManifest(
            kind=kind,
            schema_version=SCHEMA_VERSIONS[kind] if schema_version is None else schema_version,
            created_at=created_at(),
            config_hash=config_hash(config if config is not None else {}),
            path=str(path.relative_to(self.root)),
            checksum=sha256_bytes(data),
        )
        with self._lock(path):
            _atomic_write(path, data)
            _atomic_write(mpath, manifest.to_json().encode())
        return manifest

    @contextmanager
    def writer(self, kind: str, run: str, name: str, config=None):
        """Stream a large text payload to disk; the manifest is written on success."""
        path = self.payload_path(kind, run, name)
        mpath = self.manifest_path(kind, run, name)
        path.parent.mkdir(parents=True, exist_ok=True)
        mpath.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_name(path.name + ".tmp")
        with self._lock(path):
            with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
                yield fh
            os.replace(tmp, path)
            manifest = ArtifactManifest(kind, SCHEMA_VERSIONS[kind], created_at(),
                                        config_hash(config if config is not None else {}),
                                        str(path.relative_to(self.root)), sha256_file(path))
            _atomic_write(mpath, manifest.to_json().encode())

    def _manifest(self, kind, run, name, producer) -> ArtifactManifest:
        mpath = self.manifest_path(kind, run, name)
        if not mpath.exists():
            hint = f"; run `burstwatch {producer}` first" if producer else ""
            raise MissingArtifactError(f"missing {kind} artifact {run}/{name}{hint}")
        manifest = ArtifactManifest(**json.loads(mpath.read_text("utf-8")))
        expected = SCHEMA_VERSIONS[kind]
        if manifest.schema_version != expected:
            raise SchemaVersionError(kind, manifest.schema_version, expected)
        if not (self.root / manifest.path).exists():
            hint = f"; run `burstwatch {producer}` again" if producer else ""
            raise MissingArtifactError(f"payload {manifest.path} listed in the manifest is missing{hint}")
        return manifest

    def load(self, kind: str, run: str, name: str, producer: str | None = None) -> bytes:
        manifest = self._manifest(kind, run, name, producer)
        data = (self.root / manifest.path).read_bytes()
        if sha256_bytes(data) != manifest.checksum:
            raise ChecksumError(f"checksum mismatch for {manifest.path}")
        return data

    def verified_path(self, kind: str, run: str, name: str, producer: str | None = None) -> Path:
        """Path of a payload whose checksum has just been verified (for streaming reads)."""
        manifest = self._manifest(kind, run, name, producer)
        path = self.root / manifest.path
        if sha256_file(path) != manifest.checksum:
            raise ChecksumError(f"checksum mismatch for {manifest.path}")
        return path

    def load_text(self, kind, run, name, producer=None) -> str:
        return self.load(kind, run, name, producer).decode("utf-8")

    def save_json(self, kind, run, name, obj, config=None) -> ArtifactManifest:
        return self.save(kind, run, name, dumps_json(obj), config)

    def load_json(self, kind, run, name, producer=None):
        return json.loads(self.load_text(kind, run, name, producer))


def _atomic_write(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


def dumps_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


def fmt_float(v) -> str:
    return repr(float(v))


def _opt(v) -> str:
    return "" if v is None else str(v)


def _opt_int(s: str):
    return None if s == "" else int(s)


# ---- events and cycle snapshots -------------------------------------------

def dumps_events(events) -> str:
    return "".join(ev.to_json() + "\n" for ev in events)


def loads_events(text: str) -> list[LifecycleEvent]:
    return [LifecycleEvent.from_json(line) for line in text.splitlines() if line.strip()]


def dumps_cycles(cycles) -> str:
    return "".join(json.dumps(c.to_dict(), sort_keys=True, separators=(",", ":")) + "\n"
                   for c in sorted(cycles, key=lambda c: (c.key, c.cycle)))


def loads_cycles(text: str) -> list[CycleRecord]:
    return [CycleRecord.from_dict(json.loads(line)) for line in text.splitlines() if line.strip()]


# ---- stage feature rows ---------------------------------------------------

ROW_HEADER = ["key", "cycle", "stage", "t_p", "trigger", "burst", "offburst", "negative",
              "label", "tbb", "tra", "sax"] + list(BASE_NAMES)


def dumps_rows(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ROW_HEADER)
    for r in rows:
        w.writerow([r.key, r.cycle, r.stage, r.t_p, r.trigger, _opt(r.burst), _opt(r.offburst),
                    int(r.negative), _opt(r.label), _opt(r.tbb), _opt(r.tra), r.sax]
                   + [fmt_float(v) for v in r.base])
    return buf.getvalue()


def loads_rows(text: str) -> list[StageRow]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if header != ROW_HEADER:
        raise SchemaVersionError("features", "unknown header", "current header")
    rows = []
    for f in reader:
        rows.append(StageRow(f[0], int(f[1]), int(f[2]), int(f[3]), int(f[4]), _opt_int(f[5]),
                             _opt_int(f[6]), f[7] == "1",
                             np.array([float(v) for v in f[12:]], dtype=np.float64), f[11]))
    return rows


# ---- generic CSV ----------------------------------------------------------

def dumps_csv(header, records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for rec in records:
        w.writerow(["" if v is None else (fmt_float(v) if isinstance(v, float) else v) for v in rec])
    return buf.getvalue()


def loads_csv(text: str) -> list[dict]:
    return list(csv.DictReader(io.StringIO(text)))
