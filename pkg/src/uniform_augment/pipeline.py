"""Dataset augmentation: scan a directory tree, augment every image per epoch, write PNGs.

Layout of an output root::

    <output>/manifest.json
    <output>/records.jsonl          (only with emit_records)
    <output>/epoch_<e>/<relative path with .png suffix>

Each (epoch, image) pair gets its own stream from :func:`derive_stream`,
so output bytes do not depend on the number of workers.
"""

from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path, PurePosixPath

from . import __version__
from .core import AugmentationSpace, augment, ensure_valid, space_to_dict
from .errors import DecodeError, InputError
from .imageio import SUPPORTED_SUFFIXES, encode_image, read_image
from .rng import derive_stream

log = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
RECORDS_NAME = "records.jsonl"
ENGINE_TAG = f"uniform_augment {__version__}"


@dataclass(frozen=True)
class DatasetEntry:
    index: int
    path: str  # relative, '/'-separated
    label: str | None

    @property
    def output_path(self) -> str:
        return str(PurePosixPath(self.path).with_suffix(".png"))


@dataclass(frozen=True)
class DatasetRef:
    root: Path
    entries: tuple[DatasetEntry, ...]

    def __len__(self):
        return len(self.entries)


def scan_dataset(root) -> DatasetRef:
    """Enumerate PNG/JPEG files under ``root``.

    Indices follow byte-wise order of the relative paths; the first
    directory level, when present, is taken as the class label.
    """
    root = Path(root)
    if not root.is_dir():
        raise InputError(f"input directory does not exist: {root}")
    rels = []
    for dirpath, _dirnames, filenames in os.walk(root):
        for name in filenames:
            if name.lower().endswith(SUPPORTED_SUFFIXES):
                full = Path(dirpath, name)
                rels.append(full.relative_to(root).as_posix())
    rels.sort(key=lambda r: r.encode("utf-8", "surrogateescape"))
    entries = []
    for i, rel in enumerate(rels):
        parts = PurePosixPath(rel).parts
        entries.append(DatasetEntry(i, rel, parts[0] if len(parts) > 1 else None))
    return DatasetRef(root, tuple(entries))


@dataclass
class RunManifest:
    master_seed: int
    epochs: int
    space: AugmentationSpace
    entries: list[dict]
    engine: str = ENGINE_TAG
    records: list[dict] | None = None

    @property
    def num_images(self) -> int:
        return len(self.entries)

    @property
    def num_failed(self) -> int:
        return sum(e["status"] != "ok" for e in self.entries)

    def to_dict(self) -> dict:
        return {
            "engine": self.engine,
            "master_seed": self.master_seed,
            "epochs": self.epochs,
            "space": space_to_dict(self.space),
            "num_images": self.num_images,
            "num_failed": self.num_failed,
            "records": RECORDS_NAME if self.records is not None else None,
            "entries": self.entries,
        }

    def write(self, output_root) -> Path:
        output_root = Path(output_root)
        path = output_root / MANIFEST_NAME
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")
        if self.records is not None:
            with open(output_root / RECORDS_NAME, "w") as fh:
                for rec in self.records:
                    fh.write(json.dumps(rec, sort_keys=True) + "\n")
        return path


def epoch_dir(output_root, epoch: int) -> Path:
    return Path(output_root) / f"epoch_{epoch}"


# worker-side state, set once per process by _init_worker
_JOB: dict = {}


def _init_worker(job: dict):
    _JOB.clear()
    _JOB.update(job)


def _process_entry(entry: DatasetEntry):
    job = _JOB
    try:
        image = read_image(Path(job["input_root"], entry.path))
    except DecodeError as exc:
        return entry.index, exc.reason, None
    records = []
    for epoch in range(job["epochs"]):
        rng = derive_stream(job["seed"], epoch, entry.index)
        out, record = augment(image, job["space"], rng)
        dest = epoch_dir(job["output_root"], epoch) / entry.output_path
        dest.parent.mkdir(parents=True, exist_ok=True)
        dest.write_bytes(encode_image(out))
        if job["emit_records"]:
            records.append({"epoch": epoch, "index": entry.index, "path": entry.path, **record.to_dict()})
    return entry.index, None, records


def augment_dataset(
    dataset: DatasetRef,
    output_root,
    space: AugmentationSpace,
    master_seed: int = 0,
    epochs: int = 1,
    workers: int = 1,
    emit_records: bool = False,
) -> RunManifest:
    """Augment every image of ``dataset`` for ``epochs`` epochs and write the manifest.

    Undecodable files are recorded in the manifest with status "error";
    the rest of the run continues.
    """
    ensure_valid(space)
    if len(dataset) == 0:
        raise InputError(f"no PNG/JPEG images found under {dataset.root}")
    if epochs < 1:
        raise InputError(f"epochs must be positive, got {epochs}")
    if workers < 1:
        raise InputError(f"workers must be positive, got {workers}")
    outputs = [e.output_path for e in dataset.entries]
    if len(set(outputs)) != len(outputs):
        raise InputError("two input files map to the same .png output path")

    output_root = Path(output_root)
    output_root.mkdir(parents=True, exist_ok=True)
    job = {
        "input_root": str(dataset.root),
        "output_root": str(output_root),
        "space": space,
        "seed": int(master_seed),
        "epochs": int(epochs),
        "emit_records": bool(emit_records),
    }

    entries = list(dataset.entries)
    if workers == 1:
        _init_worker(job)
        results = [_process_entry(e) for e in entries]
    else:
        chunk = max(1, len(entries) // (workers * 8))
        with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(job,)) as pool:
            results = list(pool.map(_process_entry, entries, chunksize=chunk))

    results.sort(key=lambda r: r[0])
    manifest_entries = []
    records = [] if emit_records else None
    for entry, (_, error, recs) in zip(entries, results):
        row = {"index": entry.index, "path": entry.path, "label": entry.label}
        if error is None:
            row.update(status="ok", output=entry.output_path)
            if records is not None:
                records.extend(recs)
        else:
            log.warning("skipping %s: %s", entry.path, error)
            row.update(status="error", error=error)
        manifest_entries.append(row)
    if records is not None:
        records.sort(key=lambda r: (r["epoch"], r["index"]))

    manifest = RunManifest(int(master_seed), int(epochs), space, manifest_entries, records=records)
    manifest.write(output_root)
    return manifest
