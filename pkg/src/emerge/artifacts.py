"""Atomic artifact IO, config hashing, and run manifests.

Every artifact embeds the semantic config hash so downstream stages can
refuse inputs produced under a different configuration. Writes go through
a temp file plus rename, so partially written outputs never appear under
their final name.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import tempfile
from contextlib import contextmanager
from typing import Iterable, Iterator, TextIO


class ConfigMismatch(ValueError):
    """An input artifact was produced under a different configuration."""


def config_hash(semantic: dict) -> str:
    blob = json.dumps(semantic, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def sha256_file(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def atomic_write_bytes(path: str, data: bytes) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path: str, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def write_json_artifact(path: str, obj: dict, cfg_hash: str) -> None:
    payload = {"config_hash": cfg_hash}
    payload.update(obj)
    atomic_write_text(path, json.dumps(payload, sort_keys=True, indent=2) + "\n")


def load_json_artifact(path: str, expected_hash: str | None = None) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    if expected_hash is not None and obj.get("config_hash") != expected_hash:
        raise ConfigMismatch(
            f"{path}: built with config {obj.get('config_hash')}, current is {expected_hash}"
        )
    return obj


def write_csv_artifact(path: str, rows: Iterable[Iterable[str]], cfg_hash: str) -> None:
    buf = io.StringIO()
    buf.write(f"# config={cfg_hash}\n")
    writer = csv.writer(buf, lineterminator="\n")
    for row in rows:
        writer.writerow(row)
    atomic_write_text(path, buf.getvalue())


def read_csv_artifact(path: str, expected_hash: str | None = None) -> list[list[str]]:
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline().rstrip("\n")
        if not first.startswith("# config="):
            raise ValueError(f"{path}: missing config header")
        found = first[len("# config=") :]
        if expected_hash is not None and found != expected_hash:
            raise ConfigMismatch(
                f"{path}: built with config {found}, current is {expected_hash}"
            )
        return list(csv.reader(fh))


def write_manifest(
    path: str,
    stage: str,
    config: dict,
    cfg_hash: str,
    inputs: dict[str, str],
    outputs: dict[str, str],
    counts: dict[str, int],
) -> None:
    # Deliberately no timestamps: identical runs must produce identical bytes.
    obj = {
        "stage": stage,
        "config": config,
        "inputs": inputs,
        "outputs": outputs,
        "counts": counts,
    }
    write_json_artifact(path, obj, cfg_hash)
