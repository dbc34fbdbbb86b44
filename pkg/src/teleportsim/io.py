"""Bit-exact file formats: flat configs, CSV tables, event records, manifests.

Numbers are serialized with 17 significant digits, which round-trips
IEEE doubles losslessly.  Every data file starts with a comment line
embedding the manifest hash of the run that produced it; the hash covers
the subcommand, the fully resolved configuration, the seed and the
toolkit version, so byte-identical inputs give byte-identical outputs.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

from .pipeline import DETECTORS, TIME_BINS, DetectionEvent

MANIFEST_PREFIX = "# manifest="


def format_number(x) -> str:
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, int):
        return str(x)
    return format(float(x), ".17g")


def parse_flat_config(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; '#' starts a comment, keys are unique."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ValueError(f"line {lineno}: empty key")
        if key in out:
            raise ValueError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def serialize_flat_config(config: dict) -> str:
    return "".join(f"{k} = {config[k]}\n" for k in sorted(config))


@dataclass(frozen=True)
class RunManifest:
    """Provenance record of one CLI run."""

    subcommand: str
    config: dict
    seed: int
    version: str
    inputs: tuple[str, ...] = ()
    outputs: tuple[str, ...] = ()
    created_utc: str | None = field(default=None, compare=False)

    def hash(self) -> str:
        """Deterministic digest of the run identity (no wall-clock data)."""
        payload = "\n".join(
            [
                f"subcommand={self.subcommand}",
                f"seed={self.seed}",
                f"version={self.version}",
                serialize_flat_config({k: str(v) for k, v in self.config.items()}),
            ]
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def write_manifest(path: Path, manifest: RunManifest) -> None:
    doc = {
        "subcommand": manifest.subcommand,
        "config": {k: str(v) for k, v in sorted(manifest.config.items())},
        "seed": manifest.seed,
        "version": manifest.version,
        "inputs": list(manifest.inputs),
        "outputs": list(manifest.outputs),
        "manifest_hash": manifest.hash(),
        "created_utc": manifest.created_utc
        or datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def write_table(path: Path, header: Sequence[str], rows: Iterable[Sequence], manifest_hash: str) -> None:
    """CSV with a fixed header and 17-significant-digit numbers."""
    lines = [f"{MANIFEST_PREFIX}{manifest_hash}", ",".join(header)]
    for row in rows:
        if len(row) != len(header):
            raise ValueError("row width does not match header")
        lines.append(",".join(format_number(v) if not isinstance(v, str) else v for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_table(path: Path) -> tuple[str, list[str], list[list[str]]]:
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or not lines[0].startswith(MANIFEST_PREFIX):
        raise ValueError(f"{path}: missing manifest line")
    manifest_hash = lines[0][len(MANIFEST_PREFIX):]
    header = lines[1].split(",")
    rows = [line.split(",") for line in lines[2:] if line]
    return manifest_hash, header, rows


def write_events(path: Path, events: Iterable[DetectionEvent], manifest_hash: str) -> None:
    """Line-delimited records: trial_id,detector_id,time_bin,timestamp_ns."""
    lines = [f"{MANIFEST_PREFIX}{manifest_hash}"]
    for ev in events:
        lines.append(f"{ev.trial_id},{ev.detector_id},{ev.time_bin},{ev.timestamp_ns}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_events(path: Path) -> tuple[str, list[DetectionEvent]]:
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or not lines[0].startswith(MANIFEST_PREFIX):
        raise ValueError(f"{path}: missing manifest line")
    manifest_hash = lines[0][len(MANIFEST_PREFIX):]
    events = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 4:
            raise ValueError(f"{path}:{lineno}: expected 4 fields")
        trial, det, bin_, stamp = parts
        if det not in DETECTORS:
            raise ValueError(f"{path}:{lineno}: unknown detector {det!r}")
        if bin_ not in TIME_BINS:
            raise ValueError(f"{path}:{lineno}: unknown time bin {bin_!r}")
        events.append(DetectionEvent(int(trial), det, bin_, int(stamp)))
    return manifest_hash, events
