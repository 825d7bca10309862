"""Run manifests: configuration echo plus content digests of emitted files."""
from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from . import __version__

ARTIFACT = "moneystat"


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def digests(out_dir, names) -> dict:
    out_dir = Path(out_dir)
    return {name: sha256_file(out_dir / name) for name in sorted(names)}


def replica_seed(seed: int, k: int) -> int:
    """Seed of replica ``k``: first 64-bit word of SeedSequence(seed, spawn_key=(k,))."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(k),))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.generic):
        return x.item()
    return x


def write_manifest(path, command: str, config: dict, files: dict, stats: dict) -> dict:
    """Write the manifest JSON.

    Floats are written by ``repr`` (shortest round-trip form, at most 17
    significant digits), so the configuration reloads bit-exactly.
    """
    doc = {
        "artifact": ARTIFACT,
        "version": __version__,
        "command": command,
        "seed": config.get("seed"),
        "config": _plain(config),
        "digests": files,
        "stats": _plain(stats),
    }
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return doc


def read_manifest(path) -> dict:
    doc = json.loads(Path(path).read_text())
    if not isinstance(doc, dict) or "config" not in doc or "digests" not in doc:
        raise ValueError(f"{path}: not a run manifest")
    return doc
