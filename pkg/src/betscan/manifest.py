"""Run manifests: enough recorded state to reproduce a run byte for byte.

Every CLI command writes one next to its outputs.  The manifest captures
the resolved configuration (every flag after defaulting), the sha256 of
each input file, the seed, and tool versions; `betscan rerun` replays a
manifest and must reproduce the recorded outputs exactly (wall time is
metadata and exempt).
"""

from __future__ import annotations

import hashlib
import json
import platform
from dataclasses import dataclass, field


@dataclass
class RunManifest:
    command: str
    config: dict
    inputs: dict[str, str] = field(default_factory=dict)
    outputs: list[str] = field(default_factory=list)
    seed: int | None = None
    versions: dict = field(default_factory=dict)
    wall_time_s: float = 0.0

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "config": self.config,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "seed": self.seed,
            "versions": self.versions,
            "wall_time_s": self.wall_time_s,
        }


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def tool_versions() -> dict:
    import numpy
    import scipy

    from . import __version__

    return {
        "betscan": __version__,
        "python": platform.python_version(),
        "numpy": numpy.__version__,
        "scipy": scipy.__version__,
    }


def new_manifest(command: str, config: dict, input_paths, seed=None) -> RunManifest:
    return RunManifest(
        command=command,
        config=config,
        inputs={str(p): sha256_file(p) for p in input_paths},
        seed=seed,
        versions=tool_versions(),
    )


def write_manifest(manifest: RunManifest, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(manifest.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_manifest(path) -> RunManifest:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    return RunManifest(
        command=payload["command"],
        config=payload["config"],
        inputs=payload.get("inputs", {}),
        outputs=payload.get("outputs", []),
        seed=payload.get("seed"),
        versions=payload.get("versions", {}),
        wall_time_s=payload.get("wall_time_s", 0.0),
    )
