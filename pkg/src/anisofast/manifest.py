"""Reproducibility manifests for CLI runs.

A manifest records everything needed to reproduce a run byte-for-byte:
the subcommand, the effective configuration, a content hash over the
configuration and any input files, library versions, thread count, the
produced files with their own hashes, timings, and suite results. JSON
with sorted keys so manifests diff cleanly.
"""

from __future__ import annotations

import hashlib
import json
import os
import platform
from dataclasses import asdict, dataclass, field

__all__ = ["RunManifest", "content_hash", "file_sha256", "collect_versions"]


def file_sha256(path: str | os.PathLike) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def content_hash(config: dict, input_paths: tuple[str, ...] = ()) -> str:
    """Hash of the canonical config JSON plus the bytes of input files."""
    h = hashlib.sha256()
    h.update(json.dumps(config, sort_keys=True, default=str).encode())
    for path in input_paths:
        h.update(b"\x00" + os.path.basename(str(path)).encode() + b"\x00")
        with open(path, "rb") as fh:
            for chunk in iter(lambda: fh.read(1 << 20), b""):
                h.update(chunk)
    return h.hexdigest()


def collect_versions() -> dict[str, str]:
    import numpy

    from . import __version__
    from ._accel import USING_NUMBA

    versions = {
        "package": __version__,
        "python": platform.python_version(),
        "numpy": numpy.__version__,
        "numba": "off",
    }
    try:
        import scipy

        versions["scipy"] = scipy.__version__
    except ImportError:
        pass
    if USING_NUMBA:
        import numba

        versions["numba"] = numba.__version__
    return versions


@dataclass
class RunManifest:
    command: str
    config: dict
    inputs_hash: str
    threads: int
    seed: int | None = None
    exponents: dict | None = None
    outputs: dict[str, str] = field(default_factory=dict)  # path -> sha256
    results: dict | None = None
    timings: dict[str, float] = field(default_factory=dict)
    versions: dict[str, str] = field(default_factory=collect_versions)

    def add_output(self, path: str | os.PathLike) -> None:
        self.outputs[os.path.basename(str(path))] = file_sha256(path)

    def save(self, path: str | os.PathLike) -> None:
        with open(path, "w") as fh:
            json.dump(asdict(self), fh, indent=2, sort_keys=True, default=str)
            fh.write("\n")

    @classmethod
    def load(cls, path: str | os.PathLike) -> "RunManifest":
        with open(path) as fh:
            data = json.load(fh)
        return cls(**data)
