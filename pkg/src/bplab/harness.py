"""Reproducibility plumbing: named RNG substreams, atomic file output, and
experiment manifests for the command-line entry points."""

from __future__ import annotations

import os
import tempfile
import zlib
from dataclasses import dataclass, field

import numpy as np

TOOL_VERSION = "bplab 0.1.0"


def substream(seed: int, name: str) -> np.random.Generator:
    """Deterministic per-module generator: one 64-bit root seed plus a stable
    name hash selects the stream."""
    tag = zlib.crc32(name.encode("utf-8"))
    return np.random.default_rng(np.random.SeedSequence([int(seed) & (2 ** 64 - 1), tag]))


def substream_seed(seed: int, name: str) -> int:
    """Integer seed for APIs that take one (same derivation as substream)."""
    tag = zlib.crc32(name.encode("utf-8"))
    return int(np.random.SeedSequence([int(seed) & (2 ** 64 - 1), tag]).generate_state(1)[0])


def atomic_write_text(path, text: str) -> None:
    """Write via a temp file in the same directory, then rename into place."""
    path = os.fspath(path)
    d = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=d)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


@dataclass
class ExperimentManifest:
    name: str
    seed: int = 0
    config_path: str | None = None
    out_dir: str = "."
    targets: list = field(default_factory=list)
    tool_version: str = TOOL_VERSION

    def header_lines(self) -> list:
        lines = [f"tool={self.tool_version}", f"experiment={self.name}", f"seed={self.seed}"]
        if self.config_path:
            lines.append(f"config={self.config_path}")
        return lines
