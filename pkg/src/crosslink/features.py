"""Feature matrices: d x n arrays, one column per user, with a manifest.

Binary file layout: 4-byte magic "XFM1", uint32 little-endian header
length, UTF-8 JSON header {level, d, n, manifest}, then d*n row-major
little-endian float64 values. A CSV export is provided for inspection.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np

from crosslink.errors import DataError

MAGIC = b"XFM1"

LEVELS = ("char", "word", "topic", "structure", "fused", "projected")


@dataclass
class FeatureMatrix:
    """A d x n real matrix; column i is the feature vector of user i.

    The manifest lists (tag, start_row, end_row) ranges; single-level
    matrices carry one entry spanning all rows.
    """

    data: np.ndarray
    level: str
    manifest: list[tuple[str, int, int]] = field(default_factory=list)

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim != 2:
            raise ValueError(f"feature matrix must be 2-D, got shape {self.data.shape}")
        if self.level not in LEVELS:
            raise ValueError(f"unknown level tag {self.level!r}")
        if not np.all(np.isfinite(self.data)):
            raise ValueError("feature matrix contains non-finite entries")
        if not self.manifest:
            self.manifest = [(self.level, 0, self.data.shape[0])]

    @property
    def d(self) -> int:
        return self.data.shape[0]

    @property
    def n(self) -> int:
        return self.data.shape[1]

    def rows_for(self, tag: str) -> np.ndarray:
        """Slice of the matrix belonging to one manifest tag."""
        for t, start, end in self.manifest:
            if t == tag:
                return self.data[start:end]
        raise KeyError(f"no manifest entry for tag {tag!r}")

    def save(self, path) -> None:
        header = json.dumps(
            {
                "level": self.level,
                "d": self.d,
                "n": self.n,
                "manifest": [[t, s, e] for t, s, e in self.manifest],
            }
        ).encode("utf-8")
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<I", len(header)))
            fh.write(header)
            fh.write(np.ascontiguousarray(self.data, dtype="<f8").tobytes())

    @classmethod
    def load(cls, path) -> "FeatureMatrix":
        with open(path, "rb") as fh:
            magic = fh.read(4)
            if magic != MAGIC:
                raise DataError(f"{path}: not a feature-matrix file (bad magic)")
            (hlen,) = struct.unpack("<I", fh.read(4))
            header = json.loads(fh.read(hlen).decode("utf-8"))
            d, n = header["d"], header["n"]
            raw = fh.read(d * n * 8)
            if len(raw) != d * n * 8:
                raise DataError(f"{path}: truncated feature-matrix payload")
            data = np.frombuffer(raw, dtype="<f8").reshape(d, n).copy()
        return cls(
            data=data,
            level=header["level"],
            manifest=[tuple(entry) for entry in header["manifest"]],
        )

    def to_csv(self, path) -> None:
        """Equivalent CSV export: one feature row per line, header with tags."""
        tags = []
        for t, start, end in self.manifest:
            tags.extend(f"{t}:{r}" for r in range(end - start))
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("row," + ",".join(f"u{i}" for i in range(self.n)) + "\n")
            for tag, row in zip(tags, self.data):
                fh.write(tag + "," + ",".join(repr(v) for v in row) + "\n")
