"""Fuse per-level feature matrices and standardize feature rows.

Levels are stacked in the fixed order char, word, topic, structure;
the manifest records each level's row range. Standardization centers
every feature row at mean 0 with standard deviation 1 (population
convention, divisor n) across users; at test time precomputed stats
can be applied instead of recomputed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from crosslink.features import FeatureMatrix

FUSE_ORDER = ("char", "word", "topic", "structure")


@dataclass
class StandardizeStats:
    means: np.ndarray  # per-row means
    stds: np.ndarray  # per-row stds; zero-variance rows recorded as 1


def fuse(levels: dict) -> FeatureMatrix:
    """Row-stack the present levels into one fused matrix.

    At least one level must be present (the attrs-only and struct-only
    variants pass subsets); all levels must agree on the user count.
    """
    present = [lvl for lvl in FUSE_ORDER if lvl in levels]
    if not present:
        raise ValueError("fuse requires at least one feature level")
    unknown = set(levels) - set(FUSE_ORDER)
    if unknown:
        raise ValueError(f"unknown feature levels: {sorted(unknown)}")
    n = levels[present[0]].n
    for lvl in present:
        if levels[lvl].n != n:
            raise ValueError(
                f"level {lvl!r} has {levels[lvl].n} columns, expected {n}"
            )
    blocks = []
    manifest = []
    row = 0
    for lvl in present:
        fm = levels[lvl]
        blocks.append(fm.data)
        manifest.append((lvl, row, row + fm.d))
        row += fm.d
    return FeatureMatrix(data=np.vstack(blocks), level="fused", manifest=manifest)


def standardize(
    fused: FeatureMatrix, stats: StandardizeStats | None = None
) -> tuple[FeatureMatrix, StandardizeStats]:
    """Scale each feature row to mean 0, std 1 (divisor n).

    Zero-variance rows are centered only, with their std recorded as 1.
    When stats are supplied they are applied as-is.
    """
    if stats is None:
        if fused.n < 2:
            raise ValueError("standardize needs n >= 2 columns to compute stats")
        means = fused.data.mean(axis=1)
        stds = fused.data.std(axis=1)  # population convention
        stds = np.where(stds > 0.0, stds, 1.0)
        stats = StandardizeStats(means=means, stds=stds)
    data = (fused.data - stats.means[:, None]) / stats.stds[:, None]
    return (
        FeatureMatrix(data=data, level=fused.level, manifest=list(fused.manifest)),
        stats,
    )
