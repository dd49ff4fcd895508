"""Cross-network candidate ranking by squared Euclidean distance.

Matching is per-query nearest neighbor over an exhaustive distance
scan; ties break toward the lower candidate index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from crosslink.corpus import MatchedPairs
from crosslink.features import FeatureMatrix


@dataclass
class MatchRanking:
    """Ordered candidates for one query: (target index, distance) ascending."""

    query_index: int
    candidates: list  # [(target index, distance)], ascending distance


def distance(z_i: np.ndarray, z_j: np.ndarray) -> float:
    """Squared Euclidean distance between two common-space vectors."""
    z_i = np.asarray(z_i, dtype=np.float64)
    z_j = np.asarray(z_j, dtype=np.float64)
    if z_i.shape != z_j.shape:
        raise ValueError(f"dimension mismatch: {z_i.shape} vs {z_j.shape}")
    diff = z_i - z_j
    return float(diff @ diff)


def _query_distances(zx: FeatureMatrix, zy: FeatureMatrix, query: int) -> np.ndarray:
    if zx.d != zy.d:
        raise ValueError(f"dimension mismatch: {zx.d} vs {zy.d}")
    diff = zy.data - zx.data[:, query][:, None]
    return np.sum(diff * diff, axis=0)


def rank_candidates(
    zx: FeatureMatrix, zy: FeatureMatrix, query: int, top_k: int
) -> MatchRanking:
    """Top-k nearest target columns for one query column.

    Returns all candidates when top_k exceeds the candidate count.
    """
    if top_k < 1:
        raise ValueError(f"top_k must be >= 1, got {top_k}")
    dists = _query_distances(zx, zy, query)
    order = np.lexsort((np.arange(dists.size), dists))[:top_k]
    return MatchRanking(
        query_index=query,
        candidates=[(int(j), float(dists[j])) for j in order],
    )


def rank_all(zx: FeatureMatrix, zy: FeatureMatrix, top_k: int) -> list:
    """Rankings for every source column."""
    return [rank_candidates(zx, zy, q, top_k) for q in range(zx.n)]


def predict_pairs(zx: FeatureMatrix, zy: FeatureMatrix) -> MatchedPairs:
    """Greedy per-query nearest-neighbor assignment (not bijective)."""
    pairs = []
    for q in range(zx.n):
        dists = _query_distances(zx, zy, q)
        pairs.append((q, int(np.argmin(dists))))
    return MatchedPairs(pairs)


def save_rankings_tsv(rankings: list, ids_x: list, ids_y: list, path) -> None:
    """TSV export: query id, rank (1-based), candidate id, distance."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("query_id\trank\tcandidate_id\tdistance\n")
        for ranking in rankings:
            qid = ids_x[ranking.query_index]
            for rank, (j, dist) in enumerate(ranking.candidates, start=1):
                fh.write(f"{qid}\t{rank}\t{ids_y[j]}\t{dist!r}\n")
