"""Train/test splitting over ground-truth pairs and Hit-Precision.

Hit-Precision at k scores each test query (k - (pos - 1)) / k when the
true counterpart appears at 1-based position pos <= k of its ranking,
and 0 otherwise; the reported figure is the mean over queries.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from crosslink.corpus import MatchedPairs
from crosslink.errors import DataError


@dataclass
class SplitSpec:
    n_train: int
    n_test: int
    seed: int = 0


@dataclass
class MetricReport:
    hit_precision: float
    top_k: int
    per_query_scores: list


def split_pairs(all_pairs: MatchedPairs, spec: SplitSpec):
    """Disjoint uniform-random train/test subsets, deterministic by seed."""
    total = len(all_pairs)
    if spec.n_train < 0 or spec.n_test < 0:
        raise ValueError("split sizes must be nonnegative")
    if spec.n_train + spec.n_test > total:
        raise DataError(
            f"requested {spec.n_train}+{spec.n_test} pairs but only "
            f"{total} are available"
        )
    rng = np.random.default_rng(spec.seed)
    order = rng.permutation(total)
    train_idx = sorted(order[: spec.n_train])
    test_idx = sorted(order[spec.n_train : spec.n_train + spec.n_test])
    train = MatchedPairs([all_pairs.pairs[i] for i in train_idx])
    test = MatchedPairs([all_pairs.pairs[i] for i in test_idx])
    return train, test


def hit_precision(rankings: list, truth: MatchedPairs, top_k: int) -> MetricReport:
    """Mean Hit-Precision over the truth queries.

    Every truth query must have a ranking (matched on query_index);
    rankings may contain more than top_k candidates, in which case only
    the first top_k positions count.
    """
    if top_k < 1:
        raise ValueError(f"top_k must be >= 1, got {top_k}")
    by_query = {r.query_index: r for r in rankings}
    scores = []
    for qx, qy in truth:
        ranking = by_query.get(qx)
        if ranking is None:
            raise DataError(f"no ranking available for truth query index {qx}")
        score = 0.0
        for pos, (j, _dist) in enumerate(ranking.candidates[:top_k], start=1):
            if j == qy:
                score = (top_k - (pos - 1)) / top_k
                break
        scores.append(score)
    mean = float(np.mean(scores)) if scores else 0.0
    return MetricReport(hit_precision=mean, top_k=top_k, per_query_scores=scores)
