"""Structure embedding with a LINE-style second-order objective.

Each undirected edge becomes two directed samples. For a sampled edge
u -> v the vertex vector of u is pulled toward the context vector of v
and pushed away from negative-sampled contexts, so vertices with
similar neighborhoods end up close. Edge and noise sampling use the
Walker alias method with a seeded generator for determinism.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from crosslink.corpus import Network
from crosslink.errors import DataError
from crosslink.features import FeatureMatrix


@dataclass
class LineConfig:
    negatives: int = 5
    samples_per_edge: int = 100
    learning_rate: float = 0.025
    min_rate_fraction: float = 1e-4  # learning-rate floor as a fraction of initial


class AliasTable:
    """O(1) sampling from a fixed categorical distribution."""

    def __init__(self, weights):
        w = np.asarray(weights, dtype=np.float64)
        if w.ndim != 1 or w.size == 0 or np.any(w < 0) or w.sum() <= 0:
            raise ValueError("alias table requires a nonempty nonnegative weight vector")
        K = w.size
        prob = w * (K / w.sum())
        alias = np.zeros(K, dtype=np.int64)
        small = [i for i in range(K) if prob[i] < 1.0]
        large = [i for i in range(K) if prob[i] >= 1.0]
        while small and large:
            s, l = small.pop(), large.pop()
            alias[s] = l
            prob[l] = prob[l] - (1.0 - prob[s])
            (small if prob[l] < 1.0 else large).append(l)
        self.prob = np.clip(prob, 0.0, 1.0)
        self.alias = alias

    def draw(self, rng: np.random.Generator, size) -> np.ndarray:
        idx = rng.integers(0, self.prob.size, size=size)
        coin = rng.random(size=size)
        return np.where(coin < self.prob[idx], idx, self.alias[idx])


def _sigmoid(x: float) -> float:
    if x > 30.0:
        return 1.0
    if x < -30.0:
        return 0.0
    return 1.0 / (1.0 + np.exp(-x))


@dataclass
class StructEmbedding:
    vertex_vectors: np.ndarray  # n x d_s
    context_vectors: np.ndarray  # n x d_s


def train_line(
    net: Network, d_s: int, cfg: LineConfig | None = None, seed: int = 0
) -> StructEmbedding:
    """Train second-order LINE over the network's edge samples."""
    if cfg is None:
        cfg = LineConfig()
    if d_s < 1:
        raise ValueError(f"d_s must be >= 1, got {d_s}")
    if not net.edges:
        raise DataError(
            "network has no edges; structure embedding is undefined - "
            "run the attrs_only variant instead"
        )

    # Canonical ordering makes the output independent of edge-file order.
    undirected = sorted(net.edges)
    directed = np.array(
        [(i, j) for i, j in undirected] + [(j, i) for i, j in undirected],
        dtype=np.int64,
    )
    n = net.n_users
    deg = np.array(net.degrees(), dtype=np.float64)
    noise = AliasTable(deg**0.75)

    rng = np.random.default_rng(seed)
    vertex = rng.uniform(-0.5 / d_s, 0.5 / d_s, size=(n, d_s))
    context = np.zeros((n, d_s))

    total = cfg.samples_per_edge * len(undirected)
    lr0 = cfg.learning_rate
    block_size = 8192
    done = 0
    while done < total:
        b = min(block_size, total - done)
        edge_idx = rng.integers(0, directed.shape[0], size=b)
        negs = noise.draw(rng, size=(b, cfg.negatives))
        for s in range(b):
            lr = lr0 * max(1.0 - (done + s) / total, cfg.min_rate_fraction)
            u, v = directed[edge_idx[s]]
            h = vertex[u]
            grad_h = np.zeros(d_s)
            for k in range(cfg.negatives + 1):
                if k == 0:
                    target, label = v, 1.0
                else:
                    target = int(negs[s, k - 1])
                    if target == v:
                        continue
                    label = 0.0
                f = _sigmoid(float(h @ context[target]))
                g = (label - f) * lr
                grad_h += g * context[target]
                context[target] += g * h
            vertex[u] += grad_h
        done += b

    return StructEmbedding(vertex_vectors=vertex, context_vectors=context)


def embed_structure(
    net: Network, d_s: int, cfg: LineConfig | None = None, seed: int = 0
) -> FeatureMatrix:
    """Train LINE and return the d_s x n vertex-vector feature matrix."""
    emb = train_line(net, d_s, cfg, seed)
    return FeatureMatrix(data=emb.vertex_vectors.T.copy(), level="structure")
