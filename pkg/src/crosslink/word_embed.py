"""Word-level attribute embedding.

Word vectors are trained on the per-network corpus with CBOW plus
negative sampling, each user's vector is the sum of its word vectors,
and a single smoothing pass blends every user with the pre-smoothing
average of its neighbors (homophily smoothing, weight lambda).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from crosslink.corpus import Network
from crosslink.errors import DataError
from crosslink.features import FeatureMatrix


@dataclass
class WordVectors:
    """Trained word vectors: one row per vocabulary word."""

    vocab: dict  # word -> row index
    vectors: np.ndarray  # |vocab| x d_w

    @property
    def d_w(self) -> int:
        return self.vectors.shape[1]

    def __contains__(self, word: str) -> bool:
        return word in self.vocab

    def __getitem__(self, word: str) -> np.ndarray:
        return self.vectors[self.vocab[word]]


@dataclass
class CbowConfig:
    window: int = 5
    negatives: int = 5
    epochs: int = 5
    learning_rate: float = 0.025
    min_learning_rate: float = 1e-4
    min_count: int = 1


@dataclass
class SmoothingConfig:
    """Neighbor-smoothing weight; 0 keeps features as-is, 1 replaces them."""

    lam: float = 0.1

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lambda must lie in [0, 1], got {self.lam}")


def _sigmoid(x: float) -> float:
    if x > 30.0:
        return 1.0
    if x < -30.0:
        return 0.0
    return 1.0 / (1.0 + np.exp(-x))


def train_cbow(
    docs: list, d_w: int, cfg: CbowConfig | None = None, seed: int = 0
) -> WordVectors:
    """Train CBOW word vectors with negative sampling over the corpus.

    Single-threaded and deterministic given the seed. The learning rate
    decays linearly over all center-word updates. Negative samples are
    drawn from the unigram distribution raised to the 3/4 power.
    """
    if cfg is None:
        cfg = CbowConfig()
    if d_w < 1:
        raise ValueError(f"d_w must be >= 1, got {d_w}")
    counts = Counter(tok for doc in docs for tok in doc)
    words = sorted(w for w, c in counts.items() if c >= cfg.min_count)
    if not words:
        raise DataError("cannot train word vectors on an empty corpus")
    vocab = {w: i for i, w in enumerate(words)}
    V = len(words)

    encoded = [
        np.array([vocab[t] for t in doc if t in vocab], dtype=np.int64)
        for doc in docs
    ]
    encoded = [doc for doc in encoded if doc.size > 0]

    freq = np.array([counts[w] for w in words], dtype=np.float64)
    noise = freq**0.75
    noise_cum = np.cumsum(noise / noise.sum())

    rng = np.random.default_rng(seed)
    in_vecs = rng.uniform(-0.5 / d_w, 0.5 / d_w, size=(V, d_w))
    out_vecs = np.zeros((V, d_w))

    total_steps = max(1, sum(doc.size for doc in encoded) * cfg.epochs)
    step = 0
    for _epoch in range(cfg.epochs):
        for doc in encoded:
            L = doc.size
            for pos in range(L):
                lr = max(
                    cfg.min_learning_rate,
                    cfg.learning_rate * (1.0 - step / total_steps),
                )
                step += 1
                reduced = int(rng.integers(1, cfg.window + 1))
                lo = max(0, pos - reduced)
                hi = min(L, pos + reduced + 1)
                context = np.concatenate([doc[lo:pos], doc[pos + 1 : hi]])
                if context.size == 0:
                    continue
                center = int(doc[pos])
                h = in_vecs[context].mean(axis=0)
                grad_h = np.zeros(d_w)
                for k in range(cfg.negatives + 1):
                    if k == 0:
                        target, label = center, 1.0
                    else:
                        target = int(
                            np.searchsorted(noise_cum, rng.random(), side="right")
                        )
                        if target >= V:
                            target = V - 1
                        if target == center:
                            continue
                        label = 0.0
                    f = _sigmoid(float(h @ out_vecs[target]))
                    g = (label - f) * lr
                    grad_h += g * out_vecs[target]
                    out_vecs[target] += g * h
                in_vecs[context] += grad_h
    if not np.all(np.isfinite(in_vecs)):
        raise DataError("word-vector training produced non-finite values")
    return WordVectors(vocab=vocab, vectors=in_vecs)


def embed_user_words(doc: list, wv: WordVectors) -> np.ndarray:
    """Sum of word vectors over in-vocabulary tokens; zeros when none."""
    vec = np.zeros(wv.d_w)
    for tok in doc:
        idx = wv.vocab.get(tok)
        if idx is not None:
            vec += wv.vectors[idx]
    return vec


def embed_all_users(docs: list, wv: WordVectors) -> FeatureMatrix:
    """Stack per-user word-vector sums into a d_w x n feature matrix."""
    data = np.zeros((wv.d_w, len(docs)))
    for i, doc in enumerate(docs):
        data[:, i] = embed_user_words(doc, wv)
    return FeatureMatrix(data=data, level="word")


def smooth_with_neighbors(
    raw: FeatureMatrix, net: Network, cfg: SmoothingConfig | None = None
) -> FeatureMatrix:
    """One smoothing pass over a frozen copy of the input.

    p_i <- (1 - lambda) p_i + (lambda / s_i) * sum of pre-smoothing
    neighbor columns. Isolated users (s_i = 0) keep p_i unchanged for
    every lambda.
    """
    if cfg is None:
        cfg = SmoothingConfig()
    if raw.n != net.n_users:
        raise ValueError(
            f"feature matrix has {raw.n} columns but the network has "
            f"{net.n_users} users"
        )
    P = raw.data
    neighbor_sum = np.zeros_like(P)
    for i, j in net.edges:
        neighbor_sum[:, i] += P[:, j]
        neighbor_sum[:, j] += P[:, i]
    deg = np.array(net.degrees(), dtype=np.float64)
    out = P.copy()
    active = deg > 0
    out[:, active] = (1.0 - cfg.lam) * P[:, active] + cfg.lam * (
        neighbor_sum[:, active] / deg[active]
    )
    return FeatureMatrix(data=out, level="word")


def save_word_vectors(wv: WordVectors, path) -> None:
    """Text export: first line "count dim", then one word plus floats per line."""
    order = sorted(wv.vocab, key=wv.vocab.get)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(order)} {wv.d_w}\n")
        for word in order:
            vals = " ".join(repr(v) for v in wv.vectors[wv.vocab[word]])
            fh.write(f"{word} {vals}\n")


def load_word_vectors(path) -> WordVectors:
    """Import externally trained vectors in the documented text format."""
    with open(path, encoding="utf-8") as fh:
        first = fh.readline().split()
        if len(first) != 2:
            raise DataError(f"{path}: expected 'count dim' on the first line")
        count, dim = int(first[0]), int(first[1])
        vocab: dict = {}
        vectors = np.zeros((count, dim))
        for lineno, line in enumerate(fh, start=2):
            parts = line.rstrip("\n").split(" ")
            if len(parts) != dim + 1:
                raise DataError(
                    f"{path}:{lineno}: expected a word and {dim} floats"
                )
            idx = len(vocab)
            if idx >= count:
                raise DataError(f"{path}: more vectors than declared count")
            vocab[parts[0]] = idx
            vectors[idx] = [float(v) for v in parts[1:]]
    if len(vocab) != count:
        raise DataError(f"{path}: declared {count} vectors, found {len(vocab)}")
    return WordVectors(vocab=vocab, vectors=vectors)
