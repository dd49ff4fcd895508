"""Topic-level attribute embedding via collapsed Gibbs sampling for LDA.

Document-topic mixtures theta and topic-word distributions phi are
integrated out; the sampler resamples each token's topic assignment from
the counter-based conditional

    p(z = j) ~ (WT[w, j] + beta) / (nz[j] + V * beta) * (DT[d, j] + alpha)

where WT is the word-topic count matrix, DT the document-topic count
matrix, nz the per-topic totals, and V the vocabulary size. The
per-document factor denominator is constant in j and cancels on
normalization. Each user's feature vector is the smoothed topic
distribution of its document after the final sweep.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from crosslink.errors import DataError
from crosslink.features import FeatureMatrix


@dataclass
class LdaState:
    """Sampler state: assignments plus count matrices kept in sync."""

    assignments: list  # per document, int64 array of topic indices
    word_topic: np.ndarray  # V x d_t counts
    doc_topic: np.ndarray  # n x d_t counts
    topic_totals: np.ndarray  # d_t, column sums of word_topic
    vocab: dict  # word -> row index in word_topic
    encoded_docs: list  # per document, int64 array of vocab indices
    alpha: float
    beta: float
    d_t: int

    @property
    def vocab_size(self) -> int:
        return len(self.vocab)

    def check_consistency(self) -> bool:
        """Recompute all counters from assignments and compare exactly."""
        wt = np.zeros_like(self.word_topic)
        dt = np.zeros_like(self.doc_topic)
        for d, (doc, zs) in enumerate(zip(self.encoded_docs, self.assignments)):
            for w, t in zip(doc, zs):
                wt[w, t] += 1
                dt[d, t] += 1
        return (
            np.array_equal(wt, self.word_topic)
            and np.array_equal(dt, self.doc_topic)
            and np.array_equal(wt.sum(axis=0), self.topic_totals)
        )


def _encode_docs(docs: list):
    vocab_tokens = sorted({tok for doc in docs for tok in doc})
    vocab = {tok: k for k, tok in enumerate(vocab_tokens)}
    encoded = [
        np.array([vocab[t] for t in doc], dtype=np.int64) for doc in docs
    ]
    return vocab, encoded


def gibbs_sample(
    docs: list,
    d_t: int,
    alpha: float,
    beta: float,
    iters: int,
    seed: int = 0,
) -> LdaState:
    """Run the collapsed Gibbs sampler for `iters` full sweeps.

    Topics are initialized uniformly at random (seeded); the chain is
    strictly sequential and deterministic given the seed.
    """
    if not docs:
        raise DataError("gibbs_sample requires at least one document")
    if d_t < 2:
        raise ValueError(f"d_t must be >= 2, got {d_t}")
    if alpha <= 0 or beta <= 0:
        raise ValueError(f"priors must be positive, got alpha={alpha}, beta={beta}")
    if iters < 1:
        raise ValueError(f"iters must be >= 1, got {iters}")

    vocab, encoded = _encode_docs(docs)
    V = len(vocab)
    if V == 0:
        raise DataError("empty vocabulary: all documents are empty")

    rng = np.random.default_rng(seed)
    n_docs = len(encoded)
    total_tokens = sum(doc.size for doc in encoded)

    WT = np.zeros((V, d_t), dtype=np.int64)
    DT = np.zeros((n_docs, d_t), dtype=np.int64)
    nz = np.zeros(d_t, dtype=np.int64)
    init = rng.integers(0, d_t, size=total_tokens)
    assignments = []
    offset = 0
    for d, doc in enumerate(encoded):
        zs = init[offset : offset + doc.size].copy()
        offset += doc.size
        assignments.append(zs)
        for w, t in zip(doc, zs):
            WT[w, t] += 1
            DT[d, t] += 1
            nz[t] += 1

    v_beta = V * beta
    for _sweep in range(iters):
        uniforms = rng.random(total_tokens)
        u_idx = 0
        for d, doc in enumerate(encoded):
            zs = assignments[d]
            dt_row = DT[d]
            for i in range(doc.size):
                w = doc[i]
                t = zs[i]
                wt_row = WT[w]
                wt_row[t] -= 1
                dt_row[t] -= 1
                nz[t] -= 1
                weights = (wt_row + beta) / (nz + v_beta) * (dt_row + alpha)
                cum = np.cumsum(weights)
                t_new = int(
                    np.searchsorted(cum, uniforms[u_idx] * cum[-1], side="right")
                )
                if t_new >= d_t:  # guard against round-off at the boundary
                    t_new = d_t - 1
                u_idx += 1
                zs[i] = t_new
                wt_row[t_new] += 1
                dt_row[t_new] += 1
                nz[t_new] += 1

    return LdaState(
        assignments=assignments,
        word_topic=WT,
        doc_topic=DT,
        topic_totals=nz,
        vocab=vocab,
        encoded_docs=encoded,
        alpha=alpha,
        beta=beta,
        d_t=d_t,
    )


def conditional_distribution(state: LdaState, doc_index: int, token_index: int):
    """Normalized resampling distribution for one token, for diagnostics."""
    doc = state.encoded_docs[doc_index]
    zs = state.assignments[doc_index]
    w, t = doc[token_index], zs[token_index]
    wt_row = state.word_topic[w].astype(np.float64).copy()
    dt_row = state.doc_topic[doc_index].astype(np.float64).copy()
    nz = state.topic_totals.astype(np.float64).copy()
    wt_row[t] -= 1
    dt_row[t] -= 1
    nz[t] -= 1
    doc_len = dt_row.sum()
    weights = (
        (wt_row + state.beta)
        / (nz + state.vocab_size * state.beta)
        * (dt_row + state.alpha)
        / (doc_len + state.d_t * state.alpha)
    )
    return weights / weights.sum()


def estimate_theta(state: LdaState, doc_index: int) -> np.ndarray:
    """Smoothed topic distribution (DT_j + alpha) / (sum_k DT_k + d_t alpha)."""
    row = state.doc_topic[doc_index].astype(np.float64)
    return (row + state.alpha) / (row.sum() + state.d_t * state.alpha)


def topic_word_distributions(state: LdaState) -> np.ndarray:
    """Smoothed per-topic word distributions, d_t x V (rows sum to 1)."""
    wt = state.word_topic.astype(np.float64).T
    return (wt + state.beta) / (
        wt.sum(axis=1, keepdims=True) + state.vocab_size * state.beta
    )


def embed_topics(
    docs: list,
    d_t: int,
    alpha: float,
    beta: float,
    iters: int,
    seed: int = 0,
) -> FeatureMatrix:
    """Sample, then emit the d_t x n matrix of per-document theta estimates."""
    state = gibbs_sample(docs, d_t, alpha, beta, iters, seed)
    data = np.zeros((d_t, len(docs)))
    for i in range(len(docs)):
        data[:, i] = estimate_theta(state, i)
    return FeatureMatrix(data=data, level="topic")


def top_words_report(state: LdaState, n_words: int = 10) -> str:
    """Human-readable dump of the most probable words per topic."""
    inv_vocab = {i: w for w, i in state.vocab.items()}
    phi = topic_word_distributions(state)
    lines = []
    for j in range(state.d_t):
        top = np.argsort(-phi[j])[:n_words]
        words = " ".join(f"{inv_vocab[w]}:{phi[j, w]:.4f}" for w in top)
        lines.append(f"topic {j}: {words}")
    return "\n".join(lines) + "\n"
