"""Character-level attribute embedding.

Token streams are count-vectorized into an m x n matrix, then a
single-layer linear autoencoder compresses columns to d_c dimensions.
The encoder output WX + b is the character-level feature matrix.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from crosslink.errors import NumericalError
from crosslink.features import FeatureMatrix

logger = logging.getLogger(__name__)


@dataclass
class CountMatrix:
    """Token counts: entry (k, i) is the count of token k for user i."""

    data: np.ndarray  # m x n, nonnegative integers
    vocab: dict  # token -> row index

    @property
    def m(self) -> int:
        return self.data.shape[0]

    @property
    def n(self) -> int:
        return self.data.shape[1]


@dataclass
class LinearAutoencoder:
    """One-layer linear autoencoder with untied decoder weights.

    Encoder: z = W x + b with W in R^{d_c x m}.
    Decoder: y = W2 z + b2 with W2 in R^{m x d_c}.
    """

    encoder_weights: np.ndarray  # d_c x m
    encoder_bias: np.ndarray  # d_c
    decoder_weights: np.ndarray  # m x d_c
    decoder_bias: np.ndarray  # m

    @property
    def d_c(self) -> int:
        return self.encoder_weights.shape[0]

    @property
    def m(self) -> int:
        return self.encoder_weights.shape[1]


@dataclass
class SgdConfig:
    """Mini-batch gradient-descent settings for autoencoder training."""

    epochs: int = 200
    batch_size: int = 64
    learning_rate: float = 1e-3
    early_stop_rel_tol: float = 1e-5
    early_stop_patience: int = 10


def count_vectorize(streams: list) -> CountMatrix:
    """Build the count matrix over the union vocabulary of all streams.

    The vocabulary is ordered lexicographically so the row layout is a
    deterministic function of the corpus. Empty streams yield zero columns.
    """
    if not streams:
        raise ValueError("count_vectorize requires at least one token stream")
    vocab_tokens = sorted({tok for stream in streams for tok in stream})
    vocab = {tok: k for k, tok in enumerate(vocab_tokens)}
    data = np.zeros((len(vocab), len(streams)), dtype=np.int64)
    for i, stream in enumerate(streams):
        for tok in stream:
            data[vocab[tok], i] += 1
    return CountMatrix(data=data, vocab=vocab)


def reconstruction_loss(model: LinearAutoencoder, X: np.ndarray) -> float:
    """Average squared reconstruction error (1/n) sum_i ||x_i - y_i||^2."""
    Z = model.encoder_weights @ X + model.encoder_bias[:, None]
    Y = model.decoder_weights @ Z + model.decoder_bias[:, None]
    diff = Y - X
    return float(np.sum(diff * diff) / X.shape[1])


def _gradients(model: LinearAutoencoder, X: np.ndarray):
    """Analytic gradients of the mean squared reconstruction loss on X."""
    B = X.shape[1]
    Z = model.encoder_weights @ X + model.encoder_bias[:, None]
    Y = model.decoder_weights @ Z + model.decoder_bias[:, None]
    E = (2.0 / B) * (Y - X)
    g_dec_w = E @ Z.T
    g_dec_b = E.sum(axis=1)
    back = model.decoder_weights.T @ E
    g_enc_w = back @ X.T
    g_enc_b = back.sum(axis=1)
    return g_enc_w, g_enc_b, g_dec_w, g_dec_b


def init_autoencoder(m: int, d_c: int, seed: int) -> LinearAutoencoder:
    """Uniform initialization in [-1/sqrt(m), 1/sqrt(m)], biases zero."""
    rng = np.random.default_rng(seed)
    scale = 1.0 / np.sqrt(m)
    return LinearAutoencoder(
        encoder_weights=rng.uniform(-scale, scale, size=(d_c, m)),
        encoder_bias=np.zeros(d_c),
        decoder_weights=rng.uniform(-scale, scale, size=(m, d_c)),
        decoder_bias=np.zeros(m),
    )


def train_autoencoder(
    counts: CountMatrix, d_c: int, opt: SgdConfig | None = None, seed: int = 0
) -> LinearAutoencoder:
    """Train the autoencoder by mini-batch gradient descent.

    Deterministic given the seed. If an epoch ends with a higher loss than
    the previous one, its updates are reverted and the learning rate is
    halved, so the per-epoch loss sequence is non-increasing and the final
    loss never exceeds the initial loss.

    Raises NumericalError on an empty corpus or if the loss turns
    non-finite (reporting the epoch).
    """
    if opt is None:
        opt = SgdConfig()
    if counts.m == 0 or counts.n == 0:
        raise NumericalError(
            f"cannot train autoencoder on empty corpus (m={counts.m}, n={counts.n})"
        )
    if d_c < 1:
        raise ValueError(f"d_c must be >= 1, got {d_c}")

    X = counts.data.astype(np.float64)
    n = X.shape[1]
    rng = np.random.default_rng(seed)
    model = init_autoencoder(counts.m, d_c, seed)

    lr = opt.learning_rate
    prev_loss = reconstruction_loss(model, X)
    stall = 0
    for epoch in range(opt.epochs):
        saved = (
            model.encoder_weights.copy(),
            model.encoder_bias.copy(),
            model.decoder_weights.copy(),
            model.decoder_bias.copy(),
        )
        order = rng.permutation(n)
        for start in range(0, n, opt.batch_size):
            batch = X[:, order[start : start + opt.batch_size]]
            g_ew, g_eb, g_dw, g_db = _gradients(model, batch)
            model.encoder_weights -= lr * g_ew
            model.encoder_bias -= lr * g_eb
            model.decoder_weights -= lr * g_dw
            model.decoder_bias -= lr * g_db
        loss = reconstruction_loss(model, X)
        if not np.isfinite(loss):
            raise NumericalError(f"autoencoder training diverged at epoch {epoch}")
        if loss > prev_loss:
            # Revert the epoch and retry more conservatively.
            (
                model.encoder_weights,
                model.encoder_bias,
                model.decoder_weights,
                model.decoder_bias,
            ) = saved
            lr *= 0.5
            if lr < 1e-15:
                logger.debug("learning rate underflow at epoch %d; stopping", epoch)
                break
            continue
        rel_improvement = (prev_loss - loss) / prev_loss if prev_loss > 0 else 0.0
        prev_loss = loss
        if rel_improvement < opt.early_stop_rel_tol:
            stall += 1
            if stall >= opt.early_stop_patience:
                logger.debug("early stop at epoch %d (loss %.3e)", epoch, loss)
                break
        else:
            stall = 0
    return model


def encode_chars(model: LinearAutoencoder, counts: CountMatrix) -> FeatureMatrix:
    """Apply the trained encoder: column i becomes W x_i + b."""
    if counts.m != model.m:
        raise ValueError(
            f"count matrix has m={counts.m} tokens but the model expects m={model.m}"
        )
    data = model.encoder_weights @ counts.data.astype(np.float64)
    data += model.encoder_bias[:, None]
    return FeatureMatrix(data=data, level="char")
