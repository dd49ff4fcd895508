"""End-to-end pipeline: preprocess, embed levels, fuse, learn the
projection, match, and score.

Level embeddings are unsupervised and independent of the train/test
split, so an experiment computes them once and repetitions only redraw
the split, refit the projection, and rescore. Every stage seed is
derived deterministically from the master seed, so identical configs
reproduce identical reports.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from crosslink import corpus
from crosslink.char_embed import SgdConfig, count_vectorize, encode_chars, train_autoencoder
from crosslink.config import ExperimentConfig
from crosslink.errors import ConfigError, DataError
from crosslink.evaluation import MetricReport, SplitSpec, hit_precision, split_pairs
from crosslink.features import FeatureMatrix
from crosslink.fusion import fuse, standardize
from crosslink.matcher import MatchRanking, rank_candidates
from crosslink.rcca import CcaModel, fit_rcca, project
from crosslink.struct_embed import LineConfig, embed_structure
from crosslink.topic_embed import embed_topics
from crosslink.word_embed import (
    CbowConfig,
    SmoothingConfig,
    embed_all_users,
    smooth_with_neighbors,
    train_cbow,
)

LEVELS_BY_VARIANT = {
    "full": ("char", "word", "topic", "structure"),
    "attrs_only": ("char", "word", "topic"),
    "struct_only": ("structure",),
    "no_projection": ("char", "word", "topic", "structure"),
}

REPORT_KS = (1, 3, 5)


def derive_seed(master: int, *parts) -> int:
    """Stable per-stage seed from the master seed and a label path."""
    h = hashlib.sha256(str(int(master)).encode("ascii"))
    for part in parts:
        h.update(b"|")
        h.update(str(part).encode("utf-8"))
    return int.from_bytes(h.digest()[:8], "little")


@dataclass
class PreparedNetwork:
    """A loaded network with preprocessed, tokenized attribute texts."""

    net: corpus.Network
    char_streams: list
    word_docs: list
    topic_docs: list


def prepare_network(net: corpus.Network, cfg: ExperimentConfig) -> PreparedNetwork:
    """Preprocess all attribute texts and tokenize per level.

    The rare-word pass applies per attribute level within this network,
    to the word-based levels only (character tokens are not words).
    """
    pp = corpus.PreprocessConfig()
    char_texts = [corpus.preprocess_text(u.char_attr, pp) for u in net.users]
    word_texts = corpus.remove_rare_words(
        [corpus.preprocess_text(u.word_attr, pp) for u in net.users],
        cfg.rare_min_count,
    )
    topic_texts = corpus.remove_rare_words(
        [corpus.preprocess_text(u.topic_attr, pp) for u in net.users],
        cfg.rare_min_count,
    )
    return PreparedNetwork(
        net=net,
        char_streams=[corpus.char_tokenize(t, cfg.qgrams) for t in char_texts],
        word_docs=[corpus.word_tokenize(t) for t in word_texts],
        topic_docs=[corpus.word_tokenize(t) for t in topic_texts],
    )


def embed_level(
    prep: PreparedNetwork, level: str, cfg: ExperimentConfig, seed: int
) -> FeatureMatrix:
    """Compute one level's feature matrix for one network."""
    if level == "char":
        counts = count_vectorize(prep.char_streams)
        opt = SgdConfig(
            epochs=cfg.char_epochs,
            batch_size=cfg.char_batch_size,
            learning_rate=cfg.char_learning_rate,
        )
        model = train_autoencoder(counts, cfg.d_c, opt, seed)
        return encode_chars(model, counts)
    if level == "word":
        wv = train_cbow(
            prep.word_docs,
            cfg.d_w,
            CbowConfig(
                window=cfg.cbow_window,
                negatives=cfg.cbow_negatives,
                epochs=cfg.cbow_epochs,
            ),
            seed,
        )
        raw = embed_all_users(prep.word_docs, wv)
        return smooth_with_neighbors(
            raw, prep.net, SmoothingConfig(cfg.lambda_smooth)
        )
    if level == "topic":
        return embed_topics(
            prep.topic_docs,
            cfg.d_t,
            cfg.resolved_alpha(),
            cfg.resolved_beta(),
            cfg.topic_iters,
            seed,
        )
    if level == "structure":
        return embed_structure(
            prep.net,
            cfg.d_s,
            LineConfig(
                negatives=cfg.struct_negatives,
                samples_per_edge=cfg.struct_samples_per_edge,
            ),
            seed,
        )
    raise ValueError(f"unknown level {level!r}")


def compute_level_features(
    prep: PreparedNetwork, cfg: ExperimentConfig, levels, side: str
) -> dict:
    """All requested levels for one side, with per-level derived seeds."""
    return {
        level: embed_level(prep, level, cfg, derive_seed(cfg.seed, side, level))
        for level in levels
    }


def fused_standardized(features: dict, levels) -> FeatureMatrix:
    """Fuse the given levels and standardize rows over all users."""
    subset = {lvl: features[lvl] for lvl in levels}
    fused_fm = fuse(subset)
    out, _stats = standardize(fused_fm)
    return out


def rank_queries(
    zx: FeatureMatrix,
    zy: FeatureMatrix,
    queries,
    pool_indices,
    top_n: int,
) -> list:
    """Rank pool candidates for each query, reporting original Y indices."""
    pool = np.asarray(pool_indices, dtype=np.int64)
    sub = FeatureMatrix(data=zy.data[:, pool], level=zy.level)
    rankings = []
    for q in queries:
        local = rank_candidates(zx, sub, q, top_n)
        rankings.append(
            MatchRanking(
                query_index=q,
                candidates=[(int(pool[j]), d) for j, d in local.candidates],
            )
        )
    return rankings


@dataclass
class RepetitionOutput:
    """One repetition: the split, optional model, rankings, and scores."""

    rep: int
    split_seed: int
    train: corpus.MatchedPairs
    test: corpus.MatchedPairs
    model: CcaModel | None
    rankings: list
    scores: dict  # top_k -> hit precision


def run_repetition(
    cfg: ExperimentConfig,
    fused_x: FeatureMatrix,
    fused_y: FeatureMatrix,
    all_pairs: corpus.MatchedPairs,
    rep: int,
) -> RepetitionOutput:
    """Split, learn the projection (unless disabled), rank, and score."""
    split_seed = derive_seed(cfg.seed, "split", rep)
    train, test = split_pairs(
        all_pairs, SplitSpec(cfg.n_train, cfg.n_test, split_seed)
    )

    if cfg.variant == "no_projection":
        if fused_x.d != fused_y.d:
            raise ConfigError(
                "no_projection requires equal fused dimensions on both sides "
                f"({fused_x.d} vs {fused_y.d})"
            )
        model = None
        zx, zy = fused_x, fused_y
    else:
        xtr = fused_x.data[:, [i for i, _ in train]]
        ytr = fused_y.data[:, [j for _, j in train]]
        k = min(cfg.k_proj, fused_x.d, fused_y.d)
        model = fit_rcca(xtr, ytr, k, cfg.reg, cfg.reg)
        zx = project(model, fused_x, "x")
        zy = project(model, fused_y, "y")

    if cfg.candidate_pool == "test":
        pool = sorted({j for _, j in test})
    else:
        pool = list(range(fused_y.n))
    queries = [i for i, _ in test]
    top_n = min(max(cfg.top_k, max(REPORT_KS)), len(pool))
    rankings = rank_queries(zx, zy, queries, pool, top_n)

    scores = {}
    for k in sorted(set(REPORT_KS) | {cfg.top_k}):
        scores[k] = hit_precision(rankings, test, min(k, top_n)).hit_precision
    return RepetitionOutput(
        rep=rep,
        split_seed=split_seed,
        train=train,
        test=test,
        model=model,
        rankings=rankings,
        scores=scores,
    )


@dataclass
class ExperimentReport:
    """Aggregated result of all repetitions plus the resolved config."""

    config: dict
    top_k: int
    repetitions: list  # per-rep dicts: rep, seed, n_train, hit_precision@k
    mean: dict
    std: dict

    @property
    def hit_precision(self) -> float:
        return self.mean[str(self.top_k)]

    def to_json(self) -> str:
        return json.dumps(
            {
                "config": self.config,
                "top_k": self.top_k,
                "repetitions": self.repetitions,
                "mean": self.mean,
                "std": self.std,
            },
            sort_keys=True,
            indent=2,
        )

    def to_table(self) -> str:
        ks = sorted(self.mean)
        lines = ["rep\tseed\t" + "\t".join(f"hp@{k}" for k in ks)]
        for rec in self.repetitions:
            row = [str(rec["rep"]), str(rec["seed"])]
            row += [f"{rec['hit_precision'][k]:.4f}" for k in ks]
            lines.append("\t".join(row))
        lines.append(
            "mean\t-\t" + "\t".join(f"{self.mean[k]:.4f}" for k in ks)
        )
        lines.append("std\t-\t" + "\t".join(f"{self.std[k]:.4f}" for k in ks))
        return "\n".join(lines) + "\n"


def aggregate_report(cfg: ExperimentConfig, outputs: list) -> ExperimentReport:
    ks = sorted({k for out in outputs for k in out.scores})
    repetitions = [
        {
            "rep": out.rep,
            "seed": out.split_seed,
            "n_train": cfg.n_train,
            "hit_precision": {str(k): out.scores[k] for k in ks},
        }
        for out in outputs
    ]
    mean = {
        str(k): float(np.mean([out.scores[k] for out in outputs])) for k in ks
    }
    std = {
        str(k): float(np.std([out.scores[k] for out in outputs])) for k in ks
    }
    return ExperimentReport(
        config=cfg.to_dict(),
        top_k=cfg.top_k,
        repetitions=repetitions,
        mean=mean,
        std=std,
    )


def load_inputs(cfg: ExperimentConfig):
    """Load both networks and the ground-truth pairs named in the config."""
    for key in ("users_x", "edges_x", "users_y", "edges_y", "pairs"):
        path = getattr(cfg, key)
        if not path:
            raise ConfigError(f"data.{key} is not set")
        if not Path(path).exists():
            raise DataError(f"data.{key} file not found: {path}")
    net_x = corpus.load_network(cfg.users_x, cfg.edges_x, name="X")
    net_y = corpus.load_network(cfg.users_y, cfg.edges_y, name="Y")
    pairs = corpus.load_pairs(cfg.pairs, net_x, net_y)
    pairs.validate_one_to_one()
    return net_x, net_y, pairs


def evaluate_variant(
    cfg: ExperimentConfig,
    features_x: dict,
    features_y: dict,
    all_pairs: corpus.MatchedPairs,
) -> tuple:
    """All repetitions of one variant over precomputed level features.

    Returns (report, outputs); outputs[0] carries the artifacts of the
    first repetition.
    """
    levels = LEVELS_BY_VARIANT[cfg.variant]
    fused_x = fused_standardized(features_x, levels)
    fused_y = fused_standardized(features_y, levels)
    outputs = [
        run_repetition(cfg, fused_x, fused_y, all_pairs, rep)
        for rep in range(cfg.repetitions)
    ]
    return aggregate_report(cfg, outputs), outputs


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Full in-memory pipeline: embed once, repeat split/train/match/score."""
    cfg.validate()
    net_x, net_y, all_pairs = load_inputs(cfg)
    levels = LEVELS_BY_VARIANT[cfg.variant]
    prep_x = prepare_network(net_x, cfg)
    prep_y = prepare_network(net_y, cfg)
    features_x = compute_level_features(prep_x, cfg, levels, "x")
    features_y = compute_level_features(prep_y, cfg, levels, "y")
    report, _outputs = evaluate_variant(cfg, features_x, features_y, all_pairs)
    return report
