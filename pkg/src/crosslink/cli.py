"""Pipeline CLI: generate data, run stages with artifact caching, report.

Stages run in the order embed -> fuse -> train -> match -> eval. Each
cached artifact is content-addressed by a hash of the config subset and
input digests it depends on, so editing any relevant setting invalidates
exactly the affected artifacts. Re-running an unchanged config reuses
caches and reproduces byte-identical reports.

Exit codes: 0 success, 2 config error, 3 data error, 4 numerical failure.
"""

from __future__ import annotations

import hashlib
import json
import sys
from pathlib import Path

import click

from crosslink import corpus, pipeline
from crosslink.config import ExperimentConfig, load_config
from crosslink.errors import ConfigError, DataError, NumericalError
from crosslink.features import FeatureMatrix
from crosslink.matcher import MatchRanking, save_rankings_tsv
from crosslink.rcca import CcaModel, fit_rcca
from crosslink.synthgen import SynthConfig, write_dataset

STAGES = ("embed", "fuse", "train", "match", "eval")

# Config keys each level's artifact depends on (plus seed and data digests).
LEVEL_CONFIG_KEYS = {
    "char": (
        "dims.d_c", "preprocess.qgrams", "char.epochs", "char.batch_size",
        "char.learning_rate",
    ),
    "word": (
        "dims.d_w", "preprocess.rare_min_count", "word.lambda",
        "word.window", "word.negatives", "word.epochs",
    ),
    "topic": (
        "dims.d_t", "preprocess.rare_min_count", "topic.alpha", "topic.beta",
        "topic.iters",
    ),
    "structure": ("dims.d_s", "struct.negatives", "struct.samples_per_edge"),
}


def _short_hash(payload: str) -> str:
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:12]


def _file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


class Workspace:
    """Stage execution against a content-addressed artifact cache."""

    def __init__(self, cfg: ExperimentConfig, out_dir):
        self.cfg = cfg
        self.out = Path(out_dir)
        self.cache = self.out / "cache"
        self.cache.mkdir(parents=True, exist_ok=True)
        self._nets: dict = {}
        self._preps: dict = {}
        self._digests: dict = {}

    # -- inputs ------------------------------------------------------------

    def data_digest(self, side: str) -> str:
        if side not in self._digests:
            users = getattr(self.cfg, f"users_{side}")
            edges = getattr(self.cfg, f"edges_{side}")
            for path in (users, edges):
                if not path:
                    raise ConfigError(f"data path for side {side!r} is not set")
                if not Path(path).exists():
                    raise DataError(f"data file not found: {path}")
            self._digests[side] = _short_hash(
                _file_digest(users) + _file_digest(edges)
            )
        return self._digests[side]

    def network(self, side: str) -> corpus.Network:
        if side not in self._nets:
            self._nets[side] = corpus.load_network(
                getattr(self.cfg, f"users_{side}"),
                getattr(self.cfg, f"edges_{side}"),
                name=side.upper(),
            )
        return self._nets[side]

    def prepared(self, side: str) -> pipeline.PreparedNetwork:
        if side not in self._preps:
            self._preps[side] = pipeline.prepare_network(
                self.network(side), self.cfg
            )
        return self._preps[side]

    def pairs(self) -> corpus.MatchedPairs:
        if not self.cfg.pairs:
            raise ConfigError("data.pairs is not set")
        if not Path(self.cfg.pairs).exists():
            raise DataError(f"data file not found: {self.cfg.pairs}")
        pairs = corpus.load_pairs(
            self.cfg.pairs, self.network("x"), self.network("y")
        )
        pairs.validate_one_to_one()
        return pairs

    # -- hashes ------------------------------------------------------------

    def _subset(self, keys) -> dict:
        full = self.cfg.to_dict()
        return {k: full[k] for k in keys}

    def level_hash(self, side: str, level: str) -> str:
        payload = json.dumps(
            {
                "level": level,
                "side": side,
                "data": self.data_digest(side),
                "cfg": self._subset(LEVEL_CONFIG_KEYS[level]),
                "seed": self.cfg.seed,
            },
            sort_keys=True,
        )
        return _short_hash(payload)

    def level_path(self, side: str, level: str) -> Path:
        return self.cache / f"{level}_{side}_{self.level_hash(side, level)}.fmx"

    def fused_hash(self, side: str) -> str:
        levels = pipeline.LEVELS_BY_VARIANT[self.cfg.variant]
        payload = json.dumps(
            [self.level_hash(side, lvl) for lvl in levels], sort_keys=True
        )
        return _short_hash(payload)

    def fused_path(self, side: str) -> Path:
        levels = "+".join(pipeline.LEVELS_BY_VARIANT[self.cfg.variant])
        return self.cache / f"fused_{side}_{levels}_{self.fused_hash(side)}.fmx"

    def model_hash(self) -> str:
        payload = json.dumps(
            {
                "fused_x": self.fused_hash("x"),
                "fused_y": self.fused_hash("y"),
                "pairs": _file_digest(self.cfg.pairs),
                "cfg": self._subset(
                    ("rcca.k_proj", "rcca.reg", "eval.n_train", "eval.n_test")
                ),
                "seed": self.cfg.seed,
            },
            sort_keys=True,
        )
        return _short_hash(payload)

    def model_path(self) -> Path:
        return self.cache / f"model_{self.cfg.variant}_{self.model_hash()}.ccm"

    def rankings_path(self) -> Path:
        payload = json.dumps(
            {
                "model": None
                if self.cfg.variant == "no_projection"
                else self.model_hash(),
                "fused_x": self.fused_hash("x"),
                "fused_y": self.fused_hash("y"),
                "pool": self.cfg.candidate_pool,
                "top_k": self.cfg.top_k,
            },
            sort_keys=True,
        )
        return self.cache / f"rankings_{_short_hash(payload)}.json"

    # -- stages ------------------------------------------------------------

    def stage_embed(self) -> None:
        levels = pipeline.LEVELS_BY_VARIANT[self.cfg.variant]
        for side in ("x", "y"):
            for level in levels:
                path = self.level_path(side, level)
                if path.exists():
                    click.echo(f"[embed] cached {path.name}")
                    continue
                seed = pipeline.derive_seed(self.cfg.seed, side, level)
                fm = pipeline.embed_level(self.prepared(side), level, self.cfg, seed)
                fm.save(path)
                click.echo(f"[embed] wrote {path.name} ({fm.d}x{fm.n})")

    def load_levels(self, side: str) -> dict:
        levels = pipeline.LEVELS_BY_VARIANT[self.cfg.variant]
        out = {}
        for level in levels:
            path = self.level_path(side, level)
            if not path.exists():
                raise DataError(
                    f"missing cached {level} features for side {side}; "
                    "run stage 'embed' first"
                )
            out[level] = FeatureMatrix.load(path)
        return out

    def stage_fuse(self) -> None:
        levels = pipeline.LEVELS_BY_VARIANT[self.cfg.variant]
        for side in ("x", "y"):
            path = self.fused_path(side)
            if path.exists():
                click.echo(f"[fuse] cached {path.name}")
                continue
            fm = pipeline.fused_standardized(self.load_levels(side), levels)
            fm.save(path)
            click.echo(f"[fuse] wrote {path.name} ({fm.d}x{fm.n})")

    def load_fused(self, side: str) -> FeatureMatrix:
        path = self.fused_path(side)
        if not path.exists():
            raise DataError(
                f"missing cached fused features for side {side}; "
                "run stage 'fuse' first"
            )
        return FeatureMatrix.load(path)

    def _rep0(self) -> pipeline.RepetitionOutput:
        return pipeline.run_repetition(
            self.cfg, self.load_fused("x"), self.load_fused("y"), self.pairs(), 0
        )

    def stage_train(self) -> None:
        if self.cfg.variant == "no_projection":
            click.echo("[train] variant=no_projection: no projection model to train")
            return
        path = self.model_path()
        if path.exists():
            click.echo(f"[train] cached {path.name}")
            return
        out = self._rep0()
        out.model.save(path)
        click.echo(
            f"[train] wrote {path.name} (k={out.model.k}, "
            f"top correlation {out.model.correlations[0]:.4f})"
        )

    def stage_match(self) -> None:
        if self.cfg.variant != "no_projection" and not self.model_path().exists():
            raise DataError(
                "missing cached projection model; run stage 'train' first"
            )
        out = self._rep0()
        rankings_json = [
            {"query": r.query_index, "candidates": r.candidates}
            for r in out.rankings
        ]
        self.rankings_path().write_text(json.dumps(rankings_json, sort_keys=True))
        ids_x = [u.id for u in self.network("x").users]
        ids_y = [u.id for u in self.network("y").users]
        save_rankings_tsv(out.rankings, ids_x, ids_y, self.out / "rankings.tsv")
        with open(self.out / "predictions.tsv", "w", encoding="utf-8") as fh:
            for r in out.rankings:
                best = r.candidates[0][0]
                fh.write(f"{ids_x[r.query_index]}\t{ids_y[best]}\n")
        click.echo(f"[match] wrote rankings.tsv and predictions.tsv in {self.out}")

    def stage_eval(self) -> pipeline.ExperimentReport:
        if not self.rankings_path().exists():
            raise DataError("missing cached rankings; run stage 'match' first")
        fused_x, fused_y = self.load_fused("x"), self.load_fused("y")
        all_pairs = self.pairs()
        outputs = [
            pipeline.run_repetition(self.cfg, fused_x, fused_y, all_pairs, rep)
            for rep in range(self.cfg.repetitions)
        ]
        report = pipeline.aggregate_report(self.cfg, outputs)
        (self.out / "report.json").write_text(report.to_json() + "\n")
        (self.out / "report.txt").write_text(report.to_table())
        click.echo(f"[eval] wrote report.json and report.txt in {self.out}")
        return report

    def run_all(self) -> pipeline.ExperimentReport:
        self.stage_embed()
        self.stage_fuse()
        self.stage_train()
        self.stage_match()
        return self.stage_eval()


def _echo_config(cfg: ExperimentConfig) -> None:
    click.echo("resolved configuration:")
    for key, value in cfg.to_dict().items():
        click.echo(f"  {key}={value}")


def _guarded(fn):
    try:
        return fn()
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(2)
    except DataError as exc:
        click.echo(f"data error: {exc}", err=True)
        sys.exit(3)
    except NumericalError as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        sys.exit(4)


def _build_config(config_path, seed, variant) -> ExperimentConfig:
    overrides = {}
    if seed is not None:
        overrides["seed"] = seed
    if variant is not None:
        overrides["variant"] = variant
    return load_config(config_path, overrides=overrides)


def _stage_options(fn):
    fn = click.option("--config", "config_path", required=True,
                      type=click.Path(), help="key=value config file")(fn)
    fn = click.option("--out-dir", default="out", type=click.Path(),
                      help="artifact and report directory")(fn)
    fn = click.option("--seed", type=int, default=None,
                      help="override the master seed")(fn)
    fn = click.option("--variant", default=None,
                      type=click.Choice(["full", "attrs_only", "struct_only",
                                         "no_projection"]),
                      help="override the pipeline variant")(fn)
    return fn


@click.group()
def main():
    """Cross-network identity linking pipeline."""


@main.command()
@click.option("--out-dir", required=True, type=click.Path())
@click.option("--n-users", default=500, show_default=True)
@click.option("--attachment-m", default=2, show_default=True)
@click.option("--edge-drop-p", default=0.1, show_default=True)
@click.option("--attr-drop-p", default=0.2, show_default=True)
@click.option("--char-noise-p", default=0.05, show_default=True)
@click.option("--word-swap-p", default=0.1, show_default=True)
@click.option("--topics", default=4, show_default=True)
@click.option("--doc-length", default=40, show_default=True)
@click.option("--seed", default=0, show_default=True)
def synth(out_dir, n_users, attachment_m, edge_drop_p, attr_drop_p,
          char_noise_p, word_swap_p, topics, doc_length, seed):
    """Generate a synthetic aligned-network dataset with ground truth."""

    def body():
        try:
            cfg = SynthConfig(
                n_users=n_users,
                attachment_m=attachment_m,
                edge_drop_p=edge_drop_p,
                attr_drop_p=attr_drop_p,
                char_noise_p=char_noise_p,
                word_swap_p=word_swap_p,
                n_planted_topics=topics,
                doc_length=doc_length,
                seed=seed,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        paths = write_dataset(cfg, out_dir)
        n_train = max(1, n_users // 5)
        n_test = max(1, min(2 * n_users // 5, n_users - n_train))
        config_lines = [
            f"data.users_x={paths['users_x']}",
            f"data.edges_x={paths['edges_x']}",
            f"data.users_y={paths['users_y']}",
            f"data.edges_y={paths['edges_y']}",
            f"data.pairs={paths['pairs']}",
            "variant=full",
            f"eval.n_train={n_train}",
            f"eval.n_test={n_test}",
            "eval.top_k=3",
            "eval.repetitions=10",
            "rcca.k_proj=25",
            "rcca.reg=100.0",
            f"seed={seed}",
        ]
        config_path = Path(out_dir) / "config.ini"
        config_path.write_text("\n".join(config_lines) + "\n")
        click.echo(f"wrote dataset and {config_path}")

    _guarded(body)


def _run_stage(config_path, out_dir, seed, variant, stage):
    cfg = _build_config(config_path, seed, variant)
    _echo_config(cfg)
    ws = Workspace(cfg, out_dir)
    if stage is None:
        report = ws.run_all()
    elif stage == "embed":
        ws.stage_embed()
        report = None
    elif stage == "fuse":
        ws.stage_fuse()
        report = None
    elif stage == "train":
        ws.stage_train()
        report = None
    elif stage == "match":
        ws.stage_match()
        report = None
    elif stage == "eval":
        report = ws.stage_eval()
    else:
        raise ConfigError(f"unknown stage {stage!r}")
    if report is not None:
        click.echo(report.to_table())


@main.command()
@_stage_options
@click.option("--stage", default=None, type=click.Choice(STAGES),
              help="run only this stage against cached upstream artifacts")
def run(config_path, out_dir, seed, variant, stage):
    """Run the full pipeline, or one stage against the cache."""
    _guarded(lambda: _run_stage(config_path, out_dir, seed, variant, stage))


def _make_stage_command(stage_name: str, doc: str):
    @main.command(name=stage_name, help=doc)
    @_stage_options
    def _cmd(config_path, out_dir, seed, variant, _stage=stage_name):
        _guarded(lambda: _run_stage(config_path, out_dir, seed, variant, _stage))

    return _cmd


_make_stage_command("embed", "Compute and cache per-level feature matrices.")
_make_stage_command("fuse", "Fuse cached level features and standardize.")
_make_stage_command("train", "Fit the projection model on the rep-0 split.")
_make_stage_command("match", "Rank candidates and write rankings/predictions.")
_make_stage_command("eval", "Score all repetitions and write the report.")


if __name__ == "__main__":
    main()
