"""Command-line entry points: generate-data, train, eval, predict, attack-eval.

Every RunConfig key is exposed as a flag (underscores become dashes) and
overrides the config file. Exit codes: 0 ok, 2 config error, 3 data error,
4 numerical failure. Relative output paths are rooted at
$TAMPERLOC_OUTPUT_ROOT when that variable is set.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import fields
from pathlib import Path

import cv2

from .attacks import ATTACK_SUITE, attack_tag
from .config import RunConfig, build_config, dump_config
from .datagen import GenOptions, build_corpus
from .dataset import Corpus
from .errors import ConfigError, DataError, NumericsError
from .inference import channel_weights, load_predictor, make_predictor, predict_prob
from .metrics import evaluate_dataset
from .train import train
from .visualize import save_overlay_png, save_prob_png, save_weight_heatmaps

COMMANDS = ("generate-data", "train", "eval", "predict", "attack-eval")


def _add_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key=value config file")
    for f in fields(RunConfig):
        flag = "--" + f.name.replace("_", "-")
        parser.add_argument(flag, dest=f.name, default=None, metavar=str(f.default))


def _config_from(args: argparse.Namespace) -> RunConfig:
    overrides = {
        f.name: getattr(args, f.name)
        for f in fields(RunConfig)
        if getattr(args, f.name) is not None
    }
    return build_config(args.config, overrides)


def cmd_generate_data(config: RunConfig) -> None:
    opts = GenOptions(size=config.input_size)
    rows = build_corpus(
        config.corpus, config.count, opts,
        seed=config.seed, train_fraction=config.train_fraction,
    )
    n_train = sum(1 for r in rows if r["split"] == "train")
    print(f"wrote {len(rows)} samples to {config.corpus} "
          f"({n_train} train / {len(rows) - n_train} test)")


def cmd_train(config: RunConfig) -> None:
    summary = train(config)
    print(f"trained {summary['steps']} steps: "
          f"loss {summary['initial_loss']:.4f} -> {summary['final_loss']:.4f}; "
          f"checkpoint at {summary['checkpoint']}")


def _checkpoint_path(config: RunConfig) -> Path:
    if config.checkpoint:
        return Path(config.checkpoint)
    default = config.output_dir() / "checkpoint.pt"
    if default.is_file():
        return default
    raise ConfigError("no checkpoint given (set checkpoint= or train first)")


def cmd_eval(config: RunConfig) -> None:
    model = load_predictor(_checkpoint_path(config))
    corpus = Corpus(config.corpus)
    report = evaluate_dataset(
        make_predictor(model), corpus, config.split, None, config.threshold
    )
    out = config.output_dir()
    out.mkdir(parents=True, exist_ok=True)
    report.write_csv(out / "eval.csv")
    report.write_json(out / "eval.json")
    dump_config(config, out / "eval_config.txt")
    print(f"{config.split}: mean MCC {report.mean_mcc:.4f}, "
          f"mean F1 {report.mean_f1:.4f} over {len(report.per_image)} images")


def _predict_inputs(config: RunConfig):
    """(name, HWC uint8 RGB) pairs from --inputs paths or the corpus split."""
    if config.inputs:
        paths = []
        for token in config.inputs.split(","):
            p = Path(token.strip())
            if p.is_dir():
                paths.extend(sorted(p.glob("*.png")) + sorted(p.glob("*.jpg")))
            elif p.is_file():
                paths.append(p)
            else:
                raise DataError(f"input not found: {p}")
        for p in paths:
            bgr = cv2.imread(str(p), cv2.IMREAD_COLOR)
            if bgr is None:
                raise DataError(f"unreadable image: {p}")
            yield p.stem, cv2.cvtColor(bgr, cv2.COLOR_BGR2RGB)
    else:
        corpus = Corpus(config.corpus)
        for row in corpus.rows(config.split):
            img, _ = corpus.load_sample(row)
            yield row["id"], img


def cmd_predict(config: RunConfig) -> None:
    model = load_predictor(_checkpoint_path(config))
    out = config.output_dir() / "predictions"
    out.mkdir(parents=True, exist_ok=True)
    count = 0
    for name, img in _predict_inputs(config):
        region, boundary = predict_prob(model, img)
        save_prob_png(region, out / f"{name}_region.png")
        save_overlay_png(region, config.threshold, out / f"{name}_overlay.png")
        if boundary is not None:
            save_prob_png(boundary, out / f"{name}_boundary.png")
        if config.heatmaps:
            alpha = channel_weights(model, img)
            if alpha is not None:
                save_weight_heatmaps(alpha, out / f"{name}_freq_weights.png",
                                     model.config.block_size)
        count += 1
    dump_config(config, config.output_dir() / "predict_config.txt")
    print(f"wrote predictions for {count} images to {out}")


def cmd_attack_eval(config: RunConfig) -> None:
    model = load_predictor(_checkpoint_path(config))
    corpus = Corpus(config.corpus)
    out = config.output_dir()
    out.mkdir(parents=True, exist_ok=True)
    predictor = make_predictor(model)
    summaries = []
    for attack in ATTACK_SUITE:
        report = evaluate_dataset(predictor, corpus, config.split, attack, config.threshold)
        tag = attack_tag(attack)
        report.write_csv(out / f"eval_{tag}.csv")
        report.write_json(out / f"eval_{tag}.json")
        summaries.append(report.summary())
        print(f"{tag}: mean MCC {report.mean_mcc:.4f}, mean F1 {report.mean_f1:.4f}")
    with open(out / "attack_summary.csv", "w", newline="") as fh:
        fh.write("attack,mean_mcc,mean_f1,images,skipped\n")
        for s in summaries:
            fh.write(f"{s['attack']},{s['mean_mcc']:.6f},{s['mean_f1']:.6f},"
                     f"{s['images']},{s['skipped']}\n")
    dump_config(config, out / "attack_eval_config.txt")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="tamperloc",
        description="Pixel-level image tamper localization toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    handlers = {
        "generate-data": cmd_generate_data,
        "train": cmd_train,
        "eval": cmd_eval,
        "predict": cmd_predict,
        "attack-eval": cmd_attack_eval,
    }
    for name in COMMANDS:
        _add_flags(sub.add_parser(name))

    args = parser.parse_args(argv)
    try:
        handlers[args.command](_config_from(args))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except NumericsError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
