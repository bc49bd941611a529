"""
MIT License

Copyright (c) 2024-Present visquant contributors

Permission is hereby granted, free of charge, to any person obtaining a copy
of this software and associated documentation files (the "Software"), to deal
in the Software without restriction, including without limitation the rights
to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
copies of the Software, and to permit persons to whom the Software is
furnished to do so, subject to the following conditions:

The above copyright notice and this permission notice shall be included in all
copies or substantial portions of the Software.

THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR
IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY,
FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE
AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER
LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN THE
SOFTWARE.
"""
from __future__ import annotations

import argparse
import logging
import platform
import sys
from collections.abc import Callable, Sequence
from pathlib import Path
from typing import Any

import numpy as np
import scipy

from . import __version__
from .audit import audit_bias, describe_corpus
from .catalog import Catalog
from .config import RunConfig
from .dots import DotCorpus, generate_dot_corpus, load_dot_corpus
from .enums import AnalysisKind, Architecture, SplitSetting
from .evaluation import (
    DEFAULT_BINS,
    boundary_dips,
    compare_reports,
    distractor_analysis,
    evaluate,
    predict,
    ratio_bin_analysis,
    ratio_span_analysis,
    write_plot_data,
    write_report,
)
from .exceptions import CheckpointError, ConfigError, VisquantException
from .models import Model, ModelSpec, load_model
from .samples import Sample
from .scenarios import Corpus, generate_corpus
from .splits import SplitResult, read_manifests, split, write_manifests
from .training import History, train
from .utils import Provenance, file_digest, write_json

__all__ = ("run", "main", "open_corpus", "debug_info")


logger: logging.Logger = logging.getLogger(__name__)


SCENE_DEFAULT: int = 400
DOT_DEFAULT: int = 200
DOTWORLD_DEFAULT: int = 2100

# One convolution layer with mean pooling gives small features; the dot experiment needs a larger step.
DOTWORLD_TRAINING: dict[str, Any] = {"learning_rate": 0.5, "max_epochs": 150, "patience": 25}


def open_corpus(path: str | Path) -> Corpus | DotCorpus:
    """Load a scene corpus directory or a dot corpus file (or a directory holding ``dots.bin``)."""
    source = Path(path)

    if (source / "corpus.json").is_file():
        return Corpus.load(source)

    if (source / "dots.bin").is_file():
        return load_dot_corpus(source / "dots.bin")

    if source.is_file():
        return load_dot_corpus(source)

    raise CheckpointError(f"No corpus found at {source}.")


def _provenance(run: RunConfig, **extra: Any) -> Provenance:
    return Provenance(command=run.command, seed=run.seed, config=run.to_dict(), **extra)


def _load_split(directory: str | Path) -> tuple[Corpus | DotCorpus, SplitResult]:
    result, header = read_manifests(directory)
    return open_corpus(header["corpus"]), result


def _partition(corpus: Corpus | DotCorpus, result: SplitResult, name: str) -> list[Sample]:
    return corpus.samples(corpus.subset(result[name]))  # type: ignore


def _model_spec(run: RunConfig, corpus: Corpus | DotCorpus, architecture: Architecture) -> ModelSpec:
    if isinstance(corpus, DotCorpus):
        if architecture is not Architecture.DOT_CNN:
            raise ConfigError(f"Dot corpora are classified with dot-cnn, not {architecture.value}.")

        return run.model_spec(architecture, image_shape=(corpus.config.height, corpus.config.width))

    if architecture is Architecture.DOT_CNN:
        raise ConfigError("dot-cnn needs a dot corpus.")

    return run.model_spec(
        architecture,
        vocabulary=corpus.catalog.vocabulary_size,
        d_visual=corpus.config.dim,
        slots=corpus.config.slots,
    )


def _write_history(history: History, out: Path, stem: str) -> list[Path]:
    return [
        write_json(out / f"{stem}.history.json", history.to_payload()),
        write_plot_data(history.plot_series(), out / f"{stem}.history.tsv"),
    ]


def _train_stage(
    run: RunConfig, corpus: Corpus | DotCorpus, result: SplitResult, architecture: Architecture, out: Path
) -> tuple[Model, Path]:
    spec = _model_spec(run, corpus, architecture)
    config = run.train_config()

    model, history = train(spec, _partition(corpus, result, "train"), _partition(corpus, result, "val"), config)

    checkpoint = model.save(
        out / f"{architecture.value}.vqck",
        provenance=_provenance(run, train=config.to_dict()),
        extra={"history": history.to_payload()},
    )
    _write_history(history, out, architecture.value)
    return model, checkpoint


def _generate(args: argparse.Namespace, run: RunConfig) -> None:
    config = run.synth_config()
    catalog = Catalog.synthetic(
        objects=config.objects, properties=config.properties, mean_plausible=config.mean_plausible, seed=run.seed
    )
    corpus = generate_corpus(
        run.get("per_quantifier", SCENE_DEFAULT), catalog, config, run.seed, provenance=_provenance(run)
    )
    corpus.save(run.output_dir)


def _split(args: argparse.Namespace, run: RunConfig) -> None:
    corpus = open_corpus(args.corpus)
    result = split(corpus, run.split_spec())
    write_manifests(result, run.output_dir, corpus=args.corpus, provenance=_provenance(run))


def _train(args: argparse.Namespace, run: RunConfig) -> None:
    corpus, result = _load_split(args.split)
    _train_stage(run, corpus, result, run.architecture(), run.output_dir)


def _eval(args: argparse.Namespace, run: RunConfig) -> None:
    corpus, result = _load_split(args.split)
    samples = _partition(corpus, result, args.partition)
    bins: int = run.get("bins", DEFAULT_BINS)
    reports = {}

    for path in map(Path, args.checkpoint):
        model, _ = load_model(path)
        report = evaluate(
            model, samples, bins=bins, provenance=_provenance(run, checkpoint=path.name, partition=args.partition)
        )
        reports[path.stem] = report

        write_report(report.to_payload(), run.output_dir / f"{path.stem}.report.json")
        write_plot_data(report.plot_series(), run.output_dir / f"{path.stem}.report.tsv")

    if len(reports) > 1:
        write_report(compare_reports(reports), run.output_dir / "comparison.json")


def _analyze(args: argparse.Namespace, run: RunConfig) -> None:
    corpus, result = _load_split(args.split)
    samples = _partition(corpus, result, args.partition)
    path = Path(args.checkpoint)
    model, _ = load_model(path)

    kind = AnalysisKind(args.kind)
    payload: dict[str, Any] = {"kind": kind.value, "provenance": dict(_provenance(run, checkpoint=path.name))}
    series: dict[str, list[tuple[float, float | None]]] = {}

    if kind is AnalysisKind.ratio:
        bins = ratio_bin_analysis(model, samples, run.get("bins", DEFAULT_BINS))
        payload["bins"] = [b.to_payload() for b in bins]
        payload["boundary_dips"] = {label.word: dip for label, dip in boundary_dips(bins).items()}

        for b in bins:
            series.setdefault(b.label.word, []).append((float((b.low + b.high) / 2), b.accuracy))

    elif kind is AnalysisKind.distractor:
        rows = distractor_analysis(model, samples)
        payload["rows"] = [r.to_payload() for r in rows]
        series["distractors"] = [(r.cardinality, r.accuracy) for r in rows]

    elif kind is AnalysisKind.span:
        points = ratio_span_analysis(samples, predict(model, samples))
        payload["points"] = [p.to_payload() for p in points]
        series["span"] = [(float(p.ratio), p.accuracy) for p in points]

    else:
        report = evaluate(model, samples)
        payload["confusion"] = report.confusion.tolist()
        payload["adjacency"] = report.adjacency
        payload["per_quantifier"] = {label.word: value for label, value in report.per_quantifier.items()}
        series["adjacency"] = [(float(d), float(n)) for d, n in enumerate(report.adjacency)]

    write_report(payload, run.output_dir / f"{path.stem}.{kind.value}.json")
    write_plot_data(series, run.output_dir / f"{path.stem}.{kind.value}.tsv")


def _audit(args: argparse.Namespace, run: RunConfig) -> None:
    corpus = open_corpus(args.corpus)

    if isinstance(corpus, DotCorpus):
        raise ConfigError("Dot corpora have no queries to audit.")

    report = audit_bias(corpus, provenance=_provenance(run))
    write_report(report.to_payload(), run.output_dir / "bias.json")
    write_plot_data(report.plot_series(), run.output_dir / "bias.tsv")
    write_report(describe_corpus(corpus), run.output_dir / "describe.json")  # type: ignore

    logger.info(f"Audited {len(report.queries)} queries; largest per-query ratio {report.max_ratio:.3f}")


def _dotsim(args: argparse.Namespace, run: RunConfig) -> None:
    corpus = generate_dot_corpus(
        run.get("per_quantifier", DOT_DEFAULT), run.dot_config(), run.seed, provenance=_provenance(run)
    )
    corpus.save(run.output_dir / "dots.bin")


def _experiment(name: str) -> tuple[SplitSetting, Architecture]:
    setting, _, arch = name.partition("-")

    try:
        return SplitSetting.parse(setting), Architecture.parse(arch)
    except ValueError as e:
        raise ConfigError(f'Unknown experiment "{name}": {e}') from e


def _repro(args: argparse.Namespace, run: RunConfig) -> None:
    name: str = args.experiment.strip().lower()
    root: Path = run.output_dir / name

    if name == "dotworld":
        run = RunConfig(run.command, DOTWORLD_TRAINING | dict(run.values))
        architecture = Architecture.DOT_CNN
        corpus: Corpus | DotCorpus = generate_dot_corpus(
            run.get("per_quantifier", DOTWORLD_DEFAULT), run.dot_config(), run.seed, provenance=_provenance(run)
        )
        corpus_path = corpus.save(root / "corpus" / "dots.bin")
        run = RunConfig(run.command, dict(run.values) | {"setting": SplitSetting.UNC.value})
    else:
        setting, architecture = _experiment(name)
        run = RunConfig(run.command, dict(run.values) | {"setting": setting.value})

        config = run.synth_config()
        catalog = Catalog.synthetic(
            objects=config.objects, properties=config.properties, mean_plausible=config.mean_plausible, seed=run.seed
        )
        corpus = generate_corpus(
            run.get("per_quantifier", SCENE_DEFAULT), catalog, config, run.seed, provenance=_provenance(run)
        )
        corpus_path = corpus.save(root / "corpus")

    spec = run.split_spec()
    result = split(corpus, spec)
    write_manifests(result, root / "splits", corpus=corpus_path, provenance=_provenance(run))

    model, checkpoint = _train_stage(run, corpus, result, architecture, root)
    report = evaluate(
        model,
        _partition(corpus, result, "test"),
        bins=run.get("bins", DEFAULT_BINS),
        provenance=_provenance(run, experiment=name),
    )
    write_report(report.to_payload(), root / "report.json")
    write_plot_data(report.plot_series(), root / "report.tsv")

    digests: dict[str, str] = {
        p.relative_to(root).as_posix(): file_digest(p)
        for p in sorted(root.rglob("*"))
        if p.is_file() and p.name != "manifest.json"
    }
    write_json(
        root / "manifest.json",
        {
            "experiment": name,
            "seed": run.seed,
            "config": run.to_dict(),
            "split": {
                "setting": spec.setting.value,
                "fractions": list(spec.fractions),
                "exclude_heldout_distractors": spec.exclude_heldout_distractors,
            },
            "model": model.spec.to_dict(),
            "train": run.train_config().to_dict(),
            "accuracy": report.accuracy,
            "checkpoint": checkpoint.name,
            "digests": digests,
        },
    )

    logger.info(f"{name}: test accuracy {report.accuracy:.3f} on {report.total} datapoints")


HANDLERS: dict[str, Callable[[argparse.Namespace, RunConfig], None]] = {
    "generate": _generate,
    "split": _split,
    "train": _train,
    "eval": _eval,
    "analyze": _analyze,
    "audit": _audit,
    "dotsim": _dotsim,
    "repro": _repro,
}


def _model_flags() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    group = parser.add_argument_group("model")
    group.add_argument("--arch", help="Architecture: bow, cnn-bow, lstm, cnn-lstm, san, qmn, qsan or dot-cnn.")
    group.add_argument("--d-embed", dest="d_embed", type=int)
    group.add_argument("--d-hidden", dest="d_hidden", type=int)
    group.add_argument("--d-mem", dest="d_mem", type=int)
    group.add_argument("--stacks", type=int)
    group.add_argument("--qmn-softmax-s2", dest="qmn_softmax_s2", action="store_const", const=True)
    group.add_argument("--filters", type=int)
    group.add_argument("--receptive-field", dest="receptive_field", type=int)
    group.add_argument("--stride", type=int)

    group = parser.add_argument_group("training")
    group.add_argument("--lr", "--learning-rate", dest="learning_rate", type=float)
    group.add_argument("--batch-size", dest="batch_size", type=int)
    group.add_argument("--max-epochs", dest="max_epochs", type=int)
    group.add_argument("--patience", type=int)
    return parser


def _common_flags() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--seed", type=int, help="Seed recorded in every artifact. Defaults to 0.")
    parser.add_argument("--out", help="Output location. Defaults to $VISQUANT_OUTPUT_DIR or ./runs.")
    return parser


def _world_flags() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    group = parser.add_argument_group("synthetic world")
    group.add_argument("--objects", type=int)
    group.add_argument("--properties", type=int)
    group.add_argument("--mean-plausible", dest="mean_plausible", type=float)
    group.add_argument("--per-quantifier", dest="per_quantifier", type=int)
    group.add_argument("--dim", type=int)
    group.add_argument("--sigma", type=float)
    group.add_argument("--slots", type=int)
    return parser


def _split_flags() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    group = parser.add_argument_group("splitting")
    group.add_argument("--setting", help="unc, unsobj, unsprop or unsque.")
    group.add_argument("--fractions", help="Train, validation and test shares, e.g. 0.7,0.15,0.15.")
    group.add_argument(
        "--exclude-heldout-distractors", dest="exclude_heldout_distractors", action="store_const", const=True
    )
    return parser


def _dot_flags() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    group = parser.add_argument_group("dot world")
    group.add_argument("--size", type=int, help="Side of the square frame in pixels.")
    group.add_argument("--radius", type=int)
    return parser


def debug_info() -> str:
    """Version and platform information, printed by ``visquant --version``."""
    python_info = " ".join(sys.version.split("\n"))
    return (
        f"visquant: {__version__}\n"
        f"Python:\n    - {python_info}\n"
        f"System:\n    - {platform.platform()}\n"
        f"Libraries:\n    - numpy {np.__version__}\n    - scipy {scipy.__version__}"
    )


def _positive_int(value: str) -> int:
    number = int(value)

    if number < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")

    return number


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="visquant", description="Visually grounded quantification experiments.")
    parser.add_argument("--version", action="version", version=debug_info(), help="Show version and debug information.")
    parser.add_argument("--log-level", default="INFO", choices=("DEBUG", "INFO", "WARNING", "ERROR"))
    parser.add_argument("--config", help="Plain-text key = value file. Flags win over its values.")
    commands = parser.add_subparsers(dest="command", required=True)

    common, world, splitting = _common_flags(), _world_flags(), _split_flags()
    model, dots = _model_flags(), _dot_flags()
    bins = argparse.ArgumentParser(add_help=False)
    bins.add_argument("--bins", type=_positive_int, help=f"Ratio bins per quantifier. Defaults to {DEFAULT_BINS}.")

    commands.add_parser("generate", parents=[common, world], help="Generate a scene corpus.")

    sub = commands.add_parser("split", parents=[common, splitting], help="Partition a corpus.")
    sub.add_argument("--corpus", required=True)

    sub = commands.add_parser("train", parents=[common, model], help="Train a classifier on a split.")
    sub.add_argument("--split", required=True, help="Directory of split manifests.")

    sub = commands.add_parser("eval", parents=[common, bins], help="Evaluate one or more checkpoints.")
    sub.add_argument("--checkpoint", action="append", required=True)
    sub.add_argument("--split", required=True)
    sub.add_argument("--partition", default="test", choices=("train", "val", "test"))

    sub = commands.add_parser("analyze", parents=[common, bins], help="Run one analysis on a checkpoint.")
    sub.add_argument("--checkpoint", required=True)
    sub.add_argument("--split", required=True)
    sub.add_argument("--partition", default="test", choices=("train", "val", "test"))
    sub.add_argument("--kind", required=True, choices=[k.value for k in AnalysisKind])

    sub = commands.add_parser("audit", parents=[common], help="Audit the language bias of a corpus.")
    sub.add_argument("--corpus", required=True)

    sub = commands.add_parser("dotsim", parents=[common, dots], help="Render a dot corpus.")
    sub.add_argument("--per-quantifier", dest="per_quantifier", type=int)

    sub = commands.add_parser(
        "repro", parents=[common, world, splitting, model, dots, bins], help="Run an experiment end to end."
    )
    sub.add_argument("experiment", help="dotworld, or <setting>-<arch> such as unc-qsan or unsque-cnn-lstm.")

    return parser


def run(argv: Sequence[str] | None = None) -> int:
    """Run one CLI invocation and return its exit status.

    ``0`` when the stage completed, ``1`` when it failed with a library or file system error and ``2`` for usage
    errors.
    """
    parser = build_parser()

    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2

    logging.basicConfig(
        level=getattr(logging, args.log_level), stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s"
    )

    try:
        config = RunConfig.from_sources(args.command, vars(args), args.config)
        HANDLERS[args.command](args, config)
    except VisquantException as e:
        logger.error(f"{args.command} failed: {e}")
        return 1
    except OSError as e:
        logger.error(f"{args.command} failed on the file system: {e}")
        return 1

    return 0


def main() -> None:
    sys.exit(run())
