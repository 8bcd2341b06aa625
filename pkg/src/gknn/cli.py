"""Command-line entry point: ``gknn <subcommand> ...``.

Exit status is 0 on success, 1 for bad input files and 2 for usage errors.
Every failure prints a single ``ERR <code>: <message>`` line on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path
from typing import Sequence

from . import __version__
from .classifier import (EmptyModelError, LabeledSample, ModelFormatError, ModelLibrary,
                         classify, dumps_model, load_model)
from .corpus import CorpusSpec, evaluate, generate_corpus, k_sweep, read_manifest, split, train
from .corpus.evaluation import vectorize
from .corpus.generate import write_corpus
from .features import extract_features, format_vector, parse_vector_line
from .imaging import DEFAULT_THRESHOLD, BlankInputError, ImageFormatError, load_image


class UsageError(Exception):
    pass


class InputError(Exception):
    def __init__(self, code: str, message: str) -> None:
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(message)


def _odd_k(text: str) -> int:
    try:
        k = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"k must be an integer, got {text!r}") from None
    if k < 1 or k % 2 == 0:
        raise argparse.ArgumentTypeError(f"k must be odd and >= 1, got {k}")
    return k


def _k_list(text: str) -> list[int]:
    return [_odd_k(part) for part in text.split(",") if part]


def _int_list(text: str) -> list[int]:
    try:
        values = [int(part) for part in text.split(",") if part]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values or min(values) < 1:
        raise argparse.ArgumentTypeError(f"expected positive integers, got {text!r}")
    return values


def _threshold(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"threshold must be an integer, got {text!r}") from None
    if not 0 <= value <= 255:
        raise argparse.ArgumentTypeError(f"threshold must be within 0-255, got {value}")
    return value


def _size_range(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition("-")
    try:
        bounds = (int(lo), int(hi) if sep else int(lo))
    except ValueError:
        raise argparse.ArgumentTypeError(f"sizes must look like 16-50, got {text!r}") from None
    if not 8 <= bounds[0] <= bounds[1] <= 512:
        raise argparse.ArgumentTypeError(f"sizes must satisfy 8 <= lo <= hi <= 512, got {text!r}")
    return bounds


def _add_corpus_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("corpus (ignored when --manifest is given)")
    g.add_argument("--manifest", type=Path, help="manifest.csv of an existing corpus")
    g.add_argument("--styles", type=int, default=10, help="style variants (>= 5)")
    g.add_argument("--sizes", type=_size_range, default=(16, 50), help="pixel heights, e.g. 16-50")
    g.add_argument("--samples-per-class", type=int, default=115)
    g.add_argument("--noise", type=float, default=0.0, help="salt noise fraction (<= 0.005)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gknn", description="Structural-feature numeral recognition with k-NN.")
    parser.add_argument("--version", action="version", version=f"gknn {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="<command>", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("gen-corpus", help="write a synthetic corpus of PBM images")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--styles", type=int, default=10)
    p.add_argument("--sizes", type=_size_range, default=(16, 50))
    p.add_argument("--samples-per-class", type=int, default=115)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("extract", help="print one feature line per image")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--image", type=Path, nargs="+")
    src.add_argument("--manifest", type=Path)
    p.add_argument("--label", type=int, help="label written for --image inputs")
    p.add_argument("--threshold", type=_threshold, default=DEFAULT_THRESHOLD)
    p.add_argument("--out", type=Path)

    p = sub.add_parser("train", help="build a model file")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--manifest", type=Path)
    src.add_argument("--features", type=Path, help="output of `gknn extract`")
    p.add_argument("--train-per-class", type=int, help="train on a random subset of a manifest")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threshold", type=_threshold, default=DEFAULT_THRESHOLD)
    p.add_argument("--out", type=Path)

    p = sub.add_parser("classify", help="classify one image")
    p.add_argument("--model", type=Path, required=True)
    p.add_argument("--image", type=Path, required=True)
    p.add_argument("--k", type=_odd_k, default=1, help="odd neighbour count (default 1)")
    p.add_argument("--threshold", type=_threshold, default=DEFAULT_THRESHOLD)
    p.add_argument("--verbose", action="store_true", help="also dump the neighbours as JSON")

    p = sub.add_parser("evaluate", help="accuracy report on a test set")
    p.add_argument("--model", type=Path, help="evaluate every manifest image against this model")
    p.add_argument("--train-per-class", type=int, default=50,
                   help="without --model: split the corpus and train on this many per class")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=_odd_k, default=1, help="odd neighbour count (default 1)")
    p.add_argument("--threshold", type=_threshold, default=DEFAULT_THRESHOLD)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--timing", action="store_true", help="include mean time per image")
    p.add_argument("--out", type=Path)
    _add_corpus_args(p)

    p = sub.add_parser("sweep", help="accuracy for every k and training size")
    p.add_argument("--k", type=_k_list, default=[1, 3, 5, 7], help="odd k values, e.g. 1,3,5,7")
    p.add_argument("--train-sizes", type=_int_list, default=[75, 50],
                   help="training images per class, e.g. 75,50")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threshold", type=_threshold, default=DEFAULT_THRESHOLD)
    p.add_argument("--format", choices=("csv", "json", "text"), default="csv")
    p.add_argument("--out", type=Path)
    _add_corpus_args(p)
    return parser


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def _corpus(args) -> list:
    if args.manifest is not None:
        return read_manifest(args.manifest, threshold=args.threshold)
    try:
        spec = CorpusSpec(styles=args.styles, sizes=tuple(args.sizes),
                          samples_per_class=args.samples_per_class, rng_seed=args.seed,
                          noise=args.noise)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return generate_corpus(spec)


def cmd_gen_corpus(args) -> None:
    try:
        spec = CorpusSpec(styles=args.styles, sizes=tuple(args.sizes),
                          samples_per_class=args.samples_per_class, rng_seed=args.seed,
                          noise=args.noise)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    samples = generate_corpus(spec)
    manifest = write_corpus(samples, args.out)
    print(f"wrote {len(samples)} images, manifest {manifest}", file=sys.stderr)


def cmd_extract(args) -> None:
    lines = []
    if args.manifest is not None:
        samples = read_manifest(args.manifest, threshold=args.threshold)
        for s in samples:
            lines.append(format_vector(extract_features(s.image), s.label))
    else:
        for path in args.image:
            img = load_image(path, threshold=args.threshold)
            lines.append(format_vector(extract_features(img), args.label))
    _emit("".join(line + "\n" for line in lines), args.out)


def _read_feature_file(path: Path) -> ModelLibrary:
    samples = []
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            label, vec = parse_vector_line(line)
        except ValueError as exc:
            raise InputError("input", f"{path}:{lineno}: {exc}") from None
        if label is None:
            raise InputError("input", f"{path}:{lineno}: missing label")
        samples.append(LabeledSample(label, vec))
    return ModelLibrary(samples)


def cmd_train(args) -> None:
    if args.features is not None:
        model = _read_feature_file(args.features)
    else:
        samples = read_manifest(args.manifest, threshold=args.threshold)
        if args.train_per_class is not None:
            samples, _ = split(samples, args.train_per_class, args.seed)
        vectors = vectorize(samples)
        blank = [i for i, v in enumerate(vectors) if v is None]
        if blank:
            raise BlankInputError(f"no foreground pixels after opening ({len(blank)} training images)")
        model = ModelLibrary([LabeledSample(s.label, v) for s, v in zip(samples, vectors)])
    _emit(dumps_model(model), args.out)


def cmd_classify(args) -> None:
    model = load_model(args.model)
    img = load_image(args.image, threshold=args.threshold)
    result = classify(model, extract_features(img), args.k)
    sys.stdout.write(f"{result.label} {result.distance:.6f}\n")
    if args.verbose:
        dump = {"label": result.label, "k": result.k,
                "neighbors": [{"index": n.index, "distance": n.distance, "label": n.label}
                              for n in result.neighbors]}
        sys.stdout.write(json.dumps(dump, indent=2) + "\n")


def cmd_evaluate(args) -> None:
    corpus = _corpus(args)
    if args.model is not None:
        model, test = load_model(args.model), corpus
    else:
        train_set, test = split(corpus, args.train_per_class, args.seed)
        model = train(train_set)
    report = evaluate(model, test, args.k)
    text = report.to_json(args.timing) if args.format == "json" else report.to_text(args.timing)
    _emit(text, args.out)


def cmd_sweep(args) -> None:
    corpus = _corpus(args)
    table = k_sweep(corpus, args.k, args.train_sizes, args.seed)
    text = {"csv": table.to_csv, "json": table.to_json, "text": table.to_text}[args.format]()
    _emit(text, args.out)
    for note in table.trend_warnings():
        print(f"warning: {note}", file=sys.stderr)


COMMANDS = {
    "gen-corpus": cmd_gen_corpus,
    "extract": cmd_extract,
    "train": cmd_train,
    "classify": cmd_classify,
    "evaluate": cmd_evaluate,
    "sweep": cmd_sweep,
}


def _fail(code: str, message: str, status: int) -> int:
    print(f"ERR {code}: {' '.join(str(message).split())}", file=sys.stderr)
    return status


def run(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            COMMANDS[args.command](args)
    except UsageError as exc:
        return _fail("usage", str(exc), 2)
    except BlankInputError:
        return _fail("blank-input", "no foreground pixels after opening", 1)
    except ImageFormatError as exc:
        return _fail("format", str(exc), 1)
    except ModelFormatError as exc:
        return _fail("model", str(exc), 1)
    except EmptyModelError as exc:
        return _fail("empty-model", str(exc), 1)
    except InputError as exc:
        return _fail(exc.code, str(exc), 1)
    except OSError as exc:
        return _fail("io", f"{exc.strerror or exc}: {exc.filename or ''}".rstrip(": "), 1)
    except ValueError as exc:
        return _fail("input", str(exc), 1)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
