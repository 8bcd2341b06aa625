"""Evaluation harness: per-class accuracy, confusion matrix, timing and k sweeps."""

from __future__ import annotations

import io
import json
import os
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from ..classifier import LabeledSample, ModelLibrary, classify
from ..features import FeatureVector, extract_features
from ..imaging import DEFAULT_SE, BlankInputError, StructuringElement
from .generate import Sample, split

N_CLASSES = 10


def worker_count(requested: int | None = None) -> int:
    """Worker count from the argument or ``GKNN_THREADS`` (0 = one per CPU)."""
    if requested is None:
        raw = os.environ.get("GKNN_THREADS", "1").strip() or "1"
        try:
            requested = int(raw)
        except ValueError:
            raise ValueError(f"GKNN_THREADS must be an integer, got {raw!r}") from None
    if requested < 0:
        raise ValueError(f"worker count must be >= 0, got {requested}")
    return requested or (os.cpu_count() or 1)


@dataclass
class EvaluationReport:
    confusion: np.ndarray
    rejected: list[int] = field(default_factory=list)
    total_time: float = 0.0
    timed_images: int = 0
    k: int = 1

    @property
    def tested(self) -> np.ndarray:
        """Classified images per true class (rejected blanks excluded)."""
        return self.confusion.sum(axis=1)

    @property
    def correct(self) -> np.ndarray:
        return np.diag(self.confusion).copy()

    @property
    def per_class_accuracy(self) -> np.ndarray:
        tested = self.tested
        with np.errstate(invalid="ignore", divide="ignore"):
            acc = np.where(tested > 0, 100.0 * self.correct / np.maximum(tested, 1), 0.0)
        return acc

    @property
    def overall_accuracy(self) -> float:
        tested = int(self.tested.sum())
        return 100.0 * int(self.correct.sum()) / tested if tested else 0.0

    @property
    def mean_time_per_image(self) -> float:
        return self.total_time / self.timed_images if self.timed_images else 0.0

    def to_dict(self, timing: bool = False) -> dict:
        d = {
            "k": self.k,
            "per_class": [
                {"numeral": c, "tested": int(t), "correct": int(r), "accuracy": round(float(a), 6)}
                for c, (t, r, a) in enumerate(zip(self.tested, self.correct, self.per_class_accuracy))
            ],
            "total": {"tested": int(self.tested.sum()), "correct": int(self.correct.sum()),
                      "accuracy": round(self.overall_accuracy, 6)},
            "confusion": self.confusion.astype(int).tolist(),
            "rejected": list(self.rejected),
        }
        if timing:
            d["mean_time_per_image"] = self.mean_time_per_image
        return d

    def to_json(self, timing: bool = False) -> str:
        return json.dumps(self.to_dict(timing), indent=2) + "\n"

    def to_text(self, timing: bool = False) -> str:
        out = io.StringIO()
        out.write(f"{'Numeral':<8}{'Test images':>13}{'Correctly classified':>22}{'% Accuracy':>12}\n")
        for c in range(N_CLASSES):
            out.write(f"{c:<8}{int(self.tested[c]):>13}{int(self.correct[c]):>22}"
                      f"{self.per_class_accuracy[c]:>12.2f}\n")
        out.write(f"{'Total':<8}{int(self.tested.sum()):>13}{int(self.correct.sum()):>22}"
                  f"{self.overall_accuracy:>12.2f}\n")
        if self.rejected:
            out.write(f"rejected (blank after opening): {len(self.rejected)}\n")
        if timing:
            out.write(f"mean time per image: {self.mean_time_per_image:.6f} s\n")
        return out.getvalue()


def _run_one(model: ModelLibrary, sample: Sample, k: int, se: StructuringElement):
    start = time.perf_counter()
    try:
        label = classify(model, extract_features(sample.image, se), k).label
    except BlankInputError:
        label = None
    return label, time.perf_counter() - start


def evaluate(model: ModelLibrary, test: Sequence[Sample], k: int = 1,
             se: StructuringElement = DEFAULT_SE, workers: int | None = None) -> EvaluationReport:
    """Push every test image through open/crop/features/classify and tally the results.

    Time is measured per image around that whole pipeline. Images that come
    out blank are listed in ``rejected`` (by their position in ``test``) and
    do not enter the confusion matrix.
    """
    if not test:
        raise ValueError("empty test set")
    n = worker_count(workers)
    if n == 1:
        results = [_run_one(model, s, k, se) for s in test]
    else:
        with ThreadPoolExecutor(max_workers=n) as pool:
            results = list(pool.map(lambda s: _run_one(model, s, k, se), test))
    report = EvaluationReport(np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64), k=k)
    for i, (sample, (predicted, elapsed)) in enumerate(zip(test, results)):
        report.total_time += elapsed
        report.timed_images += 1
        if predicted is None:
            report.rejected.append(i)
        else:
            report.confusion[sample.label, predicted] += 1
    return report


def vectorize(samples: Iterable[Sample], se: StructuringElement = DEFAULT_SE,
              workers: int | None = None) -> list[FeatureVector | None]:
    """Normalized feature vector per sample; ``None`` for images blank after opening."""
    def one(s: Sample):
        try:
            return extract_features(s.image, se)
        except BlankInputError:
            return None

    samples = list(samples)
    n = worker_count(workers)
    if n == 1:
        return [one(s) for s in samples]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(one, samples))


def train(samples: Sequence[Sample], se: StructuringElement = DEFAULT_SE,
          workers: int | None = None) -> ModelLibrary:
    """Library of every non-blank sample, in input order."""
    vectors = vectorize(samples, se, workers)
    return ModelLibrary([LabeledSample(s.label, v, dict(s.meta))
                         for s, v in zip(samples, vectors) if v is not None])


@dataclass
class SweepTable:
    ks: tuple[int, ...]
    train_sizes: tuple[int, ...]
    cells: dict[tuple[int, int], float]
    test_count: int

    def accuracy(self, k: int, train_size: int) -> float:
        return self.cells[(k, train_size)]

    def column(self, train_size: int) -> list[float]:
        return [self.cells[(k, train_size)] for k in self.ks]

    def trend_warnings(self) -> list[str]:
        """Soft check that the smallest k is no worse than the largest in each column."""
        lo, hi = min(self.ks), max(self.ks)
        notes = []
        for n in self.train_sizes:
            if self.cells[(lo, n)] < self.cells[(hi, n)]:
                notes.append(f"train size {n}: k={lo} ({self.cells[(lo, n)]:.3f}) "
                             f"below k={hi} ({self.cells[(hi, n)]:.3f})")
        return notes

    def to_csv(self) -> str:
        lines = ["k,train_size,accuracy"]
        for k in self.ks:
            for n in self.train_sizes:
                lines.append(f"{k},{n},{self.cells[(k, n)]:.6f}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "test_images": self.test_count,
            "train_sizes": list(self.train_sizes),
            "rows": [{"k": k, "accuracy": {str(n): round(self.cells[(k, n)], 6)
                                           for n in self.train_sizes}}
                     for k in self.ks],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_text(self) -> str:
        head = "".join(f"{f'{n} samples':>14}" for n in self.train_sizes)
        out = [f"Accuracy (%) on {self.test_count} test images", f"{'':<6}{head}"]
        for k in self.ks:
            out.append(f"{f'K={k}':<6}" + "".join(f"{self.cells[(k, n)]:>14.3f}"
                                                  for n in self.train_sizes))
        return "\n".join(out) + "\n"


def k_sweep(corpus: Sequence[Sample], ks: Sequence[int] = (1, 3, 5, 7),
            train_sizes: Sequence[int] = (75, 50), seed: int = 0,
            se: StructuringElement = DEFAULT_SE, workers: int | None = None) -> SweepTable:
    """Accuracy for every (k, training size) pair against one fixed test set.

    The test set is what remains after drawing the largest training size;
    smaller training sets are subsets of that draw. Features are extracted
    once per image.
    """
    ks = tuple(ks)
    train_sizes = tuple(train_sizes)
    corpus = list(corpus)
    vectors = vectorize(corpus, se, workers)
    position = {id(s): i for i, s in enumerate(corpus)}
    _, test = split(corpus, max(train_sizes), seed)
    cells = {}
    for n in train_sizes:
        train_set, _ = split(corpus, n, seed)
        model = ModelLibrary([LabeledSample(s.label, vectors[position[id(s)]])
                              for s in train_set if vectors[position[id(s)]] is not None])
        for k in ks:
            confusion = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
            for s in test:
                v = vectors[position[id(s)]]
                if v is not None:
                    confusion[s.label, classify(model, v, k).label] += 1
            cells[(k, n)] = EvaluationReport(confusion, k=k).overall_accuracy
    table = SweepTable(ks, train_sizes, cells, len(test))
    for note in table.trend_warnings():
        warnings.warn(f"accuracy does not decline with k: {note}", stacklevel=2)
    return table
