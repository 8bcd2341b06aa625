"""Euclidean k-nearest-neighbour classification against a stored library."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Any, BinaryIO, Sequence, Union

import numpy as np

from .features import N_FEATURES, FeatureVector

MODEL_MAGIC = "GKNN"
MODEL_VERSION = 1


class ModelFormatError(ValueError):
    code = "model"

    def __init__(self, message: str, line: int) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line


class EmptyModelError(ValueError):
    code = "empty-model"


@dataclass(frozen=True)
class LabeledSample:
    label: int
    vector: FeatureVector
    meta: dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if not 0 <= self.label <= 9:
            raise ValueError(f"label must be a digit 0-9, got {self.label}")
        if not self.vector.normalized:
            raise ValueError("library samples must hold normalized vectors")


@dataclass(frozen=True)
class Neighbor:
    index: int
    distance: float
    label: int


@dataclass(frozen=True)
class Classification:
    label: int
    neighbors: tuple[Neighbor, ...]
    k: int

    @property
    def distance(self) -> float:
        """Distance to the nearest library sample."""
        return self.neighbors[0].distance


class ModelLibrary:
    """Immutable ordered collection of labeled normalized feature vectors."""

    def __init__(self, samples: Sequence[LabeledSample] = (), dim: int = N_FEATURES) -> None:
        self._samples = tuple(samples)
        self.dim = dim
        for i, s in enumerate(self._samples):
            if len(s.vector) != dim:
                raise ValueError(f"sample {i} has {len(s.vector)} components, expected {dim}")
        matrix = np.array([s.vector.values for s in self._samples], dtype=np.float64).reshape(-1, dim)
        matrix.setflags(write=False)
        labels = np.array([s.label for s in self._samples], dtype=np.int64)
        labels.setflags(write=False)
        self._matrix = matrix
        self._labels = labels

    @property
    def samples(self) -> tuple[LabeledSample, ...]:
        return self._samples

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def labels(self) -> np.ndarray:
        return self._labels

    def __len__(self) -> int:
        return len(self._samples)

    def __repr__(self) -> str:
        return f"ModelLibrary({len(self)} samples, dim={self.dim})"


def _as_array(v: FeatureVector | Sequence[float]) -> np.ndarray:
    if isinstance(v, FeatureVector):
        return v.as_array()
    return np.asarray(v, dtype=np.float64)


def euclidean_distance(a: FeatureVector | Sequence[float], b: FeatureVector | Sequence[float]) -> float:
    a, b = _as_array(a), _as_array(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    total = 0.0
    for x, y in zip(a.tolist(), b.tolist()):
        total += (x - y) * (x - y)
    return math.sqrt(total)


def _distances(matrix: np.ndarray, query: np.ndarray) -> np.ndarray:
    # column-by-column accumulation matches euclidean_distance's summation order
    total = np.zeros(matrix.shape[0])
    for j in range(matrix.shape[1]):
        diff = matrix[:, j] - query[j]
        total += diff * diff
    return np.sqrt(total)


def classify(model: ModelLibrary, v: FeatureVector | Sequence[float], k: int = 1) -> Classification:
    """Majority label among the ``k`` nearest library samples.

    Distance ties at the cut-off favour the lower sample index. Vote ties go
    to the class with the smallest summed neighbour distance, then to the
    smallest label.
    """
    if isinstance(v, FeatureVector) and not v.normalized:
        raise ValueError("query vector must be normalized")
    if len(model) == 0:
        raise EmptyModelError("model library has no samples")
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    if k > len(model):
        raise ValueError(f"k={k} exceeds the model size {len(model)}")
    query = _as_array(v)
    if query.shape != (model.dim,):
        raise ValueError(f"dimension mismatch: query has {query.size}, model has {model.dim}")

    dist = _distances(model.matrix, query)
    order = np.argsort(dist, kind="stable")[:k]
    neighbors = tuple(Neighbor(int(i), float(dist[i]), int(model.labels[i])) for i in order)

    votes: dict[int, list] = {}
    for n in neighbors:
        tally = votes.setdefault(n.label, [0, 0.0])
        tally[0] += 1
        tally[1] += n.distance
    label = min(votes, key=lambda c: (-votes[c][0], votes[c][1], c))
    return Classification(label, neighbors, k)


# -- persistence ---------------------------------------------------------------

Sink = Union[BinaryIO, str, os.PathLike]


def dumps_model(model: ModelLibrary) -> str:
    lines = [f"{MODEL_MAGIC} {MODEL_VERSION} {model.dim}"]
    for s in model.samples:
        lines.append(f"{s.label}\t" + " ".join(f"{x:.12g}" for x in s.vector.values))
    return "\n".join(lines) + "\n"


def save_model(model: ModelLibrary, sink: Sink) -> None:
    data = dumps_model(model).encode("ascii")
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "wb") as fh:
            fh.write(data)
    else:
        sink.write(data)


def loads_model(text: str) -> ModelLibrary:
    lines = text.splitlines()
    if not lines:
        raise ModelFormatError("missing header", 1)
    header = lines[0].split()
    if len(header) != 3 or header[0] != MODEL_MAGIC:
        raise ModelFormatError(f"bad magic in header {lines[0]!r}", 1)
    if header[1] != str(MODEL_VERSION):
        raise ModelFormatError(f"unsupported version {header[1]!r}", 1)
    if header[2] != str(N_FEATURES):
        raise ModelFormatError(f"wrong dimension {header[2]!r}, expected {N_FEATURES}", 1)
    samples = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        label_text, sep, rest = line.partition("\t")
        if not sep:
            raise ModelFormatError("expected <label><TAB><features>", lineno)
        try:
            label = int(label_text)
        except ValueError:
            raise ModelFormatError(f"unparseable label {label_text!r}", lineno) from None
        if not 0 <= label <= 9:
            raise ModelFormatError(f"label {label} outside 0-9", lineno)
        fields = rest.split()
        if len(fields) != N_FEATURES:
            raise ModelFormatError(f"expected {N_FEATURES} features, got {len(fields)}", lineno)
        try:
            values = tuple(float(f) for f in fields)
        except ValueError as exc:
            raise ModelFormatError(f"unparseable number ({exc})", lineno) from None
        if not all(math.isfinite(x) for x in values):
            raise ModelFormatError("non-finite feature value", lineno)
        samples.append(LabeledSample(label, FeatureVector(values, normalized=True)))
    return ModelLibrary(samples)


def load_model(source: Union[BinaryIO, str, os.PathLike, bytes]) -> ModelLibrary:
    if isinstance(source, (bytes, bytearray)):
        data = bytes(source)
    elif isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            data = fh.read()
    else:
        data = source.read()
    try:
        text = data.decode("ascii")
    except UnicodeDecodeError as exc:
        line = data[:exc.start].count(b"\n") + 1
        raise ModelFormatError("non-ASCII content", line) from None
    return loads_model(text)


def model_from_vectors(pairs) -> ModelLibrary:
    """Library from ``(label, FeatureVector)`` pairs."""
    return ModelLibrary([LabeledSample(label, vec) for label, vec in pairs])


__all__ = [
    "Classification", "EmptyModelError", "LabeledSample", "ModelFormatError", "ModelLibrary",
    "Neighbor", "classify", "dumps_model", "euclidean_distance", "load_model", "loads_model",
    "model_from_vectors", "save_model",
]
