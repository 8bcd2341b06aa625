"""Synthetic multi-style, multi-size numeral corpus.

A *style* is a deterministic perturbation of the base templates: stroke
weight changed by one pixel (dilation or erosion) and/or a one-pixel
horizontal shear at a seeded row. A *size* is the target glyph height in
pixels. Every draw is rescaled with nearest-neighbour sampling, framed with a
blank margin and optionally sprinkled with salt noise.
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ..imaging import (BinaryImage, BlankInputError, StructuringElement, dilate, erode,
                       load_image, morphological_open, write_pbm)
from .templates import GlyphTemplate, builtin_templates

MIN_SIZE = 8
MIN_STYLES = 5
MARGIN = 2

# 2x2 element anchored at its top-left cell: grows or shrinks strokes by one pixel
_ONE_PIXEL = StructuringElement(((False, False, False),
                                 (False, True, True),
                                 (False, True, True)))

# (weight, shear) per style slot; styles beyond the table reuse it with new shear rows
_STYLE_TABLE = [(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1), (1, -1), (-1, 1)]


@dataclass(frozen=True)
class CorpusSpec:
    styles: int = 10
    sizes: tuple[int, int] = (16, 50)
    samples_per_class: int = 115
    rng_seed: int = 0
    noise: float = 0.0

    def __post_init__(self) -> None:
        lo, hi = self.sizes
        if lo > hi:
            raise ValueError(f"empty size range {lo}-{hi}")
        if lo < MIN_SIZE:
            raise ValueError(f"sizes below {MIN_SIZE} px are not supported, got {lo}")
        if self.styles < MIN_STYLES:
            raise ValueError(f"need at least {MIN_STYLES} styles, got {self.styles}")
        if self.samples_per_class < 1:
            raise ValueError("samples_per_class must be >= 1")
        if not 0.0 <= self.noise <= 0.005:
            raise ValueError(f"salt noise fraction must be within 0-0.005, got {self.noise}")

    @property
    def size_values(self) -> list[int]:
        return list(range(self.sizes[0], self.sizes[1] + 1))


@dataclass(frozen=True)
class Sample:
    image: BinaryImage
    label: int
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def style(self) -> str:
        return str(self.meta.get("style", ""))

    @property
    def size(self) -> int:
        return int(self.meta.get("size", self.image.height))


@dataclass(frozen=True)
class Style:
    style_id: str
    weight: int
    shear: int
    shear_row: int

    def apply(self, mask: BinaryImage) -> BinaryImage:
        p = mask.pixels
        if self.weight > 0:
            p = dilate(p, _ONE_PIXEL)
        elif self.weight < 0:
            p = erode(p, _ONE_PIXEL)
        if self.shear:
            p = p.copy()
            top = p[:self.shear_row]
            shifted = np.zeros_like(top)
            if self.shear > 0:
                shifted[:, 1:] = top[:, :-1]
            else:
                shifted[:, :-1] = top[:, 1:]
            p[:self.shear_row] = shifted
        return BinaryImage(p)


def make_styles(count: int, rng: np.random.Generator) -> list[Style]:
    styles = []
    for i in range(count):
        weight, shear = _STYLE_TABLE[i % len(_STYLE_TABLE)]
        row = int(rng.integers(10, 23))
        styles.append(Style(f"s{i:02d}", weight, shear, row))
    return styles


def rescale(img: BinaryImage, target_height: int) -> BinaryImage:
    """Nearest-neighbour resample to ``target_height`` rows, keeping the aspect ratio."""
    if target_height < 1:
        raise ValueError(f"target height must be >= 1, got {target_height}")
    h, w = img.shape
    target_width = max(1, int(np.floor(w * target_height / h + 0.5)))
    rows = ((2 * np.arange(target_height) + 1) * h) // (2 * target_height)
    cols = ((2 * np.arange(target_width) + 1) * w) // (2 * target_width)
    return BinaryImage(img.pixels[np.ix_(rows, cols)])


def _frame(pixels: np.ndarray, margin: int = MARGIN) -> np.ndarray:
    return np.pad(pixels, margin, constant_values=False)


def _allocate(n_samples: int, n_styles: int, sizes: list[int],
              rng: np.random.Generator) -> list[tuple[int, int]]:
    """(style index, size) draws spread evenly over sizes, distinct styles per size first."""
    orders = {size: rng.permutation(n_styles) for size in sizes}
    draws = []
    i = 0
    while len(draws) < n_samples:
        size = sizes[i % len(sizes)]
        rnd = i // len(sizes)
        draws.append((int(orders[size][rnd % n_styles]), size))
        i += 1
    return draws


def generate_corpus(spec: CorpusSpec, templates: Sequence[GlyphTemplate] | None = None) -> list[Sample]:
    """Render ``samples_per_class`` images per digit, ordered by digit then draw."""
    templates = builtin_templates() if templates is None else list(templates)
    by_label = {}
    for t in templates:
        by_label.setdefault(t.label, t)
    missing = sorted(set(range(10)) - set(by_label))
    if missing:
        raise ValueError(f"templates missing digits {missing}")

    rng = np.random.default_rng(spec.rng_seed)
    styles = make_styles(spec.styles, rng)
    sizes = spec.size_values
    styled: dict[tuple[int, int], BinaryImage] = {}
    samples = []
    for label in range(10):
        draws = _allocate(spec.samples_per_class, len(styles), sizes, rng)
        for idx, (si, size) in enumerate(draws):
            key = (label, si)
            if key not in styled:
                styled[key] = styles[si].apply(by_label[label].mask)
            pixels = _frame(rescale(styled[key], size).pixels)
            if spec.noise > 0:
                salt = rng.random(pixels.shape) < spec.noise
                pixels = pixels | salt
            img = BinaryImage(pixels)
            if morphological_open(img).count() == 0:
                raise BlankInputError(f"digit {label} style {styles[si].style_id} size {size} "
                                      "vanishes under opening")
            samples.append(Sample(img, label, {"style": styles[si].style_id, "size": size,
                                               "index": idx}))
    return samples


def split(samples: Sequence[Sample], train_per_class: int, seed: int = 0) -> tuple[list[Sample], list[Sample]]:
    """Random per-class train/test partition.

    Each class's samples are permuted with ``seed``; the first
    ``train_per_class`` go to training. For a fixed seed the training set for
    a smaller count is a subset of the one for a larger count. Both halves
    keep the input order.
    """
    by_class: dict[int, list[int]] = {}
    for i, s in enumerate(samples):
        by_class.setdefault(s.label, []).append(i)
    rng = np.random.default_rng(seed)
    chosen = set()
    for label in sorted(by_class):
        idx = by_class[label]
        if len(idx) <= train_per_class:
            raise ValueError(f"class {label} has {len(idx)} samples, need more than {train_per_class}")
        perm = rng.permutation(len(idx))
        chosen.update(idx[j] for j in perm[:train_per_class])
    train = [s for i, s in enumerate(samples) if i in chosen]
    test = [s for i, s in enumerate(samples) if i not in chosen]
    return train, test


# -- on-disk layout --------------------------------------------------------------

MANIFEST = "manifest.csv"


def sample_filename(sample: Sample) -> str:
    return f"{sample.label}_{sample.style}_{sample.size}_{sample.meta.get('index', 0)}.pbm"


def write_corpus(samples: Sequence[Sample], directory: str | os.PathLike) -> Path:
    """Write one P4 PBM per sample plus ``manifest.csv``; returns the manifest path."""
    root = Path(directory)
    root.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["path", "label", "style", "size"])
    for s in samples:
        name = sample_filename(s)
        (root / name).write_bytes(write_pbm(s.image))
        writer.writerow([name, s.label, s.style, s.size])
    manifest = root / MANIFEST
    manifest.write_text(buf.getvalue())
    return manifest


def read_manifest(path: str | os.PathLike, threshold: int = 128) -> list[Sample]:
    """Load every image listed in a manifest; paths are relative to the manifest."""
    path = Path(path)
    if path.is_dir():
        path = path / MANIFEST
    samples = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            img = load_image(path.parent / row["path"], threshold=threshold)
            meta = {"style": row.get("style", ""), "size": int(row.get("size") or img.height),
                    "path": row["path"]}
            samples.append(Sample(img, int(row["label"]), meta))
    return samples
