"""Thirteen structural features of a cropped glyph.

The vector holds, in order, four directional background densities, four
water-reservoir densities, the enclosed-hole density and four middle-band
maximum profile distances. Every raw component is a ratio against the glyph
box (area ``W*H`` for densities, ``W`` or ``H`` for profile distances), which
is what makes the features independent of glyph size without resampling.

The extractors accept any image; for glyphs that have not been cropped, a
scan line without ink counts as fully background.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .imaging import (ALL_MOVES, DEFAULT_SE, BinaryImage, Move, StructuringElement,
                      border_reachable, bounding_box, crop, enclosed_background,
                      morphological_open)

FEATURE_NAMES = (
    "dd_left", "dd_right", "dd_top", "dd_bottom",
    "wr_top", "wr_bottom", "wr_left", "wr_right",
    "hole",
    "mp_left", "mp_right", "mp_top", "mp_bottom",
)
N_FEATURES = len(FEATURE_NAMES)


class Direction(enum.Enum):
    TOP = "top"
    BOTTOM = "bottom"
    LEFT = "left"
    RIGHT = "right"


@dataclass(frozen=True)
class FeatureVector:
    values: tuple[float, ...]
    normalized: bool = False

    def __post_init__(self) -> None:
        values = tuple(float(v) for v in self.values)
        if len(values) != N_FEATURES:
            raise ValueError(f"feature vector needs {N_FEATURES} components, got {len(values)}")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return N_FEATURES

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, key: int | str) -> float:
        if isinstance(key, str):
            return self.values[FEATURE_NAMES.index(key)]
        return self.values[key]

    def as_array(self) -> np.ndarray:
        return np.array(self.values, dtype=np.float64)

    def as_dict(self) -> dict[str, float]:
        return dict(zip(FEATURE_NAMES, self.values))


def _edge_distances(pixels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per scan line along the last axis: OFF run before the first ink from each end.

    Lines without ink get the full line length.
    """
    length = pixels.shape[-1]
    has_ink = pixels.any(axis=-1)
    left = np.where(has_ink, np.argmax(pixels, axis=-1), length)
    right = np.where(has_ink, np.argmax(pixels[..., ::-1], axis=-1), length)
    return left, right


def _stack(pixels) -> np.ndarray:
    p = pixels.pixels if isinstance(pixels, BinaryImage) else np.asarray(pixels, dtype=bool)
    if p.ndim < 2 or 0 in p.shape[-2:]:
        raise ValueError(f"expected images of shape (..., H, W), got {p.shape}")
    return p


def _dd(p: np.ndarray) -> np.ndarray:
    area = p.shape[-1] * p.shape[-2]
    left, right = _edge_distances(p)
    top, bottom = _edge_distances(np.swapaxes(p, -1, -2))
    counts = np.stack([left.sum(-1), right.sum(-1), top.sum(-1), bottom.sum(-1)], axis=-1)
    return counts / area


def directional_density(img: BinaryImage) -> tuple[float, float, float, float]:
    """Background band areas between each box side and the first ink, over the box area.

    Returns ``(dd_left, dd_right, dd_top, dd_bottom)``.
    """
    return tuple(_dd(img.pixels).tolist())


# water poured from a side flows away from it or sideways
_POUR = {
    Direction.TOP: (Move.DOWN, Move.LEFT, Move.RIGHT),
    Direction.BOTTOM: (Move.UP, Move.LEFT, Move.RIGHT),
    Direction.LEFT: (Move.RIGHT, Move.UP, Move.DOWN),
    Direction.RIGHT: (Move.LEFT, Move.UP, Move.DOWN),
}
_SIDES = (Direction.TOP, Direction.BOTTOM, Direction.LEFT, Direction.RIGHT)


def _retained(p: np.ndarray, side: Direction) -> np.ndarray:
    off = ~p
    # a pixel drains if the frame can reach it by running the pour moves backwards
    return off & ~border_reachable(off, [m.reverse() for m in _POUR[side]])


def reservoir_mask(img: BinaryImage, side: Direction = Direction.TOP) -> np.ndarray:
    """Background pixels retaining water poured from ``side``.

    Water poured from the top may flow down, left and right; a pixel holds
    water when no such path leaves the box. The other sides are the same rule
    turned by a quarter or half rotation.
    """
    return _retained(img.pixels, side)


def _wr(p: np.ndarray) -> np.ndarray:
    area = p.shape[-1] * p.shape[-2]
    counts = [np.count_nonzero(_retained(p, side), axis=(-2, -1)) for side in _SIDES]
    return np.stack(counts, axis=-1) / area


def water_reservoirs(img: BinaryImage) -> tuple[float, float, float, float]:
    """Returns ``(wr_top, wr_bottom, wr_left, wr_right)`` as fractions of the box area."""
    return tuple(_wr(img.pixels).tolist())


def hole_mask(img: BinaryImage) -> np.ndarray:
    return enclosed_background(img)


def _hole(p: np.ndarray) -> np.ndarray:
    off = ~p
    holes = off & ~border_reachable(off, ALL_MOVES)
    return np.count_nonzero(holes, axis=(-2, -1)) / (p.shape[-1] * p.shape[-2])


def fill_hole_density(img: BinaryImage) -> float:
    return float(_hole(img.pixels))


def middle_band(length: int) -> range:
    """Indices of the central 40% of ``length`` scan lines.

    Start is round(0.3*L) and size round(0.4*L), both half-up, size at
    least one, clipped to the line count.
    """
    start = (3 * length + 5) // 10
    size = max(1, (4 * length + 5) // 10)
    start = min(start, length - 1)
    return range(start, min(start + size, length))


def _mp(p: np.ndarray) -> np.ndarray:
    height, width = p.shape[-2:]
    rows = middle_band(height)
    cols = middle_band(width)
    left, right = _edge_distances(p[..., rows.start:rows.stop, :])
    top, bottom = _edge_distances(np.swapaxes(p[..., cols.start:cols.stop], -1, -2))
    return np.stack([left.max(-1) / width, right.max(-1) / width,
                     top.max(-1) / height, bottom.max(-1) / height], axis=-1)


def max_profile_distances(img: BinaryImage) -> tuple[float, float, float, float]:
    """Largest edge-to-ink distance over the middle band, per side.

    Returns ``(mp_left, mp_right, mp_top, mp_bottom)``; left/right are divided
    by the width, top/bottom by the height.
    """
    return tuple(_mp(img.pixels).tolist())


def feature_matrix(images) -> np.ndarray:
    """Raw features of a stack of equally sized glyphs, shape ``(..., 13)``.

    ``images`` is a boolean array of shape ``(..., H, W)`` or a single
    :class:`BinaryImage`. Columns follow :data:`FEATURE_NAMES`.
    """
    p = _stack(images)
    return np.concatenate([_dd(p), _wr(p), _hole(p)[..., None], _mp(p)], axis=-1)


def raw_features(glyph: BinaryImage) -> FeatureVector:
    """Un-normalised 13-component vector of an already cropped glyph."""
    return FeatureVector(tuple(feature_matrix(glyph).tolist()))


def normalize(v: FeatureVector) -> FeatureVector:
    """Divide every component by the vector's largest one.

    An all-zero vector is returned as is (flagged normalized).
    """
    if any(x < 0 for x in v.values):
        raise ValueError(f"cannot normalize a vector with negative components: {v.values}")
    peak = max(v.values)
    if peak > 0:
        return FeatureVector(tuple(x / peak for x in v.values), normalized=True)
    return FeatureVector(v.values, normalized=True)


def preprocess(raw: BinaryImage, se: StructuringElement = DEFAULT_SE) -> BinaryImage:
    """Open away speckle and crop to the glyph's bounding box."""
    opened = morphological_open(raw, se)
    return crop(opened, bounding_box(opened))


def extract_features(raw: BinaryImage, se: StructuringElement = DEFAULT_SE) -> FeatureVector:
    """Full pipeline from an ink-ON image to a normalized feature vector.

    Raises:
        BlankInputError: if nothing survives the opening.
    """
    return normalize(raw_features(preprocess(raw, se)))


def format_vector(v: FeatureVector, label: int | None = None) -> str:
    """CSV line ``label,f1,...,f13`` with 12 significant digits; label may be empty."""
    head = "" if label is None else str(label)
    return ",".join([head] + [f"{x:.12g}" for x in v.values])


def parse_vector_line(line: str) -> tuple[int | None, FeatureVector]:
    fields = line.strip().split(",")
    if len(fields) != N_FEATURES + 1:
        raise ValueError(f"expected {N_FEATURES + 1} comma-separated fields, got {len(fields)}")
    label = int(fields[0]) if fields[0] else None
    return label, FeatureVector(tuple(float(f) for f in fields[1:]), normalized=True)
