"""Binary erosion, dilation and opening with outside-is-OFF borders."""

from __future__ import annotations

import numpy as np

from .image import BinaryImage, StructuringElement

DEFAULT_SE = StructuringElement()


def _shifted(padded: np.ndarray, half: int, dr: int, dc: int, shape: tuple[int, int]) -> np.ndarray:
    # view of `padded` such that out[r, c] == original[r + dr, c + dc]
    h, w = shape
    return padded[half + dr:half + dr + h, half + dc:half + dc + w]


def erode(pixels: np.ndarray, se: StructuringElement = DEFAULT_SE) -> np.ndarray:
    """Pixel stays ON iff the element placed on it covers only ON pixels."""
    half = se.side // 2
    padded = np.pad(pixels, half, constant_values=False)
    out = np.ones(pixels.shape, dtype=bool)
    for dr, dc in se.offsets():
        out &= _shifted(padded, half, dr, dc, pixels.shape)
    return out


def dilate(pixels: np.ndarray, se: StructuringElement = DEFAULT_SE) -> np.ndarray:
    """Minkowski sum of the ON set with the element, clipped to the frame."""
    half = se.side // 2
    padded = np.pad(pixels, half, constant_values=False)
    out = np.zeros(pixels.shape, dtype=bool)
    for dr, dc in se.offsets():
        out |= _shifted(padded, half, -dr, -dc, pixels.shape)
    return out


def morphological_open(img: BinaryImage, se: StructuringElement = DEFAULT_SE) -> BinaryImage:
    """Erosion by ``se`` followed by dilation by ``se``.

    Every surviving pixel lies in a translate of ``se`` that fits inside the
    input, so the result is a subset of ``img`` for any mask shape.
    """
    return BinaryImage(dilate(erode(img.pixels, se), se))
