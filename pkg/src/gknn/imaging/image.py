"""Binary image value types and the geometric primitives built on them."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class BlankInputError(ValueError):
    """Raised when an image has no foreground pixel to work with."""

    code = "blank-input"


class BinaryImage:
    """Immutable rectangular grid of ON (ink) / OFF (background) pixels.

    Pixels are held in a read-only boolean ``numpy`` array of shape
    ``(height, width)``; ``True`` is ink.
    """

    __slots__ = ("_pixels",)

    def __init__(self, pixels) -> None:
        arr = np.array(pixels, dtype=bool, copy=True)
        if arr.ndim != 2:
            raise ValueError(f"expected a 2-D pixel grid, got {arr.ndim} dimension(s)")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"image must be at least 1x1, got {arr.shape[1]}x{arr.shape[0]}")
        arr.setflags(write=False)
        self._pixels = arr

    @classmethod
    def from_rows(cls, rows: str | list[str]) -> "BinaryImage":
        """Build an image from strings of ``0``/``1`` (or ``.``/``#``).

        ``rows`` may be a list of strings or one string whose rows are
        separated by ``/`` or newlines.
        """
        if isinstance(rows, str):
            rows = [r for r in rows.replace("/", "\n").split() if r]
        table = {"1": True, "#": True, "0": False, ".": False}
        try:
            return cls([[table[ch] for ch in row] for row in rows])
        except KeyError as exc:
            raise ValueError(f"unexpected pixel character {exc.args[0]!r}") from None

    @classmethod
    def blank(cls, width: int, height: int) -> "BinaryImage":
        return cls(np.zeros((height, width), dtype=bool))

    @property
    def pixels(self) -> np.ndarray:
        return self._pixels

    @property
    def width(self) -> int:
        return self._pixels.shape[1]

    @property
    def height(self) -> int:
        return self._pixels.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self._pixels.shape

    def count(self) -> int:
        """Number of ON pixels."""
        return int(np.count_nonzero(self._pixels))

    def to_rows(self) -> list[str]:
        return ["".join("1" if v else "0" for v in row) for row in self._pixels]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BinaryImage):
            return NotImplemented
        return np.array_equal(self._pixels, other._pixels)

    def __hash__(self) -> int:
        return hash((self.shape, self._pixels.tobytes()))

    def __repr__(self) -> str:
        return f"BinaryImage({self.width}x{self.height}, on={self.count()})"


@dataclass(frozen=True)
class BoundingBox:
    """Inclusive pixel rectangle ``rows top..bottom``, ``cols left..right``."""

    top: int
    left: int
    bottom: int
    right: int

    @property
    def width(self) -> int:
        return self.right - self.left + 1

    @property
    def height(self) -> int:
        return self.bottom - self.top + 1

    def fits(self, img: BinaryImage) -> bool:
        return (0 <= self.top <= self.bottom < img.height
                and 0 <= self.left <= self.right < img.width)


@dataclass(frozen=True)
class StructuringElement:
    """Odd-sided square mask used by erosion and dilation.

    The origin is the centre cell. The default is the 3x3 all-ON square.
    """

    mask: tuple[tuple[bool, ...], ...] = ((True,) * 3,) * 3

    def __post_init__(self) -> None:
        side = len(self.mask)
        if side < 1 or side % 2 == 0:
            raise ValueError(f"structuring element side must be odd and >= 1, got {side}")
        if any(len(row) != side for row in self.mask):
            raise ValueError("structuring element must be square")
        if not any(any(row) for row in self.mask):
            raise ValueError("structuring element needs at least one ON cell")

    @classmethod
    def square(cls, side: int = 3) -> "StructuringElement":
        return cls(((True,) * side,) * side)

    @property
    def side(self) -> int:
        return len(self.mask)

    def offsets(self) -> list[tuple[int, int]]:
        """(dr, dc) of every ON cell relative to the centre."""
        half = self.side // 2
        return [(r - half, c - half)
                for r, row in enumerate(self.mask)
                for c, on in enumerate(row) if on]


def invert(img: BinaryImage) -> BinaryImage:
    return BinaryImage(~img.pixels)


def bounding_box(img: BinaryImage) -> BoundingBox:
    """Minimal box enclosing every ON pixel.

    Raises:
        BlankInputError: if the image has no ON pixel.
    """
    rows = np.flatnonzero(img.pixels.any(axis=1))
    if rows.size == 0:
        raise BlankInputError("no foreground pixels after opening")
    cols = np.flatnonzero(img.pixels.any(axis=0))
    return BoundingBox(int(rows[0]), int(cols[0]), int(rows[-1]), int(cols[-1]))


def crop(img: BinaryImage, box: BoundingBox) -> BinaryImage:
    if not box.fits(img):
        raise IndexError(f"{box} lies outside a {img.width}x{img.height} image")
    return BinaryImage(img.pixels[box.top:box.bottom + 1, box.left:box.right + 1])


def crop_to_content(img: BinaryImage) -> BinaryImage:
    return crop(img, bounding_box(img))
