"""Background reachability under a restricted set of single-pixel moves.

This is the shared engine behind hole filling and water reservoirs. Seeds are
OFF pixels inside the image or *virtual border positions*: the cells one step
outside the frame (row -1 or ``height``, column -1 or ``width``). Virtual
positions only ever start a path; paths travel through OFF image pixels.
"""

from __future__ import annotations

import enum
from collections.abc import Iterable

import numpy as np
from scipy import ndimage

from .image import BinaryImage


class Move(enum.Enum):
    UP = (-1, 0)
    DOWN = (1, 0)
    LEFT = (0, -1)
    RIGHT = (0, 1)

    @property
    def delta(self) -> tuple[int, int]:
        return self.value

    def reverse(self) -> "Move":
        dr, dc = self.value
        return Move((-dr, -dc))


ALL_MOVES = frozenset(Move)

# sentinel: every virtual border position
BORDER = "border"

_STRUCTURES: dict[tuple[frozenset, int], np.ndarray] = {}


def _structure(moves: frozenset, ndim: int = 2) -> np.ndarray:
    # leading axes get extent 1 so stacked images never exchange pixels
    st = _STRUCTURES.get((moves, ndim))
    if st is None:
        plane = np.zeros((3, 3), dtype=bool)
        plane[1, 1] = True
        for m in moves:
            dr, dc = m.delta
            plane[1 + dr, 1 + dc] = True
        st = plane.reshape((1,) * (ndim - 2) + (3, 3))
        st.setflags(write=False)
        _STRUCTURES[(moves, ndim)] = st
    return st


def _entry_pixels(off: np.ndarray, seeds, moves: frozenset) -> np.ndarray:
    """OFF pixels that are seeds or one allowed move away from a virtual seed."""
    h, w = off.shape
    start = np.zeros((h + 2, w + 2), dtype=bool)
    if isinstance(seeds, str):
        if seeds != BORDER:
            raise ValueError(f"unknown seed spec {seeds!r}")
        start[0, :] = start[-1, :] = True
        start[:, 0] = start[:, -1] = True
    else:
        for r, c in seeds:
            if not (-1 <= r <= h and -1 <= c <= w):
                raise ValueError(f"seed {(r, c)} is neither in the image nor on its virtual border")
            inside = 0 <= r < h and 0 <= c < w
            if inside and not off[r, c]:
                raise ValueError(f"seed {(r, c)} is an ON pixel")
            start[r + 1, c + 1] = True
    virtual = start.copy()
    virtual[1:-1, 1:-1] = False
    entry = start[1:-1, 1:-1].copy()
    for m in moves:
        dr, dc = m.delta
        # pixel p is entered from virtual cell p - delta
        entry |= virtual[1 - dr:h + 1 - dr, 1 - dc:w + 1 - dc]
    return entry & off


def border_reachable(off: np.ndarray, moves: Iterable[Move]) -> np.ndarray:
    """Pixels of ``off`` reachable from the whole virtual frame using only ``moves``.

    ``off`` is a traversable mask of shape ``(..., H, W)``; leading axes index
    independent images, so a whole stack is filled in one pass.
    """
    moves = frozenset(moves)
    off = np.asarray(off, dtype=bool)
    entry = np.zeros_like(off)
    for m in moves:
        # a move enters the frame across the opposite edge
        if m is Move.DOWN:
            entry[..., 0, :] = True
        elif m is Move.UP:
            entry[..., -1, :] = True
        elif m is Move.RIGHT:
            entry[..., :, 0] = True
        else:
            entry[..., :, -1] = True
    entry &= off
    if not entry.any():
        return entry
    return ndimage.binary_propagation(entry, structure=_structure(moves, off.ndim), mask=off)


def reachable_background(img: BinaryImage, seeds: Iterable[tuple[int, int]] | str = BORDER,
                         moves: Iterable[Move] = ALL_MOVES) -> np.ndarray:
    """Boolean mask of OFF pixels reachable from ``seeds`` using only ``moves``.

    Args:
        img: the image whose OFF pixels are traversable.
        seeds: ``(row, col)`` positions, or :data:`BORDER` for the whole
            virtual frame around the image.
        moves: allowed single-pixel steps; a path from seed to pixel may use
            only these.
    """
    moves = frozenset(moves)
    off = ~img.pixels
    if isinstance(seeds, str) and seeds == BORDER:
        return border_reachable(off, moves)
    entry = _entry_pixels(off, seeds, moves)
    if not entry.any() or not moves:
        return entry
    return ndimage.binary_propagation(entry, structure=_structure(moves), mask=off)


def escaping_background(img: BinaryImage, moves: Iterable[Move]) -> np.ndarray:
    """OFF pixels with a path that leaves the frame using only ``moves``."""
    return border_reachable(~img.pixels, [m.reverse() for m in moves])


def enclosed_background(img: BinaryImage) -> np.ndarray:
    """OFF pixels not 4-connected to the frame through background (holes)."""
    off = ~img.pixels
    return off & ~border_reachable(off, ALL_MOVES)
