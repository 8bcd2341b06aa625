"""Built-in 32x32 digit masks.

Each glyph is a union of thick strokes (polylines and elliptical arcs) laid
out on a 32-unit canvas with y pointing down. The shapes loosely follow the
Kannada numerals 0-9 but are simplified so that each digit has a distinct
arrangement of loops and open cavities. Strokes are drawn with a 7 px
square pen: after a one-pixel erosion and downscaling to 16 px every pen
footprint is still at least a 3x3 block, so a 3x3 opening keeps the glyph.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..imaging import BinaryImage

BASE_SIZE = 32
STROKE_WIDTH = 7.0


@dataclass(frozen=True)
class GlyphTemplate:
    label: int
    mask: BinaryImage
    style_id: str = "base"

    def __post_init__(self) -> None:
        if not 0 <= self.label <= 9:
            raise ValueError(f"template label must be 0-9, got {self.label}")
        if self.mask.count() == 0:
            raise ValueError(f"template for digit {self.label} is blank")


def arc(cx: float, cy: float, rx: float, ry: float, start: float, stop: float,
        steps: int = 48) -> list[tuple[float, float]]:
    """Points along an elliptical arc; angles in degrees, counter-clockwise on screen."""
    t = np.radians(np.linspace(start, stop, steps))
    return list(zip(cx + rx * np.cos(t), cy - ry * np.sin(t)))


def render(strokes: list[list[tuple[float, float]]], size: int = BASE_SIZE,
           width: float = STROKE_WIDTH, step: float = 0.25) -> np.ndarray:
    """Rasterise polylines with a square pen of side ``width``.

    The pen is stamped every ``step`` units along each polyline; a pixel is
    ink when its centre falls inside a stamp. A square pen keeps every part
    of a stroke, diagonals included, made of solid ``width``-sized blocks.
    """
    ink = np.zeros((size, size), dtype=bool)
    half = width / 2.0
    for pts in strokes:
        p = np.asarray(pts, dtype=float)
        stamps = [p[:1]]
        for a, b in zip(p[:-1], p[1:]):
            n = max(1, int(np.ceil(np.hypot(*(b - a)) / step)))
            t = np.linspace(0.0, 1.0, n + 1)[1:, None]
            stamps.append(a + t * (b - a))
        for x, y in np.vstack(stamps):
            # pixel centres c + 0.5 within [x - half, x + half]
            c0 = max(0, int(np.ceil(x - half - 0.5)))
            c1 = min(size - 1, int(np.floor(x + half - 0.5)))
            r0 = max(0, int(np.ceil(y - half - 0.5)))
            r1 = min(size - 1, int(np.floor(y + half - 0.5)))
            if c0 <= c1 and r0 <= r1:
                ink[r0:r1 + 1, c0:c1 + 1] = True
    return ink


# canvas units; the ink band spans roughly 1..31 in both axes
_STROKES: dict[int, list[list[tuple[float, float]]]] = {
    # closed ring
    0: [arc(16, 16, 12.5, 12.5, 0, 360, 96)],
    # arch open at the bottom, left foot curled inwards
    1: [arc(16, 16, 12.5, 12.5, 0, 180),
        [(3.5, 16), (3.5, 27.5), (10, 27.5)],
        [(28.5, 16), (28.5, 28.5)]],
    # cup open at the top with a tall right arm hooking left
    2: [arc(14, 17, 10.5, 11, 180, 360),
        [(3.5, 17), (3.5, 10)],
        [(24.5, 17), (24.5, 4), (14, 4)]],
    # rounded bracket open to the right with a middle tongue
    3: [arc(17, 16, 13, 12.5, 90, 270),
        [(17, 3.5), (28, 3.5)],
        [(17, 28.5), (28, 28.5)],
        [(11, 16), (20, 16)]],
    # two cups side by side (omega)
    4: [arc(9.5, 16, 6, 12.5, 180, 360),
        arc(22.5, 16, 6, 12.5, 180, 360),
        [(3.5, 16), (3.5, 4)],
        [(28.5, 16), (28.5, 4)],
        [(16, 16), (16, 10)]],
    # ring in the lower part with a flag rising to the upper right
    5: [arc(13, 20, 9.5, 8.5, 0, 360, 96),
        [(22.5, 20), (22.5, 3.5), (28.5, 3.5)]],
    # loop at the bottom, stem curling over the top to the right
    6: [arc(16, 22, 11.5, 6.5, 0, 360, 96),
        [(4.5, 22), (4.5, 12)],
        arc(16, 12, 11.5, 8.5, 180, 45)],
    # hooked top arc, diagonal down to the left, flat foot
    7: [arc(16, 11, 12, 7.5, 170, -20),
        [(27.3, 13.6), (4, 28.5), (28.5, 28.5)]],
    # U with both arms curling outwards at the top
    8: [arc(16, 16, 10, 12.5, 180, 360),
        [(6, 16), (6, 8)],
        [(26, 16), (26, 8)],
        arc(3.5, 8, 2.5, 4.5, 0, 180),
        arc(28.5, 8, 2.5, 4.5, 0, 180)],
    # loop at the top, stem down the right side with a foot
    9: [arc(15, 11, 10.5, 7.5, 0, 360, 96),
        [(25.5, 11), (25.5, 28.5), (12, 28.5)]],
}


@lru_cache(maxsize=None)
def _mask(label: int) -> BinaryImage:
    return BinaryImage(render(_STROKES[label]))


def builtin_templates() -> list[GlyphTemplate]:
    """The ten shipped digit templates at base resolution."""
    return [GlyphTemplate(d, _mask(d)) for d in range(10)]
