"""PBM (P1/P4) and uncompressed BMP (1-bit, 8-bit) readers and writers.

Readers return ink as ON. For BMP every pixel is looked up in the palette and
converted to a gray level; gray levels below ``threshold`` are ink.
"""

from __future__ import annotations

import io
import os
import struct
from typing import BinaryIO, Union

import numpy as np

from .image import BinaryImage

DEFAULT_THRESHOLD = 128

Source = Union[bytes, bytearray, BinaryIO, str, os.PathLike]


class ImageFormatError(ValueError):
    """Malformed or unsupported image data; ``offset`` is the byte position."""

    code = "format"

    def __init__(self, message: str, offset: int) -> None:
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


def _read_bytes(source: Source) -> bytes:
    if isinstance(source, (bytes, bytearray)):
        return bytes(source)
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            return fh.read()
    return source.read()


def sniff_format(data: bytes) -> str:
    if data[:2] in (b"P1", b"P4"):
        return "pbm"
    if data[:2] == b"BM":
        return "bmp"
    raise ImageFormatError(f"unrecognised magic {data[:2]!r}", 0)


def load_image(source: Source, fmt: str | None = None,
               threshold: int = DEFAULT_THRESHOLD) -> BinaryImage:
    """Read a PBM or BMP image into a :class:`BinaryImage` with ink ON.

    ``fmt`` is ``"pbm"``, ``"bmp"`` or ``None`` to sniff the magic bytes.
    """
    if not 0 <= threshold <= 255:
        raise ValueError(f"threshold must be within 0-255, got {threshold}")
    data = _read_bytes(source)
    fmt = (fmt or sniff_format(data)).lower()
    if fmt == "pbm":
        return read_pbm(data)
    if fmt == "bmp":
        return read_bmp(data, threshold)
    raise ValueError(f"unsupported format {fmt!r}")


# -- PBM ---------------------------------------------------------------------

_WS = b" \t\r\n\v\f"


class _Tokens:
    def __init__(self, data: bytes) -> None:
        self.data = data
        self.pos = 0

    def skip_space(self) -> None:
        data = self.data
        while self.pos < len(data):
            ch = data[self.pos:self.pos + 1]
            if ch == b"#":
                end = data.find(b"\n", self.pos)
                self.pos = len(data) if end < 0 else end + 1
            elif ch in _WS:
                self.pos += 1
            else:
                break

    def integer(self, what: str) -> int:
        self.skip_space()
        start = self.pos
        while self.pos < len(self.data) and self.data[self.pos:self.pos + 1].isdigit():
            self.pos += 1
        if start == self.pos:
            raise ImageFormatError(f"expected {what}", start)
        return int(self.data[start:self.pos])


def read_pbm(data: bytes) -> BinaryImage:
    magic = data[:2]
    if magic not in (b"P1", b"P4"):
        raise ImageFormatError(f"not a PBM file (magic {magic!r})", 0)
    tok = _Tokens(data)
    tok.pos = 2
    if tok.pos < len(data) and data[tok.pos:tok.pos + 1] not in _WS + b"#":
        raise ImageFormatError("missing whitespace after magic", tok.pos)
    width = tok.integer("width")
    height = tok.integer("height")
    if width < 1 or height < 1:
        raise ImageFormatError(f"bad dimensions {width}x{height}", tok.pos)

    if magic == b"P1":
        bits = []
        need = width * height
        while len(bits) < need:
            tok.skip_space()
            if tok.pos >= len(data):
                raise ImageFormatError(f"truncated raster: {len(bits)} of {need} pixels", tok.pos)
            ch = data[tok.pos]
            if ch not in (0x30, 0x31):
                raise ImageFormatError(f"invalid pixel character {chr(ch)!r}", tok.pos)
            bits.append(ch == 0x31)
            tok.pos += 1
        return BinaryImage(np.array(bits, dtype=bool).reshape(height, width))

    if tok.pos >= len(data) or data[tok.pos:tok.pos + 1] not in _WS:
        raise ImageFormatError("missing whitespace before raster", tok.pos)
    start = tok.pos + 1
    stride = (width + 7) // 8
    raster = data[start:start + stride * height]
    if len(raster) < stride * height:
        raise ImageFormatError(f"truncated raster: need {stride * height} bytes, have {len(raster)}",
                               start + len(raster))
    packed = np.frombuffer(raster, dtype=np.uint8).reshape(height, stride)
    return BinaryImage(np.unpackbits(packed, axis=1)[:, :width].astype(bool))


def write_pbm(img: BinaryImage, plain: bool = False) -> bytes:
    """Serialise as P4 (default) or P1 when ``plain`` is set."""
    header = f"{'P1' if plain else 'P4'}\n{img.width} {img.height}\n".encode()
    if plain:
        lines = [" ".join("1" if v else "0" for v in row) for row in img.pixels]
        return header + ("\n".join(lines) + "\n").encode()
    return header + np.packbits(img.pixels, axis=1).tobytes()


# -- BMP ---------------------------------------------------------------------

_FILE_HEADER = struct.Struct("<2sIHHI")
_INFO_HEADER = struct.Struct("<IiiHHIIiiII")


def read_bmp(data: bytes, threshold: int = DEFAULT_THRESHOLD) -> BinaryImage:
    if len(data) < _FILE_HEADER.size + _INFO_HEADER.size:
        raise ImageFormatError("truncated BMP header", len(data))
    magic, _size, _r1, _r2, pixel_offset = _FILE_HEADER.unpack_from(data, 0)
    if magic != b"BM":
        raise ImageFormatError(f"not a BMP file (magic {magic!r})", 0)
    base = _FILE_HEADER.size
    (dib_size, width, height, planes, bpp, compression,
     _img_size, _xppm, _yppm, colors_used, _important) = _INFO_HEADER.unpack_from(data, base)
    if dib_size < _INFO_HEADER.size:
        raise ImageFormatError(f"unsupported DIB header size {dib_size}", base)
    if width < 1 or height == 0:
        raise ImageFormatError(f"bad dimensions {width}x{height}", base + 4)
    if planes != 1:
        raise ImageFormatError(f"planes must be 1, got {planes}", base + 12)
    if bpp not in (1, 8):
        raise ImageFormatError(f"unsupported bit depth {bpp}", base + 14)
    if compression != 0:
        raise ImageFormatError(f"unsupported compression {compression}", base + 16)

    top_down = height < 0
    height = abs(height)
    n_colors = colors_used or (1 << bpp)
    pal_start = base + dib_size
    pal_end = pal_start + 4 * n_colors
    if pal_end > len(data):
        raise ImageFormatError("truncated palette", len(data))
    palette = np.frombuffer(data[pal_start:pal_end], dtype=np.uint8).reshape(n_colors, 4)
    b, g, r = palette[:, 0], palette[:, 1], palette[:, 2]
    gray = np.rint(0.299 * r + 0.587 * g + 0.114 * b).astype(np.int32)

    stride = ((width * bpp + 31) // 32) * 4
    need = stride * height
    if pixel_offset + need > len(data):
        raise ImageFormatError(f"truncated pixel array: need {need} bytes", len(data))
    rows = np.frombuffer(data[pixel_offset:pixel_offset + need], dtype=np.uint8).reshape(height, stride)
    if bpp == 8:
        index = rows[:, :width].astype(np.int32)
    else:
        index = np.unpackbits(rows, axis=1)[:, :width].astype(np.int32)
    if index.max() >= n_colors:
        bad = int(np.argmax(index.ravel() >= n_colors))
        raise ImageFormatError(f"palette index {int(index.ravel()[bad])} out of range",
                               pixel_offset + (bad // width) * stride)
    ink = gray[index] < threshold
    if not top_down:
        ink = ink[::-1]
    return BinaryImage(ink)


def _bmp(index: np.ndarray, palette: list[tuple[int, int, int]], bpp: int) -> bytes:
    height, width = index.shape
    stride = ((width * bpp + 31) // 32) * 4
    rows = index[::-1].astype(np.uint8)
    if bpp == 1:
        rows = np.packbits(rows.astype(bool), axis=1)
    body = np.zeros((height, stride), dtype=np.uint8)
    body[:, :rows.shape[1]] = rows
    pal = b"".join(struct.pack("<BBBB", bl, gr, rd, 0) for rd, gr, bl in palette)
    offset = _FILE_HEADER.size + _INFO_HEADER.size + len(pal)
    size = offset + body.size
    out = io.BytesIO()
    out.write(_FILE_HEADER.pack(b"BM", size, 0, 0, offset))
    out.write(_INFO_HEADER.pack(_INFO_HEADER.size, width, height, 1, bpp, 0,
                                body.size, 2835, 2835, len(palette), 0))
    out.write(pal)
    out.write(body.tobytes())
    return out.getvalue()


def write_bmp(img: BinaryImage) -> bytes:
    """1-bit bottom-up BMP, ink black (palette index 0)."""
    return _bmp((~img.pixels).astype(np.uint8), [(0, 0, 0), (255, 255, 255)], 1)


def write_gray_bmp(levels: np.ndarray) -> bytes:
    """8-bit bottom-up BMP with an identity gray palette."""
    levels = np.asarray(levels)
    if levels.ndim != 2 or levels.min() < 0 or levels.max() > 255:
        raise ValueError("expected a 2-D array of gray levels 0-255")
    return _bmp(levels, [(v, v, v) for v in range(256)], 8)
