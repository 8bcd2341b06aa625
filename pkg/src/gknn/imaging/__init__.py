"""Binary images: representation, file I/O, morphology and region filling."""

from .fileio import (DEFAULT_THRESHOLD, ImageFormatError, load_image, read_bmp, read_pbm,
                     write_bmp, write_gray_bmp, write_pbm)
from .image import (BinaryImage, BlankInputError, BoundingBox, StructuringElement, bounding_box,
                    crop, crop_to_content, invert)
from .morphology import DEFAULT_SE, dilate, erode, morphological_open
from .regions import (ALL_MOVES, BORDER, Move, border_reachable, enclosed_background,
                      escaping_background, reachable_background)

__all__ = [
    "ALL_MOVES", "BORDER", "DEFAULT_SE", "DEFAULT_THRESHOLD", "BinaryImage", "BlankInputError",
    "BoundingBox", "ImageFormatError", "Move", "StructuringElement", "border_reachable",
    "bounding_box", "crop",
    "crop_to_content", "dilate", "enclosed_background", "erode", "escaping_background", "invert",
    "load_image", "morphological_open", "reachable_background", "read_bmp", "read_pbm",
    "write_bmp", "write_gray_bmp", "write_pbm",
]
