import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

import oracles
from conftest import img
from gknn.imaging import (ALL_MOVES, BORDER, BinaryImage, BlankInputError, BoundingBox,
                          ImageFormatError, Move, StructuringElement, bounding_box, crop,
                          enclosed_background, escaping_background, invert, load_image,
                          morphological_open, reachable_background, read_bmp, write_bmp,
                          write_gray_bmp, write_pbm)

grids = hnp.arrays(dtype=bool, shape=st.tuples(st.integers(1, 12), st.integers(1, 12)))


# -- BinaryImage ---------------------------------------------------------------

def test_image_is_immutable():
    a = img("10/01")
    with pytest.raises(ValueError):
        a.pixels[0, 0] = False


@pytest.mark.parametrize("shape", [(0, 3), (3, 0)])
def test_image_rejects_empty_dimensions(shape):
    with pytest.raises(ValueError):
        BinaryImage(np.zeros(shape, dtype=bool))


def test_image_dimensions_and_rows():
    a = img("110/011")
    assert (a.width, a.height) == (3, 2)
    assert a.to_rows() == ["110", "011"]
    assert a.count() == 4


# -- loading -------------------------------------------------------------------

def test_p1_example():
    a = load_image(b"P1\n2 2\n1 0\n0 1\n")
    assert a.to_rows() == ["10", "01"]


def test_p1_with_comments_and_packed_digits():
    a = load_image(b"P1 # comment\n# another\n3 2\n101\n010")
    assert a.to_rows() == ["101", "010"]


def test_bmp_all_white_is_blank():
    data = write_gray_bmp(np.full((5, 7), 255))
    a = load_image(data, "bmp", threshold=128)
    assert (a.width, a.height) == (7, 5)
    assert a.count() == 0


def test_bmp_single_dark_pixel():
    levels = np.full((6, 5), 200)
    levels[4, 1] = 10
    a = load_image(io.BytesIO(write_gray_bmp(levels)), threshold=128)
    expected = [[v < 128 for v in row] for row in levels.tolist()]  # per-pixel compare
    assert a.pixels.tolist() == expected
    assert a.count() == 1


def test_bmp_threshold_is_strict():
    levels = np.array([[127, 128, 129]])
    a = load_image(write_gray_bmp(levels), threshold=128)
    assert a.to_rows() == ["100"]


@given(hnp.arrays(dtype=np.uint8, shape=st.tuples(st.integers(1, 9), st.integers(1, 13))),
       st.integers(0, 255))
def test_gray_bmp_threshold_matches_per_pixel_compare(levels, threshold):
    a = load_image(write_gray_bmp(levels), threshold=threshold)
    assert a.pixels.tolist() == [[int(v) < threshold for v in row] for row in levels]


@given(grids)
def test_one_bit_bmp_round_trip(pixels):
    a = BinaryImage(pixels)
    assert read_bmp(write_bmp(a)) == a


def test_top_down_bmp():
    data = bytearray(write_gray_bmp(np.array([[0, 255], [255, 255]])))
    # negate the height and flip the two rows of the pixel array
    height_at = 14 + 8
    data[height_at:height_at + 4] = (-2).to_bytes(4, "little", signed=True)
    offset = int.from_bytes(data[10:14], "little")
    rows = [bytes(data[offset:offset + 4]), bytes(data[offset + 4:offset + 8])]
    data[offset:offset + 8] = rows[1] + rows[0]
    assert read_bmp(bytes(data)).to_rows() == ["10", "00"]


@given(grids, st.booleans())
def test_pbm_round_trip_bit_exact(pixels, plain):
    a = BinaryImage(pixels)
    data = write_pbm(a, plain=plain)
    assert load_image(data) == a
    assert write_pbm(load_image(data), plain=plain) == data


@pytest.mark.parametrize("data, offset", [
    (b"P1\n2 2\n1 0\n0", 12),
    (b"P1\n2 x\n", 5),
    (b"P4\n9 2\n\x00\x00\x00", 10),
    (b"P1\n2 1\n1 2\n", 9),
])
def test_pbm_errors_name_offset(data, offset):
    with pytest.raises(ImageFormatError) as info:
        load_image(data)
    assert info.value.offset == offset
    assert f"byte {offset}" in str(info.value)


def test_bmp_rejects_compression():
    data = bytearray(write_gray_bmp(np.zeros((2, 2))))
    data[30:34] = (1).to_bytes(4, "little")
    with pytest.raises(ImageFormatError) as info:
        read_bmp(bytes(data))
    assert info.value.offset == 30


def test_bmp_rejects_truncated_payload():
    data = write_gray_bmp(np.zeros((4, 4)))
    with pytest.raises(ImageFormatError, match="truncated"):
        read_bmp(data[:-3])


def test_unknown_magic():
    with pytest.raises(ImageFormatError):
        load_image(b"GIF89a")


# -- invert --------------------------------------------------------------------

def test_invert_examples():
    assert invert(img("111/111/111")) == img("000/000/000")
    assert invert(img("10/00")) == img("01/11")


@given(grids)
def test_invert_is_involution(pixels):
    a = BinaryImage(pixels)
    assert invert(invert(a)) == a


# -- opening -------------------------------------------------------------------

def test_open_removes_speckle():
    a = BinaryImage.blank(5, 5)
    p = a.pixels.copy()
    p[2, 2] = True
    assert morphological_open(BinaryImage(p)).count() == 0


def test_open_keeps_solid_block():
    p = np.zeros((9, 9), dtype=bool)
    p[2:7, 2:7] = True
    se = StructuringElement()
    expected = oracles.erode_dilate_open(p.tolist(), se.offsets())
    assert morphological_open(BinaryImage(p), se).pixels.tolist() == expected
    assert morphological_open(BinaryImage(p)) == BinaryImage(p)


def test_open_exhaustive_3x3():
    se = StructuringElement()
    for bits in range(1 << 9):
        g = oracles.grid_from_int(bits, 3, 3)
        opened = morphological_open(BinaryImage(g), se)
        assert opened.pixels.tolist() == oracles.erode_dilate_open(g, se.offsets())
        assert not (opened.pixels & ~np.array(g)).any()
        assert morphological_open(opened, se) == opened


@settings(max_examples=200)
@given(grids, st.sampled_from([StructuringElement(), StructuringElement.square(1),
                               StructuringElement(((False, True, False),
                                                   (True, True, False),
                                                   (False, False, False)))]))
def test_open_anti_extensive_idempotent_matches_set_oracle(pixels, se):
    a = BinaryImage(pixels)
    opened = morphological_open(a, se)
    assert opened.pixels.tolist() == oracles.erode_dilate_open(pixels.tolist(), se.offsets())
    assert not (opened.pixels & ~a.pixels).any()
    assert morphological_open(opened, se) == opened


@pytest.mark.parametrize("mask", [((True, True),) * 2, (), ((False,),)])
def test_structuring_element_validation(mask):
    with pytest.raises(ValueError):
        StructuringElement(mask)


# -- bounding box & crop -------------------------------------------------------

def test_bounding_box_examples():
    p = np.zeros((5, 5), dtype=bool)
    p[2, 3] = True
    assert bounding_box(BinaryImage(p)) == BoundingBox(2, 3, 2, 3)
    assert bounding_box(img("1111/1111/1111/1111")) == BoundingBox(0, 0, 3, 3)
    p = np.zeros((5, 5), dtype=bool)
    p[1, 1] = p[3, 2] = True
    assert bounding_box(BinaryImage(p)) == BoundingBox(top=1, left=1, bottom=3, right=2)


def test_bounding_box_blank_raises():
    with pytest.raises(BlankInputError):
        bounding_box(BinaryImage.blank(4, 3))


@given(grids)
def test_bounding_box_minimal_and_crop_preserves_ink(pixels):
    a = BinaryImage(pixels)
    if a.count() == 0:
        return
    box = bounding_box(a)
    cropped = crop(a, box)
    assert cropped.count() == a.count()
    assert (cropped.width, cropped.height) == (box.width, box.height)
    p = cropped.pixels
    assert p[0].any() and p[-1].any() and p[:, 0].any() and p[:, -1].any()


def test_crop_examples():
    a = img("00000/01110/01010/01110/00000")
    assert crop(a, BoundingBox(0, 0, 4, 4)) == a
    c = crop(a, bounding_box(a))
    assert (c.width, c.height) == (3, 3)
    assert c == img("111/101/111")
    assert crop(a, BoundingBox(1, 2, 2, 4)).pixels.tolist() == a.pixels[1:3, 2:5].tolist()


def test_crop_out_of_bounds():
    with pytest.raises(IndexError):
        crop(img("11/11"), BoundingBox(0, 0, 2, 1))


# -- reachable background -------------------------------------------------------

def _positions(mask):
    return {(int(r), int(c)) for r, c in zip(*np.nonzero(mask))}


def test_reachable_examples():
    blank = BinaryImage.blank(4, 3)
    assert reachable_background(blank, BORDER, ALL_MOVES).all()
    full = img("111/111")
    assert not reachable_background(full, BORDER, ALL_MOVES).any()
    ring = img("111/101/111")
    assert not reachable_background(ring, BORDER, ALL_MOVES).any()
    assert _positions(enclosed_background(ring)) == {(1, 1)}


def test_reachable_from_pixel_seed_with_restricted_moves():
    a = img("0000/0100/0000")
    got = reachable_background(a, [(0, 0)], {Move.RIGHT, Move.DOWN})
    expected = {(r, c) for r in range(3) for c in range(4)} - {(1, 1)}
    assert _positions(got) == expected
    got = reachable_background(a, [(0, 1)], {Move.DOWN})
    assert _positions(got) == {(0, 1)}


def test_virtual_seeds_are_not_conduits():
    a = img("000/000")
    # entering from the top edge at column 2 with only downward moves
    assert _positions(reachable_background(a, [(-1, 2)], {Move.DOWN})) == {(0, 2), (1, 2)}
    # a left-edge seed cannot enter with only leftward moves
    assert not reachable_background(a, [(0, -1)], {Move.LEFT}).any()


def test_reachable_rejects_bad_seeds():
    a = img("10/00")
    with pytest.raises(ValueError):
        reachable_background(a, [(0, 0)], ALL_MOVES)
    with pytest.raises(ValueError):
        reachable_background(a, [(5, 5)], ALL_MOVES)


def test_reachable_equals_flood_fill_exhaustive_4x4():
    members = [(r, c) for r in range(4) for c in range(4)]
    for bits in range(1 << 16):
        g = oracles.grid_from_int(bits, 4, 4)
        a = BinaryImage(g)
        seeds = [(r, c) for r, c in members if (r in (0, 3) or c in (0, 3)) and not g[r][c]]
        expected = oracles.flood_from(g, seeds)
        assert _positions(reachable_background(a, BORDER, ALL_MOVES)) == expected
        if bits % 97 == 0 and seeds:
            one = seeds[0]
            assert _positions(reachable_background(a, [one], ALL_MOVES)) == oracles.flood_from(g, [one])


@settings(max_examples=300)
@given(grids, st.sets(st.sampled_from(list(Move))))
def test_escaping_matches_forward_dfs(pixels, moves):
    a = BinaryImage(pixels)
    g = pixels.tolist()
    got = _positions(escaping_background(a, moves))
    h, w = pixels.shape
    expected = {(r, c) for r in range(h) for c in range(w)
                if not g[r][c] and oracles.can_escape(g, r, c, [m.delta for m in moves])}
    assert got == expected


def test_pixel_moves_are_unit_steps():
    assert {m.delta for m in Move} == {(-1, 0), (1, 0), (0, -1), (0, 1)}
    assert all(m.reverse().reverse() is m for m in Move)
    assert len(ALL_MOVES) == 4
