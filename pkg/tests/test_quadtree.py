import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from vidtext.errors import RectOutOfBoundsError
from vidtext.frames import Frame
from vidtext.quadtree import (
    CandidateRegion,
    QuadBlock,
    Rect,
    edge_density,
    leaves,
    map_to_frame,
    merge,
    rect_iou,
    split,
)


def split_oracle(bits, threshold, min_size):
    """Reference recursion: plain slice sums, no integral image.

    Returns (rect, density) leaf tuples in NW, NE, SW, SE order.
    """
    out = []

    def rec(x, y, w, h):
        block = bits[y : y + h, x : x + w]
        density = float(np.count_nonzero(block)) / (w * h)
        if density > threshold and w >= 2 * min_size and h >= 2 * min_size:
            wl, hl = w // 2, h // 2
            rec(x, y, wl, hl)
            rec(x + wl, y, w - wl, hl)
            rec(x, y + hl, wl, h - hl)
            rec(x + wl, y + hl, w - wl, h - hl)
        else:
            out.append(((x, y, w, h), density))

    rec(0, 0, bits.shape[1], bits.shape[0])
    return out


def make_leaf(x, y, w, h, density):
    return QuadBlock(Rect(x, y, w, h), density, depth=0)


def test_edge_density_values():
    bits = np.zeros((8, 8), dtype=np.uint8)
    assert edge_density(bits, Rect(0, 0, 8, 8)) == 0.0
    bits[2, 2:6] = 1
    bits[3, 2:6] = 1
    assert edge_density(bits, Rect(2, 2, 4, 4)) == 0.5
    bits[0, 0] = 1
    assert edge_density(bits, Rect(0, 0, 1, 1)) == 1.0


def test_edge_density_out_of_bounds():
    with pytest.raises(RectOutOfBoundsError):
        edge_density(np.zeros((4, 4), dtype=np.uint8), Rect(2, 2, 4, 4))


def test_split_empty_frame_single_leaf():
    root = split(np.zeros((32, 32), dtype=np.uint8), 0.1, 8)
    assert root.terminal
    assert len(leaves(root)) == 1


def test_split_dense_quadrant_example():
    # Top-left 32x32 all ones: the dense quadrant subdivides down to the
    # 8-pixel floor, the three empty quadrants stay whole.
    bits = np.zeros((64, 64), dtype=np.uint8)
    bits[:32, :32] = 1
    root = split(bits, 0.1, 8)
    got = sorted((l.rect.x, l.rect.y, l.rect.w, l.rect.h) for l in leaves(root))
    expected = sorted(r for r, _ in split_oracle(bits, 0.1, 8))
    assert got == expected
    dense = [l for l in leaves(root) if l.density == 1.0]
    assert len(dense) == 16
    assert all(l.rect.w == 8 and l.rect.h == 8 for l in dense)
    assert len(leaves(root)) == 19


def test_split_size_floor_dominates():
    bits = np.ones((16, 16), dtype=np.uint8)
    root = split(bits, 0.1, 16)
    assert root.terminal


def test_split_rejects_bad_parameters():
    bits = np.zeros((8, 8), dtype=np.uint8)
    with pytest.raises(ValueError):
        split(bits, 1.5, 8)
    with pytest.raises(ValueError):
        split(bits, 0.1, 0)
    with pytest.raises(ValueError):
        split(np.zeros((0, 4), dtype=np.uint8), 0.1, 2)


@given(
    arrays(np.uint8, st.tuples(st.integers(1, 40), st.integers(1, 40)), elements=st.integers(0, 1)),
    st.floats(0.0, 1.0),
    st.integers(1, 12),
)
@settings(max_examples=60, deadline=None)
def test_split_invariants(bits, threshold, min_size):
    root = split(bits, threshold, min_size)
    leaf_list = leaves(root)
    # Leaves tile the frame exactly.
    coverage = np.zeros(bits.shape, dtype=np.int32)
    for leaf in leaf_list:
        r = leaf.rect
        coverage[r.y : r.bottom, r.x : r.right] += 1
    assert (coverage == 1).all()
    # Stopping condition is total, and densities are honest.
    for leaf in leaf_list:
        assert (
            leaf.density <= threshold
            or leaf.rect.w < 2 * min_size
            or leaf.rect.h < 2 * min_size
        )
        assert leaf.density == edge_density(bits, leaf.rect)
    # No non-terminal block is smaller than twice the floor.
    stack = [root]
    while stack:
        block = stack.pop()
        if not block.terminal:
            assert block.rect.w >= 2 * min_size and block.rect.h >= 2 * min_size
            stack.extend(block.children)


@given(arrays(np.uint8, st.tuples(st.integers(2, 24), st.integers(2, 24)), elements=st.integers(0, 1)))
@settings(max_examples=40, deadline=None)
def test_split_transpose_symmetry(bits):
    direct = {(l.rect.x, l.rect.y, l.rect.w, l.rect.h) for l in leaves(split(bits, 0.3, 2))}
    flipped = {
        (l.rect.y, l.rect.x, l.rect.h, l.rect.w)
        for l in leaves(split(np.ascontiguousarray(bits.T), 0.3, 2))
    }
    assert direct == flipped


def test_merge_two_similar_neighbors():
    a = make_leaf(0, 0, 8, 8, 0.60)
    b = make_leaf(8, 0, 8, 8, 0.62)
    regions = merge([a, b], density_tol=0.1, density_floor=0.3)
    assert len(regions) == 1
    assert regions[0].bbox == Rect(0, 0, 16, 8)
    assert len(regions[0].member_blocks) == 2


def test_merge_diagonal_contact_is_not_adjacency():
    a = make_leaf(0, 0, 8, 8, 0.5)
    b = make_leaf(8, 8, 8, 8, 0.5)
    regions = merge([a, b], density_tol=0.2, density_floor=0.1)
    assert len(regions) == 2


def test_merge_everything_below_floor():
    a = make_leaf(0, 0, 8, 8, 0.01)
    b = make_leaf(8, 0, 8, 8, 0.02)
    assert merge([a, b], density_tol=0.2, density_floor=0.05) == []


def test_merge_density_gap_blocks_edge():
    a = make_leaf(0, 0, 8, 8, 0.9)
    b = make_leaf(8, 0, 8, 8, 0.2)
    regions = merge([a, b], density_tol=0.1, density_floor=0.1)
    assert len(regions) == 2


def test_merge_chains_transitively():
    blocks = [make_leaf(8 * i, 0, 8, 8, 0.2 + 0.1 * i) for i in range(5)]
    regions = merge(blocks, density_tol=0.15, density_floor=0.1)
    assert len(regions) == 1
    assert regions[0].bbox == Rect(0, 0, 40, 8)


def test_merge_member_sets_are_disjoint():
    bits = np.zeros((32, 32), dtype=np.uint8)
    bits[:8, :16] = 1
    bits[24:, 16:] = 1
    regions = merge(leaves(split(bits, 0.05, 8)), density_tol=0.3, density_floor=0.5)
    seen = set()
    for region in regions:
        for rect in region.member_blocks:
            key = (rect.x, rect.y, rect.w, rect.h)
            assert key not in seen
            seen.add(key)
    assert len(regions) == 2


def test_merge_mean_density_is_area_weighted():
    a = make_leaf(0, 0, 8, 8, 1.0)
    b = make_leaf(8, 0, 16, 8, 0.25)  # 64 + 32 set pixels over 192
    regions = merge([a, b], density_tol=1.0, density_floor=0.1)
    assert len(regions) == 1
    assert regions[0].mean_density == pytest.approx(96 / 192)


def test_map_to_frame_crops():
    pixels = np.arange(64, dtype=np.uint8).reshape(8, 8)
    frame = Frame(0, pixels)
    region = CandidateRegion(bbox=Rect(0, 0, 8, 8), member_blocks=[Rect(0, 0, 8, 8)], mean_density=1.0)
    assert np.array_equal(map_to_frame(region, frame).crop, pixels)
    small = CandidateRegion(bbox=Rect(5, 5, 3, 2), member_blocks=[Rect(5, 5, 3, 2)], mean_density=1.0)
    assert np.array_equal(map_to_frame(small, frame).crop, pixels[5:7, 5:8])
    outside = CandidateRegion(bbox=Rect(6, 6, 4, 4), member_blocks=[], mean_density=0.0)
    with pytest.raises(RectOutOfBoundsError):
        map_to_frame(outside, frame)


def test_rect_iou_cases():
    assert rect_iou(Rect(0, 0, 10, 10), Rect(0, 0, 10, 10)) == 1.0
    assert rect_iou(Rect(0, 0, 10, 10), Rect(10, 0, 10, 10)) == 0.0
    # 70 and 60 pixel boxes overlapping on 30 pixels: exactly 0.3.
    assert rect_iou(Rect(0, 0, 10, 7), Rect(4, 2, 10, 6)) == pytest.approx(0.3)
