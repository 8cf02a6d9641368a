"""Density-driven quadtree split of a binary map and the merge of
adjacent similar-density leaves into candidate regions."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import RectOutOfBoundsError
from .frames import Frame


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle: top-left corner plus extent, in pixels."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.w < 1 or self.h < 1:
            raise ValueError(f"degenerate rect {self.w}x{self.h}")

    @property
    def right(self) -> int:
        return self.x + self.w

    @property
    def bottom(self) -> int:
        return self.y + self.h

    @property
    def area(self) -> int:
        return self.w * self.h


def rect_iou(a: Rect, b: Rect) -> float:
    """Intersection-over-union of two rectangles."""
    iw = min(a.right, b.right) - max(a.x, b.x)
    ih = min(a.bottom, b.bottom) - max(a.y, b.y)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    return inter / float(a.area + b.area - inter)


@dataclass(frozen=True)
class QuadBlock:
    rect: Rect
    density: float
    depth: int
    children: tuple = ()

    @property
    def terminal(self) -> bool:
        return not self.children


@dataclass
class CandidateRegion:
    """Merged group of terminal blocks, mapped back onto the frame pair."""

    bbox: Rect
    member_blocks: list[Rect]
    mean_density: float
    pair_index: int = 0
    crop: np.ndarray | None = field(default=None, repr=False)


def edge_density(bits: np.ndarray, rect: Rect) -> float:
    """Fraction of set pixels inside the rect, in [0, 1]."""
    if rect.x < 0 or rect.y < 0 or rect.right > bits.shape[1] or rect.bottom > bits.shape[0]:
        raise RectOutOfBoundsError(
            f"rect {rect} outside {bits.shape[1]}x{bits.shape[0]} frame"
        )
    window = bits[rect.y : rect.bottom, rect.x : rect.right]
    return float(np.count_nonzero(window)) / rect.area


def split(bits: np.ndarray, threshold: float, min_size: int) -> QuadBlock:
    """Recursively quarter the map wherever the edge density is high.

    A block splits when its density strictly exceeds the threshold and
    both dimensions are at least twice the minimum size; otherwise it is
    terminal. Odd dimensions split floor/ceil so the four quadrants tile
    the block exactly.
    """
    if bits.ndim != 2 or bits.size == 0:
        raise ValueError("expected a non-empty 2-D binary map")
    if not 0.0 <= threshold <= 1.0:
        raise ValueError("threshold must lie in [0, 1]")
    if min_size < 1:
        raise ValueError("min_size must be >= 1")

    # Summed-area table makes every block count an O(1) lookup.
    integral = np.zeros((bits.shape[0] + 1, bits.shape[1] + 1), dtype=np.int64)
    np.cumsum((bits != 0).astype(np.int64), axis=0, out=integral[1:, 1:])
    np.cumsum(integral[1:, 1:], axis=1, out=integral[1:, 1:])

    def count(x: int, y: int, w: int, h: int) -> int:
        return int(
            integral[y + h, x + w]
            - integral[y, x + w]
            - integral[y + h, x]
            + integral[y, x]
        )

    floor = 2 * min_size

    def node(x: int, y: int, w: int, h: int, depth: int) -> QuadBlock:
        density = count(x, y, w, h) / (w * h)
        rect = Rect(x, y, w, h)
        if density > threshold and w >= floor and h >= floor:
            wl, hl = w // 2, h // 2
            children = (
                node(x, y, wl, hl, depth + 1),
                node(x + wl, y, w - wl, hl, depth + 1),
                node(x, y + hl, wl, h - hl, depth + 1),
                node(x + wl, y + hl, w - wl, h - hl, depth + 1),
            )
            return QuadBlock(rect, density, depth, children)
        return QuadBlock(rect, density, depth)

    return node(0, 0, bits.shape[1], bits.shape[0], 0)


def leaves(root: QuadBlock) -> list[QuadBlock]:
    """Terminal blocks in NW, NE, SW, SE depth-first order."""
    out: list[QuadBlock] = []
    stack = [root]
    while stack:
        block = stack.pop()
        if block.terminal:
            out.append(block)
        else:
            stack.extend(reversed(block.children))
    return out


def merge(
    leaf_blocks,
    density_tol: float,
    density_floor: float,
    pair_index: int = 0,
) -> list[CandidateRegion]:
    """Group adjacent similar-density leaves into candidate regions.

    Leaves with density >= density_floor are graph nodes; edges join
    rectangle-adjacent leaves (sharing a boundary segment, corner contact
    does not count) whose densities differ by at most density_tol. Each
    connected component becomes one region with the tight bounding box
    of its members.
    """
    if density_tol < 0:
        raise ValueError("density_tol must be >= 0")
    blocks = list(leaf_blocks)
    if not blocks:
        return []

    width = max(b.rect.right for b in blocks)
    height = max(b.rect.bottom for b in blocks)
    grid = np.full((height, width), -1, dtype=np.int32)
    for idx, block in enumerate(blocks):
        r = block.rect
        grid[r.y : r.bottom, r.x : r.right] = idx

    # Leaves tile the frame, so every boundary between different labels in
    # the painted grid is a shared edge segment of length >= 1. Cells left
    # at -1 (possible with hand-built partial leaf sets) pair with nothing.
    pairs = set()
    left, right = grid[:, :-1], grid[:, 1:]
    mask = (left != right) & (left >= 0) & (right >= 0)
    for a, b in zip(left[mask].tolist(), right[mask].tolist()):
        pairs.add((a, b) if a < b else (b, a))
    top, bottom = grid[:-1, :], grid[1:, :]
    mask = (top != bottom) & (top >= 0) & (bottom >= 0)
    for a, b in zip(top[mask].tolist(), bottom[mask].tolist()):
        pairs.add((a, b) if a < b else (b, a))

    is_node = [b.density >= density_floor for b in blocks]
    parent = list(range(len(blocks)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for a, b in pairs:
        if is_node[a] and is_node[b] and abs(blocks[a].density - blocks[b].density) <= density_tol:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)

    components: dict[int, list[int]] = {}
    for i, node_ok in enumerate(is_node):
        if node_ok:
            components.setdefault(find(i), []).append(i)

    regions = []
    for members in components.values():
        rects = [blocks[i].rect for i in members]
        x0 = min(r.x for r in rects)
        y0 = min(r.y for r in rects)
        x1 = max(r.right for r in rects)
        y1 = max(r.bottom for r in rects)
        set_pixels = sum(round(blocks[i].density * blocks[i].rect.area) for i in members)
        total_area = sum(r.area for r in rects)
        regions.append(
            CandidateRegion(
                bbox=Rect(x0, y0, x1 - x0, y1 - y0),
                member_blocks=rects,
                mean_density=set_pixels / total_area,
                pair_index=pair_index,
            )
        )
    regions.sort(key=lambda reg: (reg.bbox.y, reg.bbox.x, reg.bbox.w, reg.bbox.h))
    return regions


def map_to_frame(region: CandidateRegion, original: Frame) -> CandidateRegion:
    """Attach the grayscale crop of the frame under the region's bbox."""
    r = region.bbox
    if r.x < 0 or r.y < 0 or r.right > original.width or r.bottom > original.height:
        raise RectOutOfBoundsError(
            f"bbox {r} outside {original.width}x{original.height} frame"
        )
    crop = original.pixels[r.y : r.bottom, r.x : r.right].copy()
    return replace(region, crop=crop)
