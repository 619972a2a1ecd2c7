"""Centroid-driven quad-tree zoning: 1 + 4 + 16 regions over a binary glyph."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataset import BinaryImage

LEVEL1_COUNT = 4
LEVEL2_COUNT = 16
TOTAL_REGIONS = 1 + LEVEL1_COUNT + LEVEL2_COUNT


@dataclass(frozen=True)
class Region:
    """Inclusive bounding rectangle; top > bottom or left > right marks EMPTY."""

    top: int
    left: int
    bottom: int
    right: int

    @classmethod
    def empty(cls) -> "Region":
        return cls(0, 0, -1, -1)

    @property
    def is_empty(self) -> bool:
        return self.top > self.bottom or self.left > self.right

    @property
    def height(self) -> int:
        return 0 if self.is_empty else self.bottom - self.top + 1

    @property
    def width(self) -> int:
        return 0 if self.is_empty else self.right - self.left + 1

    @property
    def area(self) -> int:
        return self.height * self.width

    def crop(self, pixels: np.ndarray) -> np.ndarray:
        return pixels[self.top:self.bottom + 1, self.left:self.right + 1]


@dataclass(frozen=True)
class RegionTree:
    """Quad-tree levels 0/1/2; level-2 index = 4 * parent_quadrant + child_quadrant.

    Quadrant order everywhere is (top-left, top-right, bottom-left, bottom-right).
    """

    level0: Region
    level1: tuple[Region, ...]
    level2: tuple[Region, ...]

    def __post_init__(self):
        if len(self.level1) != LEVEL1_COUNT or len(self.level2) != LEVEL2_COUNT:
            raise ValueError("region tree needs 4 level-1 and 16 level-2 regions")

    def all_regions(self) -> tuple[Region, ...]:
        return (self.level0,) + self.level1 + self.level2


def centroid(image: BinaryImage, region: Region) -> tuple[float, float]:
    """Foreground center of gravity, or the geometric center if the region is ink-free."""
    if region.is_empty:
        raise ValueError("cannot take the centroid of an empty region")
    sub = region.crop(image.pixels)
    mass = int(sub.sum())
    if mass == 0:
        return (region.top + region.bottom) / 2.0, (region.left + region.right) / 2.0
    rows, cols = np.nonzero(sub)
    return (region.top + float(rows.sum()) / mass, region.left + float(cols.sum()) / mass)


def _round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


def _canonical(top: int, left: int, bottom: int, right: int) -> Region:
    if top > bottom or left > right:
        return Region.empty()
    return Region(top, left, bottom, right)


def split4(image: BinaryImage, region: Region) -> tuple[Region, Region, Region, Region]:
    """Quarter a region at its center of gravity.

    The CG row/col rounds half-up to the first row/col of the bottom/right
    half, clamped so both halves stay non-empty whenever the region spans
    at least 2 rows (columns). Single-row regions put everything in the top
    pair; single-column regions in the left pair.
    """
    if region.is_empty:
        raise ValueError("cannot split an empty region")
    cg_row, cg_col = centroid(image, region)
    s_r = max(region.top + 1, min(_round_half_up(cg_row), region.bottom))
    s_c = max(region.left + 1, min(_round_half_up(cg_col), region.right))
    return (
        _canonical(region.top, region.left, s_r - 1, s_c - 1),
        _canonical(region.top, s_c, s_r - 1, region.right),
        _canonical(s_r, region.left, region.bottom, s_c - 1),
        _canonical(s_r, s_c, region.bottom, region.right),
    )


def build_tree(image: BinaryImage) -> RegionTree:
    """Full 21-region quad-tree; empty level-1 regions yield 4 empty children."""
    if image.foreground_count() == 0:
        raise ValueError("cannot build a region tree for an all-background image")
    level0 = Region(0, 0, image.height - 1, image.width - 1)
    level1 = split4(image, level0)
    level2: list[Region] = []
    for parent in level1:
        if parent.is_empty:
            level2.extend([Region.empty()] * 4)
        else:
            level2.extend(split4(image, parent))
    return RegionTree(level0=level0, level1=level1, level2=tuple(level2))


def region_table(tree: RegionTree) -> list[tuple[int, int, int, int, int, int]]:
    """(level, index, top, left, bottom, right) rows for debugging dumps."""
    rows = [(0, 0, tree.level0.top, tree.level0.left, tree.level0.bottom, tree.level0.right)]
    for idx, r in enumerate(tree.level1):
        rows.append((1, idx, r.top, r.left, r.bottom, r.right))
    for idx, r in enumerate(tree.level2):
        rows.append((2, idx, r.top, r.left, r.bottom, r.right))
    return rows


def write_region_table(tree: RegionTree, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["level", "index", "top", "left", "bottom", "right"])
        writer.writerows(region_table(tree))
