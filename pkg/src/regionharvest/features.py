"""Longest-run features per region along 4 scan directions.

Per region and direction, the lengths of the longest foreground run on
each parallel scan line are summed and divided by the region area, which
pins every feature into [0, 1] (the lines partition the region's pixels).

Full-layout vector (84 values): 4 whole-image values, 16 level-1 values,
then 4 per level-2 region in ascending region index; within each region
the order is (row, col, diag1, diag2).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataset import BinaryImage, Sample
from .partition import LEVEL2_COUNT, Region, RegionTree, build_tree

DIRECTIONS = ("row", "col", "diag1", "diag2")
GLOBAL_LENGTH = 20  # 4 level-0 + 16 level-1 values
FULL_LENGTH = GLOBAL_LENGTH + 4 * LEVEL2_COUNT


@dataclass(frozen=True)
class RegionFeatures:
    f_row: float
    f_col: float
    f_diag1: float
    f_diag2: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.f_row, self.f_col, self.f_diag1, self.f_diag2)


def longest_run(line) -> int:
    """Length of the longest contiguous run of 1s; 0 for an empty line."""
    arr = np.asarray(line, dtype=np.int32)
    if arr.size == 0:
        return 0
    return int(_longest_run_per_row(arr.reshape(1, -1))[0])


def _longest_run_per_row(mat: np.ndarray) -> np.ndarray:
    # run length ending at each cell = cumsum minus the cumsum at the last 0
    cs = np.cumsum(mat, axis=1)
    resets = np.maximum.accumulate(np.where(mat == 0, cs, 0), axis=1)
    return (cs - resets).max(axis=1)


def _skew(sub: np.ndarray, anti: bool) -> np.ndarray:
    # shift rows so each diagonal becomes a column of the padded matrix
    h, w = sub.shape
    out = np.zeros((h, h + w - 1), dtype=sub.dtype)
    for r in range(h):
        start = r if anti else h - 1 - r
        out[r, start:start + w] = sub[r]
    return out


def directional_feature(image: BinaryImage, region: Region, direction: str) -> float:
    """Sum of per-line longest runs in one direction, normalized by region area."""
    if direction not in DIRECTIONS:
        raise ValueError(f"unknown direction {direction!r}; expected one of {DIRECTIONS}")
    if region.is_empty:
        return 0.0
    sub = region.crop(image.pixels).astype(np.int32)
    if direction == "row":
        lines = sub
    elif direction == "col":
        lines = sub.T
    elif direction == "diag1":
        lines = _skew(sub, anti=False).T
    else:
        lines = _skew(sub, anti=True).T
    total = int(_longest_run_per_row(lines).sum())
    return total / region.area


def region_features(image: BinaryImage, region: Region) -> RegionFeatures:
    return RegionFeatures(*(directional_feature(image, region, d) for d in DIRECTIONS))


def assemble(image: BinaryImage, tree: RegionTree, selected) -> np.ndarray:
    """Feature vector over the global regions plus the selected level-2 regions.

    ``selected`` is any iterable of distinct level-2 indices; the local part
    is laid out in ascending index order.
    """
    indices = sorted(set(int(i) for i in selected))
    if indices and (indices[0] < 0 or indices[-1] >= LEVEL2_COUNT):
        raise ValueError(f"selected region indices must lie in 0..{LEVEL2_COUNT - 1}: {indices}")
    values: list[float] = []
    values.extend(region_features(image, tree.level0).as_tuple())
    for region in tree.level1:
        values.extend(region_features(image, region).as_tuple())
    for idx in indices:
        values.extend(region_features(image, tree.level2[idx]).as_tuple())
    return np.asarray(values, dtype=np.float64)


def subset_columns(selected) -> np.ndarray:
    """Column indices into the full 84-wide layout for the given local regions."""
    indices = sorted(set(int(i) for i in selected))
    if indices and (indices[0] < 0 or indices[-1] >= LEVEL2_COUNT):
        raise ValueError(f"selected region indices must lie in 0..{LEVEL2_COUNT - 1}: {indices}")
    cols = list(range(GLOBAL_LENGTH))
    for idx in indices:
        cols.extend(range(GLOBAL_LENGTH + 4 * idx, GLOBAL_LENGTH + 4 * idx + 4))
    return np.asarray(cols, dtype=np.intp)


def extract_full(samples: list[Sample]) -> tuple[np.ndarray, np.ndarray]:
    """Per-sample full 84-column feature matrix plus the label vector.

    Regions are recomputed per sample (the tree depends on the ink layout)
    but features are extracted once here and reused by every subsequent
    subset evaluation via column selection.
    """
    matrix = np.empty((len(samples), FULL_LENGTH), dtype=np.float64)
    labels = np.empty(len(samples), dtype=np.int64)
    for i, sample in enumerate(samples):
        tree = build_tree(sample.image)
        matrix[i] = assemble(sample.image, tree, range(LEVEL2_COUNT))
        labels[i] = sample.label
    return matrix, labels


def write_feature_store(path: str | Path, sample_ids: list[str], labels: np.ndarray,
                        matrix: np.ndarray, header_comment: str | None = None) -> None:
    """CSV store: ``sample_id,label,f0..f83`` with full float precision."""
    with open(path, "w", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        writer = csv.writer(fh)
        writer.writerow(["sample_id", "label"] + [f"f{i}" for i in range(FULL_LENGTH)])
        for sid, label, row in zip(sample_ids, labels, matrix):
            writer.writerow([sid, int(label)] + [repr(float(v)) for v in row])


def read_feature_store(path: str | Path) -> tuple[list[str], np.ndarray, np.ndarray]:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(line for line in fh if not line.startswith("#"))]
    if not rows or rows[0][:2] != ["sample_id", "label"]:
        raise ValueError(f"not a feature store CSV: {path}")
    body = rows[1:]
    if not body:
        raise ValueError(f"feature store has no rows: {path}")
    sample_ids = [r[0] for r in body]
    labels = np.array([int(r[1]) for r in body], dtype=np.int64)
    matrix = np.array([[float(v) for v in r[2:]] for r in body], dtype=np.float64)
    if matrix.shape[1] != FULL_LENGTH:
        raise ValueError(f"feature store must have {FULL_LENGTH} feature columns: {path}")
    return sample_ids, labels, matrix
