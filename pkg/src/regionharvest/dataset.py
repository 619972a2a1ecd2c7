"""Glyph dataset handling: loading, binarization, normalization, splitting.

Input images are CSV-manifested PNG or PGM (P2/P5) files; a built-in
synthetic stroke-glyph generator stands in for real corpora. All samples
end up as 32x32 binary grids with ink = 1.
"""

from __future__ import annotations

import csv
import logging
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

logger = logging.getLogger(__name__)

DEFAULT_SIZE = 32
SYNTHETIC_CANVAS = 32
MAX_SYNTHETIC_CLASSES = 26


@dataclass(frozen=True, eq=False)
class BinaryImage:
    """H x W grid of {0, 1} pixels, 1 = foreground ink."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.uint8)
        if px.ndim != 2 or px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError(f"binary image must be a non-empty 2-D grid, got shape {px.shape}")
        if not np.isin(px, (0, 1)).all():
            raise ValueError("binary image pixels must be exactly 0 or 1")
        px.flags.writeable = False
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    def foreground_count(self) -> int:
        return int(self.pixels.sum())


@dataclass(frozen=True, eq=False)
class RawSample:
    """One manifest row before binarization: raw grayscale pixels plus label."""

    image: np.ndarray
    label: int
    label_name: str
    source_id: str


@dataclass(frozen=True, eq=False)
class Sample:
    """A binarized glyph with its densified class label."""

    image: BinaryImage
    label: int
    source_id: str


@dataclass(eq=False)
class DatasetSplit:
    train: list[Sample]
    validation: list[Sample]
    test: list[Sample]
    class_count: int

    def __post_init__(self):
        ids = [{s.source_id for s in part} for part in (self.train, self.validation, self.test)]
        if ids[0] & ids[1] or ids[0] & ids[2] or ids[1] & ids[2]:
            raise ValueError("split parts must be pairwise disjoint by source_id")
        train_classes = {s.label for s in self.train}
        missing = set(range(self.class_count)) - train_classes
        if missing:
            raise ValueError(f"classes missing from train split: {sorted(missing)}")


def read_pgm(path: str | Path) -> np.ndarray:
    """Read a P2 (ASCII) or P5 (binary) PGM file into a uint8 grid."""
    data = Path(path).read_bytes()

    tokens = []
    pos = 0
    while len(tokens) < 4:
        if pos >= len(data):
            raise ValueError(f"truncated PGM header: {path}")
        chunk = data[pos:pos + 1]
        if chunk == b"#":
            nl = data.find(b"\n", pos)
            pos = len(data) if nl < 0 else nl + 1
        elif chunk.isspace():
            pos += 1
        else:
            end = pos
            while end < len(data) and not data[end:end + 1].isspace() and data[end:end + 1] != b"#":
                end += 1
            tokens.append(data[pos:end])
            pos = end
    magic = tokens[0]
    if magic not in (b"P2", b"P5"):
        raise ValueError(f"unsupported PGM magic {magic!r}: {path}")
    width, height, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    if width < 1 or height < 1 or not 0 < maxval < 65536:
        raise ValueError(f"bad PGM dimensions in {path}")
    if magic == b"P5":
        pos += 1  # single whitespace byte after maxval
        if maxval > 255:
            raise ValueError(f"16-bit PGM not supported: {path}")
        raster = np.frombuffer(data, dtype=np.uint8, count=width * height, offset=pos)
    else:
        values = data[pos:].split()
        if len(values) < width * height:
            raise ValueError(f"truncated P2 raster in {path}")
        raster = np.array([int(v) for v in values[: width * height]], dtype=np.int64)
        if raster.min() < 0 or raster.max() > maxval:
            raise ValueError(f"P2 sample out of range in {path}")
    grid = raster.reshape(height, width)
    if maxval != 255:
        grid = np.rint(grid.astype(np.float64) * (255.0 / maxval)).astype(np.uint8)
    return grid.astype(np.uint8)


def write_pgm(path: str | Path, grid: np.ndarray, comment: str | None = None) -> None:
    """Write a uint8 grid as a binary (P5) PGM file."""
    grid = np.asarray(grid, dtype=np.uint8)
    header = "P5\n"
    if comment:
        header += "".join(f"# {line}\n" for line in comment.splitlines())
    header += f"{grid.shape[1]} {grid.shape[0]}\n255\n"
    Path(path).write_bytes(header.encode("ascii") + grid.tobytes())


def _load_gray(path: Path) -> np.ndarray:
    suffix = path.suffix.lower()
    if suffix == ".pgm":
        return read_pgm(path)
    with Image.open(path) as img:
        return np.asarray(img.convert("L"), dtype=np.uint8)


def load_manifest(manifest_path: str | Path) -> list[RawSample]:
    """Load a CSV of ``image_path,label`` rows into raw (un-binarized) samples.

    Labels are densified to 0..K-1 in first-appearance order. Image paths
    are resolved relative to the manifest's directory.
    """
    manifest_path = Path(manifest_path)
    if not manifest_path.exists():
        raise FileNotFoundError(f"manifest not found: {manifest_path}")
    with open(manifest_path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if row and any(cell.strip() for cell in row)]
    if rows and [cell.strip().lower() for cell in rows[0][:2]] == ["image_path", "label"]:
        rows = rows[1:]
    if not rows:
        raise ValueError(f"empty manifest: {manifest_path}")

    label_ids: dict[str, int] = {}
    samples = []
    for lineno, row in enumerate(rows, start=1):
        if len(row) < 2:
            raise ValueError(f"manifest row {lineno} of {manifest_path} needs image_path,label: {row!r}")
        rel_path, label_name = row[0].strip(), row[1].strip()
        image_path = manifest_path.parent / rel_path
        if not image_path.exists():
            raise FileNotFoundError(f"manifest row {lineno}: image not found: {image_path}")
        try:
            grid = _load_gray(image_path)
        except FileNotFoundError:
            raise
        except Exception as exc:
            raise ValueError(f"manifest row {lineno}: unreadable image {image_path}: {exc}") from exc
        if label_name not in label_ids:
            label_ids[label_name] = len(label_ids)
        samples.append(
            RawSample(image=grid, label=label_ids[label_name], label_name=label_name,
                      source_id=rel_path)
        )
    return samples


def otsu_threshold(gray: np.ndarray) -> int:
    """Threshold t in 0..254 maximizing between-class variance of (<=t, >t)."""
    hist = np.bincount(gray.ravel(), minlength=256).astype(np.float64)
    total = hist.sum()
    omega = np.cumsum(hist)[:-1]  # mass of the <=t class, t = 0..254
    mu = np.cumsum(hist * np.arange(256))[:-1]
    mu_total = (hist * np.arange(256)).sum()
    with np.errstate(divide="ignore", invalid="ignore"):
        variance = (mu_total * omega - mu * total) ** 2 / (omega * (total - omega) * total * total)
    variance = np.nan_to_num(variance, nan=-1.0, posinf=-1.0, neginf=-1.0)
    return int(np.argmax(variance))


def binarize(gray: np.ndarray) -> BinaryImage:
    """Otsu-threshold a grayscale grid; the darker class becomes foreground.

    Already-binary grids (values within {0, 255}) pass straight through
    under the same ink-is-dark convention: 0 -> 1, 255 -> 0. A uniform
    grid at any other level is all background and raises a warning.
    """
    gray = np.asarray(gray)
    if gray.ndim != 2:
        raise ValueError(f"expected a 2-D grayscale grid, got shape {gray.shape}")
    if gray.min() < 0 or gray.max() > 255:
        raise ValueError("grayscale values must lie in [0, 255]")
    gray = gray.astype(np.uint8)
    levels = np.unique(gray)
    if set(levels.tolist()) <= {0, 255}:
        return BinaryImage((gray == 0).astype(np.uint8))
    if levels.size == 1:
        warnings.warn(f"uniform grayscale image (level {int(levels[0])}); treating as all background")
        return BinaryImage(np.zeros_like(gray, dtype=np.uint8))
    t = otsu_threshold(gray)
    return BinaryImage((gray <= t).astype(np.uint8))


def foreground_bbox(image: BinaryImage) -> tuple[int, int, int, int]:
    """(top, left, bottom, right) inclusive bounds of foreground pixels."""
    rows = np.flatnonzero(image.pixels.any(axis=1))
    cols = np.flatnonzero(image.pixels.any(axis=0))
    if rows.size == 0:
        raise ValueError("image has no foreground pixels")
    return int(rows[0]), int(cols[0]), int(rows[-1]), int(cols[-1])


def _nearest_indices(src_size: int, dst_size: int) -> np.ndarray:
    # pixel-center mapping: dst d samples src floor((d + 0.5) * src/dst)
    idx = ((np.arange(dst_size) + 0.5) * src_size / dst_size).astype(np.int64)
    return np.minimum(idx, src_size - 1)


def normalize(image: BinaryImage, target_h: int = DEFAULT_SIZE, target_w: int = DEFAULT_SIZE) -> BinaryImage:
    """Crop to the foreground bounding box, then nearest-neighbor scale."""
    if target_h < 4 or target_w < 4:
        raise ValueError("target size must be at least 4x4")
    top, left, bottom, right = foreground_bbox(image)
    cropped = image.pixels[top:bottom + 1, left:right + 1]
    rows = _nearest_indices(cropped.shape[0], target_h)
    cols = _nearest_indices(cropped.shape[1], target_w)
    return BinaryImage(cropped[np.ix_(rows, cols)])


def _allocate_counts(n: int, ratios: tuple[float, float, float]) -> list[int]:
    # largest-remainder allocation, then force at least one train sample
    exact = [n * r for r in ratios]
    counts = [math.floor(x) for x in exact]
    remainders = [x - c for x, c in zip(exact, counts)]
    for _ in range(n - sum(counts)):
        best = max(range(3), key=lambda i: (remainders[i], -i))
        counts[best] += 1
        remainders[best] = -1.0
    if counts[0] == 0:
        donor = max(range(1, 3), key=lambda i: (counts[i], -i))
        counts[donor] -= 1
        counts[0] += 1
    return counts


def split(samples: list[Sample], ratios: tuple[float, float, float], seed: int) -> DatasetSplit:
    """Stratified per-class split, deterministic for a fixed seed."""
    if min(ratios) <= 0:
        raise ValueError(f"split ratios must be positive: {ratios}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"split ratios must sum to 1, got {sum(ratios)!r}")

    by_class: dict[int, list[Sample]] = {}
    for s in samples:
        by_class.setdefault(s.label, []).append(s)
    class_count = len(by_class)
    for label in sorted(by_class):
        if len(by_class[label]) < 3:
            raise ValueError(f"class {label} has only {len(by_class[label])} samples; need at least 3")

    rng = np.random.default_rng(seed)
    train: list[Sample] = []
    val: list[Sample] = []
    test: list[Sample] = []
    for label in sorted(by_class):
        group = by_class[label]
        order = rng.permutation(len(group))
        shuffled = [group[i] for i in order]
        n_train, n_val, _ = _allocate_counts(len(group), ratios)
        train.extend(shuffled[:n_train])
        val.extend(shuffled[n_train:n_train + n_val])
        test.extend(shuffled[n_train + n_val:])
    return DatasetSplit(train=train, validation=val, test=test, class_count=class_count)


# --- synthetic stroke glyphs -------------------------------------------------

_THICK = 3


def _paint_hline(canvas, row, c0=2, c1=29):
    canvas[row:row + _THICK, c0:c1 + 1] = 1


def _paint_vline(canvas, col, r0=2, r1=29):
    canvas[r0:r1 + 1, col:col + _THICK] = 1


def _paint_diag(canvas, anti=False):
    n = canvas.shape[0]
    for i in range(n):
        j = n - 1 - i if anti else i
        lo, hi = max(0, j - 1), min(n, j + 2)
        canvas[i, lo:hi] = 1


def _paint_ring(canvas, cy, cx, radius):
    yy, xx = np.mgrid[0:canvas.shape[0], 0:canvas.shape[1]]
    dist = np.sqrt((yy - cy) ** 2 + (xx - cx) ** 2)
    canvas[np.abs(dist - radius) <= 1.5] = 1


def _paint_box(canvas, margin=4):
    lo, hi = margin, canvas.shape[0] - margin - 1
    canvas[lo:lo + _THICK, lo:hi + 1] = 1
    canvas[hi - _THICK + 1:hi + 1, lo:hi + 1] = 1
    canvas[lo:hi + 1, lo:lo + _THICK] = 1
    canvas[lo:hi + 1, hi - _THICK + 1:hi + 1] = 1


def _paint_block(canvas, r0, c0, size=8):
    canvas[r0:r0 + size, c0:c0 + size] = 1


def _paint_diamond(canvas):
    yy, xx = np.mgrid[0:canvas.shape[0], 0:canvas.shape[1]]
    dist = np.abs(yy - 15.5) + np.abs(xx - 15.5)
    canvas[(dist >= 9) & (dist <= 12)] = 1


_TEMPLATE_PAINTERS = [
    lambda c: (_paint_vline(c, 4), _paint_hline(c, 4)),                       # corner angle
    lambda c: (_paint_vline(c, 25), _paint_hline(c, 4)),                      # mirrored angle
    lambda c: (_paint_hline(c, 4), _paint_hline(c, 25)),                      # two horizontal bars
    lambda c: (_paint_vline(c, 4), _paint_vline(c, 25)),                      # two vertical bars
    lambda c: (_paint_hline(c, 14), _paint_vline(c, 14)),                     # plus
    lambda c: (_paint_diag(c), _paint_diag(c, anti=True)),                    # cross diagonals
    lambda c: _paint_box(c),                                                  # box outline
    lambda c: _paint_ring(c, 15.5, 15.5, 10),                                 # large ring
    lambda c: _paint_diag(c),                                                 # main diagonal
    lambda c: _paint_diag(c, anti=True),                                      # anti diagonal
    lambda c: (_paint_hline(c, 4), _paint_vline(c, 14)),                      # tee
    lambda c: (_paint_vline(c, 4), _paint_hline(c, 25)),                      # ell
    lambda c: (_paint_vline(c, 25), _paint_hline(c, 25)),                     # mirrored ell
    lambda c: (_paint_vline(c, 4), _paint_vline(c, 25), _paint_hline(c, 25)),  # cup
    lambda c: (_paint_vline(c, 4), _paint_vline(c, 25), _paint_hline(c, 4)),   # cap
    lambda c: (_paint_vline(c, 4), _paint_vline(c, 25), _paint_hline(c, 14)),  # aitch
    lambda c: (_paint_hline(c, 4), _paint_hline(c, 25), _paint_diag(c, anti=True)),  # zed
    lambda c: (_paint_hline(c, 4), _paint_hline(c, 14), _paint_hline(c, 25)),  # three bars
    lambda c: _paint_ring(c, 9, 9, 6),                                        # small ring upper-left
    lambda c: _paint_ring(c, 22, 22, 6),                                      # small ring lower-right
    lambda c: _paint_block(c, 10, 10, 12),                                    # filled center block
    lambda c: _paint_diamond(c),                                              # diamond outline
    lambda c: (_paint_diag(c), _paint_vline(c, 14)),                          # diagonal with mast
    lambda c: (_paint_diag(c, anti=True), _paint_hline(c, 14)),               # anti diagonal with bar
    lambda c: (_paint_block(c, 2, 2, 6), _paint_block(c, 2, 24, 6),
               _paint_block(c, 24, 2, 6), _paint_block(c, 24, 24, 6)),        # corner dots
    lambda c: (_paint_box(c, margin=2), _paint_block(c, 13, 13, 6)),          # box with kernel
]


def synthetic_template(class_id: int) -> np.ndarray:
    """Deterministic 32x32 stroke template for one glyph class."""
    if not 0 <= class_id < MAX_SYNTHETIC_CLASSES:
        raise ValueError(f"class_id must be in 0..{MAX_SYNTHETIC_CLASSES - 1}, got {class_id}")
    canvas = np.zeros((SYNTHETIC_CANVAS, SYNTHETIC_CANVAS), dtype=np.uint8)
    _TEMPLATE_PAINTERS[class_id](canvas)
    return canvas


def generate_synthetic(class_count: int, per_class: int, noise: float, seed: int) -> list[Sample]:
    """Noisy copies of the stroke templates: independent pixel flips at ``noise``."""
    if not 2 <= class_count <= MAX_SYNTHETIC_CLASSES:
        raise ValueError(f"class_count must be in 2..{MAX_SYNTHETIC_CLASSES}, got {class_count}")
    if per_class < 1:
        raise ValueError(f"per_class must be >= 1, got {per_class}")
    if not 0.0 <= noise <= 0.2:
        raise ValueError(f"noise must be in [0, 0.2], got {noise}")

    rng = np.random.default_rng(seed)
    samples = []
    for k in range(class_count):
        template = synthetic_template(k)
        for i in range(per_class):
            flips = rng.random(template.shape) < noise
            pixels = np.where(flips, 1 - template, template).astype(np.uint8)
            samples.append(
                Sample(image=BinaryImage(pixels), label=k, source_id=f"synth-{k:02d}-{i:04d}")
            )
    return samples


def binarize_all(raw_samples: list[RawSample], target_h: int = DEFAULT_SIZE,
                 target_w: int = DEFAULT_SIZE) -> list[Sample]:
    """Binarize and normalize raw samples, dropping any with empty foreground."""
    out = []
    dropped = 0
    for raw in raw_samples:
        image = binarize(raw.image)
        if image.foreground_count() == 0:
            dropped += 1
            continue
        out.append(Sample(image=normalize(image, target_h, target_w),
                          label=raw.label, source_id=raw.source_id))
    if dropped:
        logger.warning("dropped %d samples with empty foreground", dropped)
    return out
