"""sRGB to CIELAB conversion and banded joint color histograms.

Images are numpy arrays of shape (H, W, 3): uint8 sRGB on the way in,
float64 CIELAB on the way out.  Histograms are joint 16x10x10 grids over
(L*, a*, b*) normalized to unit sum so that region size does not matter.
"""

from __future__ import annotations

import numpy as np

# Joint histogram layout: 16 L* bins over [0, 100], 10 bins each for a*
# and b* over [-128, 128).  Boundary values land in the upper bin, the
# global maximum in the last bin.
L_BINS, A_BINS, B_BINS = 16, 10, 10
HIST_SHAPE = (L_BINS, A_BINS, B_BINS)

_L_RANGE = (0.0, 100.0)
_AB_RANGE = (-128.0, 128.0)

# sRGB -> XYZ (D65, 2-degree observer); rows sum to the white point so
# that pure white maps exactly to L*=100, a*=b*=0.
_SRGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)
_WHITE_POINT = _SRGB_TO_XYZ.sum(axis=1)

_DELTA = 6.0 / 29.0


class ImageTooSmall(ValueError):
    """Raised when an image has too few rows to split into three bands."""


def validate_rgb(image: np.ndarray) -> np.ndarray:
    """Check that `image` is a non-empty (H, W, 3) uint8 array."""
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[2] != 3:
        raise ValueError(f"expected (H, W, 3) image, got shape {image.shape}")
    if image.shape[0] == 0 or image.shape[1] == 0:
        raise ValueError("image has zero pixels")
    if image.dtype != np.uint8:
        raise ValueError(f"expected uint8 pixels, got {image.dtype}")
    return image


def srgb_to_cielab(image: np.ndarray) -> np.ndarray:
    """Convert an (H, W, 3) uint8 sRGB image to float64 CIELAB.

    Standard pipeline: gamma expansion to linear RGB, D65 XYZ, then the
    CIE f(t) transform.  L* lies in [0, 100]; a* and b* are clamped to
    [-128, 127].
    """
    image = validate_rgb(image)
    srgb = image.astype(np.float64) / 255.0

    linear = np.where(
        srgb <= 0.04045,
        srgb / 12.92,
        ((srgb + 0.055) / 1.055) ** 2.4,
    )
    xyz = linear @ _SRGB_TO_XYZ.T
    scaled = xyz / _WHITE_POINT

    ft = np.where(
        scaled > _DELTA**3,
        np.cbrt(scaled),
        scaled / (3.0 * _DELTA**2) + 4.0 / 29.0,
    )
    fx, fy, fz = ft[..., 0], ft[..., 1], ft[..., 2]

    lab = np.empty_like(ft)
    lab[..., 0] = np.clip(116.0 * fy - 16.0, 0.0, 100.0)
    lab[..., 1] = np.clip(500.0 * (fx - fy), -128.0, 127.0)
    lab[..., 2] = np.clip(200.0 * (fy - fz), -128.0, 127.0)
    return lab


def band_partition(grid: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Split a pixel grid into top/middle/bottom row bands.

    Rows are divided into thirds; leftover rows are assigned top-down,
    so height 10 splits 4/3/3.
    """
    height = grid.shape[0]
    if height < 3:
        raise ImageTooSmall(f"need at least 3 rows to form bands, got {height}")
    base, rem = divmod(height, 3)
    top_rows = base + (1 if rem >= 1 else 0)
    mid_rows = base + (1 if rem >= 2 else 0)
    top = grid[:top_rows]
    middle = grid[top_rows : top_rows + mid_rows]
    bottom = grid[top_rows + mid_rows :]
    return top, middle, bottom


def band_histogram(band: np.ndarray) -> tuple[np.ndarray, int]:
    """Joint (L*, a*, b*) histogram of a CIELAB band, normalized to unit sum.

    Returns `(hist, pixel_count)`; an empty band yields an all-zero
    histogram with count 0.
    """
    values = np.asarray(band, dtype=np.float64).reshape(-1, 3)
    count = values.shape[0]
    hist = np.zeros(HIST_SHAPE, dtype=np.float64)
    if count == 0:
        return hist, 0

    li = _bin_indices(values[:, 0], *_L_RANGE, L_BINS)
    ai = _bin_indices(values[:, 1], *_AB_RANGE, A_BINS)
    bi = _bin_indices(values[:, 2], *_AB_RANGE, B_BINS)
    np.add.at(hist, (li, ai, bi), 1.0)
    hist /= count
    return hist, count


def _bin_indices(values: np.ndarray, lo: float, hi: float, nbins: int) -> np.ndarray:
    width = (hi - lo) / nbins
    idx = np.floor((values - lo) / width).astype(np.intp)
    return np.clip(idx, 0, nbins - 1)
