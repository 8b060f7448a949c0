"""Pixel kernels for the fifteen augmentation operations.

Images are ``numpy.uint8`` arrays of shape ``(height, width, 3)``.  Every
kernel returns a new array of the same shape and never writes to its input.

Rounding is "half away from zero" throughout; the per-pixel kernels do
their arithmetic in integers so results do not depend on float behaviour.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ContractError, InputError

FILL_COLOR = (128, 128, 128)
_FILL = np.array(FILL_COLOR, dtype=np.uint8)

# coordinates this close to a lattice point are snapped onto it
_SNAP = 1e-9


def check_image(image) -> np.ndarray:
    """Validate an image array and return it unchanged."""
    if not isinstance(image, np.ndarray):
        raise InputError(f"image must be a numpy array, got {type(image).__name__}")
    if image.dtype != np.uint8 or image.ndim != 3 or image.shape[2] != 3:
        raise InputError(
            f"image must be uint8 with shape (H, W, 3), got {image.dtype} {image.shape}"
        )
    if image.shape[0] < 1 or image.shape[1] < 1:
        raise InputError(f"image has zero area: {image.shape[1]}x{image.shape[0]}")
    return image


def round_half_away(x: float) -> int:
    """Round to the nearest integer, ties away from zero."""
    return int(math.copysign(math.floor(abs(x) + 0.5), x))


def _round_clip(values: np.ndarray) -> np.ndarray:
    return np.clip(np.floor(values + 0.5), 0, 255).astype(np.uint8)


def _require_finite(name, value):
    if not math.isfinite(value):
        raise ContractError(f"{name} must be finite, got {value!r}")


# ---------------------------------------------------------------------------
# geometric


def _sample_bilinear(image: np.ndarray, sx: np.ndarray, sy: np.ndarray) -> np.ndarray:
    """Bilinear lookup at source coordinates; out-of-bounds points get the fill."""
    h, w = image.shape[:2]
    rx, ry = np.rint(sx), np.rint(sy)
    sx = np.where(np.abs(sx - rx) < _SNAP, rx, sx)
    sy = np.where(np.abs(sy - ry) < _SNAP, ry, sy)
    inside = (sx >= 0) & (sx <= w - 1) & (sy >= 0) & (sy <= h - 1)

    sxc = np.clip(sx, 0, w - 1)
    syc = np.clip(sy, 0, h - 1)
    x0 = np.floor(sxc).astype(np.intp)
    y0 = np.floor(syc).astype(np.intp)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = (sxc - x0)[..., None]
    fy = (syc - y0)[..., None]

    src = image.astype(np.float64)
    top = src[y0, x0] * (1 - fx) + src[y0, x1] * fx
    bottom = src[y1, x0] * (1 - fx) + src[y1, x1] * fx
    out = _round_clip(top * (1 - fy) + bottom * fy)
    out[~inside] = _FILL
    return out


def _grid(image):
    h, w = image.shape[:2]
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
    return xs, ys, (w - 1) / 2.0, (h - 1) / 2.0


def shear(image: np.ndarray, axis: str, factor: float) -> np.ndarray:
    """Shear about the image center along ``axis`` ('x' or 'y')."""
    check_image(image)
    _require_finite("shear factor", factor)
    axis = axis.lower()
    if factor == 0:
        return image.copy()
    xs, ys, cx, cy = _grid(image)
    if axis == "x":
        return _sample_bilinear(image, xs + factor * (ys - cy), ys)
    if axis == "y":
        return _sample_bilinear(image, xs, ys + factor * (xs - cx))
    raise ContractError(f"axis must be 'x' or 'y', got {axis!r}")


def _exact_cos_sin(degrees: float):
    quarter = degrees / 90.0
    if quarter == int(quarter):
        return [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)][int(quarter) % 4]
    rad = math.radians(degrees)
    return math.cos(rad), math.sin(rad)


def rotate(image: np.ndarray, degrees: float) -> np.ndarray:
    """Rotate counter-clockwise (as displayed) about the image center."""
    check_image(image)
    _require_finite("rotation angle", degrees)
    if degrees == 0:
        return image.copy()
    c, s = _exact_cos_sin(degrees)
    xs, ys, cx, cy = _grid(image)
    dx, dy = xs - cx, ys - cy
    return _sample_bilinear(image, cx + c * dx - s * dy, cy + s * dx + c * dy)


def translate(image: np.ndarray, axis: str, fraction: float) -> np.ndarray:
    """Shift by ``round(fraction * width)`` (or height) pixels; vacated pixels are filled.

    Positive fractions move content right (x) or down (y).
    """
    check_image(image)
    _require_finite("translate fraction", fraction)
    axis = axis.lower()
    if axis not in ("x", "y"):
        raise ContractError(f"axis must be 'x' or 'y', got {axis!r}")
    dim = 1 if axis == "x" else 0
    size = image.shape[dim]
    shift = round_half_away(fraction * size)
    out = np.empty_like(image)
    out[...] = _FILL
    if abs(shift) >= size:
        return out
    src = [slice(None)] * 3
    dst = [slice(None)] * 3
    if shift >= 0:
        src[dim], dst[dim] = slice(0, size - shift), slice(shift, size)
    else:
        src[dim], dst[dim] = slice(-shift, size), slice(0, size + shift)
    out[tuple(dst)] = image[tuple(src)]
    return out


# ---------------------------------------------------------------------------
# lookup-table kernels


def _apply_luts(image: np.ndarray, luts) -> np.ndarray:
    out = np.empty_like(image)
    for c in range(3):
        out[..., c] = luts[c][image[..., c]]
    return out


def invert(image: np.ndarray) -> np.ndarray:
    check_image(image)
    return 255 - image


def solarize(image: np.ndarray, threshold: int) -> np.ndarray:
    """Invert every channel value at or above ``threshold``."""
    check_image(image)
    if not 0 <= threshold <= 256 or threshold != int(threshold):
        raise ContractError(f"solarize threshold must be an integer in [0, 256], got {threshold!r}")
    v = np.arange(256)
    lut = np.where(v >= int(threshold), 255 - v, v).astype(np.uint8)
    return lut[image]


def posterize(image: np.ndarray, bits: int) -> np.ndarray:
    """Keep the top ``bits`` bits of each channel value."""
    check_image(image)
    if not 1 <= bits <= 8 or bits != int(bits):
        raise ContractError(f"posterize bits must be an integer in [1, 8], got {bits!r}")
    mask = np.uint8((0xFF << (8 - int(bits))) & 0xFF)
    return image & mask


def _autocontrast_lut(channel: np.ndarray) -> np.ndarray:
    lo, hi = int(channel.min()), int(channel.max())
    v = np.arange(256, dtype=np.int64)
    if lo == hi:
        return v.astype(np.uint8)
    span = hi - lo
    # round((v - lo) * 255 / span) in integers; values outside [lo, hi] never occur
    lut = (2 * (v - lo) * 255 + span) // (2 * span)
    return np.clip(lut, 0, 255).astype(np.uint8)


def autocontrast(image: np.ndarray) -> np.ndarray:
    """Stretch each channel independently to span 0..255."""
    check_image(image)
    return _apply_luts(image, [_autocontrast_lut(image[..., c]) for c in range(3)])


def _equalize_lut(channel: np.ndarray) -> np.ndarray:
    v = np.arange(256, dtype=np.int64)
    hist = np.bincount(channel.ravel(), minlength=256).astype(np.int64)
    cdf = np.cumsum(hist)
    n = int(cdf[-1])
    m = int(cdf[np.flatnonzero(hist)[0]])
    if n == m:
        return v.astype(np.uint8)
    lut = (2 * (cdf - m) * 255 + (n - m)) // (2 * (n - m))
    return np.clip(lut, 0, 255).astype(np.uint8)


def equalize(image: np.ndarray) -> np.ndarray:
    """Per-channel CDF histogram equalization."""
    check_image(image)
    return _apply_luts(image, [_equalize_lut(image[..., c]) for c in range(3)])


# ---------------------------------------------------------------------------
# enhancement blends

ADJUST_KINDS = ("contrast", "color", "brightness", "sharpness")


def luminance(image: np.ndarray) -> np.ndarray:
    """Integer luma ``round(0.299 R + 0.587 G + 0.114 B)`` as an (H, W) int64 array."""
    rgb = image.astype(np.int64)
    weighted = 299 * rgb[..., 0] + 587 * rgb[..., 1] + 114 * rgb[..., 2]
    return (weighted + 500) // 1000


def _degenerate(image: np.ndarray, kind: str) -> np.ndarray:
    if kind == "brightness":
        return np.zeros(image.shape, dtype=np.int64)
    if kind == "color":
        return np.repeat(luminance(image)[..., None], 3, axis=2)
    if kind == "contrast":
        lum = luminance(image)
        n = lum.size
        mean = (2 * int(lum.sum()) + n) // (2 * n)
        return np.full(image.shape, mean, dtype=np.int64)
    if kind == "sharpness":
        padded = np.pad(image.astype(np.int64), ((1, 1), (1, 1), (0, 0)), mode="edge")
        h, w = image.shape[:2]
        total = np.zeros(image.shape, dtype=np.int64)
        for dy in range(3):
            for dx in range(3):
                total += padded[dy:dy + h, dx:dx + w]
        # kernel is all ones except a 5 in the middle: add the center 4 more times
        total += 4 * image.astype(np.int64)
        return (2 * total + 13) // 26
    raise ContractError(f"unknown adjust kind {kind!r}; expected one of {ADJUST_KINDS}")


def adjust(image: np.ndarray, kind: str, factor: float) -> np.ndarray:
    """Blend ``image`` with its degenerate version: ``d * (1 - factor) + image * factor``.

    ``factor`` 1 returns the image, 0 returns the degenerate.  The
    degenerates are black (brightness), per-pixel luma gray (color), the mean
    luma (contrast), and a 3x3 smoothing with edge replication (sharpness).
    """
    check_image(image)
    _require_finite("adjust factor", factor)
    if factor < 0:
        raise ContractError(f"adjust factor must be >= 0, got {factor!r}")
    if kind not in ADJUST_KINDS:
        raise ContractError(f"unknown adjust kind {kind!r}; expected one of {ADJUST_KINDS}")
    if factor == 1:
        return image.copy()
    degenerate = _degenerate(image, kind)
    blended = degenerate * (1.0 - factor) + image.astype(np.float64) * factor
    return _round_clip(blended)


# ---------------------------------------------------------------------------
# cutout


def cutout_side(fraction: float, width: int, height: int) -> int:
    return round_half_away(fraction * min(width, height))


def cutout(image: np.ndarray, fraction: float, rng) -> np.ndarray:
    """Fill an ``s x s`` square at a random center, ``s = round(fraction * min(w, h))``.

    The center is drawn from ``rng`` (x first, then y) only when ``s > 0``.
    The square is clipped at the borders.
    """
    check_image(image)
    if not 0 <= fraction <= 1:
        raise ContractError(f"cutout fraction must be in [0, 1], got {fraction!r}")
    h, w = image.shape[:2]
    side = cutout_side(fraction, w, h)
    out = image.copy()
    if side == 0:
        return out
    cx = rng.integer(w)
    cy = rng.integer(h)
    x0, y0 = cx - side // 2, cy - side // 2
    out[max(y0, 0):max(y0 + side, 0), max(x0, 0):max(x0 + side, 0)] = _FILL
    return out
