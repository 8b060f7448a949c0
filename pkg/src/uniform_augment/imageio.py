"""PNG/JPEG decoding to RGB arrays and lossless PNG encoding."""

from __future__ import annotations

import io
import warnings

import numpy as np
from PIL import Image as PILImage

from .errors import DecodeError
from .transforms import check_image

SUPPORTED_SUFFIXES = (".png", ".jpg", ".jpeg")


def decode_image(data: bytes, source="<bytes>") -> np.ndarray:
    """Decode PNG or JPEG bytes into an (H, W, 3) uint8 array.

    Alpha is dropped, grayscale and palette images are expanded to RGB.
    """
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", PILImage.DecompressionBombWarning)
            with PILImage.open(io.BytesIO(data)) as im:
                if im.format not in ("PNG", "JPEG"):
                    raise DecodeError(source, f"unsupported container {im.format}")
                im.load()
                if im.mode in ("RGBA", "LA", "PA") or (im.mode == "P" and "transparency" in im.info):
                    im = im.convert("RGBA")
                arr = np.asarray(im.convert("RGB"), dtype=np.uint8)
    except DecodeError:
        raise
    except Exception as exc:  # PIL raises a zoo of types for corrupt files
        raise DecodeError(source, exc) from exc
    return np.ascontiguousarray(arr)


def read_image(path) -> np.ndarray:
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise DecodeError(path, exc) from exc
    return decode_image(data, source=path)


def encode_image(image: np.ndarray, compress_level: int = 6) -> bytes:
    """Encode as PNG; same image and build give the same bytes."""
    check_image(image)
    buf = io.BytesIO()
    PILImage.fromarray(image).save(buf, format="PNG", compress_level=compress_level)
    return buf.getvalue()
