"""Image file formats: 8-bit PNG/PGM and the lossless SCR1 raw tensor.

SCR1 layout: ``b"SCR1"``, then little-endian u32 H, W, C, then H*W*C
little-endian float32 values in row-major, channel-last order.
"""

from __future__ import annotations

import io
import os
import struct
import tempfile
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import DomainError, ImageReadError
from .grid import byte_to_model, check_image, model_to_byte

SCR_MAGIC = b"SCR1"
_SCR_HEADER = struct.Struct("<4sIII")
IMAGE_SUFFIXES = (".png", ".pgm", ".scr")


def encode_scr(x) -> bytes:
    x = check_image(x)
    h, w, c = x.shape
    return _SCR_HEADER.pack(SCR_MAGIC, h, w, c) + x.astype("<f4").tobytes()


def decode_scr(data: bytes) -> np.ndarray:
    if len(data) < _SCR_HEADER.size:
        raise ValueError("truncated SCR1 header")
    magic, h, w, c = _SCR_HEADER.unpack_from(data)
    if magic != SCR_MAGIC:
        raise ValueError(f"bad magic {magic!r}")
    n = h * w * c
    payload = data[_SCR_HEADER.size:]
    if len(payload) != 4 * n:
        raise ValueError(f"expected {4 * n} payload bytes, found {len(payload)}")
    x = np.frombuffer(payload, dtype="<f4").astype(np.float64).reshape(h, w, c)
    return check_image(x)


def atomic_write_bytes(path, data: bytes) -> None:
    """Write ``data`` to ``path`` via a temporary file and rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_image(path) -> np.ndarray:
    """Read an image in model scale as a float64 ``(H, W, C)`` array."""
    path = Path(path)
    suffix = path.suffix.lower()
    try:
        if suffix == ".scr":
            return decode_scr(path.read_bytes())
        if suffix not in (".png", ".pgm"):
            raise ValueError(f"unsupported extension {suffix!r}")
        with Image.open(path) as im:
            if im.mode in ("RGBA", "P", "LA"):
                im = im.convert("RGB" if im.mode != "LA" else "L")
            if im.mode not in ("L", "RGB"):
                raise ValueError(f"unsupported pixel mode {im.mode}")
            arr = np.asarray(im, dtype=np.uint8)
        return check_image(byte_to_model(arr))
    except ImageReadError:
        raise
    except Exception as exc:  # decoding libraries raise assorted types
        raise ImageReadError(path, str(exc)) from exc


def write_image(path, x, clamp: bool = False) -> None:
    """Write an image; the format follows the file extension.

    Byte formats refuse values outside [-1, 1] unless ``clamp`` is set.
    """
    path = Path(path)
    x = check_image(x)
    suffix = path.suffix.lower()
    if suffix == ".scr":
        atomic_write_bytes(path, encode_scr(x))
        return
    if suffix not in (".png", ".pgm"):
        raise DomainError(f"unsupported output extension {suffix!r}")
    b = model_to_byte(x, clamp=clamp)
    if suffix == ".pgm" and b.shape[2] != 1:
        raise DomainError("PGM output requires a single channel")
    im = Image.fromarray(b[:, :, 0] if b.shape[2] == 1 else b)
    fmt = "PNG" if suffix == ".png" else "PPM"
    buf = io.BytesIO()
    im.save(buf, format=fmt)
    atomic_write_bytes(path, buf.getvalue())


def list_images(directory) -> list[Path]:
    """Image files in ``directory`` sorted by name."""
    directory = Path(directory)
    if not directory.is_dir():
        raise DomainError(f"{directory} is not a directory")
    return sorted(p for p in directory.iterdir()
                  if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES)


def read_images(paths) -> tuple[list[np.ndarray], list[ImageReadError]]:
    """Read every path, collecting failures instead of stopping at the first."""
    images, errors = [], []
    for p in paths:
        try:
            images.append(read_image(p))
        except ImageReadError as exc:
            errors.append(exc)
    return images, errors
