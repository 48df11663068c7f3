"""Image and field files.

Binary PPM (P6) and PGM (P5) at 8 bits are read and written directly; PNG
goes through Pillow. Samples map to [0, 1] by division by 255 and back by
``floor(255 v + 0.5)`` after clipping, i.e. round half away from zero.
"""

from dataclasses import dataclass
import csv
import os
from pathlib import Path

import numpy as np

from .errors import ImageDecodeError, InvalidDimensionError, InvalidParameterError

FORMATS = {".png": "PNG", ".ppm": "PPM", ".pgm": "PGM"}


@dataclass(frozen=True)
class ImageFileRef:
    path: Path
    format: str

    @classmethod
    def from_path(cls, path):
        path = Path(path)
        fmt = FORMATS.get(path.suffix.lower())
        if fmt is None:
            raise InvalidParameterError(
                f"unsupported image extension {path.suffix!r}; expected one of {sorted(FORMATS)}"
            )
        return cls(path, fmt)


def _ref(ref):
    return ref if isinstance(ref, ImageFileRef) else ImageFileRef.from_path(ref)


def quantize(img):
    """Map [0, 1] floats to uint8 with round-half-away-from-zero."""
    v = np.clip(np.asarray(img, dtype=np.float64), 0.0, 1.0)
    return np.floor(v * 255.0 + 0.5).astype(np.uint8)


# -- Netpbm ---------------------------------------------------------------


def _read_netpbm(data):
    pos = 0
    tokens = []
    n = len(data)
    while len(tokens) < 4:
        while pos < n and data[pos : pos + 1].isspace():
            pos += 1
        if pos < n and data[pos : pos + 1] == b"#":
            while pos < n and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise ImageDecodeError("truncated Netpbm header")
        tokens.append(data[start:pos])
    # exactly one whitespace byte separates the header from the raster
    if pos >= n or not data[pos : pos + 1].isspace():
        raise ImageDecodeError("missing whitespace after Netpbm header")
    pos += 1
    magic = tokens[0]
    if magic not in (b"P5", b"P6"):
        raise ImageDecodeError(f"unsupported Netpbm magic {magic!r}; only binary P5/P6")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError as exc:
        raise ImageDecodeError("non-integer Netpbm header field") from exc
    if width < 1 or height < 1:
        raise ImageDecodeError("Netpbm dimensions must be positive")
    if maxval != 255:
        raise ImageDecodeError(f"only 8-bit Netpbm (maxval 255) is supported, got {maxval}")
    channels = 3 if magic == b"P6" else 1
    size = width * height * channels
    raster = data[pos : pos + size]
    if len(raster) != size:
        raise ImageDecodeError(f"expected {size} raster bytes, found {len(raster)}")
    arr = np.frombuffer(raster, dtype=np.uint8).reshape(height, width, channels)
    return arr


def _write_netpbm(path, samples):
    height, width, channels = samples.shape
    magic = b"P6" if channels == 3 else b"P5"
    header = magic + f"\n{width} {height}\n255\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(samples, dtype=np.uint8).tobytes())


# -- public API -----------------------------------------------------------


def load_samples(ref):
    """Decode an image file to its raw uint8 samples, shape ``(rows, cols, 1 or 3)``."""
    ref = _ref(ref)
    if not ref.path.exists():
        raise FileNotFoundError(f"image not found: {ref.path}")
    if ref.format == "PNG":
        from PIL import Image, UnidentifiedImageError

        try:
            with Image.open(ref.path) as im:
                if im.mode not in ("L", "RGB", "RGBA", "P", "LA"):
                    raise ImageDecodeError(f"unsupported PNG mode {im.mode!r}")
                im = im.convert("L" if im.mode in ("L", "LA") else "RGB")
                arr = np.asarray(im, dtype=np.uint8)
        except (UnidentifiedImageError, OSError) as exc:
            raise ImageDecodeError(f"cannot decode {ref.path}: {exc}") from exc
        return arr[..., None] if arr.ndim == 2 else arr
    arr = _read_netpbm(ref.path.read_bytes())
    expected = 3 if ref.format == "PPM" else 1
    if arr.shape[2] != expected:
        raise ImageDecodeError(f"{ref.path} has {arr.shape[2]} channel(s), expected {expected}")
    return arr


def load_image(ref):
    """Load an image as float64 RGB in [0, 1]; grayscale is replicated to 3 channels."""
    arr = load_samples(ref).astype(np.float64) / 255.0
    if arr.shape[2] == 1:
        arr = np.repeat(arr, 3, axis=2)
    return arr


def save_image(img, ref):
    """Clip, quantize and encode ``img`` (``(rows, cols)`` or ``(rows, cols, 3)``).

    Saving to PGM requires a 2-D array or three identical channels.
    """
    ref = _ref(ref)
    img = np.asarray(img, dtype=np.float64)
    if img.ndim == 2:
        img = img[..., None]
    if img.ndim != 3 or img.shape[2] not in (1, 3):
        raise InvalidDimensionError(f"cannot save image of shape {img.shape}")
    samples = quantize(img)
    if ref.format == "PGM":
        if samples.shape[2] == 3:
            if not (np.array_equal(samples[..., 0], samples[..., 1]) and np.array_equal(samples[..., 0], samples[..., 2])):
                raise InvalidParameterError("PGM output needs identical channels")
            samples = samples[..., :1]
    elif ref.format == "PPM" and samples.shape[2] == 1:
        samples = np.repeat(samples, 3, axis=2)
    if ref.format == "PNG":
        from PIL import Image

        Image.fromarray(samples[..., 0] if samples.shape[2] == 1 else samples).save(ref.path, format="PNG")
    else:
        _write_netpbm(ref.path, samples)


def write_field_csv(u, path):
    """Write ``row,col,value`` lines for every site with round-trip float precision."""
    u = np.asarray(u, dtype=np.float64)
    if u.ndim != 2:
        raise InvalidDimensionError(f"field must be 2-D, got shape {u.shape}")
    with open(path, "w", newline="") as fh:
        fh.write("row,col,value\n")
        for (i, j), v in np.ndenumerate(u):
            fh.write(f"{i},{j},{float(v)!r}\n")


def read_field_csv(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["row", "col", "value"]:
            raise ValueError(f"unexpected header {header}")
        entries = [(int(r), int(c), float(v)) for r, c, v in reader]
    rows = max(e[0] for e in entries) + 1
    cols = max(e[1] for e in entries) + 1
    u = np.zeros((rows, cols))
    for r, c, v in entries:
        u[r, c] = v
    return u


def write_residuals_csv(history, path):
    """Write an ``iter,residual`` trace; iterations are numbered from 1."""
    with open(path, "w", newline="") as fh:
        fh.write("iter,residual\n")
        for k, r in enumerate(history, start=1):
            fh.write(f"{k},{float(r)!r}\n")


def default_out_dir():
    return Path(os.environ.get("ELLIPTICA_OUT", "out"))
