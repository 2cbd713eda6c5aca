"""8-bit rasters with a validity mask, homography warping and PNG/PNM I/O."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image as PILImage
from PIL import UnidentifiedImageError

from .errors import ImageFormatError
from .geometry import Homography

_SUPPORTED = {"PNG", "PPM"}  # Pillow reports binary PGM as PPM too


@dataclass(frozen=True, eq=False)
class Image:
    """Grayscale (h, w) or RGB (h, w, 3) uint8 pixels plus an (h, w) bool mask."""

    pixels: np.ndarray
    mask: np.ndarray | None = None

    def __post_init__(self) -> None:
        px = np.array(self.pixels)
        if px.dtype != np.uint8:
            if not np.issubdtype(px.dtype, np.number):
                raise TypeError("pixels must be numeric")
            px = np.clip(np.rint(px), 0, 255).astype(np.uint8)
        if px.ndim not in (2, 3) or (px.ndim == 3 and px.shape[2] != 3):
            raise ValueError(f"expected (h, w) or (h, w, 3) pixels, got {px.shape}")
        if self.mask is None:
            mask = np.ones(px.shape[:2], dtype=bool)
        else:
            mask = np.array(self.mask, dtype=bool)
            if mask.shape != px.shape[:2]:
                raise ValueError("mask shape must match the image")
        px.setflags(write=False)
        mask.setflags(write=False)
        object.__setattr__(self, "pixels", px)
        object.__setattr__(self, "mask", mask)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def channels(self) -> int:
        return 1 if self.pixels.ndim == 2 else 3

    def gray(self) -> np.ndarray:
        """Float luminance image."""
        if self.channels == 1:
            return self.pixels.astype(np.float64)
        # integer weights so that equal channels give back exactly that value
        r, g, b = (self.pixels[..., i].astype(np.int64) for i in range(3))
        return (299 * r + 587 * g + 114 * b) / 1000.0

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Image)
            and np.array_equal(self.pixels, other.pixels)
            and np.array_equal(self.mask, other.mask)
        )


def warp(src: Image, h: Homography) -> Image:
    """Inverse-map every destination pixel through ``h^-1`` with bilinear sampling.

    Destination pixels whose source position is outside the image, or whose
    interpolation touches an invalid source pixel, are invalid and set to 0.
    Neighbours carrying zero weight are not required to exist, so integer
    translations reproduce the source exactly.
    """
    hinv = h.inverse()
    height, width = src.height, src.width
    gy, gx = np.mgrid[0:height, 0:width].astype(np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        sxy = hinv.transform(np.stack([gx, gy], axis=-1))
    sx, sy = sxy[..., 0], sxy[..., 1]
    inside = (
        np.isfinite(sx)
        & np.isfinite(sy)
        & (sx >= 0)
        & (sx <= width - 1)
        & (sy >= 0)
        & (sy <= height - 1)
    )
    sx = np.where(inside, sx, 0.0)
    sy = np.where(inside, sy, 0.0)
    x0 = np.floor(sx).astype(np.intp)
    y0 = np.floor(sy).astype(np.intp)
    fx = sx - x0
    fy = sy - y0
    x1 = np.where(fx > 0, x0 + 1, x0)
    y1 = np.where(fy > 0, y0 + 1, y0)

    m = src.mask
    valid = inside & m[y0, x0] & m[y0, x1] & m[y1, x0] & m[y1, x1]

    px = src.pixels.astype(np.float64)
    if src.channels == 3:
        fx, fy = fx[..., None], fy[..., None]
    out = (
        (1 - fx) * (1 - fy) * px[y0, x0]
        + fx * (1 - fy) * px[y0, x1]
        + (1 - fx) * fy * px[y1, x0]
        + fx * fy * px[y1, x1]
    )
    out = np.clip(np.rint(out), 0, 255).astype(np.uint8)
    out[~valid] = 0
    return Image(out, valid)


def save_image(image: Image, path) -> None:
    """Write PNG (mask stored as alpha when any pixel is invalid) or PGM/PPM."""
    path = Path(path)
    ext = path.suffix.lower()
    partial = not image.mask.all()
    if ext == ".png":
        if partial:
            alpha = np.where(image.mask, 255, 0).astype(np.uint8)
            if image.channels == 1:
                arr, mode = np.stack([image.pixels, alpha], axis=-1), "LA"
            else:
                arr, mode = np.concatenate([image.pixels, alpha[..., None]], axis=-1), "RGBA"
        else:
            arr, mode = image.pixels, ("L" if image.channels == 1 else "RGB")
        PILImage.fromarray(np.ascontiguousarray(arr), mode=mode).save(path, format="PNG")
    elif ext in (".pgm", ".ppm", ".pnm"):
        if partial:
            raise ImageFormatError(f"{ext} cannot store a validity mask; use .png")
        if (ext == ".pgm" and image.channels != 1) or (ext == ".ppm" and image.channels != 3):
            raise ImageFormatError(f"{ext} does not match a {image.channels}-channel image")
        mode = "L" if image.channels == 1 else "RGB"
        PILImage.fromarray(np.ascontiguousarray(image.pixels), mode=mode).save(path, format="PPM")
    else:
        raise ImageFormatError(f"unsupported image extension {ext!r}")


def load_image(path) -> Image:
    try:
        with PILImage.open(path) as im:
            if im.format not in _SUPPORTED:
                raise ImageFormatError(f"{path}: unsupported format {im.format}")
            im.load()
            mode = im.mode
            if mode == "P":
                im = im.convert("RGBA" if "transparency" in im.info else "RGB")
                mode = im.mode
            arr = np.array(im)
    except ImageFormatError:
        raise
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as exc:
        raise ImageFormatError(f"{path}: cannot read image ({exc})") from exc

    if mode == "L":
        return Image(arr)
    if mode == "RGB":
        return Image(arr)
    if mode == "LA":
        return Image(arr[..., 0], arr[..., 1] != 0)
    if mode == "RGBA":
        return Image(arr[..., :3], arr[..., 3] != 0)
    raise ImageFormatError(f"{path}: unsupported pixel mode {mode}")
