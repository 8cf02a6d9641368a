"""Frame loading and sequence access.

A sequence is a directory (or glob) of numbered PNG / binary PGM images,
pre-extracted from the source video with any external tool; keeping the
package decoder-free makes runs deterministic across machines. Decoding
is lazy with a bounded cache, so the temporal filter can re-read windows
of up to 50 frames without holding a whole clip in memory. Sequences are
read-only after opening and safe to read from multiple workers.
"""

from __future__ import annotations

import functools
import glob as _glob
import json
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import ConfigError, DecodeError, DimensionMismatchError, NoFramesError

IMAGE_SUFFIXES = {".png", ".pgm"}

_FIRST_INT = re.compile(r"\d+")
_BT601_WEIGHTS = (0.299, 0.587, 0.114)


@dataclass(frozen=True)
class Frame:
    """One grayscale frame: a (height, width) uint8 matrix plus its index."""

    index: int
    pixels: np.ndarray

    def __post_init__(self):
        if self.pixels.ndim != 2 or self.pixels.size == 0:
            raise ValueError("frame pixels must form a non-empty 2-D matrix")
        if self.pixels.dtype != np.uint8:
            raise ValueError("frame pixels must be uint8")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


def to_grayscale(rgb: np.ndarray) -> np.ndarray:
    """Convert an (H, W, 3) image in 0..255 to BT.601 luma, rounded to uint8.

    Already-gray inputs are fixed points: R=G=B=v maps back to v.
    """
    arr = np.asarray(rgb)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError("expected an (H, W, 3) image")
    channels = arr.astype(np.float64)
    luma = (
        _BT601_WEIGHTS[0] * channels[..., 0]
        + _BT601_WEIGHTS[1] * channels[..., 1]
        + _BT601_WEIGHTS[2] * channels[..., 2]
    )
    return np.rint(np.clip(luma, 0.0, 255.0)).astype(np.uint8)


class FrameSequence:
    """Ordered, random-access grayscale frames of identical size."""

    frame_rate: float = 25.0

    def __len__(self) -> int:
        raise NotImplementedError

    def frame(self, index: int) -> Frame:
        raise NotImplementedError

    @property
    def width(self) -> int:
        raise NotImplementedError

    @property
    def height(self) -> int:
        raise NotImplementedError

    def __iter__(self):
        for i in range(len(self)):
            yield self.frame(i)


class ArraySequence(FrameSequence):
    """In-memory sequence over a list of (H, W) uint8 arrays."""

    def __init__(self, arrays, frame_rate: float = 25.0):
        arrays = [np.ascontiguousarray(a, dtype=np.uint8) for a in arrays]
        if not arrays:
            raise NoFramesError("no frames given")
        shape = arrays[0].shape
        for i, a in enumerate(arrays):
            if a.ndim != 2:
                raise ValueError(f"frame {i} is not a 2-D matrix")
            if a.shape != shape:
                raise DimensionMismatchError(
                    f"frame {i} is {a.shape[1]}x{a.shape[0]}, "
                    f"expected {shape[1]}x{shape[0]}"
                )
        self._arrays = arrays
        self.frame_rate = float(frame_rate)

    def __len__(self) -> int:
        return len(self._arrays)

    def frame(self, index: int) -> Frame:
        return Frame(index, self._arrays[index])

    @property
    def width(self) -> int:
        return self._arrays[0].shape[1]

    @property
    def height(self) -> int:
        return self._arrays[0].shape[0]


class ImageFileSequence(FrameSequence):
    """Sequence backed by image files on disk, decoded lazily."""

    def __init__(self, paths, frame_rate: float = 25.0, cache_size: int = 192):
        self._paths = [Path(p) for p in paths]
        if len(self._paths) < 2:
            raise NoFramesError(f"{len(self._paths)} frame file(s), need at least 2")
        sizes = [_probe_size(p) for p in self._paths]
        self._size = sizes[0]
        for path, size in zip(self._paths, sizes):
            if size != self._size:
                raise DimensionMismatchError(
                    f"{path}: {size[0]}x{size[1]} differs from "
                    f"{self._size[0]}x{self._size[1]} of {self._paths[0]}"
                )
        self.frame_rate = float(frame_rate)
        # lru_cache is thread-safe, so concurrent readers share the cache.
        self._load = functools.lru_cache(maxsize=cache_size)(self._decode)

    def __len__(self) -> int:
        return len(self._paths)

    def frame(self, index: int) -> Frame:
        return Frame(index, self._load(index))

    @property
    def width(self) -> int:
        return self._size[0]

    @property
    def height(self) -> int:
        return self._size[1]

    def path(self, index: int) -> Path:
        return self._paths[index]

    def _decode(self, index: int) -> np.ndarray:
        return decode_image(self._paths[index])


def decode_image(path) -> np.ndarray:
    """Decode a PNG or PGM file to a grayscale uint8 matrix."""
    try:
        with Image.open(path) as im:
            im.load()
            mode = im.mode
            if mode == "L":
                return np.asarray(im, dtype=np.uint8)
            if mode in ("1", "LA", "P", "RGB", "RGBA"):
                return to_grayscale(np.asarray(im.convert("RGB"), dtype=np.uint8))
    except DecodeError:
        raise
    except Exception as exc:
        raise DecodeError(path, str(exc)) from exc
    raise DecodeError(path, f"unsupported image mode {mode!r}")


def open_sequence(pattern, frame_rate: float = 25.0) -> ImageFileSequence:
    """Open a directory, glob pattern, or JSON manifest as a frame sequence.

    Directory entries are ordered by the first integer run in the filename
    (frame_2.png sorts before frame_10.png). A manifest — either the path
    given directly or a ``manifest.json`` inside the directory — is a JSON
    array of relative paths and fixes the order explicitly when filename
    sorting is not enough.
    """
    base = Path(pattern)
    if base.is_file() and base.suffix.lower() == ".json":
        paths = _manifest_paths(base)
    elif base.is_dir():
        manifest = base / "manifest.json"
        if manifest.is_file():
            paths = _manifest_paths(manifest)
        else:
            paths = _numeric_sort(
                p for p in base.iterdir()
                if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES
            )
    else:
        paths = _numeric_sort(
            Path(m) for m in _glob.glob(str(pattern))
            if Path(m).is_file() and Path(m).suffix.lower() in IMAGE_SUFFIXES
        )
    if len(paths) < 2:
        raise NoFramesError(
            f"{pattern}: matched {len(paths)} frame file(s), need at least 2"
        )
    return ImageFileSequence(paths, frame_rate=frame_rate)


def write_pgm(path, values: np.ndarray) -> None:
    """Write a (H, W) uint8 matrix as a binary PGM (P5) file."""
    arr = np.ascontiguousarray(values, dtype=np.uint8)
    if arr.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    header = f"P5\n{arr.shape[1]} {arr.shape[0]}\n255\n".encode("ascii")
    Path(path).write_bytes(header + arr.tobytes())


def _probe_size(path: Path):
    # Reads only the header, so opening a long sequence stays cheap.
    try:
        with Image.open(path) as im:
            return im.size
    except Exception as exc:
        raise DecodeError(path, str(exc)) from exc


def _numeric_sort(paths) -> list[Path]:
    def key(path: Path):
        match = _FIRST_INT.search(path.name)
        return (int(match.group()) if match else float("inf"), path.name)

    return sorted(paths, key=key)


def _manifest_paths(manifest: Path) -> list[Path]:
    try:
        entries = json.loads(manifest.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError("manifest", f"{manifest}: {exc}") from exc
    if not isinstance(entries, list) or not all(isinstance(e, str) for e in entries):
        raise ConfigError("manifest", f"{manifest}: expected a JSON array of paths")
    return [manifest.parent / e for e in entries]
