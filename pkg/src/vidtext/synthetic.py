"""Seeded synthetic clip generator with exact ground truth.

Captions are rendered from an embedded 5x7 dot-matrix font scaled by an
integer factor, so stroke pixels — and therefore ground-truth boxes —
are bit-identical on every machine with no system-font dependency. The
background is a flat gray or a source image, optionally roughened with
a static noise texture (drawn once per clip: background complexity) and
with independent per-frame noise (sensor noise). Captions are composited
after the noise, the way a title generator overlays video.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from PIL import Image

from .errors import CaptionOutOfBoundsError, ConfigError
from .evaluation import GroundTruthRegion, ground_truth_to_json
from .frames import ArraySequence, decode_image
from .quadtree import Rect

GLYPH_WIDTH = 5
GLYPH_HEIGHT = 7

# 5x7 dot-matrix glyphs; 'X' marks a stroke pixel. Lowercase input is
# folded to uppercase before lookup.
_GLYPHS = {
    "A": (".XXX.", "X...X", "X...X", "XXXXX", "X...X", "X...X", "X...X"),
    "B": ("XXXX.", "X...X", "X...X", "XXXX.", "X...X", "X...X", "XXXX."),
    "C": (".XXX.", "X...X", "X....", "X....", "X....", "X...X", ".XXX."),
    "D": ("XXXX.", "X...X", "X...X", "X...X", "X...X", "X...X", "XXXX."),
    "E": ("XXXXX", "X....", "X....", "XXXX.", "X....", "X....", "XXXXX"),
    "F": ("XXXXX", "X....", "X....", "XXXX.", "X....", "X....", "X...."),
    "G": (".XXX.", "X...X", "X....", "X.XXX", "X...X", "X...X", ".XXX."),
    "H": ("X...X", "X...X", "X...X", "XXXXX", "X...X", "X...X", "X...X"),
    "I": (".XXX.", "..X..", "..X..", "..X..", "..X..", "..X..", ".XXX."),
    "J": ("..XXX", "...X.", "...X.", "...X.", "...X.", "X..X.", ".XX.."),
    "K": ("X...X", "X..X.", "X.X..", "XX...", "X.X..", "X..X.", "X...X"),
    "L": ("X....", "X....", "X....", "X....", "X....", "X....", "XXXXX"),
    "M": ("X...X", "XX.XX", "X.X.X", "X.X.X", "X...X", "X...X", "X...X"),
    "N": ("X...X", "XX..X", "X.X.X", "X..XX", "X...X", "X...X", "X...X"),
    "O": (".XXX.", "X...X", "X...X", "X...X", "X...X", "X...X", ".XXX."),
    "P": ("XXXX.", "X...X", "X...X", "XXXX.", "X....", "X....", "X...."),
    "Q": (".XXX.", "X...X", "X...X", "X...X", "X.X.X", "X..X.", ".XX.X"),
    "R": ("XXXX.", "X...X", "X...X", "XXXX.", "X.X..", "X..X.", "X...X"),
    "S": (".XXXX", "X....", "X....", ".XXX.", "....X", "....X", "XXXX."),
    "T": ("XXXXX", "..X..", "..X..", "..X..", "..X..", "..X..", "..X.."),
    "U": ("X...X", "X...X", "X...X", "X...X", "X...X", "X...X", ".XXX."),
    "V": ("X...X", "X...X", "X...X", "X...X", "X...X", ".X.X.", "..X.."),
    "W": ("X...X", "X...X", "X...X", "X.X.X", "X.X.X", "XX.XX", "X...X"),
    "X": ("X...X", "X...X", ".X.X.", "..X..", ".X.X.", "X...X", "X...X"),
    "Y": ("X...X", "X...X", ".X.X.", "..X..", "..X..", "..X..", "..X.."),
    "Z": ("XXXXX", "....X", "...X.", "..X..", ".X...", "X....", "XXXXX"),
    "0": (".XXX.", "X...X", "X..XX", "X.X.X", "XX..X", "X...X", ".XXX."),
    "1": ("..X..", ".XX..", "..X..", "..X..", "..X..", "..X..", ".XXX."),
    "2": (".XXX.", "X...X", "....X", "...X.", "..X..", ".X...", "XXXXX"),
    "3": ("XXXXX", "...X.", "..X..", "...X.", "....X", "X...X", ".XXX."),
    "4": ("...X.", "..XX.", ".X.X.", "X..X.", "XXXXX", "...X.", "...X."),
    "5": ("XXXXX", "X....", "XXXX.", "....X", "....X", "X...X", ".XXX."),
    "6": ("..XX.", ".X...", "X....", "XXXX.", "X...X", "X...X", ".XXX."),
    "7": ("XXXXX", "....X", "...X.", "..X..", ".X...", ".X...", ".X..."),
    "8": (".XXX.", "X...X", "X...X", ".XXX.", "X...X", "X...X", ".XXX."),
    "9": (".XXX.", "X...X", "X...X", ".XXXX", "....X", "...X.", ".XX.."),
    " ": (".....", ".....", ".....", ".....", ".....", ".....", "....."),
    "-": (".....", ".....", ".....", "XXXXX", ".....", ".....", "....."),
    ".": (".....", ".....", ".....", ".....", ".....", ".XX..", ".XX.."),
    ":": (".....", ".XX..", ".XX..", ".....", ".XX..", ".XX..", "....."),
    "!": ("..X..", "..X..", "..X..", "..X..", "..X..", ".....", "..X.."),
    "?": (".XXX.", "X...X", "....X", "...X.", "..X..", ".....", "..X.."),
    ",": (".....", ".....", ".....", ".....", ".XX..", "..X..", ".X..."),
    "/": ("....X", "....X", "...X.", "..X..", ".X...", "X....", "X...."),
    "+": (".....", "..X..", "..X..", "XXXXX", "..X..", "..X..", "....."),
    "'": ("..X..", "..X..", ".....", ".....", ".....", ".....", "....."),
}


def supported_characters() -> str:
    return "".join(sorted(_GLYPHS))


def render_text_mask(text: str, scale: int = 1) -> np.ndarray:
    """Boolean stroke mask of a text line, one glyph column of spacing.

    The mask spans the full glyph grid (height 7*scale); callers wanting
    the tight stroke extent should trim to the nonzero rows/columns.
    """
    if scale < 1:
        raise ValueError("scale must be >= 1")
    if not text:
        raise ValueError("empty text")
    folded = text.upper()
    unknown = sorted({c for c in folded if c not in _GLYPHS})
    if unknown:
        raise ConfigError("text", f"unsupported character(s) {unknown!r}")
    cell = GLYPH_WIDTH + 1
    width = cell * len(folded) - 1
    mask = np.zeros((GLYPH_HEIGHT, width), dtype=bool)
    for pos, char in enumerate(folded):
        rows = _GLYPHS[char]
        x0 = pos * cell
        for r, row in enumerate(rows):
            for c, filled in enumerate(row):
                if filled == "X":
                    mask[r, x0 + c] = True
    if scale > 1:
        mask = np.repeat(np.repeat(mask, scale, axis=0), scale, axis=1)
    return mask


def scale_for_size(size_px: int) -> int:
    """Integer glyph scale whose rendered height fits the requested size."""
    return max(1, size_px // GLYPH_HEIGHT)


@dataclass(frozen=True)
class CaptionSpec:
    text: str
    size_px: int
    position: tuple[int, int]
    color: int
    span: tuple[int, int]

    def __post_init__(self):
        if not 0 <= self.color <= 255:
            raise ConfigError("color", f"{self.color} outside 0..255")
        if self.span[0] > self.span[1]:
            raise ConfigError("span", f"{self.span} is reversed")


@dataclass(frozen=True)
class BackgroundSpec:
    gray: int = 128
    noise_sigma: float = 0.0
    temporal_noise_sigma: float = 0.0
    image: Optional[str] = None

    def __post_init__(self):
        if not 0 <= self.gray <= 255:
            raise ConfigError("gray", f"{self.gray} outside 0..255")
        if self.noise_sigma < 0 or self.temporal_noise_sigma < 0:
            raise ConfigError("noise_sigma", "must be >= 0")


@dataclass(frozen=True)
class ClipSpec:
    width: int
    height: int
    count: int
    seed: int = 0
    frame_rate: float = 25.0
    background: BackgroundSpec = field(default_factory=BackgroundSpec)
    captions: tuple[CaptionSpec, ...] = ()

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ConfigError("size", "frame dimensions must be positive")
        if self.count < 2:
            raise ConfigError("count", "a clip needs at least 2 frames")


def clip_spec_from_dict(payload: dict) -> ClipSpec:
    try:
        size = payload["size"]
        background = payload.get("background", {})
        captions = tuple(
            CaptionSpec(
                text=c["text"],
                size_px=int(c["size_px"]),
                position=(int(c["position"][0]), int(c["position"][1])),
                color=int(c["color"]),
                span=(int(c["span"][0]), int(c["span"][1])),
            )
            for c in payload.get("captions", [])
        )
        return ClipSpec(
            width=int(size[0]),
            height=int(size[1]),
            count=int(payload["count"]),
            seed=int(payload.get("seed", 0)),
            frame_rate=float(payload.get("frame_rate", 25.0)),
            background=BackgroundSpec(
                gray=int(background.get("gray", 128)),
                noise_sigma=float(background.get("noise_sigma", 0.0)),
                temporal_noise_sigma=float(background.get("temporal_noise_sigma", 0.0)),
                image=background.get("image"),
            ),
            captions=captions,
        )
    except (KeyError, IndexError, TypeError) as exc:
        raise ConfigError("spec", f"malformed clip spec: {exc!r}") from exc


def generate_synthetic_clip(spec: ClipSpec) -> tuple[ArraySequence, list[GroundTruthRegion]]:
    """Render the clip and its exact ground truth, deterministic per seed."""
    rng = np.random.default_rng(spec.seed)
    shape = (spec.height, spec.width)

    if spec.background.image:
        base = decode_image(spec.background.image)
        if base.shape != shape:
            raise ConfigError(
                "image",
                f"background is {base.shape[1]}x{base.shape[0]}, clip is {spec.width}x{spec.height}",
            )
        base = base.astype(np.float64)
    else:
        base = np.full(shape, float(spec.background.gray))
    if spec.background.noise_sigma > 0:
        base = base + rng.normal(0.0, spec.background.noise_sigma, shape)
    base = np.clip(np.rint(base), 0, 255).astype(np.uint8)

    rendered = []
    truth = []
    for idx, caption in enumerate(spec.captions):
        if not 0 <= caption.span[0] <= caption.span[1] < spec.count:
            raise CaptionOutOfBoundsError(
                f"caption {idx} span {caption.span} outside frames 0..{spec.count - 1}"
            )
        mask = render_text_mask(caption.text, scale_for_size(caption.size_px))
        x, y = caption.position
        if x < 0 or y < 0 or x + mask.shape[1] > spec.width or y + mask.shape[0] > spec.height:
            raise CaptionOutOfBoundsError(
                f"caption {idx} at {caption.position} does not fit the "
                f"{spec.width}x{spec.height} frame"
            )
        ys, xs = np.nonzero(mask)
        if ys.size == 0:
            raise CaptionOutOfBoundsError(f"caption {idx} renders no stroke pixels")
        rendered.append((mask, x, y, caption))
        truth.append(
            GroundTruthRegion(
                id=f"cap{idx}",
                bbox=Rect(
                    x + int(xs.min()),
                    y + int(ys.min()),
                    int(xs.max() - xs.min()) + 1,
                    int(ys.max() - ys.min()) + 1,
                ),
                frame_start=caption.span[0],
                frame_end=caption.span[1],
                text=caption.text,
            )
        )

    sigma_t = spec.background.temporal_noise_sigma
    frames = []
    for t in range(spec.count):
        if sigma_t > 0:
            noisy = base.astype(np.float64) + rng.normal(0.0, sigma_t, shape)
            frame = np.clip(np.rint(noisy), 0, 255).astype(np.uint8)
        else:
            frame = base.copy()
        for mask, x, y, caption in rendered:
            if caption.span[0] <= t <= caption.span[1]:
                window = frame[y : y + mask.shape[0], x : x + mask.shape[1]]
                window[mask] = caption.color
        frames.append(frame)
    return ArraySequence(frames, frame_rate=spec.frame_rate), truth


def write_clip(out_dir, seq: ArraySequence, truth: list[GroundTruthRegion]) -> None:
    """Write frames as numbered PNGs plus the gt.json annotation file."""
    out = Path(out_dir)
    os.makedirs(out, exist_ok=True)
    for i in range(len(seq)):
        Image.fromarray(seq.frame(i).pixels).save(out / f"frame_{i:05d}.png")
    with open(out / "gt.json", "w", encoding="utf-8") as fh:
        json.dump(ground_truth_to_json(truth), fh, indent=2, sort_keys=True)
        fh.write("\n")
