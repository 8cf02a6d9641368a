"""Frame-pair change trigger.

Consecutive frames are compared through their 256-bin gray histograms:
the normalized total absolute difference decides whether the expensive
localization machinery runs on that pair. The metric is position-blind,
symmetric, and bounded by 2 (both histograms carry the same total mass).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError
from .frames import Frame


@dataclass(frozen=True)
class ChangeDecision:
    """Outcome of the trigger test for the pair (pair_index, pair_index+1)."""

    pair_index: int
    d_h: float
    triggered: bool


def gray_histogram(frame: Frame) -> np.ndarray:
    """256-bin histogram; bin k counts the pixels with gray level k."""
    return np.bincount(frame.pixels.ravel(), minlength=256).astype(np.int64)


def histogram_difference_from_histograms(
    hist_a: np.ndarray, hist_b: np.ndarray, pixel_count: int
) -> float:
    """Normalized total absolute difference of two equal-mass histograms."""
    return float(np.abs(hist_b.astype(np.int64) - hist_a.astype(np.int64)).sum()) / pixel_count


def histogram_difference(a: Frame, b: Frame) -> float:
    """Per-pixel-normalized histogram distance of two frames, in [0, 2]."""
    if (a.width, a.height) != (b.width, b.height):
        raise DimensionMismatchError(
            f"{a.width}x{a.height} vs {b.width}x{b.height}"
        )
    return histogram_difference_from_histograms(
        gray_histogram(a), gray_histogram(b), a.width * a.height
    )


def detect_change(d_h: float, theta: float) -> bool:
    """True when the pair difference strictly exceeds the trigger threshold."""
    if theta < 0:
        raise ValueError("theta must be >= 0")
    return d_h > theta


def evaluate_pair(a: Frame, b: Frame, theta: float) -> ChangeDecision:
    d_h = histogram_difference(a, b)
    return ChangeDecision(pair_index=a.index, d_h=d_h, triggered=detect_change(d_h, theta))
