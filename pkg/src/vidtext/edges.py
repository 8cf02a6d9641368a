"""Edge representation of a frame.

The chain is: 3x3 gradient magnitude map, linear quantization of the
magnitudes onto 0..255, minimum within-class-variance thresholding, and
finally the asymmetric difference between the binary maps of a frame
pair, which keeps only edges that newly appeared in the later frame.
Border pixels use edge-replication padding so the frame boundary does
not contribute spurious gradients.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatchError, FrameTooSmallError
from .frames import Frame


def sobel_edge_map(frame: Frame) -> np.ndarray:
    """Gradient magnitude sqrt(Cx^2 + Cy^2) with the standard 3x3 kernels."""
    pixels = frame.pixels
    if pixels.shape[0] < 3 or pixels.shape[1] < 3:
        raise FrameTooSmallError(
            f"need at least 3x3, got {pixels.shape[1]}x{pixels.shape[0]}"
        )
    p = np.pad(pixels.astype(np.float64), 1, mode="edge")
    gx = (p[:-2, 2:] + 2.0 * p[1:-1, 2:] + p[2:, 2:]) - (
        p[:-2, :-2] + 2.0 * p[1:-1, :-2] + p[2:, :-2]
    )
    gy = (p[2:, :-2] + 2.0 * p[2:, 1:-1] + p[2:, 2:]) - (
        p[:-2, :-2] + 2.0 * p[:-2, 1:-1] + p[:-2, 2:]
    )
    return np.hypot(gx, gy)


def quantize_magnitudes(magnitudes: np.ndarray) -> np.ndarray:
    """Rescale [0, observed max] linearly onto the 0..255 gray levels."""
    peak = float(magnitudes.max())
    if peak <= 0.0:
        return np.zeros(magnitudes.shape, dtype=np.uint8)
    return np.rint(magnitudes * (255.0 / peak)).astype(np.uint8)


def otsu_threshold(histogram) -> int:
    """Level t minimizing within-class variance of the <=t / >t split.

    Ties resolve to the smallest t. A histogram with a single occupied
    level returns that level. Accumulators are exact integers, so the
    result is bit-stable across platforms.
    """
    counts = [int(c) for c in histogram]
    if len(counts) != 256:
        raise ValueError("expected a 256-bin histogram")
    if any(c < 0 for c in counts):
        raise ValueError("histogram counts must be non-negative")
    total = sum(counts)
    if total == 0:
        raise ValueError("histogram is empty")
    occupied = [k for k, c in enumerate(counts) if c]
    if len(occupied) == 1:
        return occupied[0]

    sum_total = sum(k * c for k, c in enumerate(counts))
    sq_total = sum(k * k * c for k, c in enumerate(counts))
    best_t = 0
    best_sse = float("inf")
    w0 = s0 = q0 = 0
    for t in range(256):
        c = counts[t]
        w0 += c
        s0 += t * c
        q0 += t * t * c
        w1 = total - w0
        s1 = sum_total - s0
        q1 = sq_total - q0
        sse = 0.0
        if w0:
            sse += q0 - s0 * s0 / w0
        if w1:
            sse += q1 - s1 * s1 / w1
        if sse < best_sse:
            best_sse = sse
            best_t = t
    return best_t


def optimal_threshold(values) -> int:
    """Otsu threshold of a sample of gray levels in 0..255."""
    arr = np.asarray(values)
    if arr.size == 0:
        raise ValueError("need at least one value")
    flat = arr.ravel().astype(np.int64)
    if flat.min() < 0 or flat.max() > 255:
        raise ValueError("values must lie in 0..255")
    return otsu_threshold(np.bincount(flat, minlength=256))


def binarize(quantized: np.ndarray, threshold: int) -> np.ndarray:
    """1 where the quantized magnitude strictly exceeds the threshold."""
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    return (quantized > threshold).astype(np.uint8)


def binary_edge_map(frame: Frame) -> np.ndarray:
    """Full per-frame chain: gradient map, quantization, Otsu, binarize."""
    quantized = quantize_magnitudes(sobel_edge_map(frame))
    t = otsu_threshold(np.bincount(quantized.ravel(), minlength=256))
    return binarize(quantized, t)


def edge_difference(prev_bits: np.ndarray, next_bits: np.ndarray) -> np.ndarray:
    """Edges present in the later frame but absent from the earlier one.

    The asymmetric set difference isolates newly appeared objects;
    disappearing edges are deliberately dropped.
    """
    if prev_bits.shape != next_bits.shape:
        raise DimensionMismatchError(
            f"{prev_bits.shape} vs {next_bits.shape}"
        )
    return ((next_bits != 0) & (prev_bits == 0)).astype(np.uint8)
