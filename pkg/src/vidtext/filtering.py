"""Candidate region validation.

Three criteria gate a candidate on its way to becoming a text region:
geometric plausibility (area, minimum extent, horizontal aspect),
contrast (the two dominant gray-histogram peaks of the crop must be far
apart — legible overlay text is bimodal against its background), and
temporal persistence (the region must re-localize at the same place,
size and density at every K-frame step across an N-frame window).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigError, WindowExceedsSequenceError
from .quadtree import CandidateRegion, Rect

STATUS_CONFIRMED = "confirmed"
STATUS_REJECTED_SIZE = "rejected_size"
STATUS_REJECTED_CONTRAST = "rejected_contrast"
STATUS_REJECTED_TEMPORAL = "rejected_temporal"
STATUS_UNDECIDED = "undecided"


@dataclass
class FilterConfig:
    """Knobs for the three validation criteria.

    sigma, window_n and shift_k default to the operating point reported
    for the method (110 gray levels; 50 frames ~ 2 s of PAL video with a
    2-frame stride); the size floors and match tolerances are empirical
    defaults calibrated on the synthetic corpus.
    """

    sigma: float = 110.0
    window_n: int = 50
    shift_k: int = 2
    min_area: int = 150
    min_width: int = 16
    min_height: int = 8
    match_tol_pos: int = 4
    match_tol_density: float = 0.1
    # Cheaper fallback: re-measure density at the fixed bbox instead of
    # re-running full localization inside the temporal window.
    temporal_remeasure: bool = False

    def __post_init__(self):
        if not 0 <= self.sigma <= 255:
            raise ConfigError("sigma", f"{self.sigma} outside [0, 255]")
        if self.window_n < 1:
            raise ConfigError("window", f"{self.window_n} must be >= 1")
        if self.shift_k < 1:
            raise ConfigError("shift", f"{self.shift_k} must be >= 1")
        if self.window_n % self.shift_k != 0:
            raise ConfigError(
                "shift",
                f"window {self.window_n} is not a multiple of shift {self.shift_k}",
            )
        for key in ("min_area", "min_width", "min_height"):
            if getattr(self, key) < 0:
                raise ConfigError(key, "must be >= 0")
        if self.match_tol_pos < 0:
            raise ConfigError("match_tol_pos", "must be >= 0")
        if self.match_tol_density < 0:
            raise ConfigError("match_tol_density", "must be >= 0")


@dataclass(frozen=True)
class TextRegion:
    """A candidate that survived all three filters."""

    bbox: Rect
    first_frame: int
    persistence: int
    mean_density: float


def size_filter(region: CandidateRegion, cfg: FilterConfig) -> bool:
    """Keep regions big enough to read and wider than tall (caption shape)."""
    r = region.bbox
    return (
        r.area >= cfg.min_area
        and r.w >= cfg.min_width
        and r.h >= cfg.min_height
        and r.w >= r.h
    )


def contrast_filter(crop: np.ndarray, sigma: float) -> bool:
    """Keep crops whose two dominant histogram peaks are > sigma apart.

    The 256-bin crop histogram is smoothed with a 5-bin moving average,
    its local maxima are ranked by smoothed mass, and the bin distance of
    the two strongest is compared against sigma. Fewer than two maxima
    (a flat or single-mode crop) rejects.
    """
    if crop.size == 0:
        raise ValueError("empty crop")
    hist = np.bincount(crop.ravel().astype(np.int64), minlength=256).astype(np.float64)
    peaks = _dominant_peaks(_moving_average(hist, 5))
    if len(peaks) < 2:
        return False
    return abs(peaks[0][1] - peaks[1][1]) > sigma


def region_matches(candidate: CandidateRegion, target: CandidateRegion, cfg: FilterConfig) -> bool:
    """Same position, size and density within the configured tolerances."""
    a, b = candidate.bbox, target.bbox
    return (
        abs(a.x - b.x) <= cfg.match_tol_pos
        and abs(a.y - b.y) <= cfg.match_tol_pos
        and abs(a.w - b.w) <= cfg.match_tol_pos
        and abs(a.h - b.h) <= cfg.match_tol_pos
        and abs(candidate.mean_density - target.mean_density) <= cfg.match_tol_density
    )


def temporal_persistence(
    region: CandidateRegion,
    sequence_length: int,
    reference_index: int,
    cfg: FilterConfig,
    candidates_at: Callable[[int], list[CandidateRegion]],
) -> int:
    """Accumulated persistence T_p over the window checks.

    For every frame j = reference+K, reference+2K, ..., reference+N the
    caller-provided ``candidates_at(j)`` yields the regions localized for
    the pair (reference, j); each check that finds a match adds K.
    """
    if reference_index + cfg.window_n >= sequence_length:
        raise WindowExceedsSequenceError(
            f"window [{reference_index}, {reference_index + cfg.window_n}] "
            f"exceeds sequence of {sequence_length} frames"
        )
    t_p = 0
    for j in range(reference_index + cfg.shift_k, reference_index + cfg.window_n + 1, cfg.shift_k):
        if any(region_matches(c, region, cfg) for c in candidates_at(j)):
            t_p += cfg.shift_k
    return t_p


def temporal_filter(
    region: CandidateRegion,
    sequence_length: int,
    reference_index: int,
    cfg: FilterConfig,
    candidates_at: Callable[[int], list[CandidateRegion]],
) -> TextRegion | None:
    """Confirm a region that persisted through the whole window, else None."""
    t_p = temporal_persistence(region, sequence_length, reference_index, cfg, candidates_at)
    if t_p != cfg.window_n:
        return None
    return TextRegion(
        bbox=region.bbox,
        first_frame=reference_index + 1,
        persistence=t_p,
        mean_density=region.mean_density,
    )


def remeasured_candidate(diff_bits: np.ndarray, region: CandidateRegion) -> CandidateRegion:
    """Fixed-bbox re-measurement used by the cheap temporal fallback."""
    set_pixels = 0
    for r in region.member_blocks:
        set_pixels += int(np.count_nonzero(diff_bits[r.y : r.bottom, r.x : r.right]))
    total_area = sum(r.area for r in region.member_blocks)
    return CandidateRegion(
        bbox=region.bbox,
        member_blocks=region.member_blocks,
        mean_density=set_pixels / total_area,
        pair_index=region.pair_index,
    )


def _moving_average(values: np.ndarray, width: int) -> np.ndarray:
    # Window shrinks at the edges: each bin averages its in-range neighbors.
    half = width // 2
    cumulative = np.concatenate(([0.0], np.cumsum(values)))
    idx = np.arange(len(values))
    lo = np.maximum(idx - half, 0)
    hi = np.minimum(idx + half, len(values) - 1)
    return (cumulative[hi + 1] - cumulative[lo]) / (hi - lo + 1)


def _dominant_peaks(smoothed: np.ndarray) -> list[tuple[float, int]]:
    """Local maxima as (mass, position), strongest first.

    Plateaus count once, at their center bin; ties in mass resolve to the
    lower bin so ranking is deterministic.
    """
    peaks: list[tuple[float, int]] = []
    n = len(smoothed)
    k = 0
    while k < n:
        j = k
        while j + 1 < n and smoothed[j + 1] == smoothed[k]:
            j += 1
        rising = k == 0 or smoothed[k - 1] < smoothed[k]
        falling = j == n - 1 or smoothed[j + 1] < smoothed[k]
        if rising and falling and smoothed[k] > 0:
            peaks.append((float(smoothed[k]), (k + j) // 2))
        k = j + 1
    peaks.sort(key=lambda p: (-p[0], p[1]))
    return peaks
