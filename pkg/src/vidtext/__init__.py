"""Static superimposed-text detection in video frame sequences.

Two-phase spatio-temporal detector: change-triggered candidate
localization (histogram-difference trigger, binary edge-map difference,
density-driven quadtree split/merge) followed by size, contrast-peak and
temporal-persistence filtering. Ships with a region-level evaluation
harness and a deterministic synthetic clip generator.
"""

from .change import ChangeDecision, detect_change, gray_histogram, histogram_difference
from .edges import (
    binarize,
    binary_edge_map,
    edge_difference,
    optimal_threshold,
    otsu_threshold,
    quantize_magnitudes,
    sobel_edge_map,
)
from .errors import (
    CaptionOutOfBoundsError,
    ConfigError,
    DecodeError,
    DimensionMismatchError,
    FrameTooSmallError,
    NoFramesError,
    RectOutOfBoundsError,
    VidtextError,
    WindowExceedsSequenceError,
)
from .evaluation import (
    DetectedRegion,
    EvalReport,
    GroundTruthRegion,
    Match,
    compute_metrics,
    evaluate,
    match_regions,
)
from .filtering import FilterConfig, TextRegion, contrast_filter, size_filter, temporal_filter
from .frames import ArraySequence, Frame, FrameSequence, open_sequence, to_grayscale
from .pipeline import DetectionRun, PipelineConfig, process_sequence, render_overlays, run_to_json
from .quadtree import CandidateRegion, QuadBlock, Rect, edge_density, leaves, map_to_frame, merge, rect_iou, split
from .synthetic import ClipSpec, generate_synthetic_clip, render_text_mask

__version__ = "0.1.0"
