"""Region-level detection metrics against ground-truth annotations.

Matching is greedy one-to-one by descending spatial IoU; a detection and
a truth region may match only when their boxes overlap at least iou_min
and their frame spans share at least temporal_overlap_min frames.

Naming caution: the literature this method comes from labels
correct/detected as "recall" and correct/ground-truth as "precision" —
the reverse of universal convention. The report therefore carries the
neutral ratios plus BOTH labelings, so numbers can be compared against
either source without silent reinterpretation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from .errors import ConfigError
from .quadtree import Rect, rect_iou


@dataclass(frozen=True)
class GroundTruthRegion:
    id: str
    bbox: Rect
    frame_start: int
    frame_end: int
    text: Optional[str] = None

    def __post_init__(self):
        if self.frame_start > self.frame_end:
            raise ValueError(f"{self.id}: frame_start > frame_end")


@dataclass(frozen=True)
class DetectedRegion:
    """Confirmed detector output reduced to what matching needs."""

    bbox: Rect
    first_frame: int
    persistence: int

    @property
    def frame_start(self) -> int:
        return self.first_frame

    @property
    def frame_end(self) -> int:
        return self.first_frame + max(self.persistence, 1) - 1


@dataclass(frozen=True)
class Match:
    detected_index: int
    truth_id: str
    iou: float


@dataclass
class EvalReport:
    counts: dict
    ratio_over_detected: Optional[float]
    ratio_over_truth: Optional[float]
    false_alarm: Optional[float]
    matches: list[Match] = field(default_factory=list)
    undefined: list[str] = field(default_factory=list)

    # Conventional labels; see module docstring for the labeling caveat.
    @property
    def precision(self) -> Optional[float]:
        return self.ratio_over_detected

    @property
    def recall(self) -> Optional[float]:
        return self.ratio_over_truth

    def paper_labels(self) -> dict:
        return {
            "recall": self.ratio_over_detected,
            "precision": self.ratio_over_truth,
            "false_alarm": self.false_alarm,
        }

    def conventional_labels(self) -> dict:
        return {
            "precision": self.ratio_over_detected,
            "recall": self.ratio_over_truth,
            "false_alarm": self.false_alarm,
        }

    def to_json(self) -> dict:
        return {
            "counts": dict(self.counts),
            "ratio_over_detected": self.ratio_over_detected,
            "ratio_over_truth": self.ratio_over_truth,
            "false_alarm": self.false_alarm,
            "paper_labels": self.paper_labels(),
            "conventional_labels": self.conventional_labels(),
            "matches": [
                {"detected_index": m.detected_index, "truth_id": m.truth_id, "iou": m.iou}
                for m in self.matches
            ],
            "undefined": list(self.undefined),
        }


def temporal_overlap(a_start: int, a_end: int, b_start: int, b_end: int) -> int:
    """Number of frames two inclusive spans share."""
    return min(a_end, b_end) - max(a_start, b_start) + 1


def match_regions(
    detected: list[DetectedRegion],
    truth: list[GroundTruthRegion],
    iou_min: float = 0.5,
    temporal_overlap_min: int = 1,
) -> list[Match]:
    """Greedy one-to-one matching by descending IoU."""
    if not 0.0 < iou_min <= 1.0:
        raise ConfigError("iou", "must lie in (0, 1]")
    candidates = []
    for di, det in enumerate(detected):
        for ti, gt in enumerate(truth):
            if temporal_overlap(det.frame_start, det.frame_end, gt.frame_start, gt.frame_end) < temporal_overlap_min:
                continue
            iou = rect_iou(det.bbox, gt.bbox)
            if iou >= iou_min:
                candidates.append((iou, di, ti))
    candidates.sort(key=lambda c: (-c[0], c[1], c[2]))
    used_det: set[int] = set()
    used_truth: set[int] = set()
    matches = []
    for iou, di, ti in candidates:
        if di in used_det or ti in used_truth:
            continue
        used_det.add(di)
        used_truth.add(ti)
        matches.append(Match(detected_index=di, truth_id=truth[ti].id, iou=iou))
    return matches


def compute_metrics(matches: list[Match], detected_count: int, truth_count: int) -> EvalReport:
    """Ratios over detections and over ground truth, plus the false alarm.

    Zero denominators make the affected ratios undefined — they are
    reported as None and named in the ``undefined`` list, never coerced
    to zero.
    """
    if detected_count < 0 or truth_count < 0:
        raise ValueError("counts must be >= 0")
    correct = len(matches)
    if correct > detected_count or correct > truth_count:
        raise ValueError("more matches than regions")
    undefined = []
    if detected_count > 0:
        over_detected = correct / detected_count
        false_alarm = (detected_count - correct) / detected_count
    else:
        over_detected = None
        false_alarm = None
        undefined += ["ratio_over_detected", "false_alarm"]
    if truth_count > 0:
        over_truth = correct / truth_count
    else:
        over_truth = None
        undefined.append("ratio_over_truth")
    return EvalReport(
        counts={"detected": detected_count, "correct": correct, "ground_truth": truth_count},
        ratio_over_detected=over_detected,
        ratio_over_truth=over_truth,
        false_alarm=false_alarm,
        matches=matches,
        undefined=undefined,
    )


def evaluate(
    detected: list[DetectedRegion],
    truth: list[GroundTruthRegion],
    iou_min: float = 0.5,
    temporal_overlap_min: int = 1,
) -> EvalReport:
    matches = match_regions(detected, truth, iou_min, temporal_overlap_min)
    return compute_metrics(matches, len(detected), len(truth))


def detections_from_run(run_payload: dict) -> list[DetectedRegion]:
    """Confirmed regions of a run-report JSON document."""
    out = []
    for region in run_payload.get("regions", []):
        if region.get("status") != "confirmed":
            continue
        b = region["bbox"]
        out.append(
            DetectedRegion(
                bbox=Rect(b["x"], b["y"], b["w"], b["h"]),
                first_frame=int(region["first_frame"]),
                persistence=int(region["persistence"]),
            )
        )
    return out


def ground_truth_from_json(entries) -> list[GroundTruthRegion]:
    if not isinstance(entries, list):
        raise ConfigError("truth", "expected a JSON array of regions")
    out = []
    for entry in entries:
        b = entry["bbox"]
        out.append(
            GroundTruthRegion(
                id=str(entry["id"]),
                bbox=Rect(b["x"], b["y"], b["w"], b["h"]),
                frame_start=int(entry["frame_start"]),
                frame_end=int(entry["frame_end"]),
                text=entry.get("text"),
            )
        )
    return out


def load_ground_truth(path) -> list[GroundTruthRegion]:
    with open(path, encoding="utf-8") as fh:
        return ground_truth_from_json(json.load(fh))


def ground_truth_to_json(truth: list[GroundTruthRegion]) -> list[dict]:
    return [
        {
            "id": gt.id,
            "bbox": {"x": gt.bbox.x, "y": gt.bbox.y, "w": gt.bbox.w, "h": gt.bbox.h},
            "frame_start": gt.frame_start,
            "frame_end": gt.frame_end,
            "text": gt.text,
        }
        for gt in truth
    ]
