"""Spatial and temporal information of the luma plane.

SI of a frame is the population standard deviation of the Sobel gradient
magnitude over the interior pixels (the 1-pixel border has no full 3x3
neighbourhood and is left out).  TI of a frame is the population standard
deviation of the signed difference to the previous frame over the whole
plane.  Sequence SI/TI are the maxima of the per-frame values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .features import GeometryMismatch


class PlaneTooSmall(ValueError):
    pass


class EmptyStream(ValueError):
    pass


@dataclass(frozen=True)
class SitiRecord:
    poc: int
    si_frame: float
    ti_frame: Optional[float] = None


@dataclass(frozen=True)
class SitiSummary:
    SI: float
    TI: float


def sobel_magnitude(plane) -> np.ndarray:
    """Sobel gradient magnitude of the interior, shape ``(rows - 2, cols - 2)``."""
    p = np.asarray(plane)
    if p.ndim != 2 or p.shape[0] < 3 or p.shape[1] < 3:
        raise PlaneTooSmall(f"need at least 3x3 samples, got {p.shape}")
    p = p.astype(np.int32)
    top, mid, bot = p[:-2], p[1:-1], p[2:]
    # vertical smoothing [1, 2, 1] then horizontal derivative, and vice versa
    smooth_v = top + 2 * mid + bot
    gx = smooth_v[:, 2:] - smooth_v[:, :-2]
    diff_v = bot - top
    gy = diff_v[:, :-2] + 2 * diff_v[:, 1:-1] + diff_v[:, 2:]
    gx = gx.astype(np.float64)
    gy = gy.astype(np.float64)
    return np.sqrt(gx * gx + gy * gy)


def si_frame(plane) -> float:
    return float(np.std(sobel_magnitude(plane)))


def ti_frame(cur, prev) -> float:
    cur = np.asarray(cur)
    prev = np.asarray(prev)
    if cur.shape != prev.shape:
        raise GeometryMismatch(f"frame shapes differ: {cur.shape} vs {prev.shape}")
    diff = cur.astype(np.int32) - prev.astype(np.int32)
    return float(np.std(diff))


def frame_record(poc: int, luma, prev_luma=None) -> SitiRecord:
    ti = None if prev_luma is None else ti_frame(luma, prev_luma)
    return SitiRecord(poc, si_frame(luma), ti)


def summarize_siti(records: Iterable[SitiRecord]) -> SitiSummary:
    si = None
    ti = 0.0
    for r in records:
        si = r.si_frame if si is None else max(si, r.si_frame)
        if r.ti_frame is not None:
            ti = max(ti, r.ti_frame)
    if si is None:
        raise EmptyStream("no frames")
    return SitiSummary(si, ti)


def sequence_siti(frames) -> tuple[list[SitiRecord], SitiSummary]:
    """Per-frame records and sequence maxima for an iterable of frames.

    Items may be :class:`~vcx.ingest.FrameBuffer` objects or bare luma arrays.
    """
    records = []
    prev = None
    for index, frame in enumerate(frames):
        luma = getattr(frame, "y", frame)
        records.append(frame_record(getattr(frame, "poc", index), luma, prev))
        prev = luma
    if not records:
        raise EmptyStream("no frames")
    return records, summarize_siti(records)
