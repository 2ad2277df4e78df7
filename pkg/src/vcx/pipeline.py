"""Multi-threaded analysis of a frame stream.

One coordinator thread reads frames in order and splits each frame into
fixed row-bands of blocks, which a worker pool transforms.  Results are
collected in POC order and band order, so the report is bit-identical for
any thread count.  Up to ``IN_FLIGHT_FRAMES`` frames are outstanding at
once, which lets the transforms of consecutive frames overlap; the ``h``
feature of frame ``p`` is still formed from frame ``p - 1``'s energies.
"""

from __future__ import annotations

import collections
import logging
import os
import time
from concurrent.futures import Executor, Future, ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional

from . import features as feat
from .features import FrameFeatures, auto_block_size, chroma_block_size
from .ingest import Chroma, FrameBuffer, VideoStreamInfo
from .siti import EmptyStream, SitiRecord, SitiSummary, frame_record, summarize_siti
from .stats import SequenceSummary, summarize
from .transform import HostCapabilities, KernelPath, detect_host, select_kernel

log = logging.getLogger(__name__)

MAX_THREADS = 64
IN_FLIGHT_FRAMES = 2
MODES = ("features", "siti", "both")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class AnalyzerConfig:
    block_size: int | str = "auto"
    thread_count: int | str = "auto"
    kernel: KernelPath = KernelPath.AUTO
    low_pass: bool = False
    chroma_enabled: bool = True
    mode: str = "features"
    # filled in by resolve_config; derived from plane shapes when left unset
    chroma_block_size: Optional[int] = None

    def __post_init__(self) -> None:
        if self.block_size not in ("auto", 8, 16, 32):
            raise ConfigError(f"block size must be auto, 8, 16 or 32, not {self.block_size!r}")
        if self.thread_count != "auto" and not (
            isinstance(self.thread_count, int) and 1 <= self.thread_count <= MAX_THREADS
        ):
            raise ConfigError(f"thread count must be auto or 1..{MAX_THREADS}")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}")
        object.__setattr__(self, "kernel", KernelPath(self.kernel))

    @property
    def resolved(self) -> bool:
        return (isinstance(self.block_size, int) and isinstance(self.thread_count, int)
                and self.kernel is not KernelPath.AUTO)


def resolve_config(config: AnalyzerConfig, info: VideoStreamInfo,
                   host: HostCapabilities | None = None) -> AnalyzerConfig:
    """Replace every ``auto`` field with a concrete value for this stream and host."""
    host = detect_host() if host is None else host
    w = auto_block_size(info.height) if config.block_size == "auto" else config.block_size
    threads = config.thread_count
    if threads == "auto":
        threads = max(1, min(MAX_THREADS, host.logical_cores))
    if config.low_pass and w < 8:
        raise ConfigError("low-pass mode needs a block size of at least 8")
    return replace(
        config,
        block_size=w,
        thread_count=threads,
        kernel=select_kernel(config.kernel, host),
        chroma_block_size=chroma_block_size(w, info.chroma.shift[0]),
    )


@dataclass
class AnalysisReport:
    config: AnalyzerConfig
    features: list[FrameFeatures] = field(default_factory=list)
    siti: list[SitiRecord] = field(default_factory=list)
    summary: Optional[SequenceSummary] = None
    siti_summary: Optional[SitiSummary] = None
    frames: int = 0
    seconds: float = 0.0

    @property
    def fps(self) -> float:
        return self.frames / self.seconds if self.seconds > 0 else float("inf")


class _InlineExecutor(Executor):
    """Runs submitted calls immediately on the calling thread."""

    def submit(self, fn, /, *args, **kwargs) -> Future:
        future: Future = Future()
        try:
            future.set_result(fn(*args, **kwargs))
        except BaseException as exc:
            future.set_exception(exc)
        return future


def _stream_info(source, info: VideoStreamInfo | None):
    if info is not None:
        return info, iter(source)
    if hasattr(source, "info"):
        return source.info, iter(source)
    frames = iter(source)
    first = next(frames, None)
    if first is None:
        raise EmptyStream("no frames")
    h, w = first.y.shape
    rows, cols = first.u.shape
    chroma = {(1, 1): Chroma.C420, (1, 0): Chroma.C422}.get(
        (int(cols < w), int(rows < h)), Chroma.C444)
    guessed = VideoStreamInfo(w, h, 8 if first.y.dtype.itemsize == 1 else 10, chroma)

    def chained():
        yield first
        yield from frames
    return guessed, chained()


@dataclass
class _Pending:
    frame: FrameBuffer
    jobs: list
    bands: list
    siti: Optional[Future]


def analyze_stream(source: Iterable[FrameBuffer], config: AnalyzerConfig = AnalyzerConfig(),
                   info: VideoStreamInfo | None = None,
                   host: HostCapabilities | None = None) -> AnalysisReport:
    """Analyze every frame of ``source`` and return the POC-ordered report."""
    info, frames = _stream_info(source, info)
    config = config if config.resolved else resolve_config(config, info, host)
    want_features = config.mode in ("features", "both")
    want_siti = config.mode in ("siti", "both")
    report = AnalysisReport(config)
    log.debug("analyzing with %s", config)

    if config.thread_count > 1:
        executor: Executor = ThreadPoolExecutor(config.thread_count, thread_name_prefix="vcx")
    else:
        executor = _InlineExecutor()

    pending: collections.deque[_Pending] = collections.deque()
    state = {"prev_energies": None}

    def finish(item: _Pending) -> None:
        if want_features:
            parts = [f.result() for f in item.bands]
            record, state["prev_energies"] = feat.assemble_frame(
                item.frame.poc, item.jobs, parts, state["prev_energies"])
            report.features.append(record)
        if want_siti:
            report.siti.append(item.siti.result())

    start = time.perf_counter()
    try:
        prev_luma = None
        expected_poc = 0
        for frame in frames:
            if frame.poc != expected_poc:
                raise ValueError(f"frame source skipped from POC {expected_poc - 1} to {frame.poc}")
            expected_poc += 1
            jobs, bands, siti_future = [], [], None
            if want_features:
                jobs = feat.plane_jobs(frame, config)
                for plane, job in zip(frame.planes, jobs):
                    if job is None:
                        continue
                    for row0, row1 in job.grid.bands():
                        bands.append(executor.submit(
                            feat.plane_band, plane, job, row0, row1, config.kernel))
            if want_siti:
                siti_future = executor.submit(frame_record, frame.poc, frame.y, prev_luma)
                prev_luma = frame.y
            pending.append(_Pending(frame, jobs, bands, siti_future))
            if len(pending) >= IN_FLIGHT_FRAMES:
                finish(pending.popleft())
        while pending:
            finish(pending.popleft())
    finally:
        for item in pending:
            for f in item.bands:
                f.cancel()
        executor.shutdown(wait=True)
    report.seconds = time.perf_counter() - start
    report.frames = expected_poc

    if report.frames == 0:
        raise EmptyStream("no frames")
    if want_siti:
        report.siti_summary = summarize_siti(report.siti)
    if want_features:
        report.summary = summarize(report.features, report.siti_summary)
    return report


def default_thread_count() -> int | str:
    """Thread count from ``VCX_THREADS`` when set, else ``auto``."""
    raw = os.environ.get("VCX_THREADS", "").strip()
    if not raw or raw == "auto":
        return "auto"
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"VCX_THREADS={raw!r} is not a thread count") from None
