"""Blockwise DCT-energy features.

Every plane is tiled into ``w x w`` blocks (edges replicated to fill partial
blocks).  Each block contributes a texture energy ``H`` (weighted sum of
absolute AC coefficients) and a brightness term ``sqrt(DC)``.  Per frame and
plane these reduce to:

* ``E`` - mean texture energy per sample, ``sum(H) / (C * w**2)``
* ``L`` - mean of ``sqrt(DC)`` over the ``C`` blocks
* ``h`` - luma only, ``sum(|H_t - H_{t-1}|) / (C * w**2)``; zero for the first frame

Frame sums use :func:`math.fsum`, which is exact, so results do not depend
on how blocks were split between workers.
"""

from __future__ import annotations

import functools
import math
from concurrent.futures import Executor
from dataclasses import dataclass, fields
from typing import TYPE_CHECKING, Optional, Sequence

import numpy as np
from numba import njit

from .ingest import FrameBuffer
from .transform import UnsupportedBlockSize, check_block_size, dct2d_batch

if TYPE_CHECKING:
    from .pipeline import AnalyzerConfig

# Block rows per work unit.  Fixed so band layout never depends on thread count.
BAND_BLOCK_ROWS = 4


class LengthMismatch(ValueError):
    pass


class GeometryMismatch(ValueError):
    pass


def auto_block_size(luma_height: int) -> int:
    if luma_height >= 2160:
        return 32
    if luma_height >= 1080:
        return 16
    return 8


def chroma_block_size(luma_block: int, horizontal_shift: int) -> int:
    return max(4, luma_block >> horizontal_shift)


@dataclass(frozen=True)
class BlockGrid:
    plane_width: int
    plane_height: int
    w: int

    @property
    def cols(self) -> int:
        return -(-self.plane_width // self.w)

    @property
    def rows(self) -> int:
        return -(-self.plane_height // self.w)

    @property
    def count(self) -> int:
        return self.cols * self.rows

    def bands(self, block_rows: int = BAND_BLOCK_ROWS) -> list[tuple[int, int]]:
        return [(r, min(r + block_rows, self.rows)) for r in range(0, self.rows, block_rows)]


@dataclass(frozen=True)
class FrameFeatures:
    poc: int
    E_Y: float
    h: float
    L_Y: float
    E_U: Optional[float] = None
    L_U: Optional[float] = None
    E_V: Optional[float] = None
    L_V: Optional[float] = None

    def values(self) -> tuple:
        return tuple(getattr(self, f.name) for f in fields(self))[1:]


FEATURE_NAMES = tuple(f.name for f in fields(FrameFeatures))[1:]


@functools.lru_cache(maxsize=None)
def texture_weights(w: int) -> np.ndarray:
    """``exp(|(i*j/w**2)**2 - 1|)`` with the DC weight zeroed."""
    i = np.arange(w, dtype=np.float64)[:, None]
    j = np.arange(w, dtype=np.float64)[None, :]
    weights = np.exp(np.abs((i * j / (w * w)) ** 2 - 1.0))
    weights[0, 0] = 0.0
    weights.flags.writeable = False
    return weights


# The gather kernels store each block minus its first sample.  AC coefficients
# do not depend on a constant offset, and removing it exactly (integer
# arithmetic) makes flat blocks transform to exact zeros.  The DC term is
# returned separately as the exact sample sum over w.


@njit(cache=True, nogil=True)
def _gather_blocks(plane, row0, row1, w, cols, out, dc):
    height, width = plane.shape
    k = 0
    for br in range(row0, row1):
        for bc in range(cols):
            ref = np.int64(plane[min(br * w, height - 1), min(bc * w, width - 1)])
            total = np.int64(0)
            for i in range(w):
                y = min(br * w + i, height - 1)
                for j in range(w):
                    x = min(bc * w + j, width - 1)
                    s = np.int64(plane[y, x])
                    total += s
                    out[k, i, j] = s - ref
            dc[k] = total / w
            k += 1


@njit(cache=True, nogil=True)
def _gather_blocks_lowpass(plane, row0, row1, w, cols, out, dc):
    # out holds (w/2 x w/2) blocks: 2x2 means of the edge-replicated w x w block
    height, width = plane.shape
    half = w // 2
    k = 0
    for br in range(row0, row1):
        for bc in range(cols):
            ref = np.int64(0)
            total = np.int64(0)
            for i in range(half):
                y0 = min(br * w + 2 * i, height - 1)
                y1 = min(br * w + 2 * i + 1, height - 1)
                for j in range(half):
                    x0 = min(bc * w + 2 * j, width - 1)
                    x1 = min(bc * w + 2 * j + 1, width - 1)
                    s = (np.int64(plane[y0, x0]) + np.int64(plane[y1, x0])
                         + np.int64(plane[y0, x1]) + np.int64(plane[y1, x1]))
                    s = (s + 2) // 4
                    if i == 0 and j == 0:
                        ref = s
                    total += s
                    out[k, i, j] = s - ref
            dc[k] = total / half
            k += 1


@njit(cache=True, nogil=True)
def _texture_and_dc(coeffs, weights, texture, dc):
    n, w, _ = coeffs.shape
    for k in range(n):
        acc = 0.0
        for i in range(w):
            for j in range(w):
                if i == 0 and j == 0:
                    continue
                acc += weights[i, j] * abs(coeffs[k, i, j])
        texture[k] = acc
        dc[k] = coeffs[k, 0, 0]


def _check_coeffs(coeffs: np.ndarray) -> np.ndarray:
    coeffs = np.ascontiguousarray(coeffs, dtype=np.float64)
    if coeffs.ndim != 3 or coeffs.shape[1] != coeffs.shape[2]:
        raise UnsupportedBlockSize(f"expected (n, w, w) coefficients, got {coeffs.shape}")
    check_block_size(coeffs.shape[1])
    return coeffs


def block_texture_batch(coeffs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Texture energy and DC term of each block in an ``(n, w, w)`` coefficient stack."""
    coeffs = _check_coeffs(coeffs)
    n, w, _ = coeffs.shape
    texture = np.empty(n)
    dc = np.empty(n)
    _texture_and_dc(coeffs, texture_weights(w), texture, dc)
    return texture, dc


def block_texture(coeffs) -> float:
    return float(block_texture_batch(np.asarray(coeffs)[None])[0][0])


def block_luminescence(coeffs) -> float:
    dc = float(np.asarray(coeffs)[0, 0])
    # DC is a sum of non-negative terms for unsigned samples
    return math.sqrt(max(dc, 0.0))


def _check_lengths(count: int, *vectors) -> None:
    for v in vectors:
        if len(v) != count:
            raise LengthMismatch(f"energy vector has {len(v)} entries, expected {count}")


def frame_energy(texture: Sequence[float], w: int, count: int) -> float:
    _check_lengths(count, texture)
    return math.fsum(texture) / (count * w * w)


def frame_gradient(texture_cur: Sequence[float], texture_prev: Sequence[float],
                   w: int, count: int) -> float:
    _check_lengths(count, texture_cur, texture_prev)
    diff = np.abs(np.asarray(texture_cur, dtype=np.float64)
                  - np.asarray(texture_prev, dtype=np.float64))
    return math.fsum(diff) / (count * w * w)


@dataclass(frozen=True)
class PlaneJob:
    """How one plane of a frame is tiled and transformed."""

    grid: BlockGrid
    low_pass: bool

    @property
    def transform_size(self) -> int:
        return self.grid.w // 2 if self.low_pass else self.grid.w


def plane_band(plane: np.ndarray, job: PlaneJob, row0: int, row1: int,
               kernel) -> tuple[np.ndarray, np.ndarray]:
    """Texture energies and ``sqrt(DC)`` for block rows ``[row0, row1)`` of a plane."""
    grid = job.grid
    n = (row1 - row0) * grid.cols
    size = job.transform_size
    blocks = np.empty((n, size, size))
    dc = np.empty(n)
    if job.low_pass:
        _gather_blocks_lowpass(plane, row0, row1, grid.w, grid.cols, blocks, dc)
    else:
        _gather_blocks(plane, row0, row1, grid.w, grid.cols, blocks, dc)
    coeffs = dct2d_batch(blocks, kernel, out=np.empty_like(blocks))
    texture, _ = block_texture_batch(coeffs)
    return texture, np.sqrt(dc)


def plane_jobs(frame: FrameBuffer, config: "AnalyzerConfig") -> list[Optional[PlaneJob]]:
    """Tiling for the Y, U, V planes (``None`` where a plane is disabled)."""
    luma = frame.y
    w = config.block_size
    if not isinstance(w, int):
        raise ValueError("analyze_frame needs a resolved config (see resolve_config)")
    check_block_size(w)
    jobs: list[Optional[PlaneJob]] = [
        PlaneJob(BlockGrid(luma.shape[1], luma.shape[0], w), config.low_pass)
    ]
    if not config.chroma_enabled:
        return jobs + [None, None]
    u, v = frame.u, frame.v
    if u.shape != v.shape:
        raise GeometryMismatch(f"U plane {u.shape} and V plane {v.shape} differ")
    ratio_x, rem_x = divmod(luma.shape[1], u.shape[1])
    ratio_y, rem_y = divmod(luma.shape[0], u.shape[0])
    if rem_x or rem_y or ratio_x not in (1, 2) or ratio_y not in (1, 2):
        raise GeometryMismatch(f"chroma plane {u.shape} does not fit luma {luma.shape}")
    cw = config.chroma_block_size or chroma_block_size(w, ratio_x - 1)
    check_block_size(cw)
    chroma_job = PlaneJob(BlockGrid(u.shape[1], u.shape[0], cw), config.low_pass and cw >= 8)
    return jobs + [chroma_job, chroma_job]


def _reduce_plane(texture: np.ndarray, lum: np.ndarray, job: PlaneJob) -> tuple[float, float]:
    count = job.grid.count
    return frame_energy(texture, job.transform_size, count), math.fsum(lum) / count


def analyze_frame(frame: FrameBuffer, prev_energies, config: "AnalyzerConfig",
                  executor: Executor | None = None):
    """Compute :class:`FrameFeatures` for one frame.

    ``prev_energies`` is the energy tuple returned for the previous frame, or
    ``None`` for the first one.  Returns ``(features, energies)`` where
    ``energies`` holds the per-block texture vector of each plane (``None``
    for disabled planes).  With an ``executor`` the plane bands are computed
    concurrently; the result is identical either way.
    """
    jobs = plane_jobs(frame, config)
    work = []
    for plane, job in zip(frame.planes, jobs):
        if job is None:
            continue
        for row0, row1 in job.grid.bands():
            work.append((plane, job, row0, row1, config.kernel))
    if executor is None:
        parts = [plane_band(*args) for args in work]
    else:
        parts = [f.result() for f in [executor.submit(plane_band, *args) for args in work]]
    return assemble_frame(frame.poc, jobs, parts, prev_energies)


def assemble_frame(poc: int, jobs, parts, prev_energies):
    """Combine band results (in band order) into features and energy vectors."""
    energies = []
    values = []
    pos = 0
    for job in jobs:
        if job is None:
            energies.append(None)
            values.append((None, None))
            continue
        nb = len(job.grid.bands())
        chunk = parts[pos:pos + nb]
        pos += nb
        texture = np.concatenate([c[0] for c in chunk])
        lum = np.concatenate([c[1] for c in chunk])
        energies.append(texture)
        values.append(_reduce_plane(texture, lum, job))

    luma_job = jobs[0]
    if prev_energies is None:
        gradient = 0.0
    else:
        prev = prev_energies[0]
        if len(prev) != luma_job.grid.count:
            raise GeometryMismatch(
                f"previous frame has {len(prev)} luma blocks, this one {luma_job.grid.count}"
            )
        gradient = frame_gradient(energies[0], prev, luma_job.transform_size,
                                  luma_job.grid.count)
    (e_y, l_y), (e_u, l_u), (e_v, l_v) = values
    features = FrameFeatures(poc, e_y, gradient, l_y, e_u, l_u, e_v, l_v)
    return features, tuple(energies)
