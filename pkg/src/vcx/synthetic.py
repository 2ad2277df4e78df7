"""Procedural test content: noise frames, moving textures and a multi-resolution corpus.

Everything is seeded, so the same arguments always give the same samples.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .ingest import Chroma, FrameBuffer, VideoStreamInfo


def _chroma_shape(info: VideoStreamInfo) -> tuple[int, int]:
    return info.plane_shapes[1]


def _to_samples(values: np.ndarray, bit_depth: int) -> np.ndarray:
    top = (1 << bit_depth) - 1
    dtype = np.uint8 if bit_depth == 8 else np.uint16
    return np.clip(np.rint(values), 0, top).astype(dtype)


def constant_frame(info: VideoStreamInfo, y: int = 128, u: int = 128, v: int = 128,
                   poc: int = 0) -> FrameBuffer:
    dtype = info.dtype
    cshape = _chroma_shape(info)
    return FrameBuffer(poc, (np.full((info.height, info.width), y, dtype),
                             np.full(cshape, u, dtype), np.full(cshape, v, dtype)))


def noise_frame(info: VideoStreamInfo, amplitude: float, seed: int = 0, base: float = 128.0,
                poc: int = 0) -> FrameBuffer:
    """Uniform noise in ``[-amplitude, amplitude]`` around ``base`` on every plane.

    The same seed gives the same unit noise field, so amplitudes can be
    compared directly.
    """
    rng = np.random.default_rng(seed)
    planes = []
    for shape in info.plane_shapes:
        unit = rng.uniform(-1.0, 1.0, shape)
        planes.append(_to_samples(base + amplitude * unit, info.bit_depth))
    return FrameBuffer(poc, tuple(planes))


def power_law_noise(shape: tuple[int, int], slope: float, rng: np.random.Generator) -> np.ndarray:
    """Zero-mean, unit-std Gaussian field with a ``1/f**slope`` amplitude spectrum."""
    rows, cols = shape
    fy = np.fft.fftfreq(rows)[:, None]
    fx = np.fft.rfftfreq(cols)[None, :]
    f = np.sqrt(fx * fx + fy * fy)
    f[0, 0] = 1.0
    spectrum = (rng.standard_normal(f.shape) + 1j * rng.standard_normal(f.shape)) / f ** slope
    spectrum[0, 0] = 0.0
    field = np.fft.irfft2(spectrum, s=shape)
    return field / field.std()


def moving_texture_clip(info: VideoStreamInfo, frames: int, seed: int = 0,
                        speed: tuple[int, int] = (3, 2)) -> Iterator[FrameBuffer]:
    """A textured canvas panned by ``speed`` pixels per frame, plus per-frame grain."""
    rng = np.random.default_rng(seed)
    pad_y = abs(speed[0]) * frames + 1
    pad_x = abs(speed[1]) * frames + 1
    canvas = 128.0 + 40.0 * power_law_noise((info.height + pad_y, info.width + pad_x), 1.5, rng)
    sx, sy = info.chroma.shift
    for poc in range(frames):
        oy, ox = abs(speed[0]) * poc, abs(speed[1]) * poc
        luma = canvas[oy:oy + info.height, ox:ox + info.width]
        luma = luma + rng.normal(0.0, 2.0, luma.shape)
        chroma = luma[::1 << sy, ::1 << sx]
        planes = (_to_samples(luma, 8), _to_samples(0.5 * chroma + 64.0, 8),
                  _to_samples(192.0 - 0.5 * chroma, 8))
        if info.bit_depth == 10:
            planes = tuple((p.astype(np.uint16) << 2) for p in planes)
        yield FrameBuffer(poc, planes)


@dataclass(frozen=True)
class SceneParams:
    """Knobs of one procedurally generated clip."""

    seed: int
    texture_amplitude: float
    texture_slope: float
    shapes: int
    shape_contrast: float
    grain: float
    pan: tuple[int, int]

    @classmethod
    def random(cls, seed: int) -> "SceneParams":
        rng = np.random.default_rng(10_000 + seed)
        return cls(
            seed=seed,
            texture_amplitude=float(rng.uniform(2.0, 45.0)),
            texture_slope=float(rng.uniform(0.8, 1.6)),
            shapes=int(rng.integers(0, 40)),
            shape_contrast=float(rng.uniform(10.0, 120.0)),
            grain=float(rng.uniform(0.0, 2.0)),
            pan=(int(rng.integers(-8, 9)), int(rng.integers(-8, 9))),
        )


def _render_master(params: SceneParams, height: int, width: int, frames: int) -> list[np.ndarray]:
    rng = np.random.default_rng(params.seed)
    margin = 8 * frames + 8
    ch, cw = height + 2 * margin, width + 2 * margin
    yy = np.linspace(0.0, 1.0, ch)[:, None]
    xx = np.linspace(0.0, 1.0, cw)[None, :]
    canvas = 110.0 + 30.0 * (rng.uniform(-1, 1) * xx + rng.uniform(-1, 1) * yy)
    canvas = canvas + params.texture_amplitude * power_law_noise((ch, cw), params.texture_slope, rng)
    for _ in range(params.shapes):
        cy, cx = rng.uniform(0, ch), rng.uniform(0, cw)
        r = rng.uniform(0.02, 0.15) * height
        level = rng.uniform(-1, 1) * params.shape_contrast
        if rng.random() < 0.5:
            mask = (yy * (ch - 1) - cy) ** 2 + (xx * (cw - 1) - cx) ** 2 < r * r
        else:
            mask = (np.abs(yy * (ch - 1) - cy) < r) & (np.abs(xx * (cw - 1) - cx) < 0.7 * r)
        canvas = canvas + level * mask
    out = []
    for t in range(frames):
        oy = margin + params.pan[0] * t
        ox = margin + params.pan[1] * t
        frame = canvas[oy:oy + height, ox:ox + width]
        out.append(frame + rng.normal(0.0, params.grain, frame.shape))
    return out


def _box_downscale(plane: np.ndarray, factor: int) -> np.ndarray:
    h, w = plane.shape
    return plane.reshape(h // factor, factor, w // factor, factor).mean(axis=(1, 3))


def render_scene(params: SceneParams, heights=(2160, 1080, 540), frames: int = 3,
                 aspect: tuple[int, int] = (16, 9)) -> dict[int, list[FrameBuffer]]:
    """Render one clip at the largest height and box-downscale it to the others.

    Returns ``{height: [FrameBuffer, ...]}`` with C420 8-bit frames whose
    chroma planes are flat mid-grey.
    """
    top = max(heights)
    width = top * aspect[0] // aspect[1]
    master = _render_master(params, top, width, frames)
    clips = {}
    for h in heights:
        factor = top // h
        w = width // factor
        info = VideoStreamInfo(w, h, 8, Chroma.C420)
        cshape = _chroma_shape(info)
        grey = np.full(cshape, 128, np.uint8)
        clips[h] = [
            FrameBuffer(t, (_to_samples(_box_downscale(m, factor) if factor > 1 else m, 8),
                            grey, grey))
            for t, m in enumerate(master)
        ]
    return clips
