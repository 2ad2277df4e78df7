"""Orthonormal 2D DCT-II of square pixel blocks.

Two interchangeable kernels compute the same transform by row-column
decomposition with a precomputed cosine table:

* ``scalar`` forms every output as a dot product (one serial reduction per
  coefficient).
* ``vectorized`` accumulates whole output rows at once (axpy form), so the
  inner loop runs over independent lanes and compiles to SIMD code.

Both add the per-coefficient terms in the same order and neither allows
reassociation or FMA contraction, so they agree bit for bit.
"""

from __future__ import annotations

import enum
import functools
import os
import threading
from dataclasses import dataclass

import numpy as np
from numba import njit

BLOCK_SIZES = (4, 8, 16, 32)


class UnsupportedBlockSize(ValueError):
    pass


class VectorPathUnavailable(RuntimeError):
    pass


class KernelPath(str, enum.Enum):
    SCALAR = "scalar"
    VECTORIZED = "vectorized"
    AUTO = "auto"


# Any one of these is enough for the vector kernel to beat the scalar one.
VECTOR_FEATURES = frozenset({"AVX2", "SSSE3", "ASIMD", "NEON", "VSX2"})


@dataclass(frozen=True)
class HostCapabilities:
    cpu_features: frozenset = frozenset()
    logical_cores: int = 1

    @property
    def has_vector(self) -> bool:
        return bool(self.cpu_features & VECTOR_FEATURES)


@functools.lru_cache(maxsize=1)
def detect_host() -> HostCapabilities:
    try:
        from numpy._core._multiarray_umath import __cpu_features__
    except ImportError:  # numpy < 2
        from numpy.core._multiarray_umath import __cpu_features__
    found = frozenset(name for name, ok in __cpu_features__.items() if ok)
    return HostCapabilities(found, os.cpu_count() or 1)


def select_kernel(requested: KernelPath | str = KernelPath.AUTO,
                  host: HostCapabilities | None = None) -> KernelPath:
    requested = KernelPath(requested)
    host = detect_host() if host is None else host
    if requested is KernelPath.SCALAR:
        return requested
    if host.has_vector:
        return KernelPath.VECTORIZED
    if requested is KernelPath.VECTORIZED:
        raise VectorPathUnavailable("host lacks the SIMD support needed by the vectorized kernel")
    return KernelPath.SCALAR


def check_block_size(w: int) -> int:
    if w not in BLOCK_SIZES:
        raise UnsupportedBlockSize(f"block size {w} not in {BLOCK_SIZES}")
    return w


@functools.lru_cache(maxsize=None)
def cosine_matrix(w: int) -> np.ndarray:
    """Orthonormal DCT-II basis ``M[u, x]``; ``M @ B @ M.T`` transforms block ``B``."""
    check_block_size(w)
    u = np.arange(w)[:, None]
    x = np.arange(w)[None, :]
    m = np.cos((2 * x + 1) * u * np.pi / (2 * w))
    m[0] *= np.sqrt(1.0 / w)
    m[1:] *= np.sqrt(2.0 / w)
    m.flags.writeable = False
    return m


@functools.lru_cache(maxsize=None)
def _cosine_matrix_t(w: int) -> np.ndarray:
    mt = np.ascontiguousarray(cosine_matrix(w).T)
    mt.flags.writeable = False
    return mt


@njit(cache=True, nogil=True)
def _dct_scalar(blocks, m, out):
    n, w, _ = blocks.shape
    tmp = np.empty((w, w))
    for k in range(n):
        # tmp[r, v] = sum_x blocks[r, x] * m[v, x]
        for r in range(w):
            for v in range(w):
                acc = 0.0
                for x in range(w):
                    acc += blocks[k, r, x] * m[v, x]
                tmp[r, v] = acc
        # out[u, v] = sum_r m[u, r] * tmp[r, v]
        for u in range(w):
            for v in range(w):
                acc = 0.0
                for r in range(w):
                    acc += m[u, r] * tmp[r, v]
                out[k, u, v] = acc


@njit(cache=True, nogil=True)
def _dct_vector(blocks, mt, out):
    n, w, _ = blocks.shape
    tmp = np.empty((w, w))
    for k in range(n):
        for r in range(w):
            for v in range(w):
                tmp[r, v] = 0.0
            for x in range(w):
                s = blocks[k, r, x]
                for v in range(w):
                    tmp[r, v] += s * mt[x, v]
        for u in range(w):
            for v in range(w):
                out[k, u, v] = 0.0
            for r in range(w):
                s = mt[r, u]
                for v in range(w):
                    out[k, u, v] += s * tmp[r, v]


class TransformCounter:
    """Process-wide tally of block transforms, for work-conservation checks."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._value = 0

    def add(self, n: int) -> None:
        with self._lock:
            self._value += n

    def reset(self) -> None:
        with self._lock:
            self._value = 0

    @property
    def value(self) -> int:
        return self._value


transform_counter = TransformCounter()


def dct2d_batch(blocks: np.ndarray, kernel: KernelPath | str = KernelPath.AUTO,
                out: np.ndarray | None = None) -> np.ndarray:
    """Transform a stack of blocks shaped ``(n, w, w)``.

    ``kernel`` must already be resolvable on this host; ``auto`` is resolved
    through :func:`select_kernel`.
    """
    if blocks.ndim != 3 or blocks.shape[1] != blocks.shape[2]:
        raise UnsupportedBlockSize(f"expected (n, w, w) blocks, got shape {blocks.shape}")
    w = check_block_size(blocks.shape[1])
    kernel = select_kernel(kernel)
    blocks = np.ascontiguousarray(blocks, dtype=np.float64)
    if out is None:
        out = np.empty_like(blocks)
    if kernel is KernelPath.SCALAR:
        _dct_scalar(blocks, cosine_matrix(w), out)
    else:
        _dct_vector(blocks, _cosine_matrix_t(w), out)
    transform_counter.add(blocks.shape[0])
    return out


def dct2d(block, kernel: KernelPath | str = KernelPath.AUTO) -> np.ndarray:
    """Orthonormal 2D DCT-II of one ``w x w`` block; ``[0, 0]`` is the DC term."""
    block = np.asarray(block)
    if block.ndim != 2 or block.shape[0] != block.shape[1]:
        raise UnsupportedBlockSize(f"expected a square block, got shape {block.shape}")
    return dct2d_batch(block[None], kernel)[0]


def downsample2x(block) -> np.ndarray:
    """Average 2x2 cells of a block, rounding half away from zero.

    Returns a ``(w/2, w/2)`` integer block of the input's dtype.
    """
    block = np.asarray(block)
    if block.ndim != 2 or block.shape[0] != block.shape[1]:
        raise UnsupportedBlockSize(f"expected a square block, got shape {block.shape}")
    w = check_block_size(block.shape[0])
    if w < 8:
        raise UnsupportedBlockSize("cannot downsample a 4x4 block")
    s = block.astype(np.int64)
    total = s[0::2, 0::2] + s[1::2, 0::2] + s[0::2, 1::2] + s[1::2, 1::2]
    # quarter of |total|, rounded half up, with the sign restored
    rounded = np.sign(total) * ((np.abs(total) + 2) // 4)
    return rounded.astype(block.dtype)
