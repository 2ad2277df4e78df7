"""Y4M and headerless raw YUV readers.

Both readers hand out :class:`FrameBuffer` objects one at a time, in display
order, with ``poc`` counting up from zero.  Samples are returned untouched
(``uint8`` for 8-bit streams, ``uint16`` for 10-bit) apart from clamping of
out-of-range 10-bit values.
"""

from __future__ import annotations

import enum
import logging
import os
import re
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import BinaryIO, Iterator

import numpy as np

log = logging.getLogger(__name__)

Y4M_MAGIC = b"YUV4MPEG2"
FRAME_MARKER = b"FRAME"
_MAX_HEADER_LINE = 4096


class IngestError(Exception):
    """Base class for problems with an input stream."""


class MalformedMagic(IngestError):
    pass


class MalformedHeader(IngestError):
    pass


class UnsupportedChroma(IngestError):
    pass


class UnsupportedBitDepth(IngestError):
    pass


class UnsupportedInterlacing(MalformedHeader):
    pass


class TruncatedFrame(IngestError):
    pass


class MalformedFrameMarker(IngestError):
    pass


class InvalidGeometry(IngestError):
    pass


class SizeNotMultipleOfFrame(UserWarning):
    """Raw file carries trailing bytes that do not form a whole frame."""


class SampleRangeWarning(UserWarning):
    """A 10-bit container held a value above 1023; it was clamped."""


class Chroma(enum.Enum):
    C420 = "420"
    C422 = "422"
    C444 = "444"

    @property
    def shift(self) -> tuple[int, int]:
        """(horizontal, vertical) log2 subsampling factors of the chroma planes."""
        return {Chroma.C420: (1, 1), Chroma.C422: (1, 0), Chroma.C444: (0, 0)}[self]

    @classmethod
    def parse(cls, text: str) -> "Chroma":
        text = text.upper().lstrip("C")
        for member in cls:
            if member.value == text:
                return member
        raise UnsupportedChroma(f"unsupported chroma format {text!r}")


@dataclass(frozen=True)
class VideoStreamInfo:
    width: int
    height: int
    bit_depth: int = 8
    chroma: Chroma = Chroma.C420
    frame_rate: Fraction = Fraction(25, 1)
    frame_count: int | None = None

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise InvalidGeometry(f"bad dimensions {self.width}x{self.height}")
        sx, sy = self.chroma.shift
        if (sx and self.width % 2) or (sy and self.height % 2):
            raise InvalidGeometry(
                f"{self.width}x{self.height} is not valid for chroma {self.chroma.value}"
            )
        if self.bit_depth not in (8, 10):
            raise UnsupportedBitDepth(f"bit depth {self.bit_depth} (expected 8 or 10)")
        if self.frame_rate.numerator <= 0 or self.frame_rate.denominator <= 0:
            raise MalformedHeader(f"bad frame rate {self.frame_rate}")

    @property
    def plane_shapes(self) -> tuple[tuple[int, int], ...]:
        """(rows, cols) of the Y, U and V planes."""
        sx, sy = self.chroma.shift
        chroma = (self.height >> sy, self.width >> sx)
        return (self.height, self.width), chroma, chroma

    @property
    def bytes_per_sample(self) -> int:
        return 1 if self.bit_depth == 8 else 2

    @property
    def frame_bytes(self) -> int:
        samples = sum(r * c for r, c in self.plane_shapes)
        return samples * self.bytes_per_sample

    @property
    def dtype(self) -> np.dtype:
        return np.dtype(np.uint8) if self.bit_depth == 8 else np.dtype("<u2")

    @property
    def max_value(self) -> int:
        return (1 << self.bit_depth) - 1


@dataclass(frozen=True)
class FrameBuffer:
    poc: int
    planes: tuple[np.ndarray, np.ndarray, np.ndarray]

    @property
    def y(self) -> np.ndarray:
        return self.planes[0]

    @property
    def u(self) -> np.ndarray:
        return self.planes[1]

    @property
    def v(self) -> np.ndarray:
        return self.planes[2]


_INTERLACE_OK = {"p", "?"}


_DEEP_CHROMA = re.compile(r"(\d+)p(\d+)")


def _chroma_and_depth(tag: str) -> tuple[Chroma, int]:
    deep = _DEEP_CHROMA.fullmatch(tag)
    if deep:
        base, depth = deep.groups()
        if base not in ("420", "422", "444"):
            raise UnsupportedChroma(f"unsupported chroma format C{tag}")
        if int(depth) != 10:
            raise UnsupportedBitDepth(f"unsupported bit depth in C{tag}")
        return Chroma.parse(base), 10
    if tag in ("420", "420jpeg", "420mpeg2", "420paldv"):
        return Chroma.C420, 8
    if tag in ("422", "444"):
        return Chroma.parse(tag), 8
    raise UnsupportedChroma(f"unsupported chroma format C{tag}")


def _parse_rational(value: str, token: str) -> Fraction:
    num, sep, den = value.partition(":")
    try:
        return Fraction(int(num), int(den) if sep else 1)
    except (ValueError, ZeroDivisionError):
        raise MalformedHeader(f"unparsable token {token!r}") from None


def parse_y4m_header(stream: BinaryIO) -> VideoStreamInfo:
    """Consume the stream header line and return its parameters.

    Leaves ``stream`` positioned at the first ``FRAME`` marker.
    """
    line = stream.readline(_MAX_HEADER_LINE)
    if not line.startswith(Y4M_MAGIC):
        raise MalformedMagic("stream does not start with YUV4MPEG2")
    if not line.endswith(b"\n"):
        raise MalformedHeader("header line is unterminated or too long")
    try:
        tokens = line[len(Y4M_MAGIC):].decode("ascii").split()
    except UnicodeDecodeError:
        raise MalformedHeader("header is not ASCII") from None
    if line[len(Y4M_MAGIC):len(Y4M_MAGIC) + 1] not in (b" ", b"\n"):
        raise MalformedMagic("stream does not start with YUV4MPEG2")

    fields: dict = {}
    chroma_tag = "420jpeg"
    for token in tokens:
        key, value = token[0], token[1:]
        if key in "WH":
            if not value.isdigit():
                raise MalformedHeader(f"unparsable token {token!r}")
            fields["width" if key == "W" else "height"] = int(value)
        elif key == "F":
            fields["frame_rate"] = _parse_rational(value, token)
        elif key == "I":
            if value not in _INTERLACE_OK:
                raise UnsupportedInterlacing(f"interlaced content ({token}) is not supported")
        elif key == "A":
            num, sep, den = value.partition(":")
            if not (sep and num.isdigit() and den.isdigit()):
                raise MalformedHeader(f"unparsable token {token!r}")
        elif key == "C":
            chroma_tag = value
        elif key == "X":
            warnings.warn(f"ignoring Y4M extension token {token!r}", stacklevel=2)
        else:
            raise MalformedHeader(f"unknown header token {token!r}")

    if "width" not in fields or "height" not in fields:
        raise MalformedHeader("header lacks W or H")
    chroma, depth = _chroma_and_depth(chroma_tag)
    return VideoStreamInfo(chroma=chroma, bit_depth=depth, **fields)


def _decode_planes(payload: bytes, info: VideoStreamInfo, state: dict):
    flat = np.frombuffer(payload, dtype=info.dtype)
    if info.bit_depth == 10:
        flat = flat.astype(np.uint16)
        if flat.max(initial=0) > info.max_value:
            if not state.get("warned"):
                warnings.warn(
                    "10-bit samples above 1023 were clamped", SampleRangeWarning, stacklevel=3
                )
                state["warned"] = True
            np.minimum(flat, info.max_value, out=flat)
    planes = []
    offset = 0
    for rows, cols in info.plane_shapes:
        planes.append(flat[offset:offset + rows * cols].reshape(rows, cols))
        offset += rows * cols
    return tuple(planes)


def _read_exact(stream: BinaryIO, n: int) -> bytes:
    chunks = []
    remaining = n
    while remaining:
        chunk = stream.read(remaining)
        if not chunk:
            break
        chunks.append(chunk)
        remaining -= len(chunk)
    return b"".join(chunks)


class FrameSource:
    """Sequential single-consumer frame reader over a binary stream.

    Iterating yields frames until end-of-stream.  ``container`` is either
    ``"y4m"`` (a ``FRAME`` line precedes every payload) or ``"raw"``.
    """

    def __init__(self, stream: BinaryIO, info: VideoStreamInfo, container: str = "raw",
                 *, owns_stream: bool = False, discard_partial_tail: bool = False):
        if container not in ("y4m", "raw"):
            raise ValueError(f"unknown container {container!r}")
        self.stream = stream
        self.info = info
        self.container = container
        self._owns = owns_stream
        self._discard_tail = discard_partial_tail and container == "raw"
        self._next_poc = 0
        self._range_state: dict = {}
        self.trailing_bytes = 0

    def read_next_frame(self) -> FrameBuffer | None:
        """Return the next frame, or ``None`` at a clean end-of-stream."""
        if self.container == "y4m":
            marker = self.stream.readline(_MAX_HEADER_LINE)
            if not marker:
                return None
            if not (marker.startswith(FRAME_MARKER) and marker.endswith(b"\n")
                    and marker[len(FRAME_MARKER):len(FRAME_MARKER) + 1] in (b" ", b"\n")):
                raise MalformedFrameMarker(
                    f"expected FRAME marker before frame {self._next_poc}, got {marker[:16]!r}"
                )
        payload = _read_exact(self.stream, self.info.frame_bytes)
        if not payload and self.container == "raw":
            return None
        if len(payload) < self.info.frame_bytes:
            if self._discard_tail:
                self.trailing_bytes = len(payload)
                warnings.warn(
                    f"discarding {len(payload)} trailing bytes after frame {self._next_poc - 1}",
                    SizeNotMultipleOfFrame,
                    stacklevel=2,
                )
                return None
            raise TruncatedFrame(
                f"frame {self._next_poc}: got {len(payload)} of {self.info.frame_bytes} bytes"
            )
        frame = FrameBuffer(self._next_poc, _decode_planes(payload, self.info, self._range_state))
        self._next_poc += 1
        return frame

    def __iter__(self) -> Iterator[FrameBuffer]:
        while True:
            frame = self.read_next_frame()
            if frame is None:
                return
            yield frame

    def close(self) -> None:
        if self._owns:
            self.stream.close()

    def __enter__(self) -> "FrameSource":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def read_next_frame(source: FrameSource) -> FrameBuffer | None:
    return source.read_next_frame()


def open_y4m(path: str | os.PathLike) -> FrameSource:
    stream = open(path, "rb")
    try:
        info = parse_y4m_header(stream)
    except Exception:
        stream.close()
        raise
    return FrameSource(stream, info, "y4m", owns_stream=True)


def y4m_stream(stream: BinaryIO) -> FrameSource:
    """Wrap an already-open binary stream (e.g. stdin) carrying Y4M."""
    return FrameSource(stream, parse_y4m_header(stream), "y4m")


def open_raw_yuv(path: str | os.PathLike, width: int, height: int, bit_depth: int = 8,
                 chroma: Chroma | str = Chroma.C420,
                 frame_rate: Fraction = Fraction(25, 1)) -> FrameSource:
    """Open a headerless planar YUV file.

    A trailing partial frame is dropped with a :class:`SizeNotMultipleOfFrame`
    warning when it is reached.
    """
    if not isinstance(chroma, Chroma):
        chroma = Chroma.parse(chroma)
    size = os.path.getsize(path)
    info = VideoStreamInfo(width, height, bit_depth, chroma, frame_rate)
    info = VideoStreamInfo(width, height, bit_depth, chroma, frame_rate,
                           frame_count=size // info.frame_bytes)
    return FrameSource(open(path, "rb"), info, "raw", owns_stream=True,
                       discard_partial_tail=True)


def count_y4m_frames(path: str | os.PathLike) -> int:
    """Count frames by walking FRAME markers without decoding payloads."""
    with open(path, "rb") as f:
        info = parse_y4m_header(f)
        count = 0
        while True:
            marker = f.readline(_MAX_HEADER_LINE)
            if not marker:
                return count
            if not marker.startswith(FRAME_MARKER):
                raise MalformedFrameMarker(f"bad marker before frame {count}")
            here = f.tell()
            f.seek(0, os.SEEK_END)
            if f.tell() - here < info.frame_bytes:
                raise TruncatedFrame(f"frame {count} is truncated")
            f.seek(here + info.frame_bytes)
            count += 1


def probe_y4m(path: str | os.PathLike) -> VideoStreamInfo:
    with open(path, "rb") as f:
        info = parse_y4m_header(f)
    return VideoStreamInfo(info.width, info.height, info.bit_depth, info.chroma,
                           info.frame_rate, count_y4m_frames(path))


def frame_to_bytes(frame: FrameBuffer, info: VideoStreamInfo) -> bytes:
    return b"".join(np.ascontiguousarray(p, dtype=info.dtype).tobytes() for p in frame.planes)


def y4m_header_bytes(info: VideoStreamInfo) -> bytes:
    tag = info.chroma.value
    if info.bit_depth == 10:
        tag += "p10"
    elif info.chroma is Chroma.C420:
        tag = "420jpeg"
    rate = info.frame_rate
    return (f"YUV4MPEG2 W{info.width} H{info.height} F{rate.numerator}:{rate.denominator}"
            f" Ip A1:1 C{tag}\n").encode("ascii")


def write_y4m(path: str | os.PathLike, info: VideoStreamInfo, frames) -> int:
    """Write ``frames`` (FrameBuffers or plane triples) as a Y4M file; returns frame count."""
    n = 0
    with open(path, "wb") as f:
        f.write(y4m_header_bytes(info))
        for frame in frames:
            if not isinstance(frame, FrameBuffer):
                frame = FrameBuffer(n, tuple(frame))
            f.write(FRAME_MARKER + b"\n")
            f.write(frame_to_bytes(frame, info))
            n += 1
    return n


def write_raw(path: str | os.PathLike, info: VideoStreamInfo, frames) -> int:
    n = 0
    with open(path, "wb") as f:
        for frame in frames:
            if not isinstance(frame, FrameBuffer):
                frame = FrameBuffer(n, tuple(frame))
            f.write(frame_to_bytes(frame, info))
            n += 1
    return n
