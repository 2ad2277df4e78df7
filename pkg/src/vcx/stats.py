"""Sequence summaries, Pearson correlation and CSV output."""

from __future__ import annotations

import contextlib
import math
import os
from dataclasses import dataclass, field
from typing import IO, Iterable, Optional, Sequence, Union

from .features import FEATURE_NAMES, FrameFeatures
from .siti import SitiRecord, SitiSummary

FEATURES_HEADER = "POC," + ",".join(FEATURE_NAMES)
SITI_HEADER = "POC,SI_frame,TI_frame"

Destination = Union[str, os.PathLike, IO[str]]


class LengthMismatch(ValueError):
    pass


class DegenerateInput(ValueError):
    pass


class EmptyInput(ValueError):
    pass


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Sample Pearson correlation coefficient of two equal-length vectors.

    Raises :class:`DegenerateInput` when either vector is constant rather
    than returning NaN.
    """
    x = [float(v) for v in x]
    y = [float(v) for v in y]
    if len(x) != len(y):
        raise LengthMismatch(f"lengths differ: {len(x)} vs {len(y)}")
    if len(x) < 2:
        raise LengthMismatch("need at least two points")
    if min(x) == max(x) or min(y) == max(y):
        raise DegenerateInput("correlation is undefined for a constant vector")
    n = len(x)
    mx = math.fsum(x) / n
    my = math.fsum(y) / n
    dx = [v - mx for v in x]
    dy = [v - my for v in y]
    sxy = math.fsum(a * b for a, b in zip(dx, dy))
    sxx = math.fsum(a * a for a in dx)
    syy = math.fsum(b * b for b in dy)
    r = sxy / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


@dataclass
class SequenceSummary:
    frames: int
    mean: dict = field(default_factory=dict)
    max: dict = field(default_factory=dict)
    SI: Optional[float] = None
    TI: Optional[float] = None

    def lines(self) -> list[str]:
        out = [f"frames={self.frames}"]
        for name in FEATURE_NAMES:
            if self.mean.get(name) is not None:
                out.append(f"{name}: mean={self.mean[name]:.6f} max={self.max[name]:.6f}")
        if self.SI is not None:
            out.append(f"SI={self.SI:.6f} TI={self.TI:.6f}")
        return out


def summarize(records: Sequence[FrameFeatures], siti: SitiSummary | None = None) -> SequenceSummary:
    if not records:
        raise EmptyInput("no records to summarize")
    summary = SequenceSummary(len(records))
    for name in FEATURE_NAMES:
        column = [getattr(r, name) for r in records]
        if any(v is None for v in column):
            summary.mean[name] = summary.max[name] = None
            continue
        summary.mean[name] = math.fsum(column) / len(column)
        summary.max[name] = max(column)
    if siti is not None:
        summary.SI, summary.TI = siti.SI, siti.TI
    return summary


def _fmt(value: Optional[float]) -> str:
    return "" if value is None else f"{value:.6f}"


@contextlib.contextmanager
def _open_text(destination: Destination):
    if hasattr(destination, "write"):
        yield destination
    else:
        with open(destination, "w", encoding="ascii", newline="\n") as f:
            yield f


def _write_lines(lines: Iterable[str], destination: Destination) -> int:
    text = "".join(line + "\n" for line in lines)
    with _open_text(destination) as f:
        f.write(text)
    return len(text.encode("ascii"))


def features_csv_lines(records: Iterable[FrameFeatures]) -> list[str]:
    lines = [FEATURES_HEADER]
    for r in records:
        lines.append(",".join([str(r.poc)] + [_fmt(v) for v in r.values()]))
    return lines


def write_csv(records: Iterable[FrameFeatures], destination: Destination) -> int:
    """Write the features CSV; returns the number of bytes written."""
    return _write_lines(features_csv_lines(records), destination)


def siti_csv_lines(records: Iterable[SitiRecord], summary: SitiSummary | None) -> list[str]:
    lines = [SITI_HEADER]
    for r in records:
        lines.append(f"{r.poc},{_fmt(r.si_frame)},{_fmt(r.ti_frame)}")
    if summary is not None:
        lines.append(f"# SI={summary.SI:.6f} TI={summary.TI:.6f}")
    return lines


def write_siti_csv(records: Iterable[SitiRecord], summary: SitiSummary | None,
                   destination: Destination) -> int:
    return _write_lines(siti_csv_lines(records, summary), destination)


def _parse_value(text: str) -> Optional[float]:
    return None if text == "" else float(text)


def _read_text(source: Destination) -> str:
    if hasattr(source, "read"):
        return source.read()
    with open(source, encoding="ascii") as f:
        return f.read()


def read_features_csv(source: Destination) -> list[FrameFeatures]:
    lines = _read_text(source).splitlines()
    if not lines or lines[0] != FEATURES_HEADER:
        raise ValueError("not a features CSV")
    records = []
    for line in lines[1:]:
        if not line or line.startswith("#"):
            continue
        poc, *values = line.split(",")
        records.append(FrameFeatures(int(poc), *[_parse_value(v) for v in values]))
    return records


def read_siti_csv(source: Destination) -> tuple[list[SitiRecord], SitiSummary | None]:
    lines = _read_text(source).splitlines()
    if not lines or lines[0] != SITI_HEADER:
        raise ValueError("not a SITI CSV")
    records, summary = [], None
    for line in lines[1:]:
        if line.startswith("# SI="):
            si, ti = line[2:].split()
            summary = SitiSummary(float(si[3:]), float(ti[3:]))
        elif line:
            poc, si, ti = line.split(",")
            records.append(SitiRecord(int(poc), float(si), _parse_value(ti)))
    return records, summary
