"""Video complexity analysis from blockwise DCT energy, with SI/TI reference metrics."""

__version__ = "0.1.0"

from .features import FrameFeatures, analyze_frame
from .ingest import Chroma, FrameBuffer, VideoStreamInfo, open_raw_yuv, open_y4m
from .pipeline import AnalysisReport, AnalyzerConfig, analyze_stream, resolve_config
from .siti import sequence_siti
from .stats import pearson, summarize, write_csv
from .transform import KernelPath, dct2d

__all__ = [
    "AnalysisReport",
    "AnalyzerConfig",
    "Chroma",
    "FrameBuffer",
    "FrameFeatures",
    "KernelPath",
    "VideoStreamInfo",
    "analyze_frame",
    "analyze_stream",
    "dct2d",
    "open_raw_yuv",
    "open_y4m",
    "pearson",
    "resolve_config",
    "sequence_siti",
    "summarize",
    "write_csv",
]
