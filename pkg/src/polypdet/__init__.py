"""Geometric polyp detection for capsule endoscopy frames."""

from .classifier import FrameDecision, process_frame
from .imaging import CircularMask
from .params import PipelineParams

__all__ = ["CircularMask", "FrameDecision", "PipelineParams", "process_frame"]
__version__ = "0.1.0"
