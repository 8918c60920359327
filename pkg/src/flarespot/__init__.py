"""Automatic detection and removal of flare spot artifacts in photographs."""
from .detector import FlareDetection, PipelineParams, detect_all
from .imagecore import LabImage, Window, lab_to_rgb, normalize_window, rgb_to_lab
from .pipeline import FlareResult, detect_and_mask, remove_flares

__all__ = [
    "FlareDetection",
    "FlareResult",
    "LabImage",
    "PipelineParams",
    "Window",
    "detect_all",
    "detect_and_mask",
    "lab_to_rgb",
    "normalize_window",
    "remove_flares",
    "rgb_to_lab",
]
__version__ = "0.1.0"
