"""Quantitative comparison of tensors and amplified error-map rendering."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .tensor import ImageTensor

PSNR_CAP = 300.0


@dataclass(frozen=True)
class ConsistencyReport:
    """Error statistics between two same-shape tensors.

    ``psnr`` is measured against peak 1.0 and capped at 300 dB so reports
    stay finite and JSON-safe; ``pixel_count`` is the number of samples
    compared (channels * height * width).
    """

    psnr: float
    l1: float
    mse: float
    max_abs: float
    pixel_count: int

    def to_dict(self) -> dict:
        return {
            "psnr": self.psnr,
            "l1": self.l1,
            "mse": self.mse,
            "max_abs": self.max_abs,
            "pixel_count": self.pixel_count,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def compare(a: ImageTensor, b: ImageTensor) -> ConsistencyReport:
    """Symmetric PSNR / L1 / MSE / max-abs report for two tensors."""
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    diff = np.abs(a.data - b.data)
    mse = float(np.mean(diff * diff))
    psnr = PSNR_CAP if mse == 0.0 else min(PSNR_CAP, 10.0 * math.log10(1.0 / mse))
    return ConsistencyReport(
        psnr=psnr,
        l1=float(np.mean(diff)),
        mse=mse,
        max_abs=float(np.max(diff)),
        pixel_count=int(diff.size),
    )


def error_map(gt: ImageTensor, sr: ImageTensor, gain: float = 5.0) -> ImageTensor:
    """Render per-pixel error as a heat image.

    Each channel's absolute difference is amplified by ``gain`` and clipped
    to 1, the channels are averaged into a scalar magnitude, and the
    magnitude drives a monotone black-red-yellow-white ramp with
    breakpoints at 0, 1/3, 2/3 and 1:

        red   = clip(3m,     0, 1)
        green = clip(3m - 1, 0, 1)
        blue  = clip(3m - 2, 0, 1)
    """
    if gt.shape != sr.shape:
        raise ValueError(f"shape mismatch: {gt.shape} vs {sr.shape}")
    if not gain > 0.0:
        raise ValueError(f"gain must be positive, got {gain}")
    amplified = np.minimum(gain * np.abs(gt.data - sr.data), 1.0)
    magnitude = amplified.mean(axis=0)
    red = np.clip(3.0 * magnitude, 0.0, 1.0)
    green = np.clip(3.0 * magnitude - 1.0, 0.0, 1.0)
    blue = np.clip(3.0 * magnitude - 2.0, 0.0, 1.0)
    return ImageTensor(np.stack([red, green, blue]))
