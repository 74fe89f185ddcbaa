"""Separable image resampling with box, bilinear, and bicubic kernels.

Covers the downsamplers a reconstruction is typically tested against.
Antialiased downsampling stretches the kernel by the scale factor so it
low-passes before decimation; without antialiasing the kernel keeps its
unit support and simply interpolates at the decimated positions.  Output
pixel ``i`` samples the source at ``(i + 0.5) * s - 0.5`` going down and
``(i + 0.5) / s - 0.5`` going up, which keeps constant images fixed and
the two directions mutually consistent.  Borders clamp to the edge pixel
and every output pixel's weights are normalized to sum to 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .pooling import pool_up
from .tensor import ImageTensor, load_tensor

FILTERS = ("box", "bilinear", "bicubic")
DIRECTIONS = ("down", "up")
PREDICTORS = ("nearest", "bilinear", "bicubic", "external")

_CUBIC_A = -0.5  # Catmull-Rom family coefficient


def _kernel_box(t: np.ndarray) -> np.ndarray:
    # Half-open support so block boundaries land in exactly one patch.
    return np.where((t >= -0.5) & (t < 0.5), 1.0, 0.0)


def _kernel_bilinear(t: np.ndarray) -> np.ndarray:
    return np.maximum(0.0, 1.0 - np.abs(t))


def _kernel_bicubic(t: np.ndarray) -> np.ndarray:
    at = np.abs(t)
    a = _CUBIC_A
    inner = ((a + 2.0) * at - (a + 3.0)) * at * at + 1.0
    outer = ((a * at - 5.0 * a) * at + 8.0 * a) * at - 4.0 * a
    return np.where(at <= 1.0, inner, np.where(at < 2.0, outer, 0.0))


_KERNELS = {"box": _kernel_box, "bilinear": _kernel_bilinear, "bicubic": _kernel_bicubic}
_RADII = {"box": 0.5, "bilinear": 1.0, "bicubic": 2.0}


@dataclass(frozen=True)
class ResampleSpec:
    """Resampling configuration: kernel, antialias flag, integer scale, direction."""

    filter: str
    antialias: bool
    scale: int
    direction: str

    def __post_init__(self) -> None:
        if self.filter not in FILTERS:
            raise ValueError(f"filter must be one of {FILTERS}, got {self.filter!r}")
        if self.direction not in DIRECTIONS:
            raise ValueError(f"direction must be one of {DIRECTIONS}, got {self.direction!r}")
        if not isinstance(self.scale, int) or self.scale < 1:
            raise ValueError(f"scale must be a positive integer, got {self.scale}")


def _axis_weights(n_in: int, n_out: int, spec: ResampleSpec) -> np.ndarray:
    kernel = _KERNELS[spec.filter]
    # Box downsampling is block averaging whatever the antialias flag says;
    # an unstretched box would degenerate to nearest-neighbour decimation.
    stretchy = spec.antialias or spec.filter == "box"
    stretch = float(spec.scale) if (spec.direction == "down" and stretchy) else 1.0
    support = _RADII[spec.filter] * stretch
    weights = np.zeros((n_out, n_in))
    for i in range(n_out):
        if spec.direction == "down":
            center = (i + 0.5) * spec.scale - 0.5
        else:
            center = (i + 0.5) / spec.scale - 0.5
        lo = math.floor(center - support)
        hi = math.ceil(center + support)
        taps = np.arange(lo, hi + 1)
        w = kernel((taps - center) / stretch)
        np.add.at(weights[i], np.clip(taps, 0, n_in - 1), w)
        weights[i] /= weights[i].sum()
    return weights


def resample(x: ImageTensor, spec: ResampleSpec) -> ImageTensor:
    """Apply separable resampling, horizontal pass then vertical pass."""
    s = spec.scale
    if spec.direction == "down":
        if x.height % s or x.width % s:
            raise ValueError(f"image size {x.height}x{x.width} is not divisible by scale {s}")
        out_h, out_w = x.height // s, x.width // s
    else:
        out_h, out_w = x.height * s, x.width * s
    wh = _axis_weights(x.width, out_w, spec)
    wv = _axis_weights(x.height, out_h, spec)
    out = np.empty((x.channels, out_h, out_w))
    for c in range(x.channels):
        out[c] = wv @ (x.data[c] @ wh.T)
    return ImageTensor(out)


def predict_raw(
    y: ImageTensor, method: str, s: int, external_path=None
) -> ImageTensor:
    """Produce a raw upsampled prediction to feed the consistent combine.

    ``nearest`` is plain replication (identical to ``pool_up``); the
    interpolating methods give smoother guesses; ``external`` loads a
    prediction produced elsewhere and validates its geometry.
    """
    if method not in PREDICTORS:
        raise ValueError(f"predictor must be one of {PREDICTORS}, got {method!r}")
    if s < 1:
        raise ValueError(f"scale must be a positive integer, got {s}")
    if method == "nearest":
        return pool_up(y, s)
    if method == "external":
        if external_path is None:
            raise ValueError("external predictor needs a file path")
        t = load_tensor(external_path)
        expected = (y.channels, s * y.height, s * y.width)
        if t.shape != expected:
            raise ValueError(f"external prediction shape {t.shape}, expected {expected}")
        return t
    return resample(y, ResampleSpec(filter=method, antialias=False, scale=s, direction="up"))
