"""Extension operators sharing the consistent-combine machinery:
per-pixel channel mean (gray observation of a color image) and block
compressed sensing with orthonormal sampling rows.

``generic_pd`` is the operator-agnostic combine: it keeps the part of a
raw prediction the operator cannot observe and fills the observed part
straight from the measurement, so applying the operator to the result
returns the measurement.
"""

from __future__ import annotations

import math
import struct
from pathlib import Path

import numpy as np

from .linop import LinearOperator, svd
from .rng import Stream
from .tensor import ImageTensor

SENSE_MAGIC = b"PDM1"
_SENSE_HEADER = struct.Struct("<4sIIQ")


def _channel_mean(a: np.ndarray) -> np.ndarray:
    # Anchored on channel 0 so equal channels average to themselves exactly.
    first = a[:1]
    return first + (a - first).sum(axis=0, keepdims=True) / a.shape[0]


def color_to_gray(x: ImageTensor) -> ImageTensor:
    """Per-pixel mean of the three channels."""
    if x.channels != 3:
        raise ValueError(f"expected a 3-channel image, got {x.channels}")
    return ImageTensor(_channel_mean(x.data))


def gray_to_color(g: ImageTensor, adjoint: bool = False) -> ImageTensor:
    """Replicate a gray image into all three channels.

    Replication is the true pseudo-inverse of the channel mean, so
    ``color_to_gray(gray_to_color(g))`` returns ``g`` exactly.  With
    ``adjoint=True`` the channels carry g/3 instead (the transpose of the
    forward map); that variant is provided only for comparison and is not
    a pseudo-inverse, so it does not preserve the round trip.
    """
    if g.channels != 1:
        raise ValueError(f"expected a 1-channel image, got {g.channels}")
    data = np.repeat(g.data, 3, axis=0)
    if adjoint:
        data = data / 3.0
    return ImageTensor(data)


class ColorMeanOp(LinearOperator):
    """Channel-mean observation of a fixed-size color image."""

    def __init__(self, height: int, width: int):
        self.in_shape = (3, height, width)
        self.out_shape = (1, height, width)

    def forward(self, x: ImageTensor) -> ImageTensor:
        self._check(x, self.in_shape, "input")
        return color_to_gray(x)

    def pinv(self, y: ImageTensor) -> ImageTensor:
        self._check(y, self.out_shape, "measurement")
        return gray_to_color(y)


def measurement_count(block: int, ratio: float) -> int:
    """Measurements per block: ceil(ratio * block^2)."""
    if block < 1:
        raise ValueError(f"block size must be >= 1, got {block}")
    if not 0.0 < ratio <= 1.0:
        raise ValueError(f"sampling ratio must lie in (0, 1], got {ratio}")
    return int(math.ceil(ratio * block * block))


class BlockSenseOp(LinearOperator):
    """Blockwise sensing with orthonormal rows.

    Each B x B block, flattened row-major, is measured by ``q``
    orthonormal functionals; because the rows are orthonormal their
    transpose is the exact pseudo-inverse.  Measurements are stacked in
    the channel axis as channel_index = image_channel * q + row_index.
    The operator applies to any image whose sides divide by B, so shapes
    stay unbound unless ``bind_shape`` is called.
    """

    def __init__(self, block: int, q: int, seed: int, ratio: float, rows: np.ndarray):
        rows = np.array(rows, dtype=np.float64)
        if rows.shape != (q, block * block):
            raise ValueError(f"rows must be {(q, block * block)}, got {rows.shape}")
        rows.setflags(write=False)
        self.block = block
        self.n = block * block
        self.q = q
        self.seed = seed
        self.ratio = ratio
        self.rows = rows

    def bind_shape(self, channels: int, height: int, width: int) -> "BlockSenseOp":
        """Copy with shapes fixed so shape-dependent diagnostics can run."""
        if height % self.block or width % self.block:
            raise ValueError(f"image size {height}x{width} is not divisible by block {self.block}")
        bound = BlockSenseOp(self.block, self.q, self.seed, self.ratio, self.rows)
        bound.in_shape = (channels, height, width)
        bound.out_shape = (channels * self.q, height // self.block, width // self.block)
        return bound

    def forward(self, x: ImageTensor) -> ImageTensor:
        self._check(x, self.in_shape, "input")
        return cs_measure(self, x)

    def pinv(self, y: ImageTensor) -> ImageTensor:
        self._check(y, self.out_shape, "measurement")
        return cs_pinv(self, y)


def cs_build(block: int, ratio: float, seed: int = 0) -> BlockSenseOp:
    """Construct a block sensing operator from a seeded Gaussian matrix.

    The rows are the first q rows of U @ V.T from the SVD of a B^2 x B^2
    standard-normal matrix drawn from the portable SplitMix64 stream
    (row-major fill), so a given (block, ratio, seed) rebuilds the same
    operator bit-for-bit on any platform.
    """
    q = measurement_count(block, ratio)
    n = block * block
    gauss = Stream(seed).gaussian((n, n))
    factors = svd(gauss)
    basis = factors.u @ factors.v.T
    return BlockSenseOp(block=block, q=q, seed=seed, ratio=float(ratio), rows=basis[:q])


def cs_measure(op: BlockSenseOp, x: ImageTensor) -> ImageTensor:
    """Measure every block of every channel with the sampling rows."""
    c, h, w = x.shape
    b = op.block
    if h % b or w % b:
        raise ValueError(f"image size {h}x{w} is not divisible by block {b}")
    nh, nw = h // b, w // b
    blocks = x.data.reshape(c, nh, b, nw, b).transpose(0, 1, 3, 2, 4).reshape(c, nh, nw, op.n)
    meas = np.einsum("qn,chwn->cqhw", op.rows, blocks)
    return ImageTensor(meas.reshape(c * op.q, nh, nw))


def cs_pinv(op: BlockSenseOp, m: ImageTensor) -> ImageTensor:
    """Back-project measurements through the transposed rows."""
    cq, nh, nw = m.shape
    if cq % op.q:
        raise ValueError(f"measurement channels {cq} are not a multiple of q={op.q}")
    c = cq // op.q
    per = m.data.reshape(c, op.q, nh, nw)
    blocks = np.einsum("qn,cqhw->chwn", op.rows, per)
    b = op.block
    out = blocks.reshape(c, nh, nw, b, b).transpose(0, 1, 3, 2, 4).reshape(c, nh * b, nw * b)
    return ImageTensor(out)


def save_sense_op(op: BlockSenseOp, path: str | Path) -> None:
    """Write the "PDM1" container: magic, u32 block, u32 q, u64 seed, then
    q*B^2 little-endian f64 row weights."""
    header = _SENSE_HEADER.pack(SENSE_MAGIC, op.block, op.q, op.seed & 0xFFFFFFFFFFFFFFFF)
    Path(path).write_bytes(header + op.rows.astype("<f8").tobytes())


def load_sense_op(path: str | Path) -> BlockSenseOp:
    blob = Path(path).read_bytes()
    if len(blob) < _SENSE_HEADER.size or blob[:4] != SENSE_MAGIC:
        raise ValueError(f"{path}: not a PDM1 operator file (bad magic)")
    _, block, q, seed = _SENSE_HEADER.unpack_from(blob)
    n = block * block
    if len(blob) - _SENSE_HEADER.size != q * n * 8:
        raise ValueError(f"{path}: payload does not match q={q}, block={block}")
    rows = np.frombuffer(blob, dtype="<f8", offset=_SENSE_HEADER.size).reshape(q, n)
    return BlockSenseOp(block=block, q=q, seed=seed, ratio=q / n, rows=rows)


def generic_pd(op: LinearOperator, y: ImageTensor, x_raw: ImageTensor) -> ImageTensor:
    """Consistent combine for any operator with an exact pseudo-inverse.

    Returns ``pinv(y) + (x_raw - pinv(forward(x_raw)))``; pushing the
    result back through ``forward`` reproduces ``y`` up to float
    rounding whenever ``forward(pinv(.))`` is the identity.
    """
    restored = op.pinv(y)
    if restored.shape != x_raw.shape:
        raise ValueError(
            f"raw prediction shape {x_raw.shape} does not match operator input {restored.shape}"
        )
    projected = op.pinv(op.forward(x_raw))
    return ImageTensor(restored.data + (x_raw.data - projected.data))
