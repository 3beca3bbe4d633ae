"""Spatially-adaptive modulation: per-channel normalisation of a feature map
followed by a spatially varying affine transform whose scale and shift are
convolutions of the inpainted garment feature.

Feature maps are ``(C, H, W)`` arrays. Functions keep the input precision
(float32 in production); reductions accumulate in float64.
"""
from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ShapeMismatch

DEFAULT_EPS = 1e-5


def _as_fmap(x, name: str) -> np.ndarray:
    a = np.asarray(x)
    if a.ndim != 3:
        raise ShapeMismatch(f"{name} must be (C, H, W), got shape {a.shape}")
    if a.dtype not in (np.float32, np.float64):
        a = a.astype(np.float32)
    return a


def channel_stats(h) -> tuple[np.ndarray, np.ndarray]:
    """Population mean and standard deviation of each channel (divides by H*W)."""
    h = _as_fmap(h, "h")
    if h.shape[1] * h.shape[2] < 1:
        raise ShapeMismatch("feature map has no spatial extent")
    flat = h.reshape(h.shape[0], -1).astype(np.float64)
    mu = flat.mean(axis=1)
    sigma = np.sqrt(((flat - mu[:, None]) ** 2).mean(axis=1))
    return mu.astype(h.dtype), sigma.astype(h.dtype)


@dataclass(frozen=True, eq=False)
class AffineParams:
    gamma: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        if np.shape(self.gamma) != np.shape(self.beta):
            raise ShapeMismatch(f"gamma {np.shape(self.gamma)} and beta {np.shape(self.beta)} differ")


def _check(h, params: AffineParams):
    h = _as_fmap(h, "h")
    g = np.asarray(params.gamma, dtype=h.dtype)
    b = np.asarray(params.beta, dtype=h.dtype)
    if g.shape != h.shape:
        raise ShapeMismatch(f"gamma/beta shape {g.shape} does not match h {h.shape}")
    return h, g, b


def spade_modulate(h, params: AffineParams, eps: float = DEFAULT_EPS) -> np.ndarray:
    """``gamma * (h - mu) / (sigma + eps) + beta`` with per-channel ``mu``, ``sigma``."""
    if eps < 0:
        raise ValueError("eps must be non-negative")
    h, g, b = _check(h, params)
    mu, sigma = channel_stats(h)
    normed = (h - mu[:, None, None]) / (sigma[:, None, None] + h.dtype.type(eps))
    return g * normed + b


def spade_backward(h, params: AffineParams, eps: float, upstream_grad):
    """Gradients of ``sum(upstream_grad * spade_modulate(h, params, eps))``.

    Returns ``(grad_h, grad_gamma, grad_beta)``; ``grad_h`` includes the
    dependence of the channel mean and deviation on ``h``.
    """
    h, g, _ = _check(h, params)
    up = np.asarray(upstream_grad, dtype=h.dtype)
    if up.shape != h.shape:
        raise ShapeMismatch(f"upstream_grad shape {up.shape} does not match h {h.shape}")
    c = h.shape[0]
    n = h.shape[1] * h.shape[2]
    mu, sigma = channel_stats(h)
    centered = h - mu[:, None, None]
    s = sigma + h.dtype.type(eps)
    normed = centered / s[:, None, None]
    grad_beta = up.copy()
    grad_gamma = up * normed
    q = (up * g).reshape(c, -1)
    cen = centered.reshape(c, -1)
    term1 = (q - q.mean(axis=1, keepdims=True)) / s[:, None]
    dot = (q * cen).sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        coef = np.where(sigma > 0, dot / (n * sigma * s * s), 0.0)
    grad_h = (term1 - coef[:, None] * cen).reshape(h.shape).astype(h.dtype)
    return grad_h, grad_gamma, grad_beta


# --- convolutions -----------------------------------------------------------

_MAGIC = b"CNVP"
_VERSION = 1
_HEADER = struct.Struct("<4sIIII")  # magic, version, out_c, in_c, k


@dataclass(frozen=True, eq=False)
class ConvParams:
    weight: np.ndarray  # (out_c, in_c, k, k)
    bias: np.ndarray    # (out_c,)

    def __post_init__(self):
        w = np.asarray(self.weight)
        b = np.asarray(self.bias)
        if w.ndim != 4 or w.shape[2] != w.shape[3]:
            raise ShapeMismatch(f"weight must be (out, in, k, k), got {w.shape}")
        if w.shape[2] not in (1, 3, 5):
            raise ShapeMismatch(f"kernel size {w.shape[2]} not in {{1, 3, 5}}")
        if b.shape != (w.shape[0],):
            raise ShapeMismatch(f"bias shape {b.shape} != ({w.shape[0]},)")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise ValueError("conv parameters must be finite")

    @property
    def out_channels(self) -> int:
        return self.weight.shape[0]

    @property
    def in_channels(self) -> int:
        return self.weight.shape[1]

    @property
    def kernel_size(self) -> int:
        return self.weight.shape[2]

    def to_bytes(self) -> bytes:
        """Little-endian layout: header ``<4sIIII`` (b"CNVP", version, out_c, in_c, k),
        float32 weights row-major, float32 bias, then a uint32 CRC-32 of everything before it."""
        body = _HEADER.pack(_MAGIC, _VERSION, self.out_channels, self.in_channels, self.kernel_size)
        body += np.ascontiguousarray(self.weight, dtype="<f4").tobytes()
        body += np.ascontiguousarray(self.bias, dtype="<f4").tobytes()
        return body + struct.pack("<I", zlib.crc32(body))

    @classmethod
    def from_bytes(cls, data: bytes) -> "ConvParams":
        if len(data) < _HEADER.size + 4:
            raise ValueError("conv params file truncated")
        magic, version, oc, ic, k = _HEADER.unpack_from(data)
        if magic != _MAGIC:
            raise ValueError(f"bad magic {magic!r}")
        if version != _VERSION:
            raise ValueError(f"unsupported version {version}")
        nw = oc * ic * k * k
        expect = _HEADER.size + 4 * (nw + oc) + 4
        if len(data) != expect:
            raise ValueError(f"conv params file has {len(data)} bytes, expected {expect}")
        (crc,) = struct.unpack_from("<I", data, expect - 4)
        if crc != zlib.crc32(data[: expect - 4]):
            raise ValueError("conv params checksum mismatch")
        w = np.frombuffer(data, dtype="<f4", count=nw, offset=_HEADER.size).reshape(oc, ic, k, k)
        b = np.frombuffer(data, dtype="<f4", count=oc, offset=_HEADER.size + 4 * nw)
        return cls(w.astype(np.float32), b.astype(np.float32))

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def load(cls, path: Union[str, Path]) -> "ConvParams":
        return cls.from_bytes(Path(path).read_bytes())


def conv2d_same(x, params: ConvParams) -> np.ndarray:
    """Stride-1 cross-correlation with zero padding that keeps H and W."""
    x = _as_fmap(x, "x")
    if x.shape[0] != params.in_channels:
        raise ShapeMismatch(f"input has {x.shape[0]} channels, conv expects {params.in_channels}")
    k = params.kernel_size
    p = k // 2
    xp = np.pad(x, ((0, 0), (p, p), (p, p)))
    win = sliding_window_view(xp, (k, k), axis=(1, 2))  # (Cin, H, W, k, k)
    w = np.asarray(params.weight, dtype=x.dtype)
    out = np.einsum("ihwab,oiab->ohw", win, w, optimize=True)
    return out + np.asarray(params.bias, dtype=x.dtype)[:, None, None]


def affine_from_features(f_g, conv_gamma: ConvParams, conv_beta: ConvParams) -> AffineParams:
    if conv_gamma.out_channels != conv_beta.out_channels:
        raise ShapeMismatch("gamma and beta convolutions produce different channel counts")
    return AffineParams(conv2d_same(f_g, conv_gamma), conv2d_same(f_g, conv_beta))
