"""Bit interleaving, Gray-mapped QPSK, and soft demapping to bit LLRs.

The mapping is symmetric: complementing both bits of a symbol negates it.
Together with the all-ones last row of the polar transform this is what makes
a channel estimate and its negative indistinguishable to the inner code.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ModemSpec",
    "InterleaverSpec",
    "random_interleaver",
    "interleave",
    "deinterleave",
    "map_qpsk",
    "demap_qpsk",
]


@dataclass(frozen=True)
class ModemSpec:
    """delta is the per-dimension amplitude; E_s = 2 delta^2 = 1 by default."""

    delta: float = 2.0 ** -0.5

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError("delta must be positive")


@dataclass(eq=False)
class InterleaverSpec:
    length: int
    permutation: np.ndarray
    seed: int

    def __post_init__(self):
        p = np.asarray(self.permutation)
        if p.shape != (self.length,) or not np.array_equal(np.sort(p), np.arange(self.length)):
            raise ValueError("permutation must be a bijection on [length]")


def random_interleaver(length: int, seed: int) -> InterleaverSpec:
    perm = np.random.default_rng(seed).permutation(length).astype(np.int64)
    return InterleaverSpec(length=length, permutation=perm, seed=seed)


def interleave(spec: InterleaverSpec, bits: np.ndarray) -> np.ndarray:
    bits = np.asarray(bits)
    if bits.shape[-1] != spec.length:
        raise ValueError("length mismatch")
    return bits[..., spec.permutation]


def deinterleave(spec: InterleaverSpec, values: np.ndarray) -> np.ndarray:
    """Inverse of interleave; applied to LLRs on the receive side."""
    values = np.asarray(values)
    if values.shape[-1] != spec.length:
        raise ValueError("length mismatch")
    out = np.empty_like(values)
    out[..., spec.permutation] = values
    return out


def map_qpsk(spec: ModemSpec, c: np.ndarray) -> np.ndarray:
    """Pairs (c1, c2) to ((-1)^c1 + j(-1)^c2) * delta, one symbol per bit pair."""
    c = np.asarray(c)
    if c.shape[-1] % 2:
        raise ValueError("bit row length must be even")
    c1 = c[..., 0::2].astype(np.float64)
    c2 = c[..., 1::2].astype(np.float64)
    return spec.delta * ((1.0 - 2.0 * c1) + 1j * (1.0 - 2.0 * c2))


def demap_qpsk(spec: ModemSpec, y: np.ndarray, h_hat: np.ndarray | complex,
               sigma2: float) -> np.ndarray:
    """Bitwise LLRs log p(y|bit=0)/p(y|bit=1) under a Gaussian channel with gain h_hat.

    Mismatched when h_hat is an estimate: the estimate is plugged into the
    likelihood as if it were the true gain. Broadcasts over leading axes, so a
    stack of channel hypotheses demaps in one call. No clamping here; callers
    that need bounded LLRs clamp at their own boundary.
    """
    if sigma2 <= 0:
        raise ValueError("sigma2 must be positive")
    y = np.asarray(y, dtype=np.complex128)
    w = np.conj(h_hat) * y
    scale = 2.0 * spec.delta / sigma2
    out = np.empty(w.shape[:-1] + (2 * w.shape[-1],), dtype=np.float64)
    out[..., 0::2] = scale * w.real
    out[..., 1::2] = scale * w.imag
    return out
