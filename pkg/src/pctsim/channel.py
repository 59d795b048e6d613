"""Block-fading channel: per-block constant gain plus circular Gaussian noise.

y_i = h_i x_i + z_i over B blocks of n_c channel uses; z has independent
real and imaginary parts of variance sigma2 each, and sigma2 is known to the
receiver. E_s/N_0 in dB converts as sigma2 = 10^(-snr_db/10) / 2 for unit
symbol energy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ChannelModel",
    "ChannelRealization",
    "sigma2_from_snr_db",
    "sample_fading",
    "transmit",
]

FADING_KINDS = ("uniform-phase", "rayleigh", "fixed")


def sigma2_from_snr_db(snr_db: float) -> float:
    return 10.0 ** (-snr_db / 10.0) / 2.0


@dataclass(frozen=True)
class ChannelModel:
    B: int
    n_c: int
    sigma2: float
    fading_kind: str = "uniform-phase"
    fixed_h: complex = 1.0 + 0.0j

    def __post_init__(self):
        if self.B < 1 or self.n_c < 1:
            raise ValueError("B and n_c must be positive")
        if self.sigma2 < 0:
            raise ValueError("sigma2 must be nonnegative")
        if self.fading_kind not in FADING_KINDS:
            raise ValueError(f"fading_kind must be one of {FADING_KINDS}")

    @property
    def n(self) -> int:
        return self.B * self.n_c


@dataclass(frozen=True)
class ChannelRealization:
    h: np.ndarray  # complex, length B


def sample_fading(model: ChannelModel, rng: np.random.Generator) -> ChannelRealization:
    """One gain per block: unit circle, CN(0,1), or a fixed value."""
    if model.fading_kind == "uniform-phase":
        theta = rng.uniform(0.0, 2.0 * np.pi, size=model.B)
        h = np.exp(1j * theta)
    elif model.fading_kind == "rayleigh":
        h = (rng.standard_normal(model.B) + 1j * rng.standard_normal(model.B)) / np.sqrt(2.0)
    else:
        h = np.full(model.B, model.fixed_h, dtype=np.complex128)
    return ChannelRealization(h=h)


def transmit(model: ChannelModel, x: np.ndarray, real: ChannelRealization,
             rng: np.random.Generator) -> np.ndarray:
    x = np.asarray(x, dtype=np.complex128)
    if x.shape != (model.n,):
        raise ValueError("frame length must equal B * n_c")
    gain = np.repeat(real.h, model.n_c)
    y = gain * x
    if model.sigma2 > 0:
        sd = np.sqrt(model.sigma2)
        y = y + sd * (rng.standard_normal(model.n) + 1j * rng.standard_normal(model.n))
    return y
