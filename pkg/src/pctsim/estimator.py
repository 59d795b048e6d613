"""Blind channel estimation from frozen-bit constraints.

Amplitudes come in closed form from per-block received energy. Phases come
from maximizing the likelihood that every frozen bit up to a chosen stage is
zero, evaluated by partial list decoding on a coarse grid and then on a fine
grid around the coarse winner. The likelihood cannot tell a phase vector from
its all-blocks pi shift, so the last dimension searches [0, pi) only and the
returned estimate is the canonical member of the sign pair.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .channel import ChannelModel
from .modem import ModemSpec, InterleaverSpec, demap_qpsk, deinterleave
from .polar import NodeCounter, PolarCode, PuncturingSpec, SclDecoder, apply_puncturing

__all__ = [
    "EstimatorConfig",
    "ChannelEstimate",
    "estimate_amplitudes",
    "phase_metric",
    "estimate_phases",
]


@dataclass(frozen=True)
class EstimatorConfig:
    beta: int
    L_e: int = 1
    coarse_levels: int = 8
    fine_levels: int = 8
    metric_mode: str = "sum"  # "sum" or "max"

    def __post_init__(self):
        if self.beta < 1:
            raise ValueError("beta must be >= 1")
        if self.L_e < 1:
            raise ValueError("L_e must be >= 1")
        if self.coarse_levels < 1 or self.fine_levels < 1:
            raise ValueError("grid levels must be >= 1")
        if self.metric_mode not in ("sum", "max"):
            raise ValueError("metric_mode must be 'sum' or 'max'")


@dataclass
class ChannelEstimate:
    r_hat: np.ndarray  # per-block amplitudes, >= 0
    theta_hat: np.ndarray  # per-block phases

    @property
    def h_hat(self) -> np.ndarray:
        return self.r_hat * np.exp(1j * self.theta_hat)


def estimate_amplitudes(y: np.ndarray, model: ChannelModel, delta: float) -> np.ndarray:
    """r_hat_i = sqrt(max(0, ||y_i||^2 / n_c - 2 sigma^2)) / (sqrt(2) delta).

    The radicand is the received energy per use minus the known noise energy;
    it goes negative on lucky noise draws, where 0 is the closest admissible
    amplitude.
    """
    blocks = np.asarray(y, dtype=np.complex128).reshape(model.B, model.n_c)
    energy = np.sum(np.abs(blocks) ** 2, axis=1) / model.n_c
    radicand = np.maximum(0.0, energy - 2.0 * model.sigma2)
    return np.sqrt(radicand) / (np.sqrt(2.0) * delta)


def _metric_rows(y, code, modem, interleaver, r_hat, theta_rows, cfg, model,
                 decoder, counter, punct):
    """Prefix metric for a stack of phase hypotheses, one row per hypothesis."""
    conj_gain = np.repeat(r_hat[np.newaxis, :] * np.exp(-1j * theta_rows),
                          model.n_c, axis=1)
    w = conj_gain * y[np.newaxis, :]
    scale = 2.0 * modem.delta / model.sigma2
    llr = np.empty((theta_rows.shape[0], 2 * y.shape[0]))
    llr[:, 0::2] = scale * w.real
    llr[:, 1::2] = scale * w.imag
    llr = deinterleave(interleaver, llr)
    out = np.empty(theta_rows.shape[0])
    for i in range(theta_rows.shape[0]):
        row = llr[i] if punct is None else apply_puncturing(punct, llr[i])
        out[i] = decoder.prefix_metric(row, cfg.beta, cfg.L_e, counter,
                                       cfg.metric_mode)
    return out


def phase_metric(y, code: PolarCode, modem: ModemSpec, r_hat: np.ndarray,
                 thetas: np.ndarray, cfg: EstimatorConfig, model: ChannelModel,
                 interleaver: InterleaverSpec,
                 counter: NodeCounter | None = None,
                 decoder: SclDecoder | None = None,
                 punct: PuncturingSpec | None = None) -> float:
    """Log-likelihood of the frozen prefix under gains r_hat * exp(j thetas).

    Exactly invariant under a simultaneous pi shift of every block phase:
    that shift negates all LLRs, and prefixes through any stage that leaves
    the last input bit free keep the same likelihood under negation.
    """
    if model.sigma2 <= 0:
        raise ValueError("phase search needs sigma2 > 0")
    y = np.asarray(y, dtype=np.complex128)
    thetas = np.asarray(thetas, dtype=np.float64)
    if decoder is None:
        decoder = SclDecoder(code, cfg.L_e)
    return float(
        _metric_rows(y, code, modem, interleaver, np.asarray(r_hat, dtype=np.float64),
                     thetas[np.newaxis, :], cfg, model, decoder, counter, punct)[0]
    )


def estimate_phases(y, code: PolarCode, modem: ModemSpec, r_hat: np.ndarray,
                    cfg: EstimatorConfig, model: ChannelModel,
                    interleaver: InterleaverSpec,
                    counter: NodeCounter | None = None,
                    decoder: SclDecoder | None = None,
                    punct: PuncturingSpec | None = None) -> np.ndarray:
    """Coarse-to-fine grid search over [0,2pi)^(B-1) x [0,pi).

    Coarse: coarse_levels points per dimension anchored at 0. Fine: around the
    coarse winner w, per-dimension offsets (2k + 1 - fine_levels) * s / (2 *
    fine_levels) for coarse step s, a uniform grid of spacing s/fine_levels
    centered on w without re-evaluating it. Worst-case quantization error per
    dimension is s / (2 * fine_levels). Total metric evaluations:
    coarse_levels^B + fine_levels^B.
    """
    if model.sigma2 <= 0:
        raise ValueError("phase search needs sigma2 > 0")
    y = np.asarray(y, dtype=np.complex128)
    r_hat = np.asarray(r_hat, dtype=np.float64)
    B = model.B
    if decoder is None:
        decoder = SclDecoder(code, cfg.L_e)
    # last dimension covers half the circle; the pi ambiguity supplies the rest
    spans = np.full(B, 2.0 * np.pi)
    spans[B - 1] = np.pi
    steps = spans / cfg.coarse_levels

    axes = [steps[d] * np.arange(cfg.coarse_levels) for d in range(B)]
    coarse = np.array(list(itertools.product(*axes)))
    cm = _metric_rows(y, code, modem, interleaver, r_hat, coarse, cfg, model,
                      decoder, counter, punct)
    best = int(np.argmax(cm))
    w = coarse[best]
    best_metric = cm[best]

    k = np.arange(cfg.fine_levels)
    axes = [w[d] + (2 * k + 1 - cfg.fine_levels) * steps[d] / (2 * cfg.fine_levels)
            for d in range(B)]
    fine = np.array(list(itertools.product(*axes)))
    fm = _metric_rows(y, code, modem, interleaver, r_hat, fine, cfg, model,
                      decoder, counter, punct)
    fbest = int(np.argmax(fm))
    theta = fine[fbest] if fm[fbest] > best_metric else w

    # canonical member of the sign pair: shift every block by pi together
    # until the last block's phase lies in [0, pi)
    theta = np.mod(theta, 2.0 * np.pi)
    if theta[B - 1] >= np.pi:
        theta = np.mod(theta + np.pi, 2.0 * np.pi)
    return theta
