"""End-to-end transmit and receive chains.

Three receivers share one inner code: a blind receiver that estimates the
channel from frozen-bit constraints and resolves the sign ambiguity with the
outer CRC, a pilot-assisted receiver whose pilots displace coded bits through
quasi-uniform puncturing, and a genie receiver with perfect channel knowledge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelModel
from .crc import CrcSpec, crc_append, crc_check
from .estimator import (ChannelEstimate, EstimatorConfig, estimate_amplitudes,
                        estimate_phases)
from .modem import (InterleaverSpec, ModemSpec, demap_qpsk, deinterleave,
                    interleave, map_qpsk)
from .polar import (LLR_CLAMP, NodeCounter, PolarCode, PuncturingSpec,
                    SclDecoder, apply_puncturing, encode, encode_rows, qup_spec)

__all__ = [
    "DECODED",
    "NO_SURVIVOR",
    "PatConfig",
    "ReceiverVerdict",
    "pat_puncturing",
    "pilot_row",
    "build_frame",
    "frame_log_density",
    "pat_receive",
    "pct_receive",
    "coherent_receive",
]

DECODED = "decoded"
NO_SURVIVOR = "frame_error_no_survivor"


@dataclass(frozen=True)
class PatConfig:
    """Pilots occupy the first n_p symbols of every coherence block."""

    n_p: int

    def __post_init__(self):
        if self.n_p < 1:
            raise ValueError("n_p must be >= 1")


@dataclass
class ReceiverVerdict:
    status: str
    message: np.ndarray | None
    sign_hypothesis: str | None  # '+' or '-' for the blind receiver
    estimator_nodes: int
    decoder_nodes: int
    h_used: ChannelEstimate

    @property
    def visited_nodes(self) -> int:
        return self.estimator_nodes + self.decoder_nodes


def pat_puncturing(code: PolarCode, pat: PatConfig, B: int) -> PuncturingSpec:
    # 2 coded bits per displaced symbol, n_p symbols per block
    return qup_spec(code.N, 2 * B * pat.n_p)


def pilot_row(modem: ModemSpec, n_p: int) -> np.ndarray:
    """Known pilots: the all-zero-bits symbol repeated, same energy as data."""
    return np.full(n_p, modem.delta * (1.0 + 1.0j), dtype=np.complex128)


def build_frame(code: PolarCode, crc: CrcSpec, modem: ModemSpec,
                interleaver: InterleaverSpec, payload: np.ndarray | None,
                rng: np.random.Generator | None = None,
                pat: PatConfig | None = None, B: int = 1):
    """Assemble one frame; returns (polar input u, transmitted symbols x).

    payload=None draws uniform payload bits from rng. With a PatConfig the
    punctured coded bits are dropped before interleaving and pilots are
    prepended per block.
    """
    k_payload = code.K - crc.degree
    if payload is None:
        if rng is None:
            raise ValueError("need rng when payload is not given")
        payload = rng.integers(0, 2, size=k_payload, dtype=np.uint8)
    payload = np.asarray(payload, dtype=np.uint8)
    if payload.shape != (k_payload,):
        raise ValueError("payload length must be K minus the CRC degree")
    u = np.zeros(code.N, dtype=np.uint8)
    u[code.A] = crc_append(payload, crc)
    c = encode(code, u)
    if pat is None:
        live = c
    else:
        live = c[pat_puncturing(code, pat, B).count:]
    d = map_qpsk(modem, interleave(interleaver, live))
    if pat is None:
        return u, d
    pilots = pilot_row(modem, pat.n_p)
    blocks = [np.concatenate([pilots, db]) for db in d.reshape(B, -1)]
    return u, np.concatenate(blocks)


def frame_log_density(y: np.ndarray, x: np.ndarray, h_sym: np.ndarray,
                      sigma2: float) -> float:
    """Exact Gaussian log p(y | x, h) with per-symbol gains h_sym."""
    s2 = max(sigma2, 1e-300)
    resid = np.abs(y - h_sym * x) ** 2
    return float(-np.sum(resid) / (2.0 * s2) - y.shape[0] * math.log(2.0 * math.pi * s2))


def _demap_for_decode(modem: ModemSpec, y: np.ndarray, h_sym: np.ndarray,
                      sigma2: float) -> np.ndarray:
    # decoder inputs are clamped; zero noise becomes hard +-clamp decisions
    if sigma2 > 0:
        return np.clip(demap_qpsk(modem, y, h_sym, sigma2), -LLR_CLAMP, LLR_CLAMP)
    w = np.conj(h_sym) * np.asarray(y, dtype=np.complex128)
    out = np.empty(2 * len(y))
    out[0::2] = LLR_CLAMP * np.sign(w.real)
    out[1::2] = LLR_CLAMP * np.sign(w.imag)
    return out


def _best_crc_survivor(paths, code: PolarCode, crc: CrcSpec) -> int | None:
    for l in range(paths.u.shape[0]):
        if crc_check(paths.u[l, code.A], crc):
            return l
    return None


def _estimate_of(h: np.ndarray) -> ChannelEstimate:
    return ChannelEstimate(r_hat=np.abs(h), theta_hat=np.mod(np.angle(h), 2.0 * np.pi))


def pat_receive(y, code: PolarCode, crc: CrcSpec, modem: ModemSpec,
                interleaver: InterleaverSpec, pat: PatConfig,
                model: ChannelModel, L: int,
                decoder: SclDecoder | None = None) -> ReceiverVerdict:
    """Pilot-based ML channel estimate, then mismatched list decoding."""
    y = np.asarray(y, dtype=np.complex128).reshape(model.B, model.n_c)
    pilots = pilot_row(modem, pat.n_p)
    yp = y[:, :pat.n_p]
    h_hat = yp @ np.conj(pilots) / np.sum(np.abs(pilots) ** 2)
    yd = y[:, pat.n_p:].ravel()
    h_sym = np.repeat(h_hat, model.n_c - pat.n_p)
    punct = pat_puncturing(code, pat, model.B)
    live = deinterleave(interleaver, _demap_for_decode(modem, yd, h_sym, model.sigma2))
    llr = np.zeros(code.N)
    llr[punct.count:] = live
    llr = apply_puncturing(punct, llr)
    if decoder is None:
        decoder = SclDecoder(code, L)
    counter = NodeCounter()
    paths = decoder.decode(llr, L, counter)
    best = _best_crc_survivor(paths, code, crc)
    est = _estimate_of(h_hat)
    if best is None:
        return ReceiverVerdict(NO_SURVIVOR, None, None, 0, counter.visited, est)
    msg = paths.u[best, code.A][: code.K - crc.degree].copy()
    return ReceiverVerdict(DECODED, msg, None, 0, counter.visited, est)


def coherent_receive(y, code: PolarCode, crc: CrcSpec, modem: ModemSpec,
                     interleaver: InterleaverSpec, h: np.ndarray,
                     model: ChannelModel, L: int,
                     decoder: SclDecoder | None = None) -> ReceiverVerdict:
    """Genie receiver: demap with the true per-block gains."""
    y = np.asarray(y, dtype=np.complex128)
    h_sym = np.repeat(np.asarray(h, dtype=np.complex128), model.n_c)
    llr = deinterleave(interleaver, _demap_for_decode(modem, y, h_sym, model.sigma2))
    if decoder is None:
        decoder = SclDecoder(code, L)
    counter = NodeCounter()
    paths = decoder.decode(llr, L, counter)
    best = _best_crc_survivor(paths, code, crc)
    est = _estimate_of(np.asarray(h, dtype=np.complex128))
    if best is None:
        return ReceiverVerdict(NO_SURVIVOR, None, None, 0, counter.visited, est)
    msg = paths.u[best, code.A][: code.K - crc.degree].copy()
    return ReceiverVerdict(DECODED, msg, None, 0, counter.visited, est)


def pct_receive(y, code: PolarCode, crc: CrcSpec, modem: ModemSpec,
                interleaver: InterleaverSpec, est_cfg: EstimatorConfig,
                model: ChannelModel, L: int,
                decoder: SclDecoder | None = None,
                est_decoder: SclDecoder | None = None) -> ReceiverVerdict:
    """Blind receiver: estimate, decode, then resolve the sign by CRC.

    The decode list is doubled with last-input-bit-flipped twins, which are
    the same hypotheses under the negated channel estimate (flipping the last
    input bit complements the whole codeword). Among CRC-passing candidates
    the exact Gaussian frame likelihood under the candidate's own sign
    hypothesis picks the verdict.
    """
    y = np.asarray(y, dtype=np.complex128)
    est_counter = NodeCounter()
    dec_counter = NodeCounter()
    r_hat = estimate_amplitudes(y, model, modem.delta)
    theta_hat = estimate_phases(y, code, modem, r_hat, est_cfg, model,
                                interleaver, est_counter, est_decoder)
    est = ChannelEstimate(r_hat=r_hat, theta_hat=theta_hat)
    h_sym = np.repeat(est.h_hat, model.n_c)
    llr = deinterleave(interleaver,
                       np.clip(demap_qpsk(modem, y, h_sym, model.sigma2),
                               -LLR_CLAMP, LLR_CLAMP))
    if decoder is None:
        decoder = SclDecoder(code, L)
    paths = decoder.decode(llr, L, dec_counter)

    cands = []
    signs = []
    for l in range(paths.u.shape[0]):
        u = paths.u[l]
        if crc_check(u[code.A], crc):
            cands.append(u)
            signs.append("+")
        flipped = u.copy()
        flipped[code.N - 1] ^= 1
        if crc_check(flipped[code.A], crc):
            cands.append(flipped)
            signs.append("-")
    if not cands:
        return ReceiverVerdict(NO_SURVIVOR, None, None,
                               est_counter.visited, dec_counter.visited, est)

    x_cands = map_qpsk(modem, interleave(interleaver,
                                         encode_rows(code, np.array(cands))))
    best_ll = -math.inf
    best = 0
    for i in range(len(cands)):
        h_i = h_sym if signs[i] == "+" else -h_sym
        ll = frame_log_density(y, x_cands[i], h_i, model.sigma2)
        if ll > best_ll:
            best_ll = ll
            best = i
    msg = cands[best][code.A][: code.K - crc.degree].copy()
    return ReceiverVerdict(DECODED, msg, signs[best],
                           est_counter.visited, dec_counter.visited, est)
