"""Monte Carlo frame-error-rate measurement.

Reproducibility contract: results are a pure function of (SimConfig,
master_seed). Every frame owns an RNG substream keyed by (SNR point, frame
index), and the stopping rule only fires at batch boundaries, so worker count
and scheduling cannot change the outcome.
"""

from __future__ import annotations

import math
import multiprocessing
import time
from dataclasses import asdict, dataclass

import numpy as np

from .channel import (FADING_KINDS, ChannelModel, sample_fading,
                      sigma2_from_snr_db, transmit)
from .crc import CrcSpec
from .estimator import EstimatorConfig
from .modem import ModemSpec, random_interleaver
from .polar import SclDecoder, construct_code
from .receivers import (DECODED, PatConfig, build_frame, coherent_receive,
                        pat_receive, pat_puncturing, pct_receive)

__all__ = [
    "RECEIVERS",
    "SimConfig",
    "FerPoint",
    "wilson_interval",
    "run_point",
    "run_sweep",
]

RECEIVERS = ("pct", "pat", "coherent")

# keeps per-point spawn keys distinct and nonnegative for any sane SNR
_SNR_KEY_OFFSET = 1 << 20


@dataclass(frozen=True)
class SimConfig:
    """Flat, JSON-friendly description of one experiment."""

    receiver: str
    n: int = 128
    k: int = 38
    b: int = 1
    fading: str = "uniform-phase"
    fixed_h_re: float = 1.0
    fixed_h_im: float = 0.0
    list_size: int = 8
    beta: int = 113
    est_list: int = 1
    coarse_levels: int = 8
    fine_levels: int = 8
    metric_mode: str = "sum"
    n_p: int = 14
    snr_grid: tuple = (1.0,)
    min_errors: int = 100
    max_frames: int = 100_000
    batch_size: int = 1_000
    master_seed: int = 12345
    interleaver_seed: int = 20240

    def __post_init__(self):
        object.__setattr__(self, "snr_grid",
                           tuple(float(s) for s in self.snr_grid))
        if self.receiver not in RECEIVERS:
            raise ValueError(f"receiver must be one of {RECEIVERS}")
        if self.n < 4 or self.n & (self.n - 1):
            raise ValueError("n must be a power of two >= 4")
        if not 0 < self.k < self.n:
            raise ValueError("k out of range")
        if self.b < 1 or self.n % (2 * self.b):
            raise ValueError("n must split into 2*b equal symbol blocks")
        if self.fading not in FADING_KINDS:
            raise ValueError(f"fading must be one of {FADING_KINDS}")
        if not 1 <= self.beta <= self.n:
            raise ValueError("beta out of range")
        if self.list_size < 1 or self.est_list < 1:
            raise ValueError("list sizes must be >= 1")
        if self.metric_mode not in ("sum", "max"):
            raise ValueError("metric_mode must be 'sum' or 'max'")
        if self.receiver == "pat" and not 0 < 2 * self.b * self.n_p < self.n:
            raise ValueError("pilot overhead must leave room for coded bits")
        if not self.snr_grid:
            raise ValueError("snr_grid must be nonempty")
        if self.min_errors < 1 or self.max_frames < 1 or self.batch_size < 1:
            raise ValueError("stopping-rule fields must be >= 1")

    @property
    def n_c(self) -> int:
        return self.n // (2 * self.b)


@dataclass(frozen=True)
class FerPoint:
    snr_db: float
    frames: int
    errors: int
    fer: float
    ci95_lo: float
    ci95_hi: float
    mean_nodes_estimator: float
    mean_nodes_decoder: float
    wall_s: float


def wilson_interval(errors: int, frames: int,
                    z: float = 1.959963984540054) -> tuple:
    """Wilson score interval; well behaved at zero observed errors."""
    if frames <= 0:
        return 0.0, 1.0
    p = errors / frames
    zz = z * z / frames
    center = (p + zz / 2.0) / (1.0 + zz)
    half = z * math.sqrt(p * (1.0 - p) / frames + zz / (4.0 * frames)) / (1.0 + zz)
    # the interval must contain p; rounding can leave the p=0 or p=1
    # endpoint a few ulp inside, so pin those cases
    lo = 0.0 if errors == 0 else max(0.0, center - half)
    hi = 1.0 if errors == frames else min(1.0, center + half)
    return lo, hi


class _Runtime:
    """Per-process bundle of the heavy objects a worker needs."""

    def __init__(self, cfg: SimConfig):
        self.cfg = cfg
        self.code = construct_code(cfg.n, cfg.k)
        self.crc = CrcSpec()
        self.modem = ModemSpec()
        self.pat = PatConfig(cfg.n_p) if cfg.receiver == "pat" else None
        punct = 0
        if self.pat is not None:
            punct = pat_puncturing(self.code, self.pat, cfg.b).count
        self.interleaver = random_interleaver(cfg.n - punct, cfg.interleaver_seed)
        self.decoder = SclDecoder(self.code, cfg.list_size)
        self.est_cfg = None
        self.est_decoder = None
        if cfg.receiver == "pct":
            self.est_cfg = EstimatorConfig(beta=cfg.beta, L_e=cfg.est_list,
                                           coarse_levels=cfg.coarse_levels,
                                           fine_levels=cfg.fine_levels,
                                           metric_mode=cfg.metric_mode)
            self.est_decoder = SclDecoder(self.code, cfg.est_list)

    def model(self, snr_db: float) -> ChannelModel:
        return ChannelModel(B=self.cfg.b, n_c=self.cfg.n_c,
                            sigma2=sigma2_from_snr_db(snr_db),
                            fading_kind=self.cfg.fading,
                            fixed_h=complex(self.cfg.fixed_h_re,
                                            self.cfg.fixed_h_im))


_RT: _Runtime | None = None


def _init_worker(cfg: SimConfig) -> None:
    global _RT
    _RT = _Runtime(cfg)


def _frame_rng(master_seed: int, snr_db: float, frame: int) -> np.random.Generator:
    key = _SNR_KEY_OFFSET + int(round(snr_db * 1000.0))
    ss = np.random.SeedSequence(master_seed, spawn_key=(key, frame))
    return np.random.Generator(np.random.PCG64(ss))


def _run_batch(task) -> tuple:
    """Simulate frames [start, start+count); returns count/error/node sums."""
    snr_db, start, count = task
    rt = _RT
    cfg = rt.cfg
    model = rt.model(snr_db)
    k_payload = cfg.k - rt.crc.degree
    errors = 0
    est_nodes = 0
    dec_nodes = 0
    for frame in range(start, start + count):
        rng = _frame_rng(cfg.master_seed, snr_db, frame)
        # fixed draw order: payload bits, then fading, then noise
        u, x = build_frame(rt.code, rt.crc, rt.modem, rt.interleaver, None,
                           rng=rng, pat=rt.pat, B=cfg.b)
        real = sample_fading(model, rng)
        y = transmit(model, x, real, rng)
        if cfg.receiver == "pct":
            v = pct_receive(y, rt.code, rt.crc, rt.modem, rt.interleaver,
                            rt.est_cfg, model, cfg.list_size,
                            decoder=rt.decoder, est_decoder=rt.est_decoder)
        elif cfg.receiver == "pat":
            v = pat_receive(y, rt.code, rt.crc, rt.modem, rt.interleaver,
                            rt.pat, model, cfg.list_size, decoder=rt.decoder)
        else:
            v = coherent_receive(y, rt.code, rt.crc, rt.modem, rt.interleaver,
                                 real.h, model, cfg.list_size,
                                 decoder=rt.decoder)
        payload = u[rt.code.A][:k_payload]
        if v.status != DECODED or not np.array_equal(v.message, payload):
            errors += 1
        est_nodes += v.estimator_nodes
        dec_nodes += v.decoder_nodes
    return count, errors, est_nodes, dec_nodes


def _batches(cfg: SimConfig, snr_db: float):
    start = 0
    while start < cfg.max_frames:
        count = min(cfg.batch_size, cfg.max_frames - start)
        yield snr_db, start, count
        start += count


def run_point(cfg: SimConfig, snr_db: float, workers: int = 1,
              timing: bool = False) -> FerPoint:
    """Simulate one SNR point until min_errors errors or max_frames frames.

    The stopping test runs after each batch, in batch order, so the frame
    count is identical for any worker count.
    """
    t0 = time.perf_counter()
    frames = errors = est_nodes = dec_nodes = 0

    def take(res) -> bool:
        nonlocal frames, errors, est_nodes, dec_nodes
        frames += res[0]
        errors += res[1]
        est_nodes += res[2]
        dec_nodes += res[3]
        return errors >= cfg.min_errors or frames >= cfg.max_frames

    if workers <= 1:
        _init_worker(cfg)
        for task in _batches(cfg, snr_db):
            if take(_run_batch(task)):
                break
    else:
        with multiprocessing.Pool(workers, initializer=_init_worker,
                                  initargs=(cfg,)) as pool:
            for res in pool.imap(_run_batch, _batches(cfg, snr_db)):
                if take(res):
                    break
    lo, hi = wilson_interval(errors, frames)
    wall = time.perf_counter() - t0 if timing else 0.0
    return FerPoint(snr_db=snr_db, frames=frames, errors=errors,
                    fer=errors / frames, ci95_lo=lo, ci95_hi=hi,
                    mean_nodes_estimator=est_nodes / frames,
                    mean_nodes_decoder=dec_nodes / frames, wall_s=wall)


def run_sweep(cfg: SimConfig, workers: int = 1, timing: bool = False,
              on_point=None) -> list:
    """run_point over the SNR grid in order; on_point streams each result."""
    points = []
    for snr_db in cfg.snr_grid:
        pt = run_point(cfg, snr_db, workers=workers, timing=timing)
        points.append(pt)
        if on_point is not None:
            on_point(pt)
    return points


def config_dict(cfg: SimConfig) -> dict:
    d = asdict(cfg)
    d["snr_grid"] = list(cfg.snr_grid)
    return d
