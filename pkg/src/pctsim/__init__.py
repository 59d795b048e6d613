"""Polar-coded transmission over block-fading channels, with a blind
receiver that estimates the channel from frozen-bit constraints, a
pilot-assisted baseline, and a perfect-CSI reference."""

__version__ = "0.1.0"

from .channel import (ChannelModel, ChannelRealization, sample_fading,
                      sigma2_from_snr_db, transmit)
from .crc import CrcSpec, crc_append, crc_check
from .estimator import (ChannelEstimate, EstimatorConfig, estimate_amplitudes,
                        estimate_phases, phase_metric)
from .harness import FerPoint, SimConfig, run_point, run_sweep, wilson_interval
from .modem import (InterleaverSpec, ModemSpec, deinterleave, demap_qpsk,
                    interleave, map_qpsk, random_interleaver)
from .polar import (LLR_CLAMP, NodeCounter, PathList, PolarCode,
                    PuncturingSpec, SclDecoder, apply_puncturing, beta_weights,
                    construct_code, encode, encode_rows, partial_prefix_metric,
                    qup_spec, scl_decode)
from .receivers import (DECODED, NO_SURVIVOR, PatConfig, ReceiverVerdict,
                        build_frame, coherent_receive, frame_log_density,
                        pat_puncturing, pat_receive, pct_receive, pilot_row)

__all__ = [
    "__version__",
    "ChannelModel", "ChannelRealization", "sample_fading",
    "sigma2_from_snr_db", "transmit",
    "CrcSpec", "crc_append", "crc_check",
    "ChannelEstimate", "EstimatorConfig", "estimate_amplitudes",
    "estimate_phases", "phase_metric",
    "FerPoint", "SimConfig", "run_point", "run_sweep", "wilson_interval",
    "InterleaverSpec", "ModemSpec", "deinterleave", "demap_qpsk",
    "interleave", "map_qpsk", "random_interleaver",
    "LLR_CLAMP", "NodeCounter", "PathList", "PolarCode", "PuncturingSpec",
    "SclDecoder", "apply_puncturing", "beta_weights", "construct_code",
    "encode", "encode_rows", "partial_prefix_metric", "qup_spec", "scl_decode",
    "DECODED", "NO_SURVIVOR", "PatConfig", "ReceiverVerdict", "build_frame",
    "coherent_receive", "frame_log_density", "pat_puncturing", "pat_receive",
    "pct_receive", "pilot_row",
]
