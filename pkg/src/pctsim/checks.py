"""Brute-force oracles and the self-check suite behind `pctsim selftest`.

Every check here recomputes its expectation by a route independent of the
implementation under test: codebook enumeration for list-decoder metrics,
direct Gaussian densities for likelihood identities, polynomial division for
the CRC. Nothing in this module is needed on the simulation fast path.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelModel, sample_fading, transmit
from .crc import CrcSpec, crc_append, crc_check
from .estimator import EstimatorConfig, estimate_amplitudes, estimate_phases, phase_metric
from .modem import ModemSpec, interleave, map_qpsk, random_interleaver
from .polar import (LOG2, NodeCounter, PolarCode, SclDecoder, construct_code,
                    encode)
from .receivers import DECODED, pct_receive

__all__ = [
    "CheckResult",
    "logsumexp",
    "enumerate_prefix_metric",
    "gauss_log_density",
    "run_selftest",
]


@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: str = ""


def logsumexp(values) -> float:
    v = np.asarray(values, dtype=np.float64)
    m = float(np.max(v))
    if not math.isfinite(m):
        return m
    return m + math.log(float(np.sum(np.exp(v - m))))


def _rel_err(got: float, want: float) -> float:
    return abs(got - want) / max(1.0, abs(want))


def free_input_positions(code: PolarCode, beta: int) -> list:
    """Inputs not pinned to zero when only the first beta stages are constrained."""
    return [i for i in range(code.N) if i >= beta or not code.frozen_mask[i]]


def enumerate_prefix_metric(code: PolarCode, llr: np.ndarray, beta: int,
                            aggregate: str = "sum") -> float:
    """Reference value for partial_prefix_metric by summing the whole codebook.

    Bit k carries weight exp((1-2c_k) llr_k / 2); inputs are grouped by their
    first-beta pattern, tails are always marginalized, and the result is
    shifted by -n_free*log2 to match the decoder's uniform-prior bookkeeping.
    """
    free = free_input_positions(code, beta)
    half = np.asarray(llr, dtype=np.float64) / 2.0
    groups: dict = {}
    u = np.zeros(code.N, dtype=np.uint8)
    for bits in itertools.product((0, 1), repeat=len(free)):
        u[:] = 0
        u[free] = bits
        c = encode(code, u)
        logw = float(np.sum(np.where(c == 0, half, -half)))
        groups.setdefault(tuple(u[:beta]), []).append(logw)
    per_prefix = [logsumexp(v) for v in groups.values()]
    agg = logsumexp(per_prefix) if aggregate == "sum" else max(per_prefix)
    return agg - len(free) * LOG2


def gauss_log_density(y: np.ndarray, x: np.ndarray, h_sym: np.ndarray,
                      sigma2: float) -> float:
    resid = np.abs(np.asarray(y) - np.asarray(h_sym) * np.asarray(x)) ** 2
    return float(-np.sum(resid) / (2.0 * sigma2)
                 - len(y) * math.log(2.0 * math.pi * sigma2))


def _toy_setup(seed: int = 7):
    code = construct_code(8, 4)
    modem = ModemSpec()
    interleaver = random_interleaver(8, seed)
    return code, modem, interleaver


def _toy_codebook(code, modem, interleaver):
    """All 2^K codeword symbol rows, info bits in lexicographic order."""
    rows = []
    infos = []
    for bits in itertools.product((0, 1), repeat=code.K):
        u = np.zeros(code.N, dtype=np.uint8)
        u[code.A] = bits
        rows.append(map_qpsk(modem, interleave(interleaver, encode(code, u))))
        infos.append(bits)
    return infos, np.array(rows)


# ---------------------------------------------------------------- checks


def check_encode_involution(rng, trials: int = 1000) -> CheckResult:
    code = construct_code(128, 38)
    for _ in range(trials):
        u = rng.integers(0, 2, code.N, dtype=np.uint8)
        if not np.array_equal(encode(code, encode(code, u)), u):
            return CheckResult("encode-involution", False, "double encode != identity")
    return CheckResult("encode-involution", True, f"{trials} random inputs")


def check_complement_twin(rng, trials: int = 200) -> CheckResult:
    # flipping the last input bit complements the whole codeword
    code = construct_code(128, 38)
    for _ in range(trials):
        u = rng.integers(0, 2, code.N, dtype=np.uint8)
        v = u.copy()
        v[-1] ^= 1
        if not np.array_equal(encode(code, v), encode(code, u) ^ 1):
            return CheckResult("complement-twin", False, "last-bit flip != complement")
    return CheckResult("complement-twin", True, f"{trials} random inputs")


def check_crc_detection(rng, trials: int = 1000,
                        append_spec: CrcSpec | None = None,
                        check_spec: CrcSpec | None = None) -> CheckResult:
    """Round trip passes and every single-bit flip fails, over all positions."""
    append_spec = append_spec or CrcSpec()
    check_spec = check_spec or append_spec
    k = 38 - append_spec.degree
    for _ in range(trials):
        word = crc_append(rng.integers(0, 2, k, dtype=np.uint8), append_spec)
        if not crc_check(word, check_spec):
            return CheckResult("crc-detection", False, "clean word rejected")
        for pos in range(len(word)):
            word[pos] ^= 1
            if crc_check(word, check_spec):
                return CheckResult("crc-detection", False,
                                   f"flip at {pos} undetected")
            word[pos] ^= 1
    return CheckResult("crc-detection", True,
                       f"{trials} messages x {k + append_spec.degree} flips")


def check_density_sign_identity(rng, trials: int = 100) -> CheckResult:
    """p(y | c, h) = p(y | complement(c), -h), exactly, at frame scale."""
    modem = ModemSpec()
    worst = 0.0
    for _ in range(trials):
        n = 64
        c = rng.integers(0, 2, 2 * n, dtype=np.uint8)
        x = map_qpsk(modem, c)
        h = (rng.standard_normal(n) + 1j * rng.standard_normal(n))
        sigma2 = float(rng.uniform(0.05, 2.0))
        y = h * x + math.sqrt(sigma2) * (rng.standard_normal(n)
                                         + 1j * rng.standard_normal(n))
        a = gauss_log_density(y, x, h, sigma2)
        b = gauss_log_density(y, map_qpsk(modem, c ^ 1), -h, sigma2)
        worst = max(worst, _rel_err(a, b))
    ok = worst <= 1e-9
    return CheckResult("density-sign-identity", ok, f"worst rel err {worst:.2e}")


def check_prefix_metric_enumeration(rng, trials: int = 30) -> CheckResult:
    """partial_prefix_metric against codebook enumeration on the (8,4) code."""
    code, _, _ = _toy_setup()
    dec = SclDecoder(code, 16)
    worst = 0.0
    for _ in range(trials):
        llr = rng.standard_normal(8) * 3.0
        for beta in (3, 5, 8):
            for aggregate in ("sum", "max"):
                got = dec.prefix_metric(llr, beta, 16, aggregate=aggregate)
                want = enumerate_prefix_metric(code, llr, beta, aggregate)
                worst = max(worst, _rel_err(got, want))
    ok = worst <= 1e-9
    return CheckResult("prefix-metric-enumeration", ok, f"worst rel err {worst:.2e}")


def check_phase_metric_gaussian(rng, trials: int = 30) -> CheckResult:
    """Estimator metric equals the enumerated Gaussian prefix likelihood.

    Reference: log sum over constraint-satisfying inputs of p(y | x(u), h_hyp)
    minus the per-symbol terms that do not depend on the phase hypothesis,
    minus n_free*log2.
    """
    code, modem, interleaver = _toy_setup()
    model_B, n_c = 1, 4
    dec = SclDecoder(code, 16)
    worst = 0.0
    for _ in range(trials):
        sigma2 = float(rng.uniform(0.1, 1.0))
        model = ChannelModel(B=model_B, n_c=n_c, sigma2=sigma2)
        theta_true = float(rng.uniform(0, 2 * np.pi))
        x = map_qpsk(modem, rng.integers(0, 2, 8, dtype=np.uint8))
        y = np.exp(1j * theta_true) * x + math.sqrt(sigma2) * (
            rng.standard_normal(4) + 1j * rng.standard_normal(4))
        r_hat = estimate_amplitudes(y, model, modem.delta)
        for beta in (5, 8):
            cfg = EstimatorConfig(beta=beta, L_e=16)
            for theta in (0.3, theta_true, theta_true + np.pi):
                thetas = np.array([theta])
                got = phase_metric(y, code, modem, r_hat, thetas, cfg, model,
                                   interleaver, decoder=dec)
                h = r_hat[0] * np.exp(1j * theta)
                free = free_input_positions(code, beta)
                u = np.zeros(8, dtype=np.uint8)
                terms = []
                for bits in itertools.product((0, 1), repeat=len(free)):
                    u[:] = 0
                    u[free] = bits
                    xu = map_qpsk(modem, interleave(interleaver, encode(code, u)))
                    terms.append(gauss_log_density(y, xu, h, sigma2))
                const = (-4 * math.log(2 * math.pi * sigma2)
                         - float(np.sum(np.abs(y) ** 2) + 4 * r_hat[0] ** 2
                                 * 2 * modem.delta ** 2) / (2 * sigma2))
                want = logsumexp(terms) - const - len(free) * LOG2
                worst = max(worst, _rel_err(got, want))
    ok = worst <= 1e-9
    return CheckResult("phase-metric-gaussian", ok, f"worst rel err {worst:.2e}")


def check_pi_ambiguity(rng, trials: int = 100) -> CheckResult:
    """Metric equality at theta and theta+pi (two-solution ambiguity)."""
    code = construct_code(128, 38)
    modem = ModemSpec()
    interleaver = random_interleaver(128, 11)
    dec = SclDecoder(code, 8)
    cfg = EstimatorConfig(beta=113, L_e=8)
    worst = 0.0
    for _ in range(trials):
        sigma2 = float(rng.uniform(0.2, 0.8))
        model = ChannelModel(B=1, n_c=64, sigma2=sigma2)
        theta = float(rng.uniform(0, 2 * np.pi))
        x = map_qpsk(modem, rng.integers(0, 2, 128, dtype=np.uint8))
        y = np.exp(1j * theta) * x + math.sqrt(sigma2) * (
            rng.standard_normal(64) + 1j * rng.standard_normal(64))
        r_hat = estimate_amplitudes(y, model, modem.delta)
        for t in (0.0, theta):
            a = phase_metric(y, code, modem, r_hat, np.array([t]), cfg, model,
                             interleaver, decoder=dec)
            b = phase_metric(y, code, modem, r_hat, np.array([t + np.pi]), cfg,
                             model, interleaver, decoder=dec)
            worst = max(worst, _rel_err(a, b))
    ok = worst <= 1e-9
    return CheckResult("pi-ambiguity", ok, f"worst rel err {worst:.2e}")


def check_list_decoder_vs_ml(rng, trials: int = 200) -> CheckResult:
    """Full-list SCL on the (8,4) code returns every codeword with the exact
    codebook log-weight, best first."""
    code, modem, interleaver = _toy_setup()
    dec = SclDecoder(code, 16)
    worst = 0.0
    for _ in range(trials):
        llr = rng.standard_normal(8) * 3.0
        paths = dec.decode(llr, 16)
        if paths.u.shape[0] != 16:
            return CheckResult("list-vs-ml", False, "full list not returned")
        offset = float(np.sum(np.log(2.0 * np.cosh(llr / 2.0))))
        half = llr / 2.0
        want_best = -math.inf
        for l in range(16):
            c = encode(code, paths.u[l])
            want = float(np.sum(np.where(c == 0, half, -half))) - offset
            worst = max(worst, _rel_err(paths.metrics[l], want))
        # metric of the head equals the codebook maximum
        for bits in itertools.product((0, 1), repeat=4):
            u = np.zeros(8, dtype=np.uint8)
            u[code.A] = bits
            c = encode(code, u)
            want_best = max(want_best,
                            float(np.sum(np.where(c == 0, half, -half))) - offset)
        worst = max(worst, _rel_err(paths.metrics[0], want_best))
    ok = worst <= 1e-9
    return CheckResult("list-vs-ml", ok, f"worst rel err {worst:.2e}")


def check_node_counts() -> CheckResult:
    """Visited-node counters against the closed form on the (128,38) code."""
    code = construct_code(128, 38)
    info_prefix = np.cumsum(1 - code.frozen_mask)

    def closed_form(stages, L):
        return int(np.minimum(2.0 ** info_prefix[:stages], L).sum())

    dec = SclDecoder(code, 32)
    llr = np.zeros(128)
    cases = []
    for L in (1, 8, 32):
        ctr = NodeCounter()
        dec.decode(llr, L, ctr)
        cases.append((f"decode L={L}", ctr.visited, closed_form(128, L)))
    for beta, L_e in ((113, 1), (47, 1), (113, 8), (61, 8)):
        ctr = NodeCounter()
        dec.prefix_metric(llr, beta, L_e, counter=ctr)
        cases.append((f"prefix beta={beta} L_e={L_e}", ctr.visited,
                      closed_form(beta, L_e)))
    bad = [f"{n}: {got} != {want}" for n, got, want in cases if got != want]
    got_by_name = {n: got for n, got, _ in cases}
    if got_by_name["decode L=8"] != 631:
        bad.append("decode L=8 != 631")
    if got_by_name["prefix beta=113 L_e=1"] != 113:
        bad.append("prefix beta=113 L_e=1 != 113")
    if bad:
        return CheckResult("node-counts", False, "; ".join(bad))
    return CheckResult("node-counts", True, "closed form, incl. 631 and 113")


def check_sign_flip_equivariance(rng, trials: int = 200,
                                 snr_db: float = 1.0) -> CheckResult:
    """pct_receive on a frame and on its negation returns the same payload."""
    code = construct_code(128, 38)
    crc = CrcSpec()
    modem = ModemSpec()
    interleaver = random_interleaver(128, 11)
    sigma2 = 10.0 ** (-snr_db / 10.0) / 2.0
    model = ChannelModel(B=1, n_c=64, sigma2=sigma2)
    cfg = EstimatorConfig(beta=113, L_e=1)
    dec = SclDecoder(code, 8)
    est_dec = SclDecoder(code, 1)
    for _ in range(trials):
        u = np.zeros(128, dtype=np.uint8)
        u[code.A] = crc_append(rng.integers(0, 2, 32, dtype=np.uint8), crc)
        x = map_qpsk(modem, interleave(interleaver, encode(code, u)))
        real = sample_fading(model, rng)
        y = transmit(model, x, real, rng)
        a = pct_receive(y, code, crc, modem, interleaver, cfg, model, 8,
                        decoder=dec, est_decoder=est_dec)
        b = pct_receive(-y, code, crc, modem, interleaver, cfg, model, 8,
                        decoder=dec, est_decoder=est_dec)
        if a.status != b.status:
            return CheckResult("sign-flip-equivariance", False, "status differs")
        if a.status == DECODED and not np.array_equal(a.message, b.message):
            return CheckResult("sign-flip-equivariance", False, "payload differs")
    return CheckResult("sign-flip-equivariance", True, f"{trials} noisy frames")


def check_estimator_noiseless(rng, trials: int = 200) -> CheckResult:
    """Vanishing noise: amplitude exact to 1e-9, phase within the fine step.

    The transmitted frame must be a codeword; the phase metric measures how
    well the frozen constraints hold, which is uninformative on random bits.
    """
    code = construct_code(128, 38)
    modem = ModemSpec()
    interleaver = random_interleaver(128, 11)
    model = ChannelModel(B=1, n_c=64, sigma2=1e-30)
    cfg = EstimatorConfig(beta=113, L_e=1)
    dec = SclDecoder(code, 1)
    tol_theta = np.pi / 128 + 1e-12
    worst_r = 0.0
    worst_t = 0.0
    for _ in range(trials):
        r = float(rng.uniform(0.25, 2.0))
        theta = float(rng.uniform(0, 2 * np.pi))
        u = np.zeros(code.N, dtype=np.uint8)
        u[code.A] = rng.integers(0, 2, code.K, dtype=np.uint8)
        x = map_qpsk(modem, interleave(interleaver, encode(code, u)))
        y = r * np.exp(1j * theta) * x
        r_hat = estimate_amplitudes(y, model, modem.delta)
        t_hat = estimate_phases(y, code, modem, r_hat, cfg, model, interleaver,
                                decoder=dec)
        worst_r = max(worst_r, abs(r_hat[0] - r) / r)
        d = abs(float(t_hat[0]) - theta) % np.pi
        worst_t = max(worst_t, min(d, np.pi - d))
    ok = worst_r <= 1e-9 and worst_t <= tol_theta
    return CheckResult("estimator-noiseless", ok,
                       f"worst amp rel {worst_r:.2e}, worst phase {worst_t:.2e} rad")


def run_selftest(seed: int = 2024, corrupt_crc: bool = False,
                 fast: bool = False) -> list:
    """The release gate; corrupt_crc mismatches the checker polynomial as a
    negative control (the detection property must then fail)."""
    rng = np.random.default_rng(seed)
    results = []
    check_spec = None
    if corrupt_crc:
        check_spec = CrcSpec(degree=6, generator=(1, 0, 0, 0, 1, 0, 1))
    n = 100 if fast else 200
    results.append(check_encode_involution(rng, 200 if fast else 1000))
    results.append(check_complement_twin(rng, n))
    results.append(check_crc_detection(rng, n, check_spec=check_spec))
    results.append(check_density_sign_identity(rng, n // 2))
    results.append(check_prefix_metric_enumeration(rng, 10 if fast else 30))
    results.append(check_phase_metric_gaussian(rng, 10 if fast else 30))
    results.append(check_pi_ambiguity(rng, n // 4))
    results.append(check_list_decoder_vs_ml(rng, n))
    results.append(check_node_counts())
    results.append(check_sign_flip_equivariance(rng, n))
    results.append(check_estimator_noiseless(rng, n))
    return results
