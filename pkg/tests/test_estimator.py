"""Blind amplitude/phase estimation from the frozen prefix."""

import numpy as np
import pytest

from pctsim import (
    ChannelModel,
    ChannelRealization,
    EstimatorConfig,
    random_interleaver,
    ModemSpec,
    NodeCounter,
    SclDecoder,
    encode,
    estimate_amplitudes,
    estimate_phases,
    interleave,
    map_qpsk,
    phase_metric,
    transmit,
)

MODEM = ModemSpec()


def _codeword_symbols(code, interleaver, rng):
    u = np.zeros(code.N, dtype=np.uint8)
    u[code.A] = rng.integers(0, 2, code.K, dtype=np.uint8)
    c = interleave(interleaver, encode(code, u))
    return map_qpsk(MODEM, c)


def _phase_setup(code128, rng, B=1, sigma2=0.02, theta=None):
    n_c = code128.N // (2 * B)
    model = ChannelModel(B=B, n_c=n_c, sigma2=sigma2)
    interleaver = random_interleaver(code128.N, 20240)
    x = _codeword_symbols(code128, interleaver, rng)
    if theta is None:
        theta = rng.uniform(0, 2 * np.pi, B)
    real = ChannelRealization(h=np.exp(1j * np.asarray(theta)))
    y = transmit(model, x, real, rng)
    return model, interleaver, x, np.asarray(theta, dtype=float), y


def test_amplitude_noiseless_exact(rng):
    model = ChannelModel(B=2, n_c=8, sigma2=0.0)
    gains = np.array([0.6, 1.7])
    x = map_qpsk(MODEM, rng.integers(0, 2, 32, dtype=np.uint8))
    y = np.repeat(gains, 8) * x
    r = estimate_amplitudes(y, model, MODEM.delta)
    assert np.allclose(r, gains, atol=1e-12)


def test_amplitude_zero_floor():
    model = ChannelModel(B=1, n_c=4, sigma2=0.5)
    r = estimate_amplitudes(np.zeros(4, dtype=complex), model, MODEM.delta)
    assert r[0] == 0.0


def test_amplitude_consistency(rng):
    # with noise, the energy detector should land near the true gain
    model = ChannelModel(B=1, n_c=4096, sigma2=0.1)
    x = map_qpsk(MODEM, rng.integers(0, 2, 8192, dtype=np.uint8))
    noise = (rng.standard_normal(4096) + 1j * rng.standard_normal(4096)) * np.sqrt(0.1)
    r = estimate_amplitudes(1.3 * x + noise, model, MODEM.delta)
    assert r[0] == pytest.approx(1.3, abs=0.05)


def test_phase_metric_pi_shift_invariance(code128, rng):
    model, interleaver, _, theta, y = _phase_setup(code128, rng)
    cfg = EstimatorConfig(beta=113, L_e=4)
    probe = np.array([0.71])
    m0 = phase_metric(y, code128, MODEM, np.array([1.0]), probe, cfg, model,
                      interleaver)
    m1 = phase_metric(y, code128, MODEM, np.array([1.0]), probe + np.pi, cfg,
                      model, interleaver)
    assert m1 == pytest.approx(m0, abs=1e-9)


def test_phase_metric_peaks_at_truth(code128, rng):
    model, interleaver, _, theta, y = _phase_setup(code128, rng, sigma2=0.05)
    cfg = EstimatorConfig(beta=113, L_e=1)
    t0 = float(np.mod(theta[0], np.pi))
    offsets = np.linspace(-np.pi / 2, np.pi / 2, 9)[1:-1]
    mets = [phase_metric(y, code128, MODEM, np.array([1.0]),
                         np.array([t0 + d]), cfg, model, interleaver)
            for d in offsets]
    assert int(np.argmax(mets)) == len(offsets) // 2


def test_phase_metric_rejects_zero_noise(code128):
    model = ChannelModel(B=1, n_c=64, sigma2=0.0)
    cfg = EstimatorConfig(beta=113)
    with pytest.raises(ValueError):
        phase_metric(np.zeros(64, dtype=complex), code128, MODEM,
                     np.array([1.0]), np.array([0.3]), cfg, model,
                     random_interleaver(128, 1))


def test_estimate_phases_low_noise_b1(code128, rng):
    # fine grid spacing bounds the error: (pi/8) / 16 halves to pi/128 worst case
    model = ChannelModel(B=1, n_c=64, sigma2=1e-6)
    interleaver = random_interleaver(128, 20240)
    cfg = EstimatorConfig(beta=113, L_e=1)
    bound = np.pi / 128 + 1e-9
    for _ in range(5):
        x = _codeword_symbols(code128, interleaver, rng)
        theta = rng.uniform(0, 2 * np.pi)
        y = np.exp(1j * theta) * x  # noiseless; sigma2 only scales the metric
        est = estimate_phases(y, code128, MODEM, np.array([1.0]), cfg, model,
                              interleaver)
        err = abs((est[0] - theta + np.pi / 2) % np.pi - np.pi / 2)
        assert err <= bound


def test_estimate_phases_low_noise_b2(code128, rng):
    model = ChannelModel(B=2, n_c=32, sigma2=1e-6)
    interleaver = random_interleaver(128, 20240)
    cfg = EstimatorConfig(beta=113, L_e=8)
    for _ in range(3):
        x = _codeword_symbols(code128, interleaver, rng)
        theta = rng.uniform(0, 2 * np.pi, 2)
        y = np.repeat(np.exp(1j * theta), 32) * x
        est = estimate_phases(y, code128, MODEM, np.ones(2), cfg, model,
                              interleaver)
        # compare against the closer member of the joint sign pair
        errs = []
        for shift in (0.0, np.pi):
            d = np.mod(est - theta + shift, 2 * np.pi)
            errs.append(np.minimum(d, 2 * np.pi - d))
        err = min(errs, key=lambda e: float(np.max(e)))
        assert err[0] <= np.pi / 64 + 1e-9
        assert err[1] <= np.pi / 128 + 1e-9


def test_estimate_phases_canonical_range(code128, rng):
    model = ChannelModel(B=2, n_c=32, sigma2=0.3)
    interleaver = random_interleaver(128, 20240)
    cfg = EstimatorConfig(beta=61, L_e=1, coarse_levels=4, fine_levels=4)
    for _ in range(6):
        y = (rng.standard_normal(64) + 1j * rng.standard_normal(64))
        est = estimate_phases(y, code128, MODEM, np.ones(2), cfg, model,
                              interleaver)
        assert np.all(est >= 0.0) and np.all(est < 2 * np.pi)
        assert est[-1] < np.pi


def test_estimator_node_budget(code128, rng):
    # 8 coarse + 8 fine evaluations, each visiting min(2^K_prefix, L_e) nodes
    # per stage up to beta
    model, interleaver, _, _, y = _phase_setup(code128, rng)
    counter = NodeCounter()
    cfg = EstimatorConfig(beta=113, L_e=1)
    estimate_phases(y, code128, MODEM, np.array([1.0]), cfg, model,
                    interleaver, counter=counter)
    assert counter.visited == 16 * 113

    counter = NodeCounter()
    cfg = EstimatorConfig(beta=113, L_e=8)
    decoder = SclDecoder(code128, 8)
    estimate_phases(y, code128, MODEM, np.array([1.0]), cfg, model,
                    interleaver, counter=counter, decoder=decoder)
    assert counter.visited == 16 * 511


def test_phase_metric_counter_single_eval(code128, rng):
    model, interleaver, _, _, y = _phase_setup(code128, rng)
    for beta, L_e, want in ((113, 1, 113), (47, 1, 47), (113, 8, 511), (61, 8, 95)):
        counter = NodeCounter()
        cfg = EstimatorConfig(beta=beta, L_e=L_e)
        phase_metric(y, code128, MODEM, np.array([1.0]), np.array([0.2]), cfg,
                     model, interleaver, counter=counter)
        assert counter.visited == want, (beta, L_e)


def test_config_validation():
    with pytest.raises(ValueError):
        EstimatorConfig(beta=0)
    with pytest.raises(ValueError):
        EstimatorConfig(beta=113, L_e=0)
    with pytest.raises(ValueError):
        EstimatorConfig(beta=113, coarse_levels=0)
    with pytest.raises(ValueError):
        EstimatorConfig(beta=113, metric_mode="avg")
