"""Monte Carlo harness: stopping rule, intervals, reproducibility."""

import numpy as np
import pytest

from pctsim import FerPoint, SimConfig, run_point, run_sweep, wilson_interval
from pctsim.harness import config_dict


def test_wilson_contains_point_estimate():
    rng = np.random.default_rng(5)
    for _ in range(300):
        frames = int(rng.integers(1, 5000))
        errors = int(rng.integers(0, frames + 1))
        lo, hi = wilson_interval(errors, frames)
        assert 0.0 <= lo <= errors / frames <= hi <= 1.0


def test_wilson_endpoints_pinned():
    assert wilson_interval(0, 1000)[0] == 0.0
    assert wilson_interval(1000, 1000)[1] == 1.0
    assert wilson_interval(0, 0) == (0.0, 1.0)


def test_wilson_coverage():
    # 95% interval should cover the true p in roughly that share of trials
    rng = np.random.default_rng(11)
    p, n = 0.05, 400
    hits = 0
    trials = 1000
    for _ in range(trials):
        errors = int(rng.binomial(n, p))
        lo, hi = wilson_interval(errors, n)
        hits += lo <= p <= hi
    assert hits / trials >= 0.93


def test_wilson_narrows_with_frames():
    lo1, hi1 = wilson_interval(10, 100)
    lo2, hi2 = wilson_interval(100, 1000)
    assert hi2 - lo2 < hi1 - lo1


def _tiny_cfg(**kw):
    base = dict(receiver="coherent", fading="fixed", list_size=1,
                snr_grid=(0.0,), min_errors=20, max_frames=600,
                batch_size=100, master_seed=777)
    base.update(kw)
    return SimConfig(**base)


def test_run_point_deterministic():
    cfg = _tiny_cfg()
    a = run_point(cfg, 0.0)
    b = run_point(cfg, 0.0)
    assert a == b
    assert isinstance(a, FerPoint)
    assert a.wall_s == 0.0


def test_run_point_stops_on_batch_boundary():
    cfg = _tiny_cfg()
    pt = run_point(cfg, 0.0)
    assert pt.frames % cfg.batch_size == 0 or pt.frames == cfg.max_frames
    assert pt.errors >= cfg.min_errors or pt.frames == cfg.max_frames
    lo, hi = wilson_interval(pt.errors, pt.frames)
    assert (pt.ci95_lo, pt.ci95_hi) == (lo, hi)


def test_run_point_worker_count_invariant():
    cfg = _tiny_cfg()
    assert run_point(cfg, 0.0, workers=1) == run_point(cfg, 0.0, workers=2)


def test_run_point_seed_changes_result():
    a = run_point(_tiny_cfg(), 0.0)
    b = run_point(_tiny_cfg(master_seed=778), 0.0)
    assert a != b


def test_run_sweep_order_and_callback():
    cfg = _tiny_cfg(snr_grid=(0.0, 1.0), min_errors=5, max_frames=200)
    seen = []
    pts = run_sweep(cfg, on_point=seen.append)
    assert [p.snr_db for p in pts] == [0.0, 1.0]
    assert pts == seen
    # single-point runs must reproduce their sweep entries
    assert pts[1] == run_point(cfg, 1.0)


def test_coherent_reports_zero_estimator_nodes():
    pt = run_point(_tiny_cfg(min_errors=1, max_frames=100, batch_size=100), 0.0)
    assert pt.mean_nodes_estimator == 0.0
    assert pt.mean_nodes_decoder == 128.0  # L=1 visits every input stage once


def test_pct_mean_nodes_exact():
    # estimator work is the same for every frame, so the mean is exact
    cfg = _tiny_cfg(receiver="pct", fading="uniform-phase", list_size=8,
                    beta=113, est_list=1, min_errors=1000, max_frames=100,
                    batch_size=50, snr_grid=(1.0,))
    pt = run_point(cfg, 1.0)
    assert pt.frames == 100
    assert pt.mean_nodes_estimator == 16 * 113
    assert pt.mean_nodes_decoder == 631.0


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(receiver="genie")
    with pytest.raises(ValueError):
        SimConfig(receiver="pct", n=96)
    with pytest.raises(ValueError):
        SimConfig(receiver="pct", b=3)  # 128 % 6 != 0
    with pytest.raises(ValueError):
        SimConfig(receiver="pct", fading="awgn")
    with pytest.raises(ValueError):
        SimConfig(receiver="pct", beta=0)
    with pytest.raises(ValueError):
        SimConfig(receiver="pat", n_p=64)
    with pytest.raises(ValueError):
        SimConfig(receiver="pct", snr_grid=())
    with pytest.raises(ValueError):
        SimConfig(receiver="pct", metric_mode="avg")
    with pytest.raises(ValueError):
        SimConfig(receiver="pct", min_errors=0)


def test_config_dict_roundtrip():
    cfg = _tiny_cfg(snr_grid=(0.0, 0.5))
    d = config_dict(cfg)
    assert d["snr_grid"] == [0.0, 0.5]
    assert SimConfig(**d) == cfg


def test_snr_grid_coerced_to_floats():
    cfg = _tiny_cfg(snr_grid=[0, 1])
    assert cfg.snr_grid == (0.0, 1.0)
    assert cfg.n_c == 64
