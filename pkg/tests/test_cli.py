"""Command line front end: argument handling, CSV output, manifests."""

import json

import pytest

from pctsim.cli import CSV_HEADER, _parse_snr_grid, build_parser, main

FAST_ARGS = ["--receiver", "coherent", "--fading", "fixed", "--list", "1",
             "--snr", "0", "--min-errors", "5", "--max-frames", "200",
             "--batch-size", "100", "--seed", "99"]


def _run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_snr_grid():
    assert _parse_snr_grid("0:0.5:3") == pytest.approx(
        [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0])
    assert _parse_snr_grid("1:1:1") == [1.0]
    with pytest.raises(Exception):
        _parse_snr_grid("3:0.5:0")
    with pytest.raises(Exception):
        _parse_snr_grid("nonsense")


def test_simulate_stdout_csv(capsys):
    code, out, _ = _run(["simulate"] + FAST_ARGS, capsys)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 2
    fields = lines[1].split(",")
    assert len(fields) == 9
    assert fields[0] == "0"
    assert fields[-1] == "0"  # wall_s stays zero without --timing


def test_simulate_requires_receiver(capsys, tmp_path):
    out_path = tmp_path / "x.csv"
    code, _, err = _run(["simulate", "--snr", "0", "--out", str(out_path)],
                        capsys)
    assert code == 2
    assert "receiver" in err
    assert not out_path.exists()


def test_simulate_rejects_snr_and_grid(capsys):
    code, _, err = _run(["simulate"] + FAST_ARGS + ["--snr-grid", "0:1:1"],
                        capsys)
    assert code == 2
    assert "not both" in err


def test_simulate_grid_row_count(capsys):
    argv = ["simulate", "--receiver", "coherent", "--fading", "fixed",
            "--list", "1", "--snr-grid", "0:0.5:3", "--min-errors", "1",
            "--max-frames", "100", "--batch-size", "100"]
    code, out, _ = _run(argv, capsys)
    assert code == 0
    assert len(out.strip().splitlines()) == 8  # header + 7 points


def test_simulate_writes_manifest_and_reruns_identically(tmp_path, capsys):
    out1 = tmp_path / "a.csv"
    code, _, _ = _run(["simulate"] + FAST_ARGS + ["--out", str(out1)], capsys)
    assert code == 0
    manifest = json.loads((tmp_path / "a.csv.manifest.json").read_text())
    assert manifest["tool"] == "pctsim"
    assert manifest["config"]["receiver"] == "coherent"
    assert manifest["config"]["master_seed"] == 99
    assert manifest["output"] == "a.csv"

    # a manifest is a valid --config; the rerun must be byte-identical
    out2 = tmp_path / "b.csv"
    code, _, _ = _run(["simulate", "--config",
                       str(tmp_path / "a.csv.manifest.json"),
                       "--out", str(out2)], capsys)
    assert code == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_simulate_flag_overrides_config(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({
        "receiver": "coherent", "fading": "fixed", "list_size": 1,
        "snr_grid": [0.0], "min_errors": 5, "max_frames": 200,
        "batch_size": 100, "master_seed": 99}))
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    code, _, _ = _run(["simulate", "--config", str(cfg_path),
                       "--out", str(out1)], capsys)
    assert code == 0
    code, _, _ = _run(["simulate", "--config", str(cfg_path), "--seed", "100",
                       "--out", str(out2)], capsys)
    assert code == 0
    m2 = json.loads((tmp_path / "b.csv.manifest.json").read_text())
    assert m2["config"]["master_seed"] == 100
    assert out1.read_bytes() != out2.read_bytes()


def test_simulate_rejects_unknown_config_keys(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"receiver": "coherent", "turbo": True}))
    code, _, err = _run(["simulate", "--config", str(cfg_path)], capsys)
    assert code == 2
    assert "turbo" in err


def test_simulate_worker_count_invariant(tmp_path, capsys):
    out1 = tmp_path / "w1.csv"
    out2 = tmp_path / "w2.csv"
    for path, w in ((out1, "1"), (out2, "2")):
        code, _, _ = _run(["simulate"] + FAST_ARGS
                          + ["--workers", w, "--out", str(path)], capsys)
        assert code == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_construct_default_code(capsys):
    code, out, _ = _run(["construct"], capsys)
    assert code == 0
    assert "N=128 K=38" in out
    assert "(1-based, 38)" in out
    # first information index is 48 in 1-based numbering
    assert "information indices (1-based, 38): 48 " in out


def test_construct_tiny_code(capsys):
    code, out, _ = _run(["construct", "--n", "4", "--k", "2"], capsys)
    assert code == 0
    assert "information indices (1-based, 2): 3 4" in out
    assert "frozen indices (1-based, 2): 1 2" in out


def test_construct_puncturing(capsys):
    code, out, _ = _run(["construct", "--np", "14"], capsys)
    assert code == 0
    assert "(1-based, 28)" in out


def test_construct_rejects_bad_shape(capsys):
    code, _, err = _run(["construct", "--n", "100", "--k", "38"], capsys)
    assert code == 2
    assert "error" in err


def test_selftest_fast_passes(capsys):
    code, out, _ = _run(["selftest", "--fast"], capsys)
    assert code == 0
    lines = out.strip().splitlines()
    assert all(line.startswith("PASS") for line in lines[:-1])
    assert lines[-1].endswith("checks passed")


def test_selftest_corrupt_crc_fails(capsys):
    # negative control: the suite must notice a wrong checker polynomial
    code, out, _ = _run(["selftest", "--fast", "--corrupt-crc"], capsys)
    assert code == 1
    assert any(line.startswith("FAIL crc-detection") for line in
               out.strip().splitlines())


def test_parser_requires_subcommand():
    with pytest.raises(SystemExit):
        build_parser().parse_args([])
