"""Command line front end: batch simulation, code inspection, self checks.

Output is plot-ready CSV plus a JSON manifest that reruns the experiment
bit-identically; plotting itself is out of scope.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .harness import RECEIVERS, SimConfig, config_dict, run_sweep
from .polar import construct_code, qup_spec
from .checks import run_selftest

CSV_HEADER = ("snr_db,frames,errors,fer,ci95_lo,ci95_hi,"
              "mean_nodes_estimator,mean_nodes_decoder,wall_s")

_CONFIG_FIELDS = tuple(SimConfig.__dataclass_fields__)


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".12g")


def csv_row(pt) -> str:
    return ",".join([
        _fmt(pt.snr_db), _fmt(pt.frames), _fmt(pt.errors), _fmt(pt.fer),
        _fmt(pt.ci95_lo), _fmt(pt.ci95_hi), _fmt(pt.mean_nodes_estimator),
        _fmt(pt.mean_nodes_decoder), _fmt(pt.wall_s),
    ])


def _parse_snr_grid(text: str) -> list:
    try:
        start, step, stop = (float(t) for t in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError("expected start:step:stop") from None
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError("need step > 0 and stop >= start")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return [start + i * step for i in range(count)]


def _default_seed() -> int:
    return int(os.environ.get("PCTSIM_SEED", "12345"))


def _add_simulate(sub):
    p = sub.add_parser("simulate", help="run an FER sweep and emit CSV")
    a = p.add_argument
    # SimConfig fields all use SUPPRESS defaults so that a config file can
    # fill anything the command line leaves unset
    a("--receiver", choices=RECEIVERS, default=argparse.SUPPRESS)
    a("--n", type=int, default=argparse.SUPPRESS, help="code length")
    a("--k", type=int, default=argparse.SUPPRESS, help="info bits incl. CRC")
    a("--b", type=int, default=argparse.SUPPRESS, help="coherence blocks")
    a("--fading", default=argparse.SUPPRESS,
      choices=("uniform-phase", "rayleigh", "fixed"))
    a("--fixed-h-re", dest="fixed_h_re", type=float, default=argparse.SUPPRESS)
    a("--fixed-h-im", dest="fixed_h_im", type=float, default=argparse.SUPPRESS)
    a("--list", dest="list_size", type=int, default=argparse.SUPPRESS,
      help="decoder list size")
    a("--beta", type=int, default=argparse.SUPPRESS,
      help="constrained prefix length for the blind estimator")
    a("--le", dest="est_list", type=int, default=argparse.SUPPRESS,
      help="estimator list size")
    a("--coarse", dest="coarse_levels", type=int, default=argparse.SUPPRESS)
    a("--fine", dest="fine_levels", type=int, default=argparse.SUPPRESS)
    a("--metric-mode", dest="metric_mode", choices=("sum", "max"),
      default=argparse.SUPPRESS)
    a("--np", dest="n_p", type=int, default=argparse.SUPPRESS,
      help="pilot symbols per block (pat)")
    a("--snr", type=float, action="append", default=argparse.SUPPRESS,
      help="one E_s/N_0 point in dB; repeatable")
    a("--snr-grid", type=_parse_snr_grid, default=argparse.SUPPRESS,
      metavar="START:STEP:STOP",
      help="write --snr-grid=-1:0.25:2 when START is negative")
    a("--min-errors", dest="min_errors", type=int, default=argparse.SUPPRESS)
    a("--max-frames", dest="max_frames", type=int, default=argparse.SUPPRESS)
    a("--batch-size", dest="batch_size", type=int, default=argparse.SUPPRESS)
    a("--seed", dest="master_seed", type=int, default=argparse.SUPPRESS,
      help="master seed (default: PCTSIM_SEED env or 12345)")
    a("--interleaver-seed", dest="interleaver_seed", type=int,
      default=argparse.SUPPRESS)
    # run options, not part of the reproducibility key
    a("--workers", type=int, default=1)
    a("--timing", action="store_true",
      help="fill wall_s (costs CSV reproducibility across machines)")
    a("--config", help="JSON config file or a previous run manifest")
    a("--out", help="CSV path; stdout when omitted")
    p.set_defaults(func=cmd_simulate)


def _merged_config(args) -> SimConfig:
    given = {k: v for k, v in vars(args).items() if k in _CONFIG_FIELDS}
    snr = getattr(args, "snr", None)
    grid = getattr(args, "snr_grid", None)
    if snr is not None and grid is not None:
        raise ValueError("use either --snr or --snr-grid, not both")
    if snr is not None:
        given["snr_grid"] = list(snr)
    elif grid is not None:
        given["snr_grid"] = grid
    merged: dict = {}
    if args.config:
        with open(args.config) as fh:
            loaded = json.load(fh)
        if "config" in loaded and isinstance(loaded["config"], dict):
            loaded = loaded["config"]  # accept a manifest as config
        unknown = set(loaded) - set(_CONFIG_FIELDS)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        merged.update(loaded)
    merged.update(given)
    if "receiver" not in merged:
        raise ValueError("--receiver is required (flag or config file)")
    merged.setdefault("master_seed", _default_seed())
    return SimConfig(**merged)


def cmd_simulate(args) -> int:
    try:
        cfg = _merged_config(args)
    except (ValueError, OSError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        print(CSV_HEADER, file=out, flush=True)
        run_sweep(cfg, workers=max(1, args.workers), timing=args.timing,
                  on_point=lambda pt: print(csv_row(pt), file=out, flush=True))
    finally:
        if args.out:
            out.close()
    if args.out:
        manifest = {
            "tool": "pctsim",
            "version": __version__,
            "created_utc": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
            "workers": args.workers,
            "timing": bool(args.timing),
            "output": os.path.basename(args.out),
            "config": config_dict(cfg),
        }
        with open(args.out + ".manifest.json", "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return 0


def cmd_construct(args) -> int:
    try:
        code = construct_code(args.n, args.k)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    rate = code.K / code.N
    print(f"N={code.N} K={code.K} rate={rate:.4g} "
          f"(beta-expansion, base 2^(1/4))")
    print(f"information indices (1-based, {len(code.A)}): "
          + " ".join(str(i + 1) for i in code.A))
    print(f"frozen indices (1-based, {len(code.F)}): "
          + " ".join(str(i + 1) for i in code.F))
    if args.n_p:
        punct = qup_spec(code.N, 2 * args.b * args.n_p)
        print(f"punctured coded positions (1-based, {punct.count}): "
              + " ".join(str(i + 1) for i in punct.positions))
    return 0


def cmd_selftest(args) -> int:
    results = run_selftest(seed=args.seed, corrupt_crc=args.corrupt_crc,
                           fast=args.fast)
    failed = 0
    for r in results:
        status = "PASS" if r.ok else "FAIL"
        print(f"{status} {r.name}: {r.detail}")
        failed += 0 if r.ok else 1
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 0 if failed == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pctsim",
        description="Polar-coded transmission simulator with blind, "
                    "pilot-assisted, and perfect-CSI receivers.")
    parser.add_argument("--version", action="version",
                        version=f"pctsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_simulate(sub)

    p = sub.add_parser("construct", help="print the code construction")
    p.add_argument("--n", type=int, default=128)
    p.add_argument("--k", type=int, default=38)
    p.add_argument("--np", dest="n_p", type=int, default=0,
                   help="also print the pilot puncturing pattern")
    p.add_argument("--b", type=int, default=1)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("selftest", help="run the oracle property suite")
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("--fast", action="store_true", help="smaller trial counts")
    p.add_argument("--corrupt-crc", action="store_true",
                   help="negative control: mismatched checker polynomial")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
