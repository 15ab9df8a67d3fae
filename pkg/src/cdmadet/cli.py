"""Batch front end: selftest, threshold calibration, sweeps, single-point runs.

Exit codes: 0 ok, 1 invariant failure, 2 configuration error.  Results go to
a CSV file (one self-describing row per grid point) and thresholds to a JSON
table; nothing is plotted here.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import replace

import numpy as np

from . import montecarlo as mc
from .codebook import CodeGeometry, default_codes, detector_geometry
from .config import ExperimentConfig, load_config, preset
from .core import ParameterError, SystemParams
from .detectors import mglrt_direct_log, mglrt_fast_log
from .scenario import (ScenarioConfig, assemble_R, build_user_codes, chip_conv_oracle,
                       draw_symbols, epochs_for)
from .channel import jakes_autocorr, make_realization
from .scenario import amplitude_vector

SELFTEST_PARAMS = SystemParams(N=4, M=1, L=2, P=1, Q=16, K=2, alpha=0.3, fd=0.05,
                               snr=40.0, sir=1.0)


def _corrupt_geometry(geometry: CodeGeometry) -> CodeGeometry:
    """Fault-injection hook: breaks the null-first column ordering of Ubar."""
    bad = np.concatenate([geometry.Ubar[:, -geometry.D:], geometry.Ubar[:, :-geometry.D]],
                         axis=1)
    return replace(geometry, Ubar=bad)


def _selftest_fast_vs_direct(corrupt: bool) -> tuple[bool, str]:
    rng = mc.derive_rng(7, 0)
    params = SELFTEST_PARAMS
    codes = default_codes(params, rng)
    geometry = detector_geometry(codes[0], params)
    if corrupt:
        geometry = _corrupt_geometry(geometry)
    worst = 0.0
    for _ in range(40):
        r = (rng.standard_normal((params.window_len, params.Q))
             + 1j * rng.standard_normal((params.window_len, params.Q)))
        worst = max(worst, abs(mglrt_fast_log(r, geometry) - mglrt_direct_log(r, geometry)))
    return worst <= 1e-8, f"max |log T_fast - log T_direct| = {worst:.3e}"


def _selftest_assembly(corrupt: bool) -> tuple[bool, str]:
    params = SELFTEST_PARAMS
    worst = 0.0
    for trial in range(8):
        rng = mc.derive_rng(11, trial)
        codes = default_codes(params, rng)
        config = ScenarioConfig(params, "H1", "faithful_stream", codes)
        realization = make_realization(params, amplitude_vector(params), rng)
        symbols = draw_symbols(params.K, epochs_for(params), rng)
        built = assemble_R(config, realization, build_user_codes(config), rng,
                           symbols=symbols, with_noise=False)
        oracle = chip_conv_oracle(config, realization, symbols)
        worst = max(worst, float(np.max(np.abs(built.R - oracle.R))))
    return worst <= 1e-10, f"max |assembled - convolved| = {worst:.3e}"


def _selftest_jakes(corrupt: bool) -> tuple[bool, str]:
    x = 2.0 * np.pi * 0.1
    series = 1.0 - x ** 2 / 4 + x ** 4 / 64 - x ** 6 / 2304 + x ** 8 / 147456
    err = abs(jakes_autocorr(1, 0.1) - series)
    rng = mc.derive_rng(13)
    n = 20000
    from .channel import _gain_factor
    factor = _gain_factor(2, 0.1)
    z = (rng.standard_normal((2, n)) + 1j * rng.standard_normal((2, n))) * np.sqrt(0.5)
    pairs = factor @ z
    prods = (pairs[0] * np.conj(pairs[1])).real
    emp = float(np.mean(prods))
    se = float(np.std(prods) / np.sqrt(n))
    ok = err <= 1e-6 and abs(emp - jakes_autocorr(1, 0.1)) <= 4 * se
    return ok, f"series error {err:.2e}; lag-1 sample corr {emp:.5f} (se {se:.5f})"


def _selftest_pfa(corrupt: bool) -> tuple[bool, str]:
    params = SELFTEST_PARAMS
    codes = default_codes(params, mc.derive_rng(17))
    h0 = ScenarioConfig(params, "H0", "faithful_stream", codes)
    target = 0.05
    eta = mc.calibrate_threshold("mglrt", h0, 4000, target, master_seed=19)
    rec = mc.estimate_rate("mglrt", eta, h0, 4000, master_seed=23)
    slack = 3.0 * np.sqrt(target * (1 - target) / 4000)
    ok = abs(rec.rate - target) <= slack + (rec.ci_hi - rec.ci_lo) / 2
    return ok, f"calibrated at {target}, fresh H0 rate {rec.rate:.4f} (slack {slack:.4f})"


def cmd_selftest(args) -> int:
    checks = [
        ("fast-vs-direct statistic", _selftest_fast_vs_direct),
        ("assembly-vs-convolution", _selftest_assembly),
        ("jakes autocorrelation", _selftest_jakes),
        ("pfa self-consistency", _selftest_pfa),
    ]
    failures = []
    for name, fn in checks:
        t0 = time.time()
        ok, detail = fn(args.corrupt_geometry)
        status = "PASS" if ok else "FAIL"
        print(f"[{status}] {name}: {detail} ({time.time() - t0:.1f}s)")
        if not ok:
            failures.append(name)
    if failures:
        print(f"selftest failed: {', '.join(failures)}")
        return 1
    print("selftest passed")
    return 0


def _load_or_preset(args) -> ExperimentConfig:
    if args.preset and args.config:
        raise ParameterError("give either --preset or --config, not both")
    if args.preset:
        cfg = preset(args.preset)
    elif args.config:
        cfg = load_config(args.config)
    else:
        raise ParameterError("a config file (--config) or preset (--preset) is required")
    overrides = {}
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.threads is not None:
        overrides["threads"] = args.threads
    if args.trials is not None:
        overrides["n_trials"] = args.trials
    if getattr(args, "calibration_trials", None) is not None:
        overrides["n_calibration"] = args.calibration_trials
    if overrides:
        cfg = replace(cfg, **overrides)
    return cfg


def cmd_calibrate(args) -> int:
    cfg = _load_or_preset(args)
    spec = cfg.sweep_spec()
    out = args.out or cfg.thresholds_out
    table = mc.calibrate_grid(spec, progress=print)
    table.save(out)
    print(f"wrote {len(table.entries)} thresholds to {out}")
    return 0


def cmd_sweep(args) -> int:
    cfg = _load_or_preset(args)
    table = mc.ThresholdTable.load(args.thresholds) if args.thresholds else None
    spec = cfg.sweep_spec(thresholds=table)
    if args.dry_run:
        for point in spec.grid():
            det, k, snr_db, sir_db, fd, alpha, qa = point
            print(f"{det} k={k} snr_db={snr_db} sir_db={sir_db} fd={fd} "
                  f"alpha={alpha} q_active={qa}")
        return 0
    csv_out = args.out or cfg.csv_out
    sink = mc.ResultSink(csv_out, jsonl_path=cfg.jsonl_out or None)
    records = mc.run_sweep(spec, sink=sink, progress=print)
    _print_summary(records)
    print(f"wrote {len(records)} records to {csv_out}")
    return 0


def cmd_run(args) -> int:
    cfg = _load_or_preset(args)
    spec = cfg.sweep_spec()
    grid = spec.grid()
    if len(grid) != 1:
        raise ParameterError(
            f"`run` expects a single-point config, got {len(grid)} grid points"
        )
    if args.dry_run:
        print(grid[0])
        return 0
    table = mc.ThresholdTable.load(args.thresholds) if args.thresholds else None
    spec = mc.replace_spec(spec, thresholds=table)
    sink = mc.ResultSink(args.out or cfg.csv_out, jsonl_path=cfg.jsonl_out or None)
    records = mc.run_sweep(spec, sink=sink, progress=print)
    _print_summary(records)
    return 0


def _print_summary(records) -> None:
    header = f"{'detector':>12} {'snr_db':>7} {'sir_db':>7} {'fd':>6} {'alpha':>6} " \
             f"{'K':>3} {'q_act':>6} {'rate':>7} {'ci':>17} {'trials':>7}"
    print(header)
    for r in records:
        print(f"{r.detector:>12} {r.snr_db:>7.1f} {r.sir_db:>7.1f} {r.fd:>6.3g} "
              f"{r.alpha:>6.2f} {r.k_users:>3d} {r.q_active:>6d} {r.rate:>7.4f} "
              f"[{r.ci_lo:.4f}, {r.ci_hi:.4f}] {r.trials:>7d}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cdmadet",
        description="Blind DS/CDMA user-detection simulator and Monte Carlo harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_self = sub.add_parser("selftest", help="run the built-in oracle suite")
    p_self.add_argument("--corrupt-geometry", action="store_true",
                        help="fault-injection hook for testing the selftest itself")
    p_self.set_defaults(fn=cmd_selftest)

    for name, fn, help_text in (
        ("calibrate", cmd_calibrate, "calibrate detection thresholds for a config grid"),
        ("sweep", cmd_sweep, "run a Monte Carlo sweep and append CSV records"),
        ("run", cmd_run, "run a single grid point"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON or TOML experiment config file")
        p.add_argument("--preset", help="named preset: fig1, fig2, fig3, fig4")
        p.add_argument("--seed", type=int, help="override the master seed")
        p.add_argument("--threads", type=int, help="worker threads for trials")
        p.add_argument("--trials", type=int, help="override trials per grid point")
        p.add_argument("--calibration-trials", type=int, dest="calibration_trials",
                       help="override calibration trial count")
        p.add_argument("--out", help="output path (thresholds JSON or results CSV)")
        if name in ("sweep", "run"):
            p.add_argument("--thresholds", help="threshold table from `calibrate`")
            p.add_argument("--dry-run", action="store_true",
                           help="print the grid without running")
        p.set_defaults(fn=fn)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ParameterError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
