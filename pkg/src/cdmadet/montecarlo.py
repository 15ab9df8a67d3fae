"""Threshold calibration, rate estimation with Wilson intervals, and sweep harness.

Every random draw is determined by (master seed, grid point, trial index)
through numpy SeedSequence derivation, so results are independent of thread
count and scheduling order.  Detector statistics and thresholds live in the
natural-log domain throughout (thresholding is monotone-invariant).
"""

from __future__ import annotations

import json
import math
import os
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import product
from typing import Callable

import numpy as np
from threadpoolctl import threadpool_limits

from .channel import analytic_covariances, make_realization
from .codebook import CodeGeometry, SpreadingCode, default_codes, detector_geometry
from .core import ParameterError, SystemParams
from .detectors import (DETECTOR_IDS, compute_Te_log, genie_glrt, mglrt_direct_log,
                        mglrt_fast_log, normalized_statistic_log)
from .scenario import ScenarioConfig, amplitude_vector, assemble_R, build_user_codes
from .waveform import chip_pulse_for, noise_covariance

Z95 = 1.959963984540054
_CAL_TAG = 0xCA1
_TE_TAG = 0x7E
_POINT_TAG = 0x9019
_CODE_TAG = 0xC0DE


def wilson_interval(successes: int, trials: int, z: float = Z95) -> tuple[float, float]:
    """Wilson score interval for a binomial rate (95% by default)."""
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}")
    if not (0 <= successes <= trials):
        raise ParameterError("successes must lie in [0, trials]")
    p = successes / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2.0 * trials)) / denom
    half = z * math.sqrt(p * (1.0 - p) / trials + z * z / (4.0 * trials * trials)) / denom
    # the score interval contains p by construction; enforce it against roundoff
    return max(0.0, min(center - half, p)), min(1.0, max(center + half, p))


def derive_rng(*path: int) -> np.random.Generator:
    """Deterministic generator for an integer derivation path."""
    return np.random.default_rng(np.random.SeedSequence([int(p) for p in path]))


def derive_seed(*path: int) -> int:
    """Deterministic 64-bit seed for an integer derivation path."""
    ss = np.random.SeedSequence([int(p) for p in path])
    return int(ss.generate_state(2, np.uint64)[0])


def code_fingerprint(codes) -> str:
    """Short stable fingerprint of a code set (CRC over the sign patterns)."""
    acc = 0
    for c in codes:
        acc = zlib.crc32(bytes((s + 1) // 2 for s in c.signs()), acc)
        acc = zlib.crc32(b";", acc)
    return f"{acc:08x}"


@dataclass(eq=False)
class TrialContext:
    """Everything a detector may consume besides the data matrix."""

    rng: np.random.Generator
    params: SystemParams | None = None
    geometry: CodeGeometry | None = None
    cov: object | None = None            # GenieCovariances under the drawn realization
    log_te_max: float | None = None
    realization: object | None = None


@dataclass(frozen=True)
class Detector:
    """A statistic with its side-information requirements; fn returns a log value."""

    id: str
    fn: Callable
    needs_data: bool = True
    needs_genie: bool = False
    needs_te_max: bool = False


def _stat_mglrt(r, ctx: TrialContext) -> float:
    return mglrt_fast_log(r, ctx.geometry)


def _stat_mglrt_direct(r, ctx: TrialContext) -> float:
    return mglrt_direct_log(r, ctx.geometry)


def _stat_cfar(r, ctx: TrialContext) -> float:
    return mglrt_fast_log(r, ctx.geometry) - compute_Te_log(ctx.cov.M_w, ctx.geometry)


def _stat_normalized(r, ctx: TrialContext) -> float:
    return normalized_statistic_log(mglrt_fast_log(r, ctx.geometry), ctx.log_te_max)


def _stat_genie(r, ctx: TrialContext) -> float:
    return genie_glrt(r, ctx.geometry, ctx.cov)


DETECTORS: dict[str, Detector] = {
    "mglrt": Detector("mglrt", _stat_mglrt),
    "mglrt-direct": Detector("mglrt-direct", _stat_mglrt_direct),
    "cfar": Detector("cfar", _stat_cfar, needs_genie=True),
    "normalized": Detector("normalized", _stat_normalized, needs_te_max=True),
    "genie": Detector("genie", _stat_genie, needs_genie=True),
}
assert set(DETECTORS) == set(DETECTOR_IDS)


def resolve_detector(detector) -> Detector:
    if isinstance(detector, Detector):
        return detector
    if detector in DETECTORS:
        return DETECTORS[detector]
    raise ParameterError(f"unknown detector {detector!r}; known: {sorted(DETECTORS)}")


@dataclass(eq=False)
class ScenarioFamily:
    """Precomputed immutable state shared by all trials of one scenario setting."""

    config: ScenarioConfig
    user_codes: list
    geometry: CodeGeometry
    r_n: np.ndarray
    amplitudes: np.ndarray
    log_te_max: float | None = None

    @classmethod
    def build(cls, config: ScenarioConfig, log_te_max: float | None = None) -> "ScenarioFamily":
        pulse = chip_pulse_for(config.params)
        return cls(
            config=config,
            user_codes=build_user_codes(config),
            geometry=detector_geometry(config.codes[0], config.params),
            r_n=noise_covariance(config.params, pulse),
            amplitudes=amplitude_vector(config.params),
            log_te_max=log_te_max,
        )

    def draw_trial(self, rng: np.random.Generator, needs_genie: bool = False):
        p = self.config.params
        span = 1 if self.config.mode == "iid_blocks" else None
        realization = make_realization(p, self.amplitudes, rng, span=span)
        data = assemble_R(self.config, realization, self.user_codes, rng)
        cov = None
        if needs_genie:
            cov = analytic_covariances(realization, self.user_codes, self.r_n, p,
                                       chip_pulse_for(p))
        ctx = TrialContext(rng=rng, params=p, geometry=self.geometry, cov=cov,
                           log_te_max=self.log_te_max, realization=realization)
        return data.R, ctx


def run_statistics(detector, family: ScenarioFamily | None, n_trials: int, seed: int,
                   threads: int = 1) -> np.ndarray:
    """Log statistics over independent trials; trial i uses the stream (seed, i).

    BLAS pools are pinned to one thread here: the matrices are small enough
    that multi-threaded kernels only add synchronization cost, and trial-level
    threading already uses the cores.
    """
    det = resolve_detector(detector)
    if det.needs_data and family is None:
        raise ParameterError(f"detector {det.id!r} needs a scenario family")
    if det.needs_te_max and (family is None or family.log_te_max is None):
        raise ParameterError(f"detector {det.id!r} needs a calibrated log_te_max")
    out = np.empty(n_trials)

    def one(i: int) -> None:
        rng = derive_rng(seed, i)
        if det.needs_data:
            r, ctx = family.draw_trial(rng, det.needs_genie)
        else:
            r, ctx = None, TrialContext(rng=rng)
        out[i] = det.fn(r, ctx)

    with threadpool_limits(limits=1, user_api="blas"):
        if threads <= 1:
            for i in range(n_trials):
                one(i)
        else:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                list(pool.map(one, range(n_trials)))
    return out


def default_calibration_trials(target_pfa: float) -> int:
    """At least 100 expected threshold exceedances during calibration."""
    return int(max(10_000, math.ceil(100.0 / target_pfa)))


def calibrate_threshold(detector, h0_config, n_trials: int, target_pfa: float,
                        master_seed: int, threads: int = 1,
                        log_te_max: float | None = None) -> float:
    """Empirical (1 - target_pfa) quantile of the H0 log statistic.

    Uses linear interpolation between order statistics (numpy default).
    Deterministic given the seed: reruns reproduce the threshold bitwise.
    """
    if not (0.0 < target_pfa < 1.0):
        raise ParameterError(f"target_pfa must lie in (0, 1), got {target_pfa}")
    if n_trials < 10.0 / target_pfa:
        raise ParameterError(
            f"need at least {math.ceil(10.0 / target_pfa)} calibration trials "
            f"for target_pfa = {target_pfa}, got {n_trials}"
        )
    det = resolve_detector(detector)
    family = None
    if det.needs_data:
        if h0_config is None:
            raise ParameterError("calibration needs an H0 scenario config")
        cfg = h0_config.config if isinstance(h0_config, ScenarioFamily) else h0_config
        if cfg.hypothesis != "H0":
            cfg = replace(cfg, hypothesis="H0")
        family = ScenarioFamily.build(cfg, log_te_max=log_te_max)
    stats = run_statistics(det, family, n_trials, master_seed, threads)
    return float(np.quantile(stats, 1.0 - target_pfa))


def estimate_Te_max(scenario_ensemble, geometry: CodeGeometry | None = None,
                    n_draws: int = 500, master_seed: int = 0,
                    safety_factor: float = 1.0) -> float:
    """Largest covariance factor of the H0 statistic over an ensemble (linear scale).

    Ensemble members are either explicit H0 covariance matrices or scenario
    configs/families, in which case n_draws realizations (delays, amplitudes)
    are sampled per member and the analytic H0 covariance of each is used.
    """
    members = list(scenario_ensemble)
    if not members:
        raise ParameterError("scenario ensemble must be nonempty")
    if safety_factor <= 0.0:
        raise ParameterError("safety factor must be positive")
    best = -np.inf
    with threadpool_limits(limits=1, user_api="blas"):
        for mi, member in enumerate(members):
            if isinstance(member, np.ndarray):
                if geometry is None:
                    raise ParameterError("explicit covariance members need a geometry")
                best = max(best, compute_Te_log(member, geometry))
                continue
            fam = member if isinstance(member, ScenarioFamily) else ScenarioFamily.build(member)
            geom = geometry if geometry is not None else fam.geometry
            p = fam.config.params
            pulse = chip_pulse_for(p)
            for i in range(n_draws):
                rng = derive_rng(master_seed, _TE_TAG, mi, i)
                realization = make_realization(p, fam.amplitudes, rng, span=1)
                cov = analytic_covariances(realization, fam.user_codes, fam.r_n, p, pulse)
                best = max(best, compute_Te_log(cov.M_w, geom))
    return float(np.exp(best) * safety_factor)


@dataclass(frozen=True)
class CurveRecord:
    """One Monte Carlo measurement point (thresholds and statistics in log scale)."""

    detector: str
    snr_db: float
    sir_db: float
    fd: float
    alpha: float
    k_users: int
    q_active: int
    mode: str
    threshold: float
    rate: float
    ci_lo: float
    ci_hi: float
    trials: int
    seed: int
    code_fingerprint: str = ""

    def __post_init__(self):
        if not (0.0 <= self.ci_lo <= self.rate <= self.ci_hi <= 1.0):
            raise ParameterError("confidence interval must satisfy 0 <= lo <= rate <= hi <= 1")
        if self.trials < 1:
            raise ParameterError("trials must be >= 1")


CSV_COLUMNS = ("detector", "snr_db", "sir_db", "fd", "alpha", "k_users", "q_active",
               "mode", "threshold", "rate", "ci_lo", "ci_hi", "trials", "seed")


def _lin_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


def estimate_rate(detector, threshold: float, config: ScenarioConfig, n_trials: int,
                  master_seed: int, threads: int = 1,
                  log_te_max: float | None = None) -> CurveRecord:
    """Exceedance rate of a calibrated threshold with a Wilson 95% interval."""
    det = resolve_detector(detector)
    family = ScenarioFamily.build(config, log_te_max=log_te_max) if det.needs_data else None
    stats = run_statistics(det, family, n_trials, master_seed, threads)
    hits = int(np.count_nonzero(stats > threshold))
    lo, hi = wilson_interval(hits, n_trials)
    p = config.params
    return CurveRecord(
        detector=det.id,
        snr_db=_lin_to_db(p.snr),
        sir_db=_lin_to_db(p.sir),
        fd=p.fd,
        alpha=p.alpha,
        k_users=p.K,
        q_active=p.Q_active,
        mode=config.mode,
        threshold=float(threshold),
        rate=hits / n_trials,
        ci_lo=lo,
        ci_hi=hi,
        trials=n_trials,
        seed=int(master_seed),
        code_fingerprint=code_fingerprint(config.codes),
    )


@dataclass(eq=False)
class ThresholdTable:
    """Calibrated log-domain thresholds per (detector, H0 scenario family)."""

    entries: dict[str, dict] = field(default_factory=dict)

    @staticmethod
    def key_str(key: tuple) -> str:
        return json.dumps(list(key))

    def get(self, key: tuple) -> float | None:
        e = self.entries.get(self.key_str(key))
        return None if e is None else float(e["threshold"])

    def put(self, key: tuple, threshold: float, n_trials: int, seed: int,
            method: str = "empirical-quantile-linear") -> None:
        self.entries[self.key_str(key)] = {
            "threshold": float(threshold), "n_trials": int(n_trials),
            "method": method, "seed": int(seed),
        }

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump({"entries": self.entries}, fh, indent=1, sort_keys=True)

    @classmethod
    def load(cls, path) -> "ThresholdTable":
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        return cls(entries=dict(doc["entries"]))


def family_key(detector_id: str, config: ScenarioConfig,
               log_te_max: float | None = None) -> tuple:
    """Canonical H0 calibration-family key for a scenario point.

    q_active never affects H0.  With no interferers (K = 1) the H0 data law
    does not depend on snr, sir or fd; only the genie statistic keeps the
    amplitude knobs there (its side information involves the user-0
    amplitude), and fd matters only once interferer gains enter the data.
    """
    p = config.params
    key = [detector_id, p.N, p.M, p.L, p.P, p.Q, p.n_paths,
           round(p.alpha, 12), round(p.N0, 12), p.K, config.mode,
           code_fingerprint(config.codes)]
    if p.K > 1 or detector_id == "genie":
        key += [round(p.snr, 12), round(p.sir, 12)]
    if p.K > 1:
        key.append(round(p.fd, 12))
    if detector_id == "normalized":
        if log_te_max is None:
            raise ParameterError("the normalized detector needs log_te_max for its family key")
        key.append(round(log_te_max, 9))
    return tuple(key)


@dataclass(eq=False)
class SweepSpec:
    """Grid specification for a Monte Carlo sweep.

    Grid axes default to the base parameter value; the iteration order is
    detectors x k_users x snr_db x sir_db x fd x alpha x q_active.
    """

    params: SystemParams
    detectors: tuple[str, ...] = ("mglrt",)
    snr_db: tuple[float, ...] | None = None
    sir_db: tuple[float, ...] | None = None
    fd: tuple[float, ...] | None = None
    alpha: tuple[float, ...] | None = None
    k_users: tuple[int, ...] | None = None
    q_active: tuple[int, ...] | None = None
    mode: str = "faithful_stream"
    hypothesis: str = "H1"
    target_pfa: float = 0.01
    n_trials: int = 1000
    n_calibration: int | None = None
    n_te_draws: int = 200
    master_seed: int = 0
    codes: tuple[SpreadingCode, ...] | None = None
    log_te_max: float | None = None
    thresholds: ThresholdTable | None = None
    threads: int = 1

    def axes(self) -> dict:
        p = self.params
        return {
            "detector": tuple(self.detectors),
            "k_users": tuple(self.k_users) if self.k_users else (p.K,),
            "snr_db": tuple(self.snr_db) if self.snr_db else (_lin_to_db(p.snr),),
            "sir_db": tuple(self.sir_db) if self.sir_db else (_lin_to_db(p.sir),),
            "fd": tuple(self.fd) if self.fd else (p.fd,),
            "alpha": tuple(self.alpha) if self.alpha else (p.alpha,),
            "q_active": tuple(self.q_active) if self.q_active else (p.Q_active,),
        }

    def grid(self):
        ax = self.axes()
        return list(product(ax["detector"], ax["k_users"], ax["snr_db"], ax["sir_db"],
                            ax["fd"], ax["alpha"], ax["q_active"]))

    def point_params(self, k: int, snr_db: float, sir_db: float, fd: float,
                     alpha: float, q_active: int) -> SystemParams:
        return self.params.with_updates(
            K=int(k), snr=10.0 ** (snr_db / 10.0), sir=10.0 ** (sir_db / 10.0),
            fd=float(fd), alpha=float(alpha), Q_active=int(q_active),
        )

    def resolved_codes(self) -> tuple[SpreadingCode, ...]:
        if self.codes is not None:
            return tuple(self.codes)
        max_k = max(self.axes()["k_users"])
        proto = self.params.with_updates(K=int(max_k))
        return default_codes(proto, derive_rng(self.master_seed, _CODE_TAG))


class ResultSink:
    """Append-only CSV (plus optional JSONL) result store with point-level resume."""

    def __init__(self, csv_path, jsonl_path=None):
        self.csv_path = csv_path
        self.jsonl_path = jsonl_path
        self._rows: dict[tuple, CurveRecord] = {}
        if os.path.exists(csv_path) and os.path.getsize(csv_path) > 0:
            self._load_existing()
        else:
            with open(csv_path, "w", encoding="utf-8") as fh:
                fh.write(",".join(CSV_COLUMNS) + "\n")

    @staticmethod
    def identity(rec: CurveRecord) -> tuple:
        return (rec.detector, f"{rec.snr_db:.10g}", f"{rec.sir_db:.10g}",
                f"{rec.fd:.10g}", f"{rec.alpha:.10g}", rec.k_users, rec.q_active,
                rec.mode, rec.trials, rec.seed)

    def _load_existing(self) -> None:
        import csv as _csv

        with open(self.csv_path, encoding="utf-8") as fh:
            reader = _csv.DictReader(fh)
            if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
                raise ParameterError(
                    f"existing file {self.csv_path} does not match the result schema"
                )
            for row in reader:
                rec = CurveRecord(
                    detector=row["detector"], snr_db=float(row["snr_db"]),
                    sir_db=float(row["sir_db"]), fd=float(row["fd"]),
                    alpha=float(row["alpha"]), k_users=int(row["k_users"]),
                    q_active=int(row["q_active"]), mode=row["mode"],
                    threshold=float(row["threshold"]), rate=float(row["rate"]),
                    ci_lo=float(row["ci_lo"]), ci_hi=float(row["ci_hi"]),
                    trials=int(row["trials"]), seed=int(row["seed"]),
                )
                self._rows[self.identity(rec)] = rec

    def get(self, rec_identity: tuple) -> CurveRecord | None:
        return self._rows.get(rec_identity)

    def append(self, rec: CurveRecord) -> None:
        vals = (rec.detector, repr(rec.snr_db), repr(rec.sir_db), repr(rec.fd),
                repr(rec.alpha), str(rec.k_users), str(rec.q_active), rec.mode,
                repr(rec.threshold), repr(rec.rate), repr(rec.ci_lo), repr(rec.ci_hi),
                str(rec.trials), str(rec.seed))
        with open(self.csv_path, "a", encoding="utf-8") as fh:
            fh.write(",".join(vals) + "\n")
        if self.jsonl_path is not None:
            doc = {c: getattr(rec, c) for c in CSV_COLUMNS}
            with open(self.jsonl_path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(doc) + "\n")
        self._rows[self.identity(rec)] = rec


def _point_record_seed(master_seed: int, index: int) -> int:
    return derive_seed(master_seed, _POINT_TAG, index)


def _calibration_seed(master_seed: int, key: tuple) -> int:
    return derive_seed(master_seed, _CAL_TAG, zlib.crc32(ThresholdTable.key_str(key).encode()))


def sweep_log_te_max(spec: SweepSpec) -> float:
    """log Te_max over the sweep's own H0 scenario ensemble."""
    codes = spec.resolved_codes()
    ax = spec.axes()
    h0_configs = []
    seen = set()
    for (_, k, snr_db, sir_db, fd, alpha, qa) in spec.grid():
        params = spec.point_params(k, snr_db, sir_db, fd, alpha, qa)
        ident = (k, round(snr_db, 9), round(sir_db, 9), round(fd, 9), round(alpha, 9))
        if ident in seen:
            continue
        seen.add(ident)
        h0_configs.append(ScenarioConfig(params, "H0", spec.mode, codes[:k]))
    te_max = estimate_Te_max(h0_configs, n_draws=spec.n_te_draws,
                             master_seed=derive_seed(spec.master_seed, _TE_TAG))
    return float(np.log(te_max))


def calibrate_grid(spec: SweepSpec, progress=None) -> ThresholdTable:
    """Calibrate thresholds for every (detector, H0 family) a sweep will request."""
    table = ThresholdTable()
    _sweep_thresholds(spec, table, allow_calibration=True, progress=progress)
    return table


def _sweep_thresholds(spec: SweepSpec, table: ThresholdTable, allow_calibration: bool,
                      progress=None) -> dict[tuple, float]:
    codes = spec.resolved_codes()
    n_cal = spec.n_calibration or default_calibration_trials(spec.target_pfa)
    log_te = spec.log_te_max
    if "normalized" in spec.detectors and log_te is None:
        log_te = sweep_log_te_max(spec)
    out: dict[tuple, float] = {}
    for point in spec.grid():
        det, k, snr_db, sir_db, fd, alpha, qa = point
        params = spec.point_params(k, snr_db, sir_db, fd, alpha, qa)
        h0 = ScenarioConfig(params, "H0", spec.mode, codes[:k])
        key = family_key(det, h0, log_te_max=log_te)
        if key in out:
            continue
        eta = table.get(key)
        if eta is None:
            if not allow_calibration:
                raise ParameterError(
                    f"no calibrated threshold for detector {det!r} at family {key}"
                )
            seed = _calibration_seed(spec.master_seed, key)
            eta = calibrate_threshold(det, h0, n_cal, spec.target_pfa, seed,
                                      threads=spec.threads, log_te_max=log_te)
            table.put(key, eta, n_cal, seed)
            if progress is not None:
                progress(f"calibrated {det} @ {key}: threshold {eta:.6g}")
        out[key] = eta
    return out


def run_sweep(spec: SweepSpec, sink: ResultSink | None = None,
              progress=None) -> list[CurveRecord]:
    """One CurveRecord per grid point; deterministic given the master seed.

    Thresholds come from spec.thresholds when given (missing entries raise) or
    are calibrated on the fly otherwise.  With a sink, completed points are
    written as they finish and rerunning resumes at grid-point granularity.
    """
    for det in spec.detectors:
        resolve_detector(det)
    grid = spec.grid()
    if not grid:
        raise ParameterError("sweep grid is empty")
    codes = spec.resolved_codes()
    log_te = spec.log_te_max
    if "normalized" in spec.detectors and log_te is None:
        log_te = sweep_log_te_max(spec)
        spec = replace_spec(spec, log_te_max=log_te)
    table = spec.thresholds if spec.thresholds is not None else ThresholdTable()
    thresholds = _sweep_thresholds(spec, table, allow_calibration=spec.thresholds is None,
                                   progress=progress)
    records: list[CurveRecord] = []
    for index, point in enumerate(grid):
        det, k, snr_db, sir_db, fd, alpha, qa = point
        params = spec.point_params(k, snr_db, sir_db, fd, alpha, qa)
        config = ScenarioConfig(params, spec.hypothesis, spec.mode, codes[:k])
        h0 = ScenarioConfig(params, "H0", spec.mode, codes[:k])
        eta = thresholds[family_key(det, h0, log_te_max=log_te)]
        seed = _point_record_seed(spec.master_seed, index)
        probe = estimate_rate_identity(det, config, spec.n_trials, seed)
        if sink is not None:
            existing = sink.get(probe)
            if existing is not None:
                # the CSV schema does not carry the fingerprint; restore it
                records.append(replace(existing,
                                       code_fingerprint=code_fingerprint(codes[:k])))
                continue
        rec = estimate_rate(det, eta, config, spec.n_trials, seed,
                            threads=spec.threads, log_te_max=log_te)
        records.append(rec)
        if sink is not None:
            sink.append(rec)
        if progress is not None:
            progress(f"point {index + 1}/{len(grid)} {det} k={k} snr={snr_db}dB "
                     f"sir={sir_db}dB fd={fd} alpha={alpha} q_act={qa}: "
                     f"rate {rec.rate:.4f} [{rec.ci_lo:.4f}, {rec.ci_hi:.4f}]")
    return records


def estimate_rate_identity(detector, config: ScenarioConfig, n_trials: int,
                           seed: int) -> tuple:
    """Sink identity a finished estimate_rate record would carry (for resume)."""
    det = resolve_detector(detector)
    p = config.params
    return (det.id, f"{_lin_to_db(p.snr):.10g}", f"{_lin_to_db(p.sir):.10g}",
            f"{p.fd:.10g}", f"{p.alpha:.10g}", p.K, p.Q_active, config.mode,
            n_trials, int(seed))


def replace_spec(spec: SweepSpec, **kwargs) -> SweepSpec:
    fields = {k: getattr(spec, k) for k in spec.__dataclass_fields__}
    fields.update(kwargs)
    return SweepSpec(**fields)
