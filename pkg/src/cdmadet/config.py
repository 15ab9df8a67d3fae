"""Experiment configuration: file parsing (JSON or TOML), validation, presets.

A config file is a flat table of the keys below; unknown keys are rejected.
Grids (snr_db, sir_db, fd, alpha, k_users, q_active, detectors) are lists;
everything else is scalar.  parse -> serialize -> parse is the identity.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace

from .codebook import SpreadingCode, code_from_signs
from .core import ParameterError, SystemParams
from .montecarlo import SweepSpec
from .scenario import HYPOTHESES, MODES

try:
    import tomllib as _toml
except ImportError:                      # Python < 3.11
    import tomli as _toml


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a batch experiment needs; maps 1:1 onto the config file."""

    # model dimensions (shared by every grid point)
    N: int = 15
    M: int = 2
    L: int = 2
    P: int = 4
    Q: int = 120
    n_paths: int = 3
    N0: float = 1.0
    # grid axes
    detectors: tuple[str, ...] = ("mglrt",)
    snr_db: tuple[float, ...] = (20.0,)
    sir_db: tuple[float, ...] = (0.0,)
    fd: tuple[float, ...] = (0.01,)
    alpha: tuple[float, ...] = (0.3,)
    k_users: tuple[int, ...] = (1,)
    q_active: tuple[int, ...] = ()        # empty -> all Q windows
    # experiment knobs
    hypothesis: str = "H1"
    mode: str = "faithful_stream"
    target_pfa: float = 0.01
    n_trials: int = 1000
    n_calibration: int = 0                # 0 -> default rule
    n_te_draws: int = 200
    master_seed: int = 0
    threads: int = 1
    # outputs
    csv_out: str = "results.csv"
    jsonl_out: str = ""
    thresholds_out: str = "thresholds.json"
    # optional explicit codes, one +-1 list per user (outermost = user index)
    codes: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        if self.hypothesis not in HYPOTHESES:
            raise ParameterError(f"hypothesis must be one of {HYPOTHESES}")
        if self.mode not in MODES:
            raise ParameterError(f"mode must be one of {MODES}")
        if not (0.0 < self.target_pfa < 1.0):
            raise ParameterError(f"target_pfa must lie in (0, 1), got {self.target_pfa}")
        if self.n_trials < 1:
            raise ParameterError("n_trials must be >= 1")
        if self.master_seed < 0:
            raise ParameterError("master_seed must be >= 0")
        if self.threads < 1:
            raise ParameterError("threads must be >= 1")
        if not self.detectors or not self.snr_db or not self.sir_db or not self.fd \
                or not self.alpha or not self.k_users:
            raise ParameterError("every grid axis needs at least one value")
        # every grid point must produce a valid SystemParams
        for k in self.k_users:
            for qa in (self.q_active or (self.Q,)):
                for a in self.alpha:
                    for f in self.fd:
                        self.base_params().with_updates(
                            K=int(k), alpha=float(a), fd=float(f), Q_active=int(qa))
        for signs in self.codes:
            code_from_signs(signs)
        if self.codes and any(len(c) != self.N for c in self.codes):
            raise ParameterError("explicit codes must all have length N")

    def base_params(self) -> SystemParams:
        return SystemParams(
            N=self.N, M=self.M, L=self.L, P=self.P, Q=self.Q, n_paths=self.n_paths,
            N0=self.N0, K=max(self.k_users), snr=10.0 ** (self.snr_db[0] / 10.0),
            sir=10.0 ** (self.sir_db[0] / 10.0), fd=self.fd[0], alpha=self.alpha[0],
        )

    def explicit_codes(self) -> tuple[SpreadingCode, ...] | None:
        if not self.codes:
            return None
        return tuple(code_from_signs(signs) for signs in self.codes)

    def sweep_spec(self, thresholds=None) -> SweepSpec:
        return SweepSpec(
            params=self.base_params(),
            detectors=self.detectors,
            snr_db=self.snr_db,
            sir_db=self.sir_db,
            fd=self.fd,
            alpha=self.alpha,
            k_users=self.k_users,
            q_active=self.q_active or None,
            mode=self.mode,
            hypothesis=self.hypothesis,
            target_pfa=self.target_pfa,
            n_trials=self.n_trials,
            n_calibration=self.n_calibration or None,
            n_te_draws=self.n_te_draws,
            master_seed=self.master_seed,
            codes=self.explicit_codes(),
            thresholds=thresholds,
            threads=self.threads,
        )

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc = {k: (list(v) if isinstance(v, tuple) else v) for k, v in doc.items()}
        doc["codes"] = [list(c) for c in self.codes]
        return doc

    def serialize(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)


_LIST_KEYS = {"detectors", "snr_db", "sir_db", "fd", "alpha", "k_users", "q_active", "codes"}


def config_from_dict(doc: dict) -> ExperimentConfig:
    known = set(ExperimentConfig.__dataclass_fields__)
    unknown = set(doc) - known
    if unknown:
        raise ParameterError(f"unknown config keys: {sorted(unknown)}")
    kwargs = {}
    for key, value in doc.items():
        if key in _LIST_KEYS:
            if not isinstance(value, (list, tuple)):
                raise ParameterError(f"config key {key!r} must be a list")
            if key == "codes":
                value = tuple(tuple(int(s) for s in c) for c in value)
            else:
                value = tuple(value)
        kwargs[key] = value
    return ExperimentConfig(**kwargs)


def load_config(path) -> ExperimentConfig:
    """Load a config file; TOML for .toml, JSON otherwise."""
    text = open(path, "rb").read()
    if str(path).endswith(".toml"):
        try:
            doc = _toml.loads(text.decode("utf-8"))
        except _toml.TOMLDecodeError as exc:
            raise ParameterError(f"{path}: TOML parse error: {exc}") from exc
    else:
        try:
            doc = json.loads(text.decode("utf-8"))
        except json.JSONDecodeError as exc:
            raise ParameterError(f"{path}: JSON parse error: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParameterError(f"{path}: config root must be a table/object")
    return config_from_dict(doc)


def _paper_scale(**overrides) -> ExperimentConfig:
    base = dict(
        N=15, M=2, L=2, P=4, Q=120, n_paths=3, N0=1.0,
        target_pfa=0.01, n_trials=1000, mode="faithful_stream", hypothesis="H1",
        snr_db=tuple(float(s) for s in range(0, 31, 3)),
        sir_db=(0.0,), alpha=(0.3,), fd=(0.01,), k_users=(3,),
    )
    base.update(overrides)
    return ExperimentConfig(**base)


def preset(name: str) -> ExperimentConfig:
    """Named experiment presets mirroring the headline detection-curve studies."""
    presets = {
        "fig1": lambda: _paper_scale(detectors=("mglrt", "genie"),
                                     k_users=(1, 3, 5), fd=(0.01, 0.1)),
        "fig2": lambda: _paper_scale(detectors=("mglrt",),
                                     alpha=(0.1, 0.3, 0.5, 0.7)),
        "fig3": lambda: _paper_scale(detectors=("mglrt",),
                                     q_active=(30, 60, 90, 120)),
        "fig4": lambda: _paper_scale(detectors=("mglrt",),
                                     sir_db=(-10.0, 0.0, 10.0)),
    }
    if name not in presets:
        raise ParameterError(f"unknown preset {name!r}; known: {sorted(presets)}")
    return presets[name]()
