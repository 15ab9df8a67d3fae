"""End-to-end synthesis of the observation matrix under either hypothesis.

Window q (1-based, q = 1..Q) stacks the L*N*M received samples on
[q, q+L) symbol intervals.  Its signal part sums, over users and symbol
offsets ell in [-2, L-1], the offset code matrix applied to the
symbol-weighted channel vector of epoch q+ell; epochs -1..Q+L-1 are therefore
simulated.  Two generation modes exist:

* faithful_stream: one symbol stream, one gain trajectory and one continuous
  noise stream per trial; adjacent windows share (L-1)*N*M samples.
* iid_blocks: every window is generated independently (fresh symbols, fresh
  gains correlated only within the block, fresh window noise), matching the
  i.i.d.-columns design assumption exactly.

chip_conv_oracle rebuilds the noise-free stream by explicit summation over
users, symbols, chips, and paths; it is the independent check on the banded
code-matrix assembly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .channel import ChannelRealization, _gain_factor, g_matrix, path_taps
from .codebook import SpreadingCode, user_code_matrices
from .core import DegenerateDataError, ParameterError, SystemParams
from .waveform import (ChipPulse, _window_noise_factor, autocorr_table, chip_pulse_for,
                       sample_noise_stream)

HYPOTHESES = ("H0", "H1")
MODES = ("faithful_stream", "iid_blocks")


@dataclass(frozen=True, eq=False)
class ScenarioConfig:
    """One fully specified generation scenario: parameters, hypothesis, mode, codes."""

    params: SystemParams
    hypothesis: str = "H0"
    mode: str = "faithful_stream"
    codes: tuple[SpreadingCode, ...] = ()

    def __post_init__(self):
        if self.hypothesis not in HYPOTHESES:
            raise ParameterError(f"hypothesis must be one of {HYPOTHESES}, got {self.hypothesis!r}")
        if self.mode not in MODES:
            raise ParameterError(f"mode must be one of {MODES}, got {self.mode!r}")
        if len(self.codes) != self.params.K:
            raise ParameterError(
                f"need one code per user: {self.params.K} users, {len(self.codes)} codes"
            )
        for c in self.codes:
            if c.n_chips != self.params.N:
                raise ParameterError("every code must have length N")

    @property
    def q_active(self) -> int:
        return self.params.Q_active


@dataclass(eq=False)
class DataMatrix:
    """Stacked observation windows, one column per processed window."""

    R: np.ndarray   # window_len x Q

    def verify_full_rank(self) -> None:
        """Check the full-row-rank condition (debug/selftest helper, not per-trial)."""
        s = np.linalg.svd(self.R, compute_uv=False)
        if s.size < self.R.shape[0] or s[-1] <= 0.0:
            raise DegenerateDataError("observation matrix is row-rank deficient")


def amplitudes_from_snr(params: SystemParams) -> tuple[float, float]:
    """(A0, A_interferer) from the linear snr = Q*A0^2/N0 and sir = A0^2/A1^2."""
    if params.snr <= 0.0 or params.sir <= 0.0 or params.N0 <= 0.0:
        raise ParameterError("snr, sir and N0 must be positive")
    a0 = float(np.sqrt(params.snr * params.N0 / params.Q))
    return a0, a0 / float(np.sqrt(params.sir))


def amplitude_vector(params: SystemParams) -> np.ndarray:
    a0, a1 = amplitudes_from_snr(params)
    amps = np.full(params.K, a1)
    amps[0] = a0
    return amps


def epochs_for(params: SystemParams) -> range:
    """Symbol epochs any window references: q + ell for q = 1..Q, ell in [-2, L-1]."""
    return range(-1, params.Q + params.L)


def draw_symbols(n_users: int, epoch_range, rng: np.random.Generator) -> np.ndarray:
    """i.i.d. equiprobable +-1 symbols, shape (n_users, len(epoch_range))."""
    return rng.integers(0, 2, size=(n_users, len(epoch_range))) * 2.0 - 1.0


def _active_users(config: ScenarioConfig) -> range:
    return range(0 if config.hypothesis == "H1" else 1, config.params.K)


def _first_active_column(config: ScenarioConfig) -> int:
    """0-based index of the first window that contains user 0 under H1."""
    return config.params.Q - config.q_active


def assemble_R(config: ScenarioConfig, realization: ChannelRealization, user_codes,
               rng: np.random.Generator, symbols: np.ndarray | None = None,
               with_noise: bool = True) -> DataMatrix:
    """Synthesize the observation matrix for one trial.

    `user_codes` is the per-user UserCodeMatrices list (user 0 first).  In
    faithful_stream mode `symbols` may be supplied (shape K x (Q+L+1), epochs
    -1..Q+L-1) for oracle comparisons; otherwise symbols are drawn from `rng`.
    The noise-free path (with_noise=False) exists for oracle tests only.
    """
    p = config.params
    pulse = chip_pulse_for(p)
    if len(user_codes) != p.K:
        raise ParameterError(f"need code matrices for all {p.K} users")
    if config.mode == "iid_blocks":
        if symbols is not None:
            raise ParameterError("explicit symbols are only meaningful in faithful_stream mode")
        return _assemble_iid_blocks(config, realization, user_codes, rng, with_noise, pulse)
    epochs = epochs_for(p)
    if realization.epoch0 > epochs.start or realization.epoch0 + realization.span < epochs.stop:
        raise ParameterError("realization does not cover the required epoch span")
    if symbols is None:
        symbols = draw_symbols(p.K, epochs, rng)
    symbols = np.asarray(symbols, dtype=float)
    if symbols.shape != (p.K, len(epochs)):
        raise ParameterError(f"symbols must have shape {(p.K, len(epochs))}, got {symbols.shape}")

    window, q_count, nm = p.window_len, p.Q, p.symbol_samples
    r = np.zeros((window, q_count), dtype=complex)
    for k in _active_users(config):
        g = g_matrix(k, realization, pulse, p)             # (D, realization span)
        off = epochs.start - realization.epoch0            # align epochs to gain columns
        weighted = g[:, off:off + len(epochs)] * symbols[k][np.newaxis, :]
        contrib = np.zeros_like(r)
        for ell, c in user_codes[k].C_shifts.items():
            lo = 1 + ell - epochs.start                    # epoch q+ell for q = 1
            contrib += c @ weighted[:, lo:lo + q_count]
        if k == 0:
            contrib[:, :_first_active_column(config)] = 0.0
        r += contrib
    if with_noise:
        stream = sample_noise_stream((q_count + p.L - 1) * nm, p, pulse, rng)
        r = r + sliding_window_view(stream, window)[::nm].T
    return DataMatrix(R=r)


def _assemble_iid_blocks(config: ScenarioConfig, realization: ChannelRealization,
                         user_codes, rng: np.random.Generator, with_noise: bool,
                         pulse: ChipPulse) -> DataMatrix:
    """Independent windows: fresh symbols, block-local gains and window noise per column."""
    p = config.params
    window, q_count = p.window_len, p.Q
    block = p.L + 2                                        # offsets -2..L-1
    offsets = range(-2, p.L)
    factor = _gain_factor(block, float(p.fd))
    r = np.zeros((window, q_count), dtype=complex)
    for k in _active_users(config):
        taps = path_taps(realization.delays[k], pulse, p)  # (n_paths, D)
        z = (rng.standard_normal((block, p.n_paths * q_count))
             + 1j * rng.standard_normal((block, p.n_paths * q_count))) * np.sqrt(0.5)
        alphas = (factor @ z).reshape(block, p.n_paths, q_count)
        b = rng.integers(0, 2, size=(block, q_count)) * 2.0 - 1.0
        contrib = np.zeros_like(r)
        for i, ell in enumerate(offsets):
            g = realization.amplitudes[k] * np.einsum("pd,pq->dq", taps, alphas[i])
            contrib += user_codes[k].C_shifts[ell] @ (g * b[i][np.newaxis, :])
        if k == 0:
            contrib[:, :_first_active_column(config)] = 0.0
        r += contrib
    if with_noise:
        factor_n = _window_noise_factor(pulse, p.M, window)
        z = (rng.standard_normal((window, q_count))
             + 1j * rng.standard_normal((window, q_count))) * np.sqrt(0.5)
        r = r + np.sqrt(p.N0) * (factor_n @ z)
    return DataMatrix(R=r)


def chip_conv_oracle(config: ScenarioConfig, realization: ChannelRealization,
                     symbols: np.ndarray) -> DataMatrix:
    """Noise-free observation matrix by direct time-domain synthesis.

    Builds the received sample stream by explicit summation over users,
    symbol epochs, chips and paths, then slices the processed windows.  Kept
    deliberately naive; it is the independent cross-check for assemble_R.
    Requires faithful_stream semantics with full activation.
    """
    p = config.params
    if config.mode != "faithful_stream":
        raise ParameterError("the convolution oracle is defined for faithful_stream mode")
    if config.hypothesis == "H1" and config.q_active != p.Q:
        raise ParameterError("the convolution oracle requires full activation (q_active = Q)")
    pulse = chip_pulse_for(p)
    table = autocorr_table(pulse)
    epochs = epochs_for(p)
    symbols = np.asarray(symbols, dtype=float)
    if symbols.shape != (p.K, len(epochs)):
        raise ParameterError(f"symbols must have shape {(p.K, len(epochs))}, got {symbols.shape}")
    nm = p.symbol_samples
    total = (p.Q + p.L) * nm
    times = np.arange(total) / p.M                          # chips
    stream = np.zeros(total, dtype=complex)
    for k in _active_users(config):
        amp = realization.amplitudes[k]
        chips = config.codes[k].chips
        for qi, qe in enumerate(epochs):
            b = symbols[k, qi]
            if b == 0.0:
                continue
            gain = realization.gain_at(k, qe)
            for n in range(p.N):
                for path in range(p.n_paths):
                    shift = qe * p.N + n + realization.delays[k, path]
                    stream += (b * chips[n] * amp * gain[path]) * table(times - shift)
    window = p.window_len
    r = np.empty((window, p.Q), dtype=complex)
    for q in range(1, p.Q + 1):
        r[:, q - 1] = stream[q * nm: q * nm + window]
    return DataMatrix(R=r)


def build_user_codes(config: ScenarioConfig):
    """Per-user shifted code matrices for assembly (user 0 first)."""
    return [user_code_matrices(c, config.params) for c in config.codes]


def dump_snapshot(path, config: ScenarioConfig, realization: ChannelRealization,
                  symbols: np.ndarray | None = None, seed: int | None = None) -> None:
    """Write a reproducibility snapshot (delays, gains, symbols, seed) as JSON.

    Complex values are stored as [real, imag] pairs.
    """
    import json

    def cpx(a):
        a = np.asarray(a)
        return np.stack([a.real, a.imag], axis=-1).tolist()

    doc = {
        "seed": seed,
        "hypothesis": config.hypothesis,
        "mode": config.mode,
        "q_active": config.q_active,
        "codes": [c.signs() for c in config.codes],
        "amplitudes": realization.amplitudes.tolist(),
        "delays_chips": realization.delays.tolist(),
        "gains": cpx(realization.gains),
        "epoch0": realization.epoch0,
        "symbols": None if symbols is None else np.asarray(symbols).tolist(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
