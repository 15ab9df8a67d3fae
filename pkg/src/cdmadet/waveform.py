"""Chip pulse, its receive-filter autocorrelation, and the colored-noise model.

The transmit pulse is a time-domain raised cosine truncated to P chips and
renormalized to unit energy over [0, P).  The receive filter is matched to it,
so every downstream quantity sees only the pulse autocorrelation psi, which is
tabulated once on a fine grid over [0, 2P] and linearly interpolated.  The
filtered noise is stationary with autocovariance N0 * psi(m/M + P) at sample
lag m, which vanishes for m >= P*M (a banded process).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg

from .core import NumericalDomainError, ParameterError, SystemParams


PULSE_SHAPES = ("rc", "srrc")


@dataclass(frozen=True)
class ChipPulse:
    """Truncated bandlimited chip pulse of duration P chips, unit energy.

    shape "rc" is the raised-cosine impulse response (sinc * cosine lobe);
    "srrc" is its square root, making the matched-filter autocorrelation the
    Nyquist raised cosine itself.  Both are truncated to [0, P) chips and
    renormalized.
    """

    alpha: float = 0.3
    duration_chips: int = 4
    samples_per_chip_fine: int = 256   # integration grid for energy and psi
    shape: str = "rc"

    def __post_init__(self):
        if not (0.0 <= self.alpha <= 1.0):
            raise ParameterError(f"roll-off alpha must lie in [0, 1], got {self.alpha}")
        if self.duration_chips < 1:
            raise ParameterError("pulse duration must be >= 1 chip")
        if self.samples_per_chip_fine < 8:
            raise ParameterError("need at least 8 fine samples per chip")
        if self.shape not in PULSE_SHAPES:
            raise ParameterError(f"pulse shape must be one of {PULSE_SHAPES}")

    @property
    def energy_norm(self) -> float:
        """Scale factor that makes the truncated pulse unit energy."""
        return _fine_samples(self)[2]


def chip_pulse_for(params: SystemParams, shape: str = "rc") -> ChipPulse:
    """Pulse implied by a parameter set (duration P, roll-off alpha)."""
    return ChipPulse(alpha=params.alpha, duration_chips=params.P,
                     samples_per_chip_fine=max(256, 64 * params.M), shape=shape)


def _raised_cosine(x, alpha: float) -> np.ndarray:
    """sinc(x) * cos(pi*alpha*x) / (1 - (2*alpha*x)^2), singularity patched by its limit."""
    x = np.asarray(x, dtype=float)
    num = np.sinc(x) * np.cos(np.pi * alpha * x)
    den = 1.0 - (2.0 * alpha * x) ** 2
    near = np.abs(den) < 1e-7
    safe = np.where(near, 1.0, den)
    out = num / safe
    if alpha > 0.0 and np.any(near):
        out = np.where(near, (np.pi / 4.0) * np.sinc(1.0 / (2.0 * alpha)), out)
    return out


def _root_raised_cosine(x, alpha: float) -> np.ndarray:
    """Square-root raised-cosine impulse response with both singularities patched."""
    x = np.asarray(x, dtype=float)
    if alpha == 0.0:
        return np.sinc(x)
    num = np.sin(np.pi * x * (1.0 - alpha)) + 4.0 * alpha * x * np.cos(np.pi * x * (1.0 + alpha))
    den = np.pi * x * (1.0 - (4.0 * alpha * x) ** 2)
    near0 = np.abs(x) < 1e-8
    near_s = np.abs(np.abs(x) - 1.0 / (4.0 * alpha)) < 1e-8
    safe = np.where(near0 | near_s, 1.0, den)
    out = num / safe
    out = np.where(near0, 1.0 - alpha + 4.0 * alpha / np.pi, out)
    lim = (alpha / np.sqrt(2.0)) * ((1.0 + 2.0 / np.pi) * np.sin(np.pi / (4.0 * alpha))
                                    + (1.0 - 2.0 / np.pi) * np.cos(np.pi / (4.0 * alpha)))
    return np.where(near_s, lim, out)


_SHAPE_FN = {"rc": _raised_cosine, "srrc": _root_raised_cosine}


@lru_cache(maxsize=32)
def _fine_samples(pulse: ChipPulse):
    """Midpoint samples of the normalized pulse on its fine grid: (samples, step, norm)."""
    p = pulse.duration_chips
    n = p * pulse.samples_per_chip_fine
    step = 1.0 / pulse.samples_per_chip_fine
    t = (np.arange(n) + 0.5) * step
    raw = _SHAPE_FN[pulse.shape](t - p / 2.0, pulse.alpha)
    energy = float(np.sum(raw * raw) * step)
    norm = 1.0 / np.sqrt(energy)
    samples = raw * norm
    samples.setflags(write=False)
    return samples, step, norm


def chip_pulse_value(t, pulse: ChipPulse):
    """Energy-normalized pulse amplitude at time t (chips); zero outside [0, P)."""
    t = np.asarray(t, dtype=float)
    p = pulse.duration_chips
    inside = (t >= 0.0) & (t < p)
    vals = np.where(inside, _SHAPE_FN[pulse.shape](t - p / 2.0, pulse.alpha), 0.0)
    vals = vals * pulse.energy_norm
    return float(vals) if vals.ndim == 0 else vals


@dataclass(frozen=True, eq=False)
class PulseAutocorr:
    """psi sampled on a uniform grid over [0, 2P] chips; linear interpolation, zero outside."""

    grid: np.ndarray
    values: np.ndarray
    grid_step: float

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.interp(t, self.grid, self.values, left=0.0, right=0.0)
        return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=32)
def autocorr_table(pulse: ChipPulse) -> PulseAutocorr:
    """Matched-filter output autocorrelation psi, tabulated by midpoint quadrature.

    psi(P) = 1 by the unit-energy normalization; psi is even about P and
    supported on (0, 2P).
    """
    samples, step, _ = _fine_samples(pulse)
    n = samples.size
    corr = np.correlate(samples, samples, mode="full") * step   # lags -(n-1) .. n-1
    values = np.zeros(2 * n + 1)
    values[1:2 * n] = corr
    grid = np.arange(2 * n + 1) * step
    values.setflags(write=False)
    grid.setflags(write=False)
    return PulseAutocorr(grid=grid, values=values, grid_step=step)


def pulse_autocorr(t, pulse: ChipPulse):
    """psi(t) for t in chips: the receive-filter response to the chip pulse."""
    return autocorr_table(pulse)(t)


def _check_pulse_matches(params: SystemParams, pulse: ChipPulse) -> None:
    if pulse.duration_chips != params.P:
        raise ParameterError(
            f"pulse duration {pulse.duration_chips} chips does not match params.P = {params.P}"
        )


def noise_covariance(params: SystemParams, pulse: ChipPulse) -> np.ndarray:
    """Toeplitz covariance of one window of filtered noise; entry (i, j) is N0 * psi((i-j)/M + P)."""
    _check_pulse_matches(params, pulse)
    table = autocorr_table(pulse)
    lags = np.arange(params.window_len)
    col = params.N0 * table(lags / params.M + params.P)
    rn = scipy.linalg.toeplitz(col)
    try:
        np.linalg.cholesky(rn)
    except np.linalg.LinAlgError as exc:
        raise NumericalDomainError(f"noise covariance is not positive definite: {exc}") from exc
    return rn


@lru_cache(maxsize=32)
def _window_noise_factor(pulse: ChipPulse, m: int, window_len: int) -> np.ndarray:
    """Cholesky factor of the unit-N0 window covariance (for iid-blocks noise)."""
    table = autocorr_table(pulse)
    lags = np.arange(window_len)
    col = table(lags / m + pulse.duration_chips)
    try:
        factor = np.linalg.cholesky(scipy.linalg.toeplitz(col))
    except np.linalg.LinAlgError as exc:
        raise NumericalDomainError(f"noise covariance is not positive definite: {exc}") from exc
    factor.setflags(write=False)
    return factor


@lru_cache(maxsize=32)
def _stream_noise_factor(pulse: ChipPulse, m: int, length: int) -> np.ndarray:
    """Banded Cholesky factor (scipy lower form) of the unit-N0 stream covariance."""
    band = min(pulse.duration_chips * m - 1, length - 1)
    table = autocorr_table(pulse)
    c = table(np.arange(band + 1) / m + pulse.duration_chips)
    ab = np.tile(c[:, np.newaxis], (1, length))
    try:
        factor = scipy.linalg.cholesky_banded(ab, lower=True)
    except np.linalg.LinAlgError as exc:
        raise NumericalDomainError(f"stream covariance is not positive definite: {exc}") from exc
    factor.setflags(write=False)
    return factor


def _banded_lower_matvec(factor: np.ndarray, z: np.ndarray) -> np.ndarray:
    """x = L z for a banded lower-triangular L in scipy lower-band storage."""
    n = z.shape[0]
    x = np.zeros_like(z)
    for k in range(factor.shape[0]):
        if k >= n:
            break
        x[k:] += factor[k, : n - k] * z[: n - k]
    return x


def sample_noise_stream(length: int, params: SystemParams, pulse: ChipPulse,
                        rng: np.random.Generator) -> np.ndarray:
    """Stationary circular complex Gaussian stream with autocovariance N0 * psi(m/M + P).

    Consecutive samples are spaced 1/M chips apart; the process is banded
    (uncorrelated beyond lag P*M - 1), so generation is O(length * P * M).
    """
    if length < 1:
        raise ParameterError(f"stream length must be >= 1, got {length}")
    _check_pulse_matches(params, pulse)
    factor = _stream_noise_factor(pulse, params.M, length)
    z = (rng.standard_normal(length) + 1j * rng.standard_normal(length)) * np.sqrt(0.5)
    return np.sqrt(params.N0) * _banded_lower_matvec(factor, z)
