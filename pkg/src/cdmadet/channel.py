"""Doubly-dispersive multipath channel: delays, Jakes-correlated gains, genie covariances.

Each user sees n_paths discrete paths with i.i.d. uniform delays on
[0, (N-1)] chips and unit-variance complex Gaussian gains that evolve across
symbol epochs with Bessel-J0 (isotropic-scattering) autocorrelation.  Gains
are held constant within one symbol epoch.  User transmission delays are
folded into the path delays, which already randomize timing.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg
from scipy.special import j0

from .core import NumericalDomainError, ParameterError, SystemParams, cholesky_lower
from .waveform import ChipPulse, autocorr_table

RIDGE_START = 1e-8
RIDGE_MAX = 1e-4


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """Per-user amplitudes, path delays, and gain sequences over all simulated epochs."""

    amplitudes: np.ndarray     # (K,)
    delays: np.ndarray         # (K, n_paths), chips
    gains: np.ndarray          # (K, n_paths, span), complex, unit variance
    epoch0: int                # epoch index of gains[..., 0]

    @property
    def n_users(self) -> int:
        return int(self.amplitudes.size)

    @property
    def span(self) -> int:
        return int(self.gains.shape[-1])

    def epoch_index(self, q: int) -> int:
        idx = q - self.epoch0
        if not (0 <= idx < self.span):
            raise ParameterError(f"epoch {q} outside simulated span "
                                 f"[{self.epoch0}, {self.epoch0 + self.span - 1}]")
        return idx

    def gain_at(self, k: int, q: int) -> np.ndarray:
        """Path gains of user k at symbol epoch q, shape (n_paths,)."""
        return self.gains[k, :, self.epoch_index(q)]


@dataclass(frozen=True, eq=False)
class GenieCovariances:
    """Window covariances under perfect side information: M_w (H0) and M_z (H1 extras)."""

    M_w: np.ndarray
    M_z: np.ndarray


def draw_path_delays(rng: np.random.Generator, params: SystemParams) -> np.ndarray:
    """i.i.d. uniform path delays on [0, (N-1)] chips, shape (n_paths,)."""
    return rng.uniform(0.0, (params.N - 1), size=params.n_paths)


def jakes_autocorr(lag_symbols, fd: float):
    """Gain autocorrelation at an epoch lag: J0(2*pi*fd*lag)."""
    out = j0(2.0 * np.pi * fd * np.asarray(lag_symbols, dtype=float))
    return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=128)
def _gain_factor(span: int, fd: float) -> np.ndarray:
    """Cholesky factor of the J0 Toeplitz epoch covariance, ridge-regularized.

    J0 Toeplitz matrices are near-singular at small fd, so a diagonal ridge
    starting at 1e-8 (escalating tenfold up to 1e-4) keeps the factorization
    positive definite.
    """
    row = j0(2.0 * np.pi * fd * np.arange(span))
    t = scipy.linalg.toeplitz(row)
    ridge = RIDGE_START
    while True:
        try:
            factor = np.linalg.cholesky(t + ridge * np.eye(span))
            break
        except np.linalg.LinAlgError:
            ridge *= 10.0
            if ridge > RIDGE_MAX:
                raise NumericalDomainError(
                    f"gain covariance not factorizable even with ridge {RIDGE_MAX}"
                ) from None
    factor.setflags(write=False)
    return factor


def gen_gain_process(span: int, fd: float, rng: np.random.Generator) -> np.ndarray:
    """One stationary unit-variance complex Gaussian gain sequence over `span` epochs."""
    if span < 1:
        raise ParameterError(f"span must be >= 1, got {span}")
    factor = _gain_factor(span, float(fd))
    z = (rng.standard_normal(span) + 1j * rng.standard_normal(span)) * np.sqrt(0.5)
    return factor @ z


def make_realization(params: SystemParams, amplitudes, rng: np.random.Generator,
                     span: int | None = None, epoch0: int = -1) -> ChannelRealization:
    """Draw delays and gain trajectories for all K users.

    Draw order is fixed (delays first, then gains) so a seeded generator
    reproduces the realization exactly.  The default span covers every epoch
    any processed window can reference.
    """
    amplitudes = np.asarray(amplitudes, dtype=float)
    if amplitudes.size != params.K:
        raise ParameterError(f"need {params.K} amplitudes, got {amplitudes.size}")
    if span is None:
        span = params.Q + params.L + 1
    delays = rng.uniform(0.0, (params.N - 1), size=(params.K, params.n_paths))
    factor = _gain_factor(span, float(params.fd))
    z = (rng.standard_normal((span, params.K * params.n_paths))
         + 1j * rng.standard_normal((span, params.K * params.n_paths))) * np.sqrt(0.5)
    gains = (factor @ z).T.reshape(params.K, params.n_paths, span)
    return ChannelRealization(amplitudes=amplitudes, delays=delays, gains=gains, epoch0=epoch0)


def path_taps(delays_k, pulse: ChipPulse, params: SystemParams) -> np.ndarray:
    """Pulse-autocorrelation samples per path: taps[p, n] = psi(n/M - tau_p), shape (n_paths, D)."""
    delays_k = np.asarray(delays_k, dtype=float)
    n = np.arange(params.D) / params.M
    return autocorr_table(pulse)(n[np.newaxis, :] - delays_k[:, np.newaxis])


def g_vector(k: int, q: int, realization: ChannelRealization, pulse: ChipPulse,
             params: SystemParams) -> np.ndarray:
    """Channel vector of user k at epoch q: amplitude-weighted sum of path tap vectors."""
    taps = path_taps(realization.delays[k], pulse, params)
    return realization.amplitudes[k] * (realization.gain_at(k, q) @ taps)


def g_matrix(k: int, realization: ChannelRealization, pulse: ChipPulse,
             params: SystemParams) -> np.ndarray:
    """Channel vectors of user k over the whole span, shape (D, span)."""
    taps = path_taps(realization.delays[k], pulse, params)
    return realization.amplitudes[k] * (taps.T @ realization.gains[k])


def analytic_covariances(realization: ChannelRealization, user_codes, r_n: np.ndarray,
                         params: SystemParams, pulse: ChipPulse) -> GenieCovariances:
    """Exact window covariances for the drawn delays and amplitudes.

    Symbols are unit-power i.i.d. across users and epochs and path gains are
    independent with unit variance, so cross terms vanish and each (user,
    offset) pair contributes one congruence of the per-user tap covariance.
    """
    m_w = np.array(r_n, dtype=float, copy=True)
    factors = []   # per user: B with B B^T = A_k^2 * taps^T taps, rank n_paths
    for k in range(params.K):
        taps = path_taps(realization.delays[k], pulse, params)
        factors.append(realization.amplitudes[k] * taps.T)
    for k in range(1, params.K):
        for c in user_codes[k].C_shifts.values():
            w = c @ factors[k]
            m_w += w @ w.T
    m_z = m_w.copy()
    for ell, c in user_codes[0].C_shifts.items():
        if ell != 0:
            w = c @ factors[0]
            m_z += w @ w.T
    cholesky_lower(m_w)   # both must be PD; R_n guarantees it
    cholesky_lower(m_z)
    return GenieCovariances(M_w=m_w, M_z=m_z)
