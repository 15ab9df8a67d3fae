"""Test statistics for the blind user-detection problem.

The blind statistic is the ratio of the determinant of the data Gram matrix
to the pseudo-determinant of its compression onto the code-null space; it
rises when energy concentrates in the code range.  The fast path rotates the
data into the ordered basis (null coordinates first) and reads the statistic
off the trailing D diagonal entries of an LQ factorization, at
O(Q * (L*N*M)^2) flops.  All statistics are computed, thresholded and stored
in the natural-log domain to keep large diagonal products representable;
linear-scale wrappers exist for small-dimension use.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .channel import GenieCovariances
from .codebook import CodeGeometry
from .core import (DegenerateCodeError, DegenerateDataError, NumericalDomainError,
                   ParameterError, cholesky_lower, log_pdet, lq_decompose)

DETECTOR_IDS = ("mglrt", "mglrt-direct", "cfar", "normalized", "genie")


@dataclass(eq=False)
class DetectorOutput:
    """One evaluated statistic; `statistic` is the log-domain decision value."""

    statistic: float
    detector_id: str
    auxiliary: np.ndarray | None = None


def _check_data(r, geometry: CodeGeometry) -> np.ndarray:
    r = np.asarray(r, dtype=complex)
    if r.ndim != 2 or r.shape[0] != geometry.window_len:
        raise ParameterError(
            f"data matrix must be {geometry.window_len} x Q, got {r.shape}"
        )
    if r.shape[1] < r.shape[0]:
        raise DegenerateDataError(
            f"need at least {r.shape[0]} windows for a full-rank Gram matrix, got {r.shape[1]}"
        )
    return r


def mglrt_fast_log(r, geometry: CodeGeometry) -> float:
    """Log of the blind statistic via one LQ factorization in the ordered basis."""
    r = _check_data(r, geometry)
    rbar = geometry.Ubar.conj().T @ r
    lq = lq_decompose(rbar)
    diag = np.real(np.diagonal(lq.lower))
    split = geometry.window_len - geometry.D
    floor = 1e-10 * max(float(np.max(diag)), 0.0)
    if np.any(diag[:split] <= floor):
        raise DegenerateDataError("rank collapse in the code-null coordinates")
    if np.any(diag[split:] <= floor):
        raise DegenerateDataError("rank collapse in the code-range coordinates")
    return float(2.0 * np.sum(np.log(diag[split:])))


def mglrt_fast(r, geometry: CodeGeometry) -> float:
    """Blind statistic (linear scale): product of the trailing D squared LQ diagonals."""
    return float(np.exp(mglrt_fast_log(r, geometry)))


def mglrt_direct_log(r, geometry: CodeGeometry) -> float:
    """Log of the blind statistic from its determinant-ratio definition (oracle path)."""
    r = _check_data(r, geometry)
    gram = r @ r.conj().T
    window = geometry.window_len
    perp = np.eye(window) - geometry.proj
    nulled = perp @ gram @ perp.conj().T
    nulled = 0.5 * (nulled + nulled.conj().T)
    try:
        num = log_pdet(gram, rank_hint=window)
        den = log_pdet(nulled, rank_hint=window - geometry.D)
    except NumericalDomainError as exc:
        raise DegenerateDataError(f"data Gram matrix is numerically singular: {exc}") from exc
    return float(num - den)


def mglrt_direct(r, geometry: CodeGeometry) -> float:
    """Blind statistic (linear scale) from the determinant-ratio definition."""
    return float(np.exp(mglrt_direct_log(r, geometry)))


def estimate_signal(r, geometry: CodeGeometry) -> np.ndarray:
    """Constrained ML estimate of the code-range signal content, C^+ R (diagnostic only)."""
    r = np.asarray(r, dtype=complex)
    if r.ndim != 2 or r.shape[0] != geometry.window_len:
        raise ParameterError(f"data matrix must be {geometry.window_len} x Q, got {r.shape}")
    return geometry.pinv @ r


def compute_Te_log(m_w_true, geometry: CodeGeometry) -> float:
    """Log of the covariance-dependent factor of the statistic under H0.

    Cholesky-factor the true H0 covariance in the ordered basis and take the
    trailing D squared diagonal entries.
    """
    m = np.asarray(m_w_true, dtype=complex)
    mbar = geometry.Ubar.conj().T @ m @ geometry.Ubar
    mbar = 0.5 * (mbar + mbar.conj().T)
    factor = cholesky_lower(mbar)
    diag = np.real(np.diagonal(factor))[geometry.window_len - geometry.D:]
    return float(2.0 * np.sum(np.log(diag)))


def compute_Te(m_w_true, geometry: CodeGeometry) -> float:
    """Covariance-dependent factor of the H0 statistic (linear scale)."""
    return float(np.exp(compute_Te_log(m_w_true, geometry)))


def cfar_statistic_log(r, m_w_true, geometry: CodeGeometry) -> float:
    """Log of the covariance-normalized statistic; its H0 law does not depend on m_w_true."""
    return mglrt_fast_log(r, geometry) - compute_Te_log(m_w_true, geometry)


def cfar_statistic(r, m_w_true, geometry: CodeGeometry) -> float:
    return float(np.exp(cfar_statistic_log(r, m_w_true, geometry)))


def normalized_statistic_log(log_t: float, log_te_max: float) -> float:
    """Log statistic normalized by the calibrated worst-case covariance factor."""
    if not np.isfinite(log_te_max):
        raise ParameterError("log_te_max must be finite (from calibration)")
    return float(log_t - log_te_max)


def normalized_statistic(t: float, te_max: float) -> float:
    """Bounded-false-alarm statistic: t / te_max with te_max from calibration."""
    if te_max <= 0.0:
        raise ParameterError(f"te_max must be positive, got {te_max}")
    return float(t / te_max)


def genie_glrt(r, geometry: CodeGeometry, cov: GenieCovariances) -> float:
    """Benchmark log statistic with perfectly known H0/H1 covariances.

    Sum of the whitened-energy difference between the two covariances and the
    covariance-weighted energy captured by the code range, evaluated with
    Cholesky solves (no explicit inverses).
    """
    r = np.asarray(r, dtype=complex)
    if r.ndim != 2 or r.shape[0] != geometry.window_len:
        raise ParameterError(f"data matrix must be {geometry.window_len} x Q, got {r.shape}")
    lw = cholesky_lower(np.asarray(cov.M_w, dtype=complex))
    lz = cholesky_lower(np.asarray(cov.M_z, dtype=complex))
    aw = scipy.linalg.solve_triangular(lw, r, lower=True)
    az = scipy.linalg.solve_triangular(lz, r, lower=True)
    t1 = float(np.sum(np.abs(aw) ** 2) - np.sum(np.abs(az) ** 2))
    y = scipy.linalg.solve_triangular(lz, np.asarray(geometry.C, dtype=complex), lower=True)
    s = y.conj().T @ y
    try:
        ls = cholesky_lower(0.5 * (s + s.conj().T))
    except NumericalDomainError as exc:
        raise DegenerateCodeError(f"whitened code Gram matrix is singular: {exc}") from exc
    b = y.conj().T @ az
    f = scipy.linalg.solve_triangular(ls, b, lower=True)
    t2 = float(np.sum(np.abs(f) ** 2))
    return t1 + t2
