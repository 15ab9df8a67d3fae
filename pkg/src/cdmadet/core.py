"""Shared parameter types, error taxonomy, and dense complex-matrix kernels.

All times are expressed in chip units (T_c = 1), so the symbol interval is N
chips and the receiver sample step is 1/M chips.  Every kernel here is a pure,
deterministic function of its inputs (LAPACK-backed, no randomized algorithms),
so seeded experiments reproduce bitwise.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

DEFAULT_RTOL = 1e-10


class ParameterError(ValueError):
    """An argument or configuration value violates a documented precondition."""


class NumericalDomainError(ArithmeticError):
    """Input left the numerical domain of an operation (non-PD matrix, negative eigenvalue, ...)."""


class DegenerateCodeError(ValueError):
    """The spreading-code matrix lost column rank; the detector geometry is undefined."""


class DegenerateDataError(ValueError):
    """The observation matrix is rank deficient; the test statistic is undefined."""


@dataclass(frozen=True)
class SystemParams:
    """Scalar model dimensions and physical settings.

    snr and sir are linear ratios: snr = Q * A0^2 / N0 and sir = A0^2 / A1^2,
    with A0 the amplitude of the user under test and A1 the common amplitude
    of the interferers.  fd is the Doppler spread in cycles per symbol.
    """

    N: int = 15            # processing gain, chips per symbol
    M: int = 2             # received samples per chip
    L: int = 2             # window length in symbols
    P: int = 4             # chip-pulse duration in chips
    Q: int = 120           # number of processed windows
    K: int = 1             # active users including user 0
    alpha: float = 0.3     # chip-pulse roll-off factor
    fd: float = 0.01       # normalized Doppler (cycles per symbol)
    N0: float = 1.0        # noise spectral level
    snr: float = 100.0     # linear, Q * A0^2 / N0
    sir: float = 1.0       # linear, A0^2 / A1^2
    Q_active: int = -1     # windows containing user 0 under H1; -1 means all Q
    n_paths: int = 3       # multipath count per user

    def __post_init__(self):
        if self.Q_active == -1:
            object.__setattr__(self, "Q_active", self.Q)
        if self.N < 1 or self.M < 1 or self.P < 1 or self.n_paths < 1:
            raise ParameterError("N, M, P and n_paths must all be >= 1")
        if self.L < 2:
            raise ParameterError(f"window length L must be >= 2, got {self.L}")
        if self.K < 1:
            raise ParameterError(f"user count K must be >= 1, got {self.K}")
        if self.Q < self.L * self.N * self.M:
            raise ParameterError(
                f"need Q >= L*N*M = {self.L * self.N * self.M} windows for a "
                f"full-row-rank data matrix, got Q = {self.Q}"
            )
        if (self.L - 1) * self.N <= 2 * self.P:
            raise ParameterError(
                f"need (L-1)*N > 2*P so the code-null space is nonempty; "
                f"got (L-1)*N = {(self.L - 1) * self.N}, 2*P = {2 * self.P}"
            )
        if not (1 <= self.Q_active <= self.Q):
            raise ParameterError(f"Q_active must lie in [1, Q], got {self.Q_active}")
        if not (0.0 <= self.alpha <= 1.0):
            raise ParameterError(f"roll-off alpha must lie in [0, 1], got {self.alpha}")
        if self.fd < 0.0:
            raise ParameterError(f"normalized Doppler fd must be >= 0, got {self.fd}")
        if self.N0 <= 0.0 or self.snr <= 0.0 or self.sir <= 0.0:
            raise ParameterError("N0, snr and sir must all be positive")

    @property
    def D(self) -> int:
        """Length of a per-symbol channel vector, (N + 2P) * M."""
        return (self.N + 2 * self.P) * self.M

    @property
    def window_len(self) -> int:
        """Samples in one processed window, L * N * M."""
        return self.L * self.N * self.M

    @property
    def symbol_samples(self) -> int:
        """Samples per symbol interval, N * M."""
        return self.N * self.M

    def with_updates(self, **kwargs) -> "SystemParams":
        if "Q" in kwargs and "Q_active" not in kwargs and self.Q_active == self.Q:
            kwargs["Q_active"] = kwargs["Q"]
        return replace(self, **kwargs)


@dataclass(frozen=True, eq=False)
class LQFactorization:
    """X = lower @ ortho_rows with a real nonnegative diagonal on `lower`."""

    lower: np.ndarray       # m x m lower triangular
    ortho_rows: np.ndarray  # m x n, orthonormal rows


def _as_matrix(x, name: str) -> np.ndarray:
    x = np.asarray(x, dtype=np.complex128)
    if x.ndim != 2:
        raise ParameterError(f"{name} must be a 2-d array, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ParameterError(f"{name} contains non-finite entries")
    return x


def _check_hermitian(h, tol: float = 1e-10) -> np.ndarray:
    h = _as_matrix(h, "matrix")
    n, m = h.shape
    if n != m:
        raise ParameterError(f"expected a square matrix, got {n}x{m}")
    scale = max(1.0, float(np.linalg.norm(h)))
    if float(np.linalg.norm(h - h.conj().T)) > tol * scale:
        raise ParameterError("matrix is not Hermitian within tolerance")
    return h


def lq_decompose(x) -> LQFactorization:
    """Row-wise triangular factorization X = L @ Qr, m <= n.

    L is m x m lower triangular with a real nonnegative diagonal (phases are
    absorbed into Qr), Qr is m x n with orthonormal rows.  Deterministic:
    repeated calls on the same input return bitwise-identical factors.
    """
    x = _as_matrix(x, "X")
    m, n = x.shape
    if m > n:
        raise ParameterError(f"lq_decompose needs m <= n, got {m}x{n}")
    q, r = np.linalg.qr(x.conj().T)          # x^H = q r, q: n x m, r: m x m upper
    lower = r.conj().T
    ortho = q.conj().T
    diag = np.diagonal(lower).copy()
    mag = np.abs(diag)
    phase = np.ones_like(diag)
    nz = mag > 0.0
    phase[nz] = diag[nz].conj() / mag[nz]
    lower = lower * phase[np.newaxis, :]
    ortho = phase.conj()[:, np.newaxis] * ortho
    idx = np.arange(m)
    lower[idx, idx] = mag                    # kill roundoff-level imaginary parts
    return LQFactorization(lower=lower, ortho_rows=ortho)


def log_pdet(h, rank_hint: int | None = None, rtol: float = DEFAULT_RTOL) -> float:
    """Natural log of the product of positive eigenvalues of a Hermitian PSD matrix.

    With rank_hint, the product runs over exactly the rank_hint largest
    eigenvalues and any nonpositive one among them raises; without, over all
    eigenvalues above rtol times the largest.  The empty product gives 0.0.
    """
    h = _check_hermitian(h)
    w = np.linalg.eigvalsh(h)
    if w.size == 0:
        return 0.0
    wmax = float(w[-1])
    floor = rtol * max(wmax, 0.0)
    if float(w[0]) < -floor:
        raise NumericalDomainError(
            f"matrix has a significantly negative eigenvalue ({w[0]:.3e} vs "
            f"largest {wmax:.3e}); not PSD"
        )
    if rank_hint is not None:
        if not (0 <= rank_hint <= w.size):
            raise ParameterError(f"rank_hint must lie in [0, {w.size}], got {rank_hint}")
        if rank_hint == 0:
            return 0.0
        sel = w[-rank_hint:]
        if sel[0] <= floor:
            raise NumericalDomainError(
                f"requested rank {rank_hint} exceeds the numerical rank "
                f"(eigenvalue {sel[0]:.3e} vs largest {wmax:.3e})"
            )
        return float(np.sum(np.log(sel)))
    sel = w[w > floor]
    if sel.size == 0:
        return 0.0
    return float(np.sum(np.log(sel)))


def pdet(h, rank_hint: int | None = None, rtol: float = DEFAULT_RTOL) -> float:
    """Product of positive eigenvalues (pseudo-determinant); 1 for the zero-rank case."""
    return float(np.exp(log_pdet(h, rank_hint=rank_hint, rtol=rtol)))


def orthobasis_split(c, rtol: float = DEFAULT_RTOL):
    """Orthonormal bases (U, U_perp, Ubar) for range(C) and its complement.

    Ubar = [U_perp, U] is unitary and block-diagonalizes the range projector:
    Ubar^H (C C^+) Ubar = blockdiag(0_{n-d}, I_d).  C must have full column
    rank d < n.
    """
    c = _as_matrix(c, "C")
    n, d = c.shape
    if d >= n:
        raise ParameterError(f"need d < n for a nonempty complement, got {n}x{d}")
    u_full, s, _ = np.linalg.svd(c, full_matrices=True)
    if s[0] == 0.0 or s[-1] < rtol * s[0]:
        raise DegenerateCodeError(
            f"matrix is rank deficient (smallest/largest singular value "
            f"{s[-1]:.3e}/{s[0]:.3e})"
        )
    u = u_full[:, :d]
    u_perp = u_full[:, d:]
    ubar = np.concatenate([u_perp, u], axis=1)
    return u, u_perp, ubar


def cholesky_lower(h) -> np.ndarray:
    """Lower-triangular Cholesky factor with real positive diagonal; P P^H = H."""
    h = _check_hermitian(h)
    try:
        return np.linalg.cholesky(h)
    except np.linalg.LinAlgError as exc:
        raise NumericalDomainError(f"matrix is not positive definite: {exc}") from exc


def pinv(c, rtol: float = DEFAULT_RTOL) -> np.ndarray:
    """Moore-Penrose pseudo-inverse of a full-column-rank tall matrix."""
    c = _as_matrix(c, "C")
    n, d = c.shape
    if d > n:
        raise ParameterError(f"need d <= n, got {n}x{d}")
    u, s, vh = np.linalg.svd(c, full_matrices=False)
    if s[0] == 0.0 or s[-1] < rtol * s[0]:
        raise DegenerateCodeError(
            f"matrix is rank deficient (smallest/largest singular value "
            f"{s[-1]:.3e}/{s[0]:.3e})"
        )
    return (vh.conj().T * (1.0 / s)) @ u.conj().T
