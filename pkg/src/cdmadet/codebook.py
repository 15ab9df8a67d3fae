"""Spreading codes and the banded code matrices mapping channel vectors into windows.

A code matrix for symbol offset ell places chip n of the code at window row
ell*N*M + j + n*M for channel-vector entry j, clipped to the L*N*M window.
The offset-0 matrix equals the first L*N*M rows of the full band matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DegenerateCodeError, ParameterError, SystemParams, orthobasis_split, pinv

# Feedback tap exponents of known-primitive polynomials x^d + ... + 1, per degree.
PRIMITIVE_TAPS: dict[int, tuple[int, ...]] = {
    2: (2, 1),
    3: (3, 1),
    4: (4, 1),
    5: (5, 2),
    6: (6, 1),
    7: (7, 1),
    8: (8, 6, 5, 4),
    9: (9, 4),
    10: (10, 3),
}


@dataclass(frozen=True, eq=False)
class SpreadingCode:
    """Length-N real code with entries +-1/sqrt(N), unit norm."""

    chips: np.ndarray

    def __post_init__(self):
        chips = np.asarray(self.chips, dtype=float)
        chips.setflags(write=False)
        object.__setattr__(self, "chips", chips)
        n = chips.size
        if n < 1:
            raise ParameterError("code must have at least one chip")
        if abs(float(chips @ chips) - 1.0) > 1e-12:
            raise ParameterError("code must have unit norm")
        if not np.all(np.abs(np.abs(chips) * np.sqrt(n) - 1.0) < 1e-9):
            raise ParameterError("code entries must be +-1/sqrt(N)")

    @property
    def n_chips(self) -> int:
        return int(self.chips.size)

    def signs(self) -> list[int]:
        """Export as a list of +-1 integers (config-file interchange format)."""
        return [int(s) for s in np.sign(self.chips)]


def code_from_signs(signs) -> SpreadingCode:
    """Import a code from a +-1 integer list."""
    signs = np.asarray(signs, dtype=float)
    if signs.size < 1 or not np.all(np.abs(signs) == 1.0):
        raise ParameterError("code signs must be a nonempty list of +-1 values")
    return SpreadingCode(chips=signs / np.sqrt(signs.size))


def gen_mseq(degree: int, taps: tuple[int, ...] | None = None, seed: int = 1) -> SpreadingCode:
    """Maximal-length LFSR sequence of length 2^degree - 1, mapped to +-1/sqrt(N) chips.

    Bit 0 maps to +1/sqrt(N), bit 1 to -1/sqrt(N).  Distinct nonzero seeds give
    cyclic shifts of the same sequence.
    """
    if taps is None:
        if degree not in PRIMITIVE_TAPS:
            raise ParameterError(
                f"no default primitive polynomial for degree {degree}; pass taps explicitly"
            )
        taps = PRIMITIVE_TAPS[degree]
    if degree < 2:
        raise ParameterError("LFSR degree must be >= 2")
    if max(taps) != degree or min(taps) < 1:
        raise ParameterError("taps must be exponents in [1, degree] including degree")
    if not (0 < seed < 2 ** degree):
        raise ParameterError(f"seed must be a nonzero {degree}-bit state, got {seed}")
    n = 2 ** degree - 1
    state = [(seed >> i) & 1 for i in range(degree)]   # state[0] newest, state[-1] output
    bits = np.empty(n, dtype=int)
    for i in range(n):
        bits[i] = state[-1]
        fb = 0
        for e in taps:
            fb ^= state[e - 1]
        state = [fb] + state[:-1]
    chips = np.where(bits == 0, 1.0, -1.0) / np.sqrt(n)
    return SpreadingCode(chips=chips)


def random_code(n: int, rng: np.random.Generator) -> SpreadingCode:
    """Uniform random +-1/sqrt(N) code (stress-test alternative to m-sequences)."""
    signs = rng.integers(0, 2, size=n) * 2.0 - 1.0
    return SpreadingCode(chips=signs / np.sqrt(n))


def default_codes(params: SystemParams, rng: np.random.Generator) -> tuple[SpreadingCode, ...]:
    """One code per user: m-sequence shifts when N = 2^d - 1, random codes otherwise."""
    n = params.N
    degree = int(np.round(np.log2(n + 1)))
    if 2 ** degree - 1 == n and degree in PRIMITIVE_TAPS:
        if params.K > n:
            raise ParameterError(f"at most {n} distinct m-sequence shifts exist for N = {n}")
        seeds = rng.permutation(np.arange(1, n + 1))[: params.K]
        return tuple(gen_mseq(degree, seed=int(s)) for s in seeds)
    return tuple(random_code(n, rng) for _ in range(params.K))


def build_A(code: SpreadingCode, params: SystemParams) -> np.ndarray:
    """Full banded code matrix of size (L*N + 2P - 1)*M by (N + 2P)*M.

    Entry (m, j) holds chip n when m - j = n*M; chip spacing M interleaves
    zeros for oversampled reception.
    """
    if code.n_chips != params.N:
        raise ParameterError(f"code length {code.n_chips} does not match N = {params.N}")
    rows = (params.L * params.N + 2 * params.P - 1) * params.M
    cols = params.D
    a = np.zeros((rows, cols))
    j = np.arange(cols)
    for n in range(params.N):
        m = j + n * params.M
        ok = m < rows
        a[m[ok], j[ok]] = code.chips[n]
    return a


def build_C(code: SpreadingCode, ell: int, params: SystemParams) -> np.ndarray:
    """Window-clipped code matrix for symbol offset ell in [-2, L-1], size L*N*M by (N+2P)*M."""
    if not (-2 <= ell <= params.L - 1):
        raise ParameterError(f"symbol offset ell must lie in [-2, {params.L - 1}], got {ell}")
    if code.n_chips != params.N:
        raise ParameterError(f"code length {code.n_chips} does not match N = {params.N}")
    window = params.window_len
    c = np.zeros((window, params.D))
    j = np.arange(params.D)
    base = ell * params.N * params.M
    for n in range(params.N):
        m = base + j + n * params.M
        ok = (m >= 0) & (m < window)
        c[m[ok], j[ok]] = code.chips[n]
    return c


@dataclass(frozen=True, eq=False)
class UserCodeMatrices:
    """All shifted code matrices of one user, keyed by symbol offset."""

    code: SpreadingCode
    C_shifts: dict[int, np.ndarray]


@dataclass(frozen=True, eq=False)
class CodeGeometry:
    """Detector-side geometry of the user under test.

    Ubar = [U_perp, U] orders the code-null coordinates first, so the range
    projector becomes blockdiag(0, I_D) in Ubar coordinates.
    """

    code: SpreadingCode
    C: np.ndarray                      # window x D, offset-0 code matrix
    C_shifts: dict[int, np.ndarray]
    proj: np.ndarray                   # C C^+
    pinv: np.ndarray                   # C^+
    U: np.ndarray
    U_perp: np.ndarray
    Ubar: np.ndarray
    D: int
    window_len: int


def user_code_matrices(code: SpreadingCode, params: SystemParams) -> UserCodeMatrices:
    shifts = {ell: build_C(code, ell, params) for ell in range(-2, params.L)}
    return UserCodeMatrices(code=code, C_shifts=shifts)


def detector_geometry(code: SpreadingCode, params: SystemParams) -> CodeGeometry:
    """Geometry for the user under test: offset matrices, range projector, ordered basis."""
    shifts = {ell: build_C(code, ell, params) for ell in range(-2, params.L)}
    c = shifts[0]
    u, u_perp, ubar = orthobasis_split(c)          # raises DegenerateCodeError on rank loss
    cpinv = pinv(c)
    proj = c @ cpinv
    return CodeGeometry(
        code=code, C=c, C_shifts=shifts, proj=proj, pinv=cpinv,
        U=u, U_perp=u_perp, Ubar=ubar, D=params.D, window_len=params.window_len,
    )
