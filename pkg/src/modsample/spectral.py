"""Fourier-domain spike estimation: DFT, band partitioning, Toeplitz
annihilating filter, matrix pencil and least-squares amplitude fitting."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DegenerateRootsError, UndersampledError

LITERAL = "literal"
CIRCULAR = "circular"


@dataclass(frozen=True)
class SpectralData:
    """Unnormalized DFT bins of a differenced sample sequence."""

    bins: np.ndarray
    mode: str

    def __post_init__(self):
        bins = np.asarray(self.bins, dtype=complex)
        if bins.ndim != 1 or len(bins) < 1:
            raise ValueError("bins must be a nonempty 1-D array")
        if self.mode not in (LITERAL, CIRCULAR):
            raise ValueError(f"unknown mode {self.mode!r}")
        object.__setattr__(self, "bins", bins)

    def __len__(self) -> int:
        return len(self.bins)

    @property
    def base_freq(self) -> float:
        """Bin spacing 2*pi/length in rad per bin-sample."""
        return 2.0 * np.pi / len(self.bins)


@dataclass(frozen=True)
class ExponentialModel:
    """Estimated spike parameters: unit-modulus roots, real amplitudes and
    folding instants in seconds (sorted by instant)."""

    xi: np.ndarray
    c: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=complex)
        c = np.asarray(self.c, dtype=float)
        t = np.asarray(self.t, dtype=float)
        if not (len(xi) == len(c) == len(t)):
            raise ValueError("xi, c and t must have equal length")
        order = np.argsort(t)
        object.__setattr__(self, "xi", xi[order])
        object.__setattr__(self, "c", c[order])
        object.__setattr__(self, "t", t[order])

    @property
    def M(self) -> int:
        return len(self.xi)

    def off_unit_circle(self, tol: float = 0.01) -> bool:
        """Diagnostic: any root with modulus outside [1-tol, 1+tol]."""
        if self.M == 0:
            return False
        return bool(np.any(np.abs(np.abs(self.xi) - 1.0) > tol))


def forward_dft(ybar, mode: str) -> SpectralData:
    """Unnormalized forward DFT, bins[n] = sum_k ybar[k] exp(-j w0 n k)."""
    ybar = np.asarray(ybar)
    if ybar.ndim != 1 or len(ybar) < 1:
        raise ValueError("ybar must be a nonempty 1-D array")
    return SpectralData(bins=np.fft.fft(ybar), mode=mode)


def inverse_dft(spectral: SpectralData) -> np.ndarray:
    """Inverse of :func:`forward_dft` (conjugate transform / length)."""
    return np.fft.ifft(spectral.bins)


def band_partition(L: int, P: int):
    """Split DFT indices {0..L-1} into the 2P+1 in-band bins
    [0,P] u [L-P, L-1] and their complement.

    Returns (in_band, out_band) as sorted integer arrays.
    """
    if P < 0:
        raise ValueError("P must be nonnegative")
    if L < 2 * P + 2:
        raise UndersampledError(
            f"transform length L={L} leaves no out-of-band bins for P={P}"
        )
    in_band = np.concatenate([np.arange(0, P + 1), np.arange(L - P, L)])
    out_band = np.arange(P + 1, L - P)
    return in_band, out_band


def extract_out_of_band(spectral: SpectralData, P: int):
    """Out-of-band bins (where only the spike train contributes) together
    with their original DFT indices.

    With y = gamma - r, these bins equal minus the spike spectrum.
    """
    _, out_band = band_partition(len(spectral), P)
    return spectral.bins[out_band], out_band


def build_toeplitz(z, M: int) -> np.ndarray:
    """M x (M+1) Toeplitz matrix from 2M contiguous spectrum samples.

    With z = (x[-M], ..., x[M-1]) relative to a chosen center, row i and
    column j hold x[i-j]; noiseless M-spike data gives rank exactly M.
    """
    z = np.asarray(z, dtype=complex)
    if M < 1:
        raise ValueError("M must be >= 1")
    if len(z) != 2 * M:
        raise ValueError(f"need exactly 2M={2 * M} contiguous samples, got {len(z)}")
    # z index i corresponds to relative lag i - M
    T = np.empty((M, M + 1), dtype=complex)
    for i in range(M):
        for j in range(M + 1):
            T[i, j] = z[i - j + M]
    return T


def build_toeplitz_tall(z, M: int) -> np.ndarray:
    """(L-M) x (M+1) Toeplitz system using every available spectrum sample.

    Same diagonal layout as :func:`build_toeplitz`; the extra rows
    over-determine the null space, which stabilizes the solve for clustered
    spikes.
    """
    z = np.asarray(z, dtype=complex)
    L = len(z)
    if M < 1:
        raise ValueError("M must be >= 1")
    if L < 2 * M:
        raise ValueError(f"need at least 2M={2 * M} samples, got {L}")
    rows = L - M
    T = np.empty((rows, M + 1), dtype=complex)
    for i in range(rows):
        for j in range(M + 1):
            T[i, j] = z[i - j + M]
    return T


def annihilator(Tmat: np.ndarray):
    """Annihilating filter taps from the kernel of the Toeplitz matrix.

    Accepts the minimal M x (M+1) matrix or a taller (L-M) x (M+1) system.
    Returns (p, diagnostics) where p is the right singular vector of the
    smallest singular value rescaled so p[M] = 1. If the trailing tap is
    numerically zero, falls back to largest-magnitude normalization and
    flags it.
    """
    Tmat = np.asarray(Tmat, dtype=complex)
    if Tmat.ndim != 2 or Tmat.shape[1] < 2 or Tmat.shape[0] < Tmat.shape[1] - 1:
        raise ValueError(f"expected at least M x (M+1) rows, got {Tmat.shape}")
    # full_matrices=True so vh is (M+1) x (M+1); its last row spans the kernel
    _, s, vh = np.linalg.svd(Tmat)
    p = np.conj(vh[-1])
    diagnostics = {
        "sigma_min": float(s[-1]),
        "rank_ratio": float(s[-1] / s[0]) if s[0] > 0 else 0.0,
        "residual": float(np.linalg.norm(Tmat @ p)),
        "normalization_fallback": False,
    }
    if np.abs(p[-1]) < 1e-12 * np.linalg.norm(p):
        k = int(np.argmax(np.abs(p)))
        p = p / p[k]
        diagnostics["normalization_fallback"] = True
    else:
        p = p / p[-1]
    return p, diagnostics


def roots_and_instants(p: np.ndarray, T: float, L: int) -> ExponentialModel:
    """Roots of the annihilating polynomial and the instants they encode.

    The polynomial sum_n p[n] z^{-n} is rooted via the companion matrix of
    z^M * P(z); instants follow from t = -T * angle(xi) / base_freq with the
    angle branch fixed so t lies in [0, L*T).
    """
    p = np.asarray(p, dtype=complex)
    M = len(p) - 1
    if M < 1:
        raise ValueError("annihilator must have at least 2 taps")
    xi = np.roots(p)
    if len(xi) != M or not np.all(np.isfinite(xi)):
        raise ArithmeticError(f"root finding failed for taps {p!r}")
    w0 = 2.0 * np.pi / L
    t = (-np.angle(xi)) % (2.0 * np.pi) / w0 * T
    return ExponentialModel(xi=xi, c=np.zeros(M), t=t)


def matrix_pencil(z, M: int, Q: int | None = None) -> np.ndarray:
    """Estimate the M spike roots via the rank-truncated matrix pencil.

    Hankel matrices of width Q are built from z (rows shifted by 0 and 1);
    the roots are the eigenvalues of the rank-M-truncated pencil. Auto mode
    uses Q = floor(len(z)/3) clamped to [M, len(z)-M].

    Returns the roots as a complex array (unsorted).
    """
    z = np.asarray(z, dtype=complex)
    L_z = len(z)
    if M < 1:
        raise ValueError("M must be >= 1")
    if L_z < 2 * M:
        raise UndersampledError(f"need at least 2M={2 * M} samples, got {L_z}")
    if Q is None:
        Q = min(max(L_z // 3, M), L_z - M)
    if not M <= Q <= L_z - M:
        raise ValueError(f"pencil parameter Q={Q} outside [{M}, {L_z - M}]")
    rows = L_z - Q
    Y0 = np.lib.stride_tricks.sliding_window_view(z[: rows + Q - 1], Q)[:rows]
    Y1 = np.lib.stride_tricks.sliding_window_view(z[1:], Q)[:rows]
    U, s, Vh = np.linalg.svd(Y0, full_matrices=False)
    Um = U[:, :M]
    Vm = Vh[:M].conj().T
    sm = s[:M]
    core = (Um.conj().T @ Y1 @ Vm) / sm[:, None]
    return np.linalg.eigvals(core)


def amplitudes_ls(z, n_idx, xi) -> tuple[np.ndarray, float]:
    """Real spike amplitudes from least squares on z[n] ~ sum_m c[m] xi_m^n.

    The complex system is stacked into its real and imaginary parts so the
    solution is constrained real. Returns (c, residual_norm).
    """
    z = np.asarray(z, dtype=complex)
    n_idx = np.asarray(n_idx)
    xi = np.asarray(xi, dtype=complex)
    M = len(xi)
    if M < 1:
        raise ValueError("need at least one root")
    if len(z) < M:
        raise UndersampledError(f"need at least M={M} equations, got {len(z)}")
    for a in range(M):
        for b in range(a + 1, M):
            if abs(xi[a] - xi[b]) < 1e-10:
                raise DegenerateRootsError(
                    f"roots {a} and {b} coincide within 1e-10: {xi[a]!r}"
                )
    V = xi[None, :] ** n_idx[:, None]
    A = np.vstack([V.real, V.imag])
    b = np.concatenate([z.real, z.imag])
    c, _, _, _ = np.linalg.lstsq(A, b, rcond=None)
    residual = float(np.linalg.norm(A @ c - b))
    return c, residual


def estimate_fold_count(z, max_M: int, drop: float = 1e-3) -> int:
    """Heuristic spike-count estimate: smallest M where the singular values
    of an oversized Toeplitz matrix drop by `drop` between sigma_M and
    sigma_{M+1}. Diagnostic only; recovery takes M as a given."""
    z = np.asarray(z, dtype=complex)
    if len(z) < 2 * max_M:
        max_M = len(z) // 2
    if max_M < 1:
        raise UndersampledError("too few samples to estimate a fold count")
    center = len(z) // 2
    lo = max(0, center - max_M)
    block = z[lo : lo + 2 * max_M]
    s = np.linalg.svd(build_toeplitz(block, max_M), compute_uv=False)
    for m in range(1, len(s)):
        if s[m] < drop * s[m - 1]:
            return m
    return max_M
