"""Closed-form error characterization for one-bit receivers.

The noiseless quantized outputs of all candidate symbol vectors form a
nonlinear binary code; its minimum Hamming distance and the smallest
pre-quantizer component magnitude drive the symbol-vector-error behavior.
This module computes that geometry, the resulting high-SNR error upper
bound, and the distribution of the minimum distance over Rayleigh channels
for BPSK signalling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np
from scipy.special import logsumexp
from scipy.stats import norm

from .core import (
    QuantizedVector,
    QuantizerConfig,
    SymbolBook,
    quantize_vector,
)

# beyond this many ADC samples the binomial tail terms are evaluated in
# log space to dodge float underflow
_EXACT_BINOMIAL_LIMIT = 64


@dataclass(frozen=True, eq=False)
class Codebook:
    """Noiseless one-bit outputs of every candidate symbol vector."""

    codewords: tuple[QuantizedVector, ...]

    @property
    def size(self) -> int:
        return len(self.codewords)

    @cached_property
    def level_matrix(self) -> np.ndarray:
        return np.array([c.levels for c in self.codewords], dtype=np.int64)

    @cached_property
    def value_matrix(self) -> np.ndarray:
        return np.array([c.values for c in self.codewords], dtype=float)


@dataclass(frozen=True, eq=False)
class GeometrySummary:
    """Code geometry of a fixed channel: d_min, g_min, pairwise distances."""

    d_min: int
    g_min: float
    pair_distances: np.ndarray

    @property
    def half_flips(self) -> int:
        """Flip budget D = floor((d_min + 1) / 2) before an error is possible."""
        return (self.d_min + 1) // 2


def build_codebook(h: np.ndarray, book: SymbolBook, cfg: QuantizerConfig) -> Codebook:
    """Quantize every noiseless receive point; one-bit configs only."""
    if cfg.bits != 1:
        raise ValueError("codebook analysis requires a one-bit quantizer")
    h = np.asarray(h, dtype=complex)
    words = tuple(quantize_vector(h @ x, cfg) for x in book.vectors)
    return Codebook(codewords=words)


def pairwise_hamming(levels: np.ndarray) -> np.ndarray:
    """Hamming distance between every pair of level rows."""
    levels = np.asarray(levels)
    diff = levels[:, None, :] != levels[None, :, :]
    return diff.sum(axis=2)


def compute_dmin(cb: Codebook) -> int:
    """Minimum pairwise Hamming distance; 0 means channel ambiguity."""
    if cb.size < 2:
        raise ValueError("d_min needs at least two codewords")
    d = pairwise_hamming(cb.level_matrix)
    mask = ~np.eye(cb.size, dtype=bool)
    return int(d[mask].min())


def compute_gmin(h: np.ndarray, book: SymbolBook, real_mode: bool = False) -> float:
    """Smallest absolute real/imaginary component over all noiseless outputs."""
    h = np.asarray(h, dtype=complex)
    clean = book.vectors @ h.T
    if real_mode:
        stacked = clean.real
    else:
        stacked = np.hstack([clean.real, clean.imag])
    return float(np.abs(stacked).min())


def geometry(h: np.ndarray, book: SymbolBook, cfg: QuantizerConfig) -> GeometrySummary:
    cb = build_codebook(h, book, cfg)
    distances = pairwise_hamming(cb.level_matrix)
    mask = ~np.eye(cb.size, dtype=bool)
    return GeometrySummary(
        d_min=int(distances[mask].min()),
        g_min=compute_gmin(h, book, cfg.real_mode),
        pair_distances=distances,
    )


def flip_probability(g: float, snr: float, n_t: int) -> float:
    """Probability that noise flips the sign of a component of magnitude g."""
    if not snr > 0.0:
        raise ValueError("SNR must be positive")
    return float(norm.sf(math.sqrt(2.0 * snr * g * g / n_t)))


def svep_upper_bound(
    geom: GeometrySummary, snr: float, n_t: int, n_r: int
) -> float:
    """High-SNR upper bound on the symbol-vector-error probability of MCD.

    Valid for one-bit receivers whose centroids coincide with the noiseless
    codewords (the high-SNR training regime). The bound can exceed 1 and is
    returned as-is; with d_min == 0 it degenerates to the constant 2**(2 n_r),
    reflecting an error floor from channel ambiguity.
    """
    if not snr > 0.0:
        raise ValueError("SNR must be positive")
    d = geom.half_flips
    c = sum(math.comb(2 * n_r, j) for j in range(d, 2 * n_r + 1))
    return (c / 2.0**d) * math.exp(-d * snr * geom.g_min**2 / n_t)


def sign_match_probability(n_t: int, delta: int) -> float:
    """Probability that two noiseless components keep the same sign.

    The two components come from BPSK symbol vectors differing in ``delta``
    antennas under an i.i.d. complex Gaussian channel; the closed form is
    (2 / pi) * arctan(sqrt((n_t - delta) / delta)).
    """
    if not 1 <= delta <= n_t:
        raise ValueError("delta must lie in [1, n_t]")
    return (2.0 / math.pi) * math.atan(math.sqrt((n_t - delta) / delta))


def _binomial_band(n_samples: int, lo: int, hi: int, p_eq: float) -> float:
    """P(lo <= Binomial(n_samples, 1 - p_eq) <= hi)."""
    if hi < lo:
        return 0.0
    ks = np.arange(lo, hi + 1)
    if n_samples <= _EXACT_BINOMIAL_LIMIT:
        combs = np.array([math.comb(n_samples, int(k)) for k in ks], dtype=float)
        return float(np.sum(
            combs * (1.0 - p_eq) ** ks * p_eq ** (n_samples - ks)))
    log_combs = np.array(
        [math.lgamma(n_samples + 1) - math.lgamma(k + 1)
         - math.lgamma(n_samples - k + 1) for k in ks])
    log_terms = (
        log_combs + ks * math.log1p(-p_eq) + (n_samples - ks) * math.log(p_eq))
    return float(np.exp(logsumexp(log_terms)))


def _require_bpsk(book: SymbolBook) -> None:
    points = set(book.constellation.points)
    if points != {1 + 0j, -1 + 0j}:
        raise ValueError("minimum-distance distribution requires BPSK symbols")


def dmin_ccdf_approx(n_t: int, n_r: int, n: int, book: SymbolBook) -> float:
    """Approximate P(d_min >= n) over Rayleigh channels, BPSK signalling.

    Treats the pairwise sign-agreement events of the first-half symbol pairs
    as independent; exact for two transmit antennas. Values of n beyond n_r
    are impossible and return 0.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    _require_bpsk(book)
    if book.n_t != n_t or book.size != 2**n_t:
        raise ValueError("symbol book does not match n_t")
    if n == 0:
        return 1.0
    if n > n_r:
        return 0.0
    half = book.size // 2
    signs = book.vectors.real[:half]
    result = 1.0
    for i in range(half):
        for j in range(i + 1, half):
            delta = int(np.sum(signs[i] != signs[j]))
            p_eq = sign_match_probability(n_t, delta)
            result *= _binomial_band(2 * n_r, n, 2 * n_r - n, p_eq)
    return result


def dmin_ccdf_exact_2tx(n_r: int, n: int) -> float:
    """Exact P(d_min >= n) for two BPSK transmit antennas."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if n > n_r:
        return 0.0
    total = Fraction(0)
    for k in range(n, 2 * n_r - n + 1):
        total += Fraction(math.comb(2 * n_r, k), 4**n_r)
    return float(total)


def dmin_ccdf_lower_bound(n_r: int, c: float) -> float:
    """Lower bound on P(d_min >= c * n_r) for two BPSK transmit antennas.

    Valid for 0 <= c < 1; tends to 1 as n_r grows, showing the minimum
    distance scales linearly with the number of receive antennas.
    """
    if not 0.0 <= c < 1.0:
        raise ValueError("c must lie in [0, 1)")
    return 1.0 - math.exp(-((c - 1.0) ** 2 / (2.0 - c)) * n_r)
