"""Reference receivers: quantized maximum-likelihood detection, zero-forcing
detection, and least-squares channel estimation on quantized outputs.

These operate on the complex signal model directly (no trained PMFs) and
serve as comparison points for the trained detectors. The LS estimator
treats the quantized outputs as if they were the unquantized receive signal,
which is the standard low-complexity estimate for coarse ADCs; it is exact
in the infinite-resolution limit and direction-informative at one bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .core import (
    Constellation,
    QuantizedVector,
    QuantizerConfig,
    SymbolBook,
    cell_edges,
)

_LOG_FLOOR = 1e-300


@dataclass(frozen=True, eq=False)
class ChannelEstimate:
    h_hat: np.ndarray
    method: str
    pilot_count: int


def random_pilots(
    c: Constellation, n_t: int, t_t: int, rng: np.random.Generator
) -> np.ndarray:
    """n_t x t_t pilot matrix with i.i.d. uniform constellation entries."""
    return c.as_array()[rng.integers(0, c.size, size=(n_t, t_t))]


def reassemble_complex(values: np.ndarray) -> np.ndarray:
    """Fold stacked [Re; Im] value rows back into complex antenna vectors."""
    values = np.atleast_2d(np.asarray(values, dtype=float))
    if values.shape[1] % 2 != 0:
        raise ValueError("stacked dimension must be even to reassemble")
    half = values.shape[1] // 2
    return values[:, :half] + 1j * values[:, half:]


def estimate_channel_ls(pilots, observations) -> ChannelEstimate:
    """Least-squares channel fit of quantized observations against pilots.

    Solves h_hat = Y X^H (X X^H)^-1 with Y the complex-reassembled quantized
    outputs (one column per slot). Requires at least n_t slots and pilots of
    full row rank.
    """
    x = np.asarray(pilots, dtype=complex)
    n_t, t_t = x.shape
    if t_t < n_t:
        raise ValueError("need at least n_t pilot slots")
    if len(observations) != t_t:
        raise ValueError(
            f"expected {t_t} observations, got {len(observations)}")
    values = np.array([y.values for y in observations])
    y = reassemble_complex(values).T
    gram = x @ x.conj().T
    if np.linalg.matrix_rank(gram) < n_t:
        raise ValueError("pilot matrix is rank deficient")
    h_hat = np.linalg.solve(gram.T, (y @ x.conj().T).T).T
    return ChannelEstimate(h_hat=h_hat, method="ls", pilot_count=t_t)


def _stacked_clean(h: np.ndarray, book: SymbolBook, cfg: QuantizerConfig) -> np.ndarray:
    clean = book.vectors @ np.asarray(h, dtype=complex).T
    if cfg.real_mode:
        return clean.real
    return np.hstack([clean.real, clean.imag])


def mld_log_likelihoods(
    levels: np.ndarray,
    h: np.ndarray,
    sigma2: float,
    book: SymbolBook,
    cfg: QuantizerConfig,
) -> np.ndarray:
    """Exact log-likelihood of every symbol vector for each observation row.

    The likelihood of one observed level is the Gaussian probability of its
    quantizer input cell around the noiseless component; per-component terms
    multiply across the (independent) real samples.
    """
    if not sigma2 > 0.0:
        raise ValueError("quantized MLD needs strictly positive noise")
    levels = np.atleast_2d(np.asarray(levels, dtype=np.int64))
    g = _stacked_clean(h, book, cfg)
    lower, upper = cell_edges(cfg)
    scale = np.sqrt(sigma2 / 2.0)
    a = lower[levels][:, None, :]
    b = upper[levels][:, None, :]
    cell_prob = norm.cdf((b - g[None]) / scale) - norm.cdf((a - g[None]) / scale)
    return np.log(np.maximum(cell_prob, _LOG_FLOOR)).sum(axis=2)


def detect_mld_batch(
    levels: np.ndarray,
    h: np.ndarray,
    sigma2: float,
    book: SymbolBook,
    cfg: QuantizerConfig,
) -> np.ndarray:
    """Most likely symbol index per observation row; ties to smallest index."""
    return np.argmax(mld_log_likelihoods(levels, h, sigma2, book, cfg), axis=1)


def detect_mld_quantized(
    y: QuantizedVector,
    h: np.ndarray,
    sigma2: float,
    book: SymbolBook,
    cfg: QuantizerConfig,
) -> int:
    """Maximum-likelihood detection of a single quantized observation."""
    row = np.asarray(y.levels, dtype=np.int64)[None, :]
    return int(detect_mld_batch(row, h, sigma2, book, cfg)[0])


def nearest_constellation_point(x: np.ndarray, c: Constellation) -> np.ndarray:
    """Per-component hard decision onto the constellation."""
    points = c.as_array()
    idx = np.argmin(np.abs(np.asarray(x)[..., None] - points), axis=-1)
    return points[idx]


def detect_zf_batch(
    values: np.ndarray, h_hat: np.ndarray, c: Constellation
) -> np.ndarray:
    """Zero-forcing detection of many value rows; returns symbol vectors."""
    h_hat = np.asarray(h_hat, dtype=complex)
    if np.linalg.matrix_rank(h_hat) < h_hat.shape[1]:
        raise ValueError("channel estimate is rank deficient")
    y = reassemble_complex(values)
    x_soft = y @ np.linalg.pinv(h_hat).T
    return nearest_constellation_point(x_soft, c)


def detect_zf(y: QuantizedVector, h_hat: np.ndarray, c: Constellation) -> np.ndarray:
    """Zero-forcing detection: pseudo-inverse then per-component decision."""
    return detect_zf_batch(y.values[None, :], h_hat, c)[0]
