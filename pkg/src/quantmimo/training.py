"""Channel training: learn the empirical conditional PMF of the quantized
receive vector for every candidate symbol vector.

Two routes are provided. Implicit training observes repeated pilot
transmissions of the first half of the symbol book and mirrors the second
half through the odd symmetry of the quantizer (a pilot frame of K*L/2 slots
covers all K symbols). Explicit training synthesizes artificial received
signals from a channel estimate instead of transmitting anything.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .core import (
    QuantizedVector,
    QuantizerConfig,
    SymbolBook,
    complex_noise,
    quantize_levels,
    vectors_from_levels,
)


@dataclass(frozen=True, eq=False)
class PilotSchedule:
    """Pilot frame: L consecutive repetitions of each first-half symbol vector."""

    symbol_indices: np.ndarray
    book: SymbolBook
    repetitions: int

    @property
    def length(self) -> int:
        return int(self.symbol_indices.size)

    def matrix(self) -> np.ndarray:
        """Pilot symbols as an n_t x T_t matrix (one column per slot)."""
        return self.book.vectors[self.symbol_indices].T

    def rows(self) -> np.ndarray:
        """Pilot symbols as a T_t x n_t matrix (one row per slot)."""
        return self.book.vectors[self.symbol_indices]


def build_implicit_pilots(book: SymbolBook, repetitions: int) -> PilotSchedule:
    """Schedule of K*L/2 slots covering the first half of the symbol book."""
    if repetitions < 1:
        raise ValueError("repetitions must be at least 1")
    if book.size % 2 != 0:
        # unreachable for origin-symmetric constellations, guarded anyway
        raise ValueError("symbol book size must be even for implicit training")
    idx = np.repeat(np.arange(book.size // 2), repetitions)
    return PilotSchedule(symbol_indices=idx, book=book, repetitions=repetitions)


@dataclass(frozen=True, eq=False)
class EmpiricalModel:
    """Per-symbol empirical PMFs over quantized receive vectors.

    ``counts[k]`` maps each trained vector to its multiplicity; every symbol
    has exactly ``samples_per_symbol`` samples, so probabilities are the exact
    rationals count / samples_per_symbol.
    """

    counts: tuple[dict[QuantizedVector, int], ...]
    samples_per_symbol: int

    @property
    def size(self) -> int:
        return len(self.counts)

    def support(self, k: int) -> list[QuantizedVector]:
        return list(self.counts[k].keys())

    def probability(self, k: int, y: QuantizedVector) -> float:
        return self.counts[k].get(y, 0) / self.samples_per_symbol

    def pmf(self, k: int) -> dict[QuantizedVector, float]:
        return {
            y: c / self.samples_per_symbol for y, c in self.counts[k].items()}

    @cached_property
    def trained_vectors(self) -> tuple[QuantizedVector, ...]:
        """Distinct trained vectors over all symbols, first-seen order."""
        seen: dict[QuantizedVector, None] = {}
        for per_symbol in self.counts:
            for y in per_symbol:
                seen.setdefault(y, None)
        return tuple(seen.keys())

    @cached_property
    def support_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(levels, values, count matrix) views over the distinct trained set.

        ``levels`` is S x d integer, ``values`` the matching float view, and
        ``count_matrix`` is S x K with the per-symbol multiplicities; column k
        divided by ``samples_per_symbol`` is the PMF of symbol k.
        """
        trained = self.trained_vectors
        if not trained:
            raise ValueError("model has no trained vectors")
        levels = np.array([y.levels for y in trained], dtype=np.int64)
        values = np.array([y.values for y in trained], dtype=float)
        position = {y: i for i, y in enumerate(trained)}
        count_matrix = np.zeros((len(trained), self.size), dtype=np.int64)
        for k, per_symbol in enumerate(self.counts):
            for y, c in per_symbol.items():
                count_matrix[position[y], k] = c
        return levels, values, count_matrix


def learn_implicit(
    observations: Sequence[QuantizedVector],
    book: SymbolBook,
    repetitions: int,
) -> EmpiricalModel:
    """Empirical PMFs from pilot observations in schedule order.

    Block k of L observations feeds symbol k for k < K/2; the PMF of the
    mirrored symbol K-1-k is the same block with every vector negated, which
    is valid because noise is sign-symmetric and the quantizer is odd.
    """
    schedule = build_implicit_pilots(book, repetitions)
    if len(observations) != schedule.length:
        raise ValueError(
            f"expected {schedule.length} observations, got {len(observations)}")
    half = book.size // 2
    counts: list[dict[QuantizedVector, int]] = [dict() for _ in range(book.size)]
    for k in range(half):
        block = observations[k * repetitions:(k + 1) * repetitions]
        counts[k] = dict(Counter(block))
    for k in range(half, book.size):
        mirrored = counts[book.size - 1 - k]
        counts[k] = {-y: c for y, c in mirrored.items()}
    return EmpiricalModel(counts=tuple(counts), samples_per_symbol=repetitions)


def learn_explicit(
    h_hat: np.ndarray,
    sigma2: float,
    artificial_count: int,
    book: SymbolBook,
    cfg: QuantizerConfig,
    rng: np.random.Generator | None = None,
) -> EmpiricalModel:
    """Empirical PMFs from artificial received signals.

    For every symbol vector, ``artificial_count`` signals are synthesized by
    pushing the estimated noiseless receive point through fresh complex
    Gaussian noise and the quantizer. All K * artificial_count noise vectors
    are independent; the loop order is symbol-major.
    """
    if artificial_count < 1:
        raise ValueError("artificial_count must be at least 1")
    h_hat = np.asarray(h_hat, dtype=complex)
    if h_hat.ndim != 2 or h_hat.shape[1] != book.n_t:
        raise ValueError(
            f"dimension mismatch: channel {h_hat.shape}, book n_t {book.n_t}")
    clean = book.vectors @ h_hat.T
    noise = complex_noise(
        (book.size, artificial_count, h_hat.shape[0]), sigma2, rng)
    r = clean[:, None, :] + noise
    if cfg.real_mode:
        stacked = r.real
    else:
        stacked = np.concatenate([r.real, r.imag], axis=2)
    levels = quantize_levels(stacked, cfg)
    counts = []
    for k in range(book.size):
        counts.append(dict(Counter(vectors_from_levels(levels[k], cfg))))
    return EmpiricalModel(counts=tuple(counts), samples_per_symbol=artificial_count)


def total_variation(model_a: EmpiricalModel, model_b: EmpiricalModel, k: int) -> float:
    """Total variation distance between the two PMFs of symbol k."""
    support = set(model_a.counts[k]) | set(model_b.counts[k])
    return 0.5 * sum(
        abs(model_a.probability(k, y) - model_b.probability(k, y))
        for y in support
    )
