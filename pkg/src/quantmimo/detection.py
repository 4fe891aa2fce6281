"""The three trained detectors mapping a quantized receive vector to a
symbol-vector index.

eMLD scores each symbol by the total empirical probability of the trained
vectors nearest to the observation; MMD scores by the PMF-weighted mean
distance to the observation; MCD keeps only one representative centroid per
symbol. Ties always resolve to the smallest index, and distances are computed
on quantizer output values (step-scaled), not raw level indices.

Batch variants operate on integer level matrices (one observation per row)
and are exact re-implementations of the per-vector rules; the per-vector
functions delegate to them, so the two surfaces cannot drift apart.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import QuantizedVector
from .training import EmpiricalModel


@dataclass(frozen=True, eq=False)
class CentroidBook:
    """Per-symbol representative vectors (probability-weighted means)."""

    centers: np.ndarray

    @property
    def size(self) -> int:
        return self.centers.shape[0]


def _level_sqdist(levels: np.ndarray, trained_levels: np.ndarray) -> np.ndarray:
    """Exact integer squared level distances, one row per observation."""
    diff = levels[:, None, :] - trained_levels[None, :, :]
    return np.einsum("nsd,nsd->ns", diff, diff)


def _as_level_rows(y: QuantizedVector) -> np.ndarray:
    return np.asarray(y.levels, dtype=np.int64)[None, :]


def neighbor_set(
    y: QuantizedVector, model: EmpiricalModel
) -> tuple[list[QuantizedVector], float]:
    """All trained vectors at the minimum distance from y, plus that distance.

    Membership is decided on exact integer level arithmetic, so equidistant
    vectors are found reliably; the returned radius is in value units.
    """
    trained = model.trained_vectors
    if not trained:
        raise ValueError("model has no trained vectors")
    levels, _, _ = model.support_arrays
    d2 = _level_sqdist(_as_level_rows(y), levels)[0]
    d2_min = int(d2.min())
    members = [trained[i] for i in np.flatnonzero(d2 == d2_min)]
    return members, y.step * float(np.sqrt(d2_min))


def detect_emld_batch(levels: np.ndarray, model: EmpiricalModel) -> np.ndarray:
    """Empirical-ML detection of each level-matrix row.

    Each observation is scored against the trained vectors tied at its
    minimum distance: the winning symbol maximizes the summed multiplicities
    of those neighbors (an exact integer score).
    """
    trained_levels, _, count_matrix = model.support_arrays
    levels = np.atleast_2d(np.asarray(levels, dtype=np.int64))
    d2 = _level_sqdist(levels, trained_levels)
    neighbor_mask = d2 == d2.min(axis=1, keepdims=True)
    scores = neighbor_mask.astype(np.int64) @ count_matrix
    return np.argmax(scores, axis=1)


def detect_emld(y: QuantizedVector, model: EmpiricalModel) -> int:
    """Index of the symbol with the largest neighbor-summed empirical PMF."""
    return int(detect_emld_batch(_as_level_rows(y), model)[0])


def detect_mmd_batch(levels: np.ndarray, model: EmpiricalModel) -> np.ndarray:
    """Minimum-mean-distance detection of each level-matrix row."""
    trained_levels, _, count_matrix = model.support_arrays
    for k in range(model.size):
        if not count_matrix[:, k].any():
            raise ValueError(f"symbol {k} has an empty trained support")
    levels = np.atleast_2d(np.asarray(levels, dtype=np.int64))
    step = model.trained_vectors[0].step
    dist = step * np.sqrt(_level_sqdist(levels, trained_levels))
    # multiplicities instead of probabilities: the 1/L factor is common to
    # every symbol and cannot change the argmin
    scores = dist @ count_matrix
    return np.argmin(scores, axis=1)


def detect_mmd(y: QuantizedVector, model: EmpiricalModel) -> int:
    """Index of the symbol with the smallest PMF-weighted mean distance to y."""
    return int(detect_mmd_batch(_as_level_rows(y), model)[0])


def centroids(model: EmpiricalModel) -> CentroidBook:
    """Exact probability-weighted mean output vector per symbol."""
    rows = []
    for k in range(model.size):
        per_symbol = model.counts[k]
        if not per_symbol:
            raise ValueError(f"symbol {k} has an empty trained support")
        acc = None
        for y, c in per_symbol.items():
            term = c * y.values
            acc = term if acc is None else acc + term
        rows.append(acc / model.samples_per_symbol)
    return CentroidBook(centers=np.array(rows))


def detect_mcd_batch(values: np.ndarray, book: CentroidBook) -> np.ndarray:
    """Nearest-centroid detection of each value-matrix row."""
    values = np.atleast_2d(np.asarray(values, dtype=float))
    centers = book.centers
    d2 = (
        np.einsum("nd,nd->n", values, values)[:, None]
        - 2.0 * values @ centers.T
        + np.einsum("kd,kd->k", centers, centers)[None, :]
    )
    return np.argmin(d2, axis=1)


def detect_mcd(y: QuantizedVector, book: CentroidBook) -> int:
    """Index of the centroid closest to y in Euclidean distance."""
    return int(detect_mcd_batch(y.values[None, :], book)[0])
