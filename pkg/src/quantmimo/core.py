"""Signal-chain primitives: constellations, symbol books, the uniform B-bit
ADC quantizer, Rayleigh channel sampling, and the transmit-and-quantize
pipeline.

All randomness flows through explicitly passed ``numpy.random.Generator``
instances, so every operation here is pure given its inputs and safe to call
concurrently with independent generators.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

_POWER_TOL = 1e-12


@dataclass(frozen=True)
class Constellation:
    """Set of unit-average-power modulation symbols.

    Points must be listed in mirrored order, ``points[M-1-j] == -points[j]``,
    so that symbol books built on top inherit the antipodal index pairing.
    Use :func:`bpsk`, :func:`qpsk`, or :meth:`from_points` to get a valid
    ordering automatically.
    """

    name: str
    points: tuple[complex, ...]

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=complex)
        if pts.size == 0:
            raise ValueError("constellation needs at least one point")
        power = float(np.mean(np.abs(pts) ** 2))
        if abs(power - 1.0) > _POWER_TOL:
            raise ValueError(f"average symbol power is {power!r}, expected 1")
        if not np.allclose(pts[::-1], -pts, rtol=0.0, atol=1e-15):
            raise ValueError(
                "constellation is not origin-symmetric in mirrored order; "
                "build it with Constellation.from_points"
            )

    @classmethod
    def from_points(cls, name: str, points) -> "Constellation":
        """Build a constellation from an unordered origin-symmetric point set."""
        remaining = [complex(p) for p in points]
        front: list[complex] = []
        while remaining:
            p = remaining.pop(0)
            match = next(
                (q for q in remaining if abs(q + p) <= 1e-12), None)
            if match is None:
                raise ValueError(f"no negated partner for point {p!r}")
            remaining.remove(match)
            front.append(p)
        ordered = front + [-p for p in reversed(front)]
        return cls(name, tuple(ordered))

    @property
    def size(self) -> int:
        return len(self.points)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=complex)


def bpsk() -> Constellation:
    return Constellation("bpsk", (1 + 0j, -1 + 0j))


def qpsk() -> Constellation:
    s = 1.0 / math.sqrt(2.0)
    return Constellation(
        "qpsk", (s + s * 1j, s - s * 1j, -s + s * 1j, -s - s * 1j))


_BUILTIN = {"bpsk": bpsk, "qpsk": qpsk}


def constellation(name: str) -> Constellation:
    """Look up a built-in constellation by name (``bpsk`` or ``qpsk``)."""
    try:
        return _BUILTIN[name.lower()]()
    except KeyError:
        raise ValueError(f"unknown constellation {name!r}") from None


@dataclass(frozen=True)
class QuantizerConfig:
    """Uniform B-bit scalar quantizer applied per real ADC sample.

    ``real_mode`` restricts the receiver observable to the real parts of the
    antenna signals (an observable of length ``n_r`` instead of ``2 * n_r``);
    it exists for real-coefficient toy channels and is off by default.
    """

    bits: int
    step: float
    real_mode: bool = False

    def __post_init__(self) -> None:
        if self.bits < 1:
            raise ValueError("quantizer needs at least one bit")
        if not self.step > 0.0:
            raise ValueError("quantizer step must be positive")

    @property
    def n_levels(self) -> int:
        return 1 << self.bits

    @property
    def r_low(self) -> float:
        return (-(1 << (self.bits - 1)) + 1) * self.step

    @property
    def r_up(self) -> float:
        return ((1 << (self.bits - 1)) - 1) * self.step

    def output_values(self) -> np.ndarray:
        """All 2**bits producible output values, ascending."""
        offsets = np.arange(self.n_levels) - (1 << (self.bits - 1)) + 0.5
        return offsets * self.step

    def observed_dim(self, n_r: int) -> int:
        return n_r if self.real_mode else 2 * n_r


def quantize_levels(x, cfg: QuantizerConfig) -> np.ndarray:
    """Vectorized quantizer returning integer level indices in [0, 2**bits).

    Saturates below the lowest and at/above the highest decision threshold;
    inputs exactly on a threshold land in the upper cell (so 0 maps to the
    smallest positive output).
    """
    x = np.asarray(x, dtype=float)
    if np.isnan(x).any():
        raise ValueError("cannot quantize NaN samples")
    raw = np.floor((x - cfg.r_low) / cfg.step) + 1.0
    return np.clip(raw, 0, cfg.n_levels - 1).astype(np.int64)


def quantize_level(x: float, cfg: QuantizerConfig) -> int:
    """Scalar quantizer returning the level index."""
    return int(quantize_levels(np.asarray([x]), cfg)[0])


def quantize_scalar(x: float, cfg: QuantizerConfig) -> float:
    """Scalar quantizer returning the reconstructed output value."""
    return float(level_values(quantize_level(x, cfg), cfg))


def level_values(levels, cfg: QuantizerConfig) -> np.ndarray:
    """Map level indices to output values ``(-2**(B-1) + 0.5 + level) * step``."""
    levels = np.asarray(levels)
    return (levels - (1 << (cfg.bits - 1)) + 0.5) * cfg.step


def cell_edges(cfg: QuantizerConfig) -> tuple[np.ndarray, np.ndarray]:
    """Lower/upper input-cell edges per level; end cells extend to +-inf."""
    edges = cfg.r_low + cfg.step * (np.arange(cfg.n_levels + 1) - 1.0)
    edges[0] = -np.inf
    edges[-1] = np.inf
    return edges[:-1], edges[1:]


@dataclass(frozen=True)
class QuantizedVector:
    """One ADC output snapshot, stored as exact integer levels.

    Equality and hashing use the integer levels (plus the quantizer shape),
    never the float values, so these objects are safe as PMF keys.
    """

    levels: tuple[int, ...]
    bits: int
    step: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "levels", tuple(int(v) for v in self.levels))
        top = 1 << self.bits
        if any(v < 0 or v >= top for v in self.levels):
            raise ValueError(f"levels out of range for {self.bits}-bit quantizer")

    @property
    def dim(self) -> int:
        return len(self.levels)

    @cached_property
    def values(self) -> np.ndarray:
        cfg = QuantizerConfig(self.bits, self.step)
        out = level_values(np.asarray(self.levels), cfg)
        out.setflags(write=False)
        return out

    def __neg__(self) -> "QuantizedVector":
        top = (1 << self.bits) - 1
        return QuantizedVector(
            tuple(top - v for v in self.levels), self.bits, self.step)


def real_components(r, real_mode: bool = False) -> np.ndarray:
    """Stack a complex antenna vector as [Re; Im], or just Re in real mode."""
    r = np.asarray(r, dtype=complex)
    if real_mode:
        return r.real.copy()
    return np.concatenate([r.real, r.imag])


def quantize_vector(r, cfg: QuantizerConfig) -> QuantizedVector:
    """Quantize a complex receive vector component-wise into a QuantizedVector."""
    r = np.asarray(r, dtype=complex)
    if r.ndim != 1:
        raise ValueError("expected a 1-D receive vector")
    levels = quantize_levels(real_components(r, cfg.real_mode), cfg)
    return QuantizedVector(tuple(int(v) for v in levels), cfg.bits, cfg.step)


def vectors_from_levels(levels, cfg: QuantizerConfig) -> list[QuantizedVector]:
    """Wrap rows of an integer level matrix as QuantizedVector objects."""
    levels = np.asarray(levels)
    return [
        QuantizedVector(tuple(int(v) for v in row), cfg.bits, cfg.step)
        for row in np.atleast_2d(levels)
    ]


@dataclass(frozen=True, eq=False)
class SymbolBook:
    """All K = M**n_t candidate symbol vectors with antipodal index pairing.

    Row k of ``vectors`` is the k-th candidate (0-based); the construction in
    :func:`enumerate_symbols` guarantees ``vectors[K-1-k] == -vectors[k]``.
    """

    constellation: Constellation
    n_t: int
    vectors: np.ndarray

    @property
    def size(self) -> int:
        return self.vectors.shape[0]

    def __len__(self) -> int:
        return self.size

    def vector(self, k: int) -> np.ndarray:
        return self.vectors[k]


def enumerate_symbols(c: Constellation, n_t: int) -> SymbolBook:
    """Enumerate the full Cartesian symbol-vector book for n_t antennas.

    The lexicographic enumeration over the mirrored constellation ordering
    makes the antipodal pairing hold by construction. ``n_t == 0`` is allowed
    and yields the single empty vector (useful for degenerate subvector
    splits).
    """
    if n_t < 0:
        raise ValueError("n_t must be non-negative")
    pts = c.as_array()
    digits = np.array(
        list(itertools.product(range(c.size), repeat=n_t)), dtype=np.int64)
    digits = digits.reshape(c.size**n_t, n_t)
    vectors = pts[digits] if n_t > 0 else np.zeros((1, 0), dtype=complex)
    vectors.setflags(write=False)
    return SymbolBook(constellation=c, n_t=n_t, vectors=vectors)


@dataclass(frozen=True)
class NoiseSpec:
    """Complex noise variance per receive antenna (sigma^2 >= 0)."""

    sigma2: float

    def __post_init__(self) -> None:
        if self.sigma2 < 0.0:
            raise ValueError("noise variance must be non-negative")

    @property
    def per_component_variance(self) -> float:
        return self.sigma2 / 2.0


def snr_to_sigma2(snr_linear: float, n_t: int) -> float:
    """Noise variance for a linear SNR with unit-power symbols: n_t / snr."""
    if not snr_linear > 0.0:
        raise ValueError("SNR must be positive")
    return n_t / snr_linear


def snr_db_to_sigma2(snr_db: float, n_t: int) -> float:
    return snr_to_sigma2(10.0 ** (snr_db / 10.0), n_t)


def sample_channel(n_r: int, n_t: int, rng: np.random.Generator) -> np.ndarray:
    """Draw an n_r x n_t channel with i.i.d. CN(0, 1) entries."""
    if n_r < 1 or n_t < 1:
        raise ValueError("channel dimensions must be positive")
    return (
        rng.standard_normal((n_r, n_t)) + 1j * rng.standard_normal((n_r, n_t))
    ) / math.sqrt(2.0)


def complex_noise(shape, sigma2: float, rng: np.random.Generator | None) -> np.ndarray:
    """i.i.d. CN(0, sigma2) samples; sigma2 == 0 needs no generator."""
    if sigma2 == 0.0:
        return np.zeros(shape, dtype=complex)
    if sigma2 < 0.0:
        raise ValueError("noise variance must be non-negative")
    if rng is None:
        raise ValueError("a random generator is required for sigma2 > 0")
    scale = math.sqrt(sigma2 / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def transmit(
    h: np.ndarray,
    x: np.ndarray,
    sigma2: float,
    cfg: QuantizerConfig,
    rng: np.random.Generator | None = None,
) -> QuantizedVector:
    """One channel use: quantize ``h @ x`` plus complex Gaussian noise."""
    h = np.asarray(h, dtype=complex)
    x = np.asarray(x, dtype=complex)
    if h.ndim != 2 or x.shape != (h.shape[1],):
        raise ValueError(
            f"dimension mismatch: channel {h.shape}, symbol vector {x.shape}")
    r = h @ x + complex_noise(h.shape[0], sigma2, rng)
    return quantize_vector(r, cfg)


def transmit_batch(
    h: np.ndarray,
    x_rows: np.ndarray,
    sigma2: float,
    cfg: QuantizerConfig,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Quantized levels for many symbol vectors at once.

    ``x_rows`` has one symbol vector per row; the returned integer matrix has
    one observation per row. Noise for the whole batch is drawn in a single
    generator call, so results are reproducible per (generator state, batch).
    """
    h = np.asarray(h, dtype=complex)
    x_rows = np.asarray(x_rows, dtype=complex)
    if x_rows.ndim != 2 or x_rows.shape[1] != h.shape[1]:
        raise ValueError(
            f"dimension mismatch: channel {h.shape}, symbol rows {x_rows.shape}")
    r = x_rows @ h.T + complex_noise((x_rows.shape[0], h.shape[0]), sigma2, rng)
    if cfg.real_mode:
        stacked = r.real
    else:
        stacked = np.hstack([r.real, r.imag])
    return quantize_levels(stacked, cfg)
