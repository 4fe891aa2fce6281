"""Experiment harness: seeded Monte Carlo sweeps over block-fading channels.

Every experiment is driven by an :class:`ExperimentConfig` (parseable from a
flat key-value text file) and emits :class:`ResultRecord` rows with a fixed
CSV schema. Channels are re-trained independently per realization; all
randomness derives from per-channel seed-sequence children of the configured
seed, so results are byte-identical for a given (config, seed) regardless of
how many worker processes are used.
"""

from __future__ import annotations

import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import repeat
from pathlib import Path

import numpy as np

from . import analysis, baselines, detection, sic, training
from .core import (
    QuantizerConfig,
    constellation,
    enumerate_symbols,
    level_values,
    sample_channel,
    snr_db_to_sigma2,
    transmit_batch,
    vectors_from_levels,
)

KNOWN_DETECTORS = ("emld", "mmd", "mcd", "mld", "zf")
_MODEL_DETECTORS = {"emld", "mmd", "mcd"}

CSV_COLUMNS = (
    "snr_db", "detector", "framework", "errors", "trials", "ser", "svep", "bound")


class ConfigError(ValueError):
    """Raised for malformed experiment configurations."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Flat description of one Monte Carlo experiment.

    Config-file keys map onto the fields as: ``n_t``, ``n_r``, ``b`` (bits),
    ``delta`` (step), ``modulation``, ``snr_grid_db``, ``t`` (total slots,
    optional cross-check), ``t_t``, ``l`` (implicit repetitions), ``l_a``
    (explicit artificial signals), ``l_a1`` (first-stage signals per pair),
    ``detectors``, ``framework``, ``n_t1``, ``channel_count``,
    ``vectors_per_channel``, ``seed``, ``training``, ``csir``, ``threads``.
    """

    n_t: int
    n_r: int
    bits: int
    modulation: str
    snr_grid_db: tuple[float, ...]
    channel_count: int
    vectors_per_channel: int
    seed: int
    step: float = 0.5
    t_t: int | None = None
    total_slots: int | None = None
    detectors: tuple[str, ...] = ("mcd",)
    framework: str = "full"
    n_t1: int | None = None
    training: str = "implicit"
    csir: str = "perfect"
    repetitions: int | None = None
    artificial_count: int | None = None
    first_stage_count: int | None = None
    threads: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "detectors", tuple(d.lower() for d in self.detectors))
        object.__setattr__(self, "modulation", self.modulation.lower())
        object.__setattr__(self, "framework", self.framework.lower())
        object.__setattr__(self, "training", self.training.lower())
        object.__setattr__(self, "csir", self.csir.lower())

    @property
    def symbol_count(self) -> int:
        return constellation(self.modulation).size ** self.n_t

    def pilot_slots(self) -> int:
        """Effective T_t: the implicit schedule length, or the configured value."""
        if self.training == "implicit" and self.framework == "full":
            return self.symbol_count * (self.repetitions or 0) // 2
        return self.t_t or 0

    def validate(self) -> None:
        """Field-level sanity checks shared by every experiment type."""
        for name in ("n_t", "n_r", "bits", "channel_count",
                     "vectors_per_channel"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be a positive integer")
        if self.step <= 0:
            raise ConfigError("delta must be positive")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        if self.threads < 1:
            raise ConfigError("threads must be at least 1")
        if not self.snr_grid_db:
            raise ConfigError("snr_grid_db must list at least one SNR point")
        if self.modulation not in ("bpsk", "qpsk"):
            raise ConfigError(
                f"unknown modulation {self.modulation!r} (expected bpsk or qpsk)")
        unknown = [d for d in self.detectors if d not in KNOWN_DETECTORS]
        if unknown:
            raise ConfigError(
                f"unknown detectors {unknown}; known: {', '.join(KNOWN_DETECTORS)}")
        if not self.detectors:
            raise ConfigError("detectors must list at least one detector")
        if self.framework not in ("full", "sic"):
            raise ConfigError(
                f"unknown framework {self.framework!r} (expected full or sic)")
        if self.training not in ("implicit", "explicit"):
            raise ConfigError(
                f"unknown training {self.training!r} (expected implicit or explicit)")
        if self.csir not in ("perfect", "ls"):
            raise ConfigError(
                f"unknown csir {self.csir!r} (expected perfect or ls)")
        if self.symbol_count > 2 ** (2 * self.bits * self.n_r):
            warnings.warn(
                "more candidate symbol vectors than distinguishable receiver "
                f"outputs ({self.symbol_count} > 2**{2 * self.bits * self.n_r}); "
                "an irreducible detection error is unavoidable",
                stacklevel=2)

    def validate_for_ser(self) -> None:
        """Additional requirements for SNR-sweep detection experiments."""
        self.validate()
        if self.framework == "sic":
            if self.n_t1 is None or not 1 <= self.n_t1 <= self.n_t:
                raise ConfigError("framework sic needs n_t1 in [1, n_t]")
            if set(self.detectors) != {"mcd"}:
                raise ConfigError("framework sic supports only the mcd detector")
            if (self.first_stage_count or 1) < 1:
                raise ConfigError("l_a1 must be at least 1")
        elif self.training == "implicit":
            if _MODEL_DETECTORS & set(self.detectors):
                if self.repetitions is None or self.repetitions < 1:
                    raise ConfigError("implicit training needs l >= 1")
                if self.t_t is not None and self.t_t != self.pilot_slots():
                    raise ConfigError(
                        f"t_t={self.t_t} contradicts the implicit schedule "
                        f"length K*l/2={self.pilot_slots()}")
        elif _MODEL_DETECTORS & set(self.detectors):
            if self.artificial_count is None or self.artificial_count < 1:
                raise ConfigError("explicit training needs l_a >= 1")
        if self.csir == "ls":
            if self.pilot_slots() < self.n_t:
                raise ConfigError(
                    "ls channel estimation needs t_t >= n_t pilot slots")
        if self.total_slots is not None:
            expected = self.pilot_slots() + self.vectors_per_channel
            if self.total_slots != expected:
                raise ConfigError(
                    f"t={self.total_slots} must equal t_t + vectors_per_channel"
                    f"={expected}")


_KEY_TO_FIELD = {
    "n_t": "n_t",
    "n_r": "n_r",
    "b": "bits",
    "delta": "step",
    "modulation": "modulation",
    "snr_grid_db": "snr_grid_db",
    "t": "total_slots",
    "t_t": "t_t",
    "l": "repetitions",
    "l_a": "artificial_count",
    "l_a1": "first_stage_count",
    "detectors": "detectors",
    "framework": "framework",
    "n_t1": "n_t1",
    "channel_count": "channel_count",
    "vectors_per_channel": "vectors_per_channel",
    "seed": "seed",
    "training": "training",
    "csir": "csir",
    "threads": "threads",
}

_INT_FIELDS = {
    "n_t", "n_r", "bits", "total_slots", "t_t", "repetitions",
    "artificial_count", "first_stage_count", "n_t1", "channel_count",
    "vectors_per_channel", "seed", "threads",
}

_REQUIRED_KEYS = (
    "n_t", "n_r", "b", "modulation", "snr_grid_db", "channel_count",
    "vectors_per_channel", "seed")


def parse_config(text: str) -> ExperimentConfig:
    """Parse `key = value` lines (# comments allowed) into a validated config."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in stripped.split("=", 1))
        key = key.lower()
        if key not in _KEY_TO_FIELD:
            raise ConfigError(
                f"line {lineno}: unknown key {key!r}; known keys: "
                f"{', '.join(sorted(_KEY_TO_FIELD))}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value
    missing = [k for k in _REQUIRED_KEYS if k not in raw]
    if missing:
        raise ConfigError(f"missing required keys: {', '.join(missing)}")
    kwargs: dict[str, object] = {}
    for key, value in raw.items():
        name = _KEY_TO_FIELD[key]
        try:
            if name == "snr_grid_db":
                kwargs[name] = tuple(
                    float(v) for v in value.replace(",", " ").split())
            elif name == "detectors":
                kwargs[name] = tuple(
                    v for v in value.replace(",", " ").lower().split())
            elif name in _INT_FIELDS:
                kwargs[name] = int(value)
            elif name == "step":
                kwargs[name] = float(value)
            else:
                kwargs[name] = value
        except ValueError:
            raise ConfigError(
                f"key {key!r}: cannot parse value {value!r}") from None
    cfg = ExperimentConfig(**kwargs)
    cfg.validate()
    return cfg


def load_config(path) -> ExperimentConfig:
    return parse_config(Path(path).read_text())


@dataclass(frozen=True)
class ResultRecord:
    """One aggregated measurement; ``ser = errors / trials`` always holds."""

    config: ExperimentConfig
    snr_db: float | None
    detector: str
    framework: str
    errors: int
    trials: int
    ser: float
    svep: float | None = None
    bound: float | None = None
    wall_time: float = 0.0


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def render_csv(records) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for r in records:
        lines.append(",".join(_fmt(getattr(r, col)) for col in CSV_COLUMNS))
    return "\n".join(lines) + "\n"


def write_csv(records, path) -> None:
    Path(path).write_text(render_csv(records))


# ---------------------------------------------------------------------------
# SER sweeps


def _detect_all(cfg, qcfg, book, levels, values, sigma2, h, h_hat, model, cb):
    """Run every configured detector on one data batch; yields symbol matrices."""
    c = book.constellation
    for det in cfg.detectors:
        if cfg.framework == "sic" and det == "mcd":
            plan, fs_model, book1, book2 = model
            yield det, sic.detect_sic_batch(
                values, plan, fs_model, book1, book2, qcfg)
        elif det == "emld":
            yield det, book.vectors[detection.detect_emld_batch(levels, model)]
        elif det == "mmd":
            yield det, book.vectors[detection.detect_mmd_batch(levels, model)]
        elif det == "mcd":
            yield det, book.vectors[detection.detect_mcd_batch(values, cb)]
        elif det == "mld":
            h_mld = h if cfg.csir == "perfect" else h_hat
            yield det, book.vectors[
                baselines.detect_mld_batch(levels, h_mld, sigma2, book, qcfg)]
        elif det == "zf":
            yield det, baselines.detect_zf_batch(values, h_hat, c)


def _ser_channel_counts(cfg: ExperimentConfig, child) -> np.ndarray:
    """Error counts for one channel realization.

    Returns an array of shape (snr points, detectors, 4) holding symbol
    errors, symbol trials, vector errors, and vector trials.
    """
    rng = np.random.default_rng(child)
    qcfg = QuantizerConfig(cfg.bits, cfg.step)
    c = constellation(cfg.modulation)
    book = enumerate_symbols(c, cfg.n_t)
    h = sample_channel(cfg.n_r, cfg.n_t, rng)
    needs_model = bool(_MODEL_DETECTORS & set(cfg.detectors))
    out = np.zeros((len(cfg.snr_grid_db), len(cfg.detectors), 4), dtype=np.int64)
    for si, snr_db in enumerate(cfg.snr_grid_db):
        sigma2 = snr_db_to_sigma2(snr_db, cfg.n_t)
        # --- training / channel estimation phase
        model = cb = None
        pilot_matrix = pilot_levels = None
        implicit_frame = cfg.framework == "full" and cfg.training == "implicit"
        if implicit_frame and (needs_model or cfg.csir == "ls"):
            # the repetition schedule is the pilot frame; the least-squares
            # estimate (when requested) reuses the same observations
            schedule = training.build_implicit_pilots(book, cfg.repetitions)
            pilot_levels = transmit_batch(h, schedule.rows(), sigma2, qcfg, rng)
            pilot_matrix = schedule.matrix()
            if needs_model:
                model = training.learn_implicit(
                    vectors_from_levels(pilot_levels, qcfg), book,
                    cfg.repetitions)
        h_hat = h
        if cfg.csir == "ls":
            if pilot_matrix is None:
                pilot_matrix = baselines.random_pilots(c, cfg.n_t, cfg.t_t, rng)
                pilot_levels = transmit_batch(
                    h, pilot_matrix.T, sigma2, qcfg, rng)
            h_hat = baselines.estimate_channel_ls(
                pilot_matrix, vectors_from_levels(pilot_levels, qcfg)).h_hat
        if cfg.framework == "full" and cfg.training == "explicit" and needs_model:
            model = training.learn_explicit(
                h_hat, sigma2, cfg.artificial_count, book, qcfg, rng)
        if cfg.framework == "full" and needs_model and "mcd" in cfg.detectors:
            cb = detection.centroids(model)
        if cfg.framework == "sic":
            plan = sic.build_plan(h_hat, cfg.n_t1)
            book1 = enumerate_symbols(c, cfg.n_t1)
            book2 = enumerate_symbols(c, cfg.n_t - cfg.n_t1)
            fs_model = sic.learn_first_stage(
                plan, sigma2, cfg.first_stage_count or 1, book1, book2,
                qcfg, rng)
            model = (plan, fs_model, book1, book2)
        # --- data phase
        data_idx = rng.integers(0, book.size, size=cfg.vectors_per_channel)
        x_true = book.vectors[data_idx]
        levels = transmit_batch(h, x_true, sigma2, qcfg, rng)
        values = level_values(levels, qcfg)
        for di, (det, x_det) in enumerate(_detect_all(
                cfg, qcfg, book, levels, values, sigma2, h, h_hat, model, cb)):
            mismatched = x_det != x_true
            out[si, di] = (
                int(mismatched.sum()),
                x_true.size,
                int(mismatched.any(axis=1).sum()),
                x_true.shape[0],
            )
    return out


def _map_channels(worker, cfg: ExperimentConfig, children):
    if cfg.threads <= 1:
        return [worker(cfg, child) for child in children]
    with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
        return list(pool.map(worker, repeat(cfg), children, chunksize=4))


def run_ser_experiment(cfg: ExperimentConfig) -> list[ResultRecord]:
    """Symbol-error-rate sweep over the configured SNR grid and detectors.

    Each channel realization is trained and detected independently with its
    own derived seed; counts are aggregated over channels per (SNR,
    detector) and emitted in canonical (snr, detector) order.
    """
    cfg.validate_for_ser()
    started = time.perf_counter()
    children = np.random.SeedSequence(cfg.seed).spawn(cfg.channel_count)
    totals = sum(_map_channels(_ser_channel_counts, cfg, children))
    elapsed = time.perf_counter() - started
    framework = (
        f"sic[n_t1={cfg.n_t1}]" if cfg.framework == "sic" else "full")
    records = []
    for si, snr_db in enumerate(cfg.snr_grid_db):
        for di, det in enumerate(cfg.detectors):
            sym_err, sym_trials, vec_err, vec_trials = totals[si, di]
            records.append(ResultRecord(
                config=cfg,
                snr_db=float(snr_db),
                detector=det,
                framework=framework,
                errors=int(sym_err),
                trials=int(sym_trials),
                ser=sym_err / sym_trials,
                svep=vec_err / vec_trials,
                bound=None,
                wall_time=elapsed,
            ))
    records.sort(key=lambda r: (r.snr_db, r.detector))
    return records


# ---------------------------------------------------------------------------
# error-bound validation


def run_bound_validation(
    cfg: ExperimentConfig, use_trained_centroids: bool = False
) -> list[ResultRecord]:
    """Simulated vector-error probability of MCD against its analytic bound.

    Channels are sampled until ``channel_count`` realizations with a flip
    budget of exactly one (d_min of 1 or 2) are found; the reported bound per
    SNR is the analytic value averaged over those channels. By default the
    detector uses the exact noiseless codewords as centroids, matching the
    regime the bound is derived for; ``use_trained_centroids`` switches to
    implicit training with ``repetitions`` pilot repetitions.
    """
    cfg.validate()
    if cfg.bits != 1 or cfg.modulation != "bpsk":
        raise ConfigError("bound validation requires one-bit ADCs and BPSK")
    if use_trained_centroids and (cfg.repetitions or 0) < 1:
        raise ConfigError("trained-centroid validation needs l >= 1")
    started = time.perf_counter()
    qcfg = QuantizerConfig(cfg.bits, cfg.step)
    book = enumerate_symbols(constellation(cfg.modulation), cfg.n_t)
    root = np.random.SeedSequence(cfg.seed)
    search_child, *channel_children = root.spawn(cfg.channel_count + 1)
    search_rng = np.random.default_rng(search_child)
    kept = []
    budget = 200 * cfg.channel_count
    for _ in range(budget):
        h = sample_channel(cfg.n_r, cfg.n_t, search_rng)
        geom = analysis.geometry(h, book, qcfg)
        if geom.half_flips == 1:
            kept.append((h, geom))
            if len(kept) == cfg.channel_count:
                break
    else:
        raise RuntimeError(
            f"no {cfg.channel_count} channels with a unit flip budget found "
            f"within {budget} draws")
    n_snr = len(cfg.snr_grid_db)
    sym_err = np.zeros(n_snr, dtype=np.int64)
    vec_err = np.zeros(n_snr, dtype=np.int64)
    bound_sum = np.zeros(n_snr)
    for (h, geom), child in zip(kept, channel_children):
        rng = np.random.default_rng(child)
        codeword_values = analysis.build_codebook(h, book, qcfg).value_matrix
        for si, snr_db in enumerate(cfg.snr_grid_db):
            sigma2 = snr_db_to_sigma2(snr_db, cfg.n_t)
            snr = 10.0 ** (snr_db / 10.0)
            bound_sum[si] += analysis.svep_upper_bound(
                geom, snr, cfg.n_t, cfg.n_r)
            if use_trained_centroids:
                schedule = training.build_implicit_pilots(book, cfg.repetitions)
                pilot_levels = transmit_batch(
                    h, schedule.rows(), sigma2, qcfg, rng)
                model = training.learn_implicit(
                    vectors_from_levels(pilot_levels, qcfg),
                    book, cfg.repetitions)
                centers = detection.centroids(model)
            else:
                centers = detection.CentroidBook(centers=codeword_values)
            data_idx = rng.integers(0, book.size, size=cfg.vectors_per_channel)
            x_true = book.vectors[data_idx]
            levels = transmit_batch(h, x_true, sigma2, qcfg, rng)
            detected = detection.detect_mcd_batch(
                level_values(levels, qcfg), centers)
            mismatched = book.vectors[detected] != x_true
            sym_err[si] += int(mismatched.sum())
            vec_err[si] += int(mismatched.any(axis=1).sum())
    elapsed = time.perf_counter() - started
    vec_trials = cfg.channel_count * cfg.vectors_per_channel
    sym_trials = vec_trials * cfg.n_t
    framework = "bound-trained" if use_trained_centroids else "bound-exact"
    records = [
        ResultRecord(
            config=cfg,
            snr_db=float(snr_db),
            detector="mcd",
            framework=framework,
            errors=int(sym_err[si]),
            trials=sym_trials,
            ser=sym_err[si] / sym_trials,
            svep=vec_err[si] / vec_trials,
            bound=bound_sum[si] / cfg.channel_count,
            wall_time=elapsed,
        )
        for si, snr_db in enumerate(cfg.snr_grid_db)
    ]
    records.sort(key=lambda r: (r.snr_db, r.detector))
    return records


# ---------------------------------------------------------------------------
# minimum-distance distribution


def sample_dmin(
    n_t: int, n_r: int, count: int, rng: np.random.Generator,
    chunk: int = 1 << 14,
) -> np.ndarray:
    """Monte Carlo minimum distances over Rayleigh channels (BPSK, one bit).

    Works directly on the signs of the stacked noiseless outputs, so it is
    an independent route from the codebook construction in :mod:`analysis`.
    """
    book = enumerate_symbols(constellation("bpsk"), n_t)
    x = book.vectors.real.T
    k = book.size
    out = np.empty(count, dtype=np.int64)
    done = 0
    while done < count:
        m = min(chunk, count - done)
        h = (
            rng.standard_normal((m, n_r, n_t))
            + 1j * rng.standard_normal((m, n_r, n_t))
        ) / math.sqrt(2.0)
        clean = h @ x
        g = np.concatenate([clean.real, clean.imag], axis=1)
        signs = np.where(g >= 0.0, 1.0, -1.0).astype(np.float32)
        gram = signs.transpose(0, 2, 1) @ signs
        dist = np.rint((2 * n_r - gram) / 2.0).astype(np.int64)
        dist[:, np.arange(k), np.arange(k)] = 2 * n_r + 1
        out[done:done + m] = dist.reshape(m, -1).min(axis=1)
        done += m
    return out


def run_ccdf_experiment(cfg: ExperimentConfig) -> list[ResultRecord]:
    """Analytic vs Monte Carlo distribution of the codebook minimum distance.

    One record per threshold n in 0..n_r+1: ``errors``/``trials`` count the
    sampled channels with d_min >= n (so ``ser`` is the Monte Carlo CCDF) and
    ``bound`` carries the analytic CCDF value.
    """
    cfg.validate()
    if cfg.bits != 1 or cfg.modulation != "bpsk":
        raise ConfigError(
            "the minimum-distance distribution requires one-bit ADCs and BPSK")
    started = time.perf_counter()
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))
    samples = sample_dmin(cfg.n_t, cfg.n_r, cfg.channel_count, rng)
    book = enumerate_symbols(constellation("bpsk"), cfg.n_t)
    records = []
    elapsed = time.perf_counter() - started
    for n in range(cfg.n_r + 2):
        if cfg.n_t == 2:
            analytic = analysis.dmin_ccdf_exact_2tx(cfg.n_r, n)
        else:
            analytic = analysis.dmin_ccdf_approx(cfg.n_t, cfg.n_r, n, book)
        hits = int((samples >= n).sum())
        records.append(ResultRecord(
            config=cfg,
            snr_db=None,
            detector=f"dmin>={n}",
            framework="ccdf",
            errors=hits,
            trials=cfg.channel_count,
            ser=hits / cfg.channel_count,
            svep=None,
            bound=analytic,
            wall_time=elapsed,
        ))
    return records
