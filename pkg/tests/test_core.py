import itertools
import math

import numpy as np
import pytest
from hypothesis import given, assume
from hypothesis import strategies as st

from quantmimo import core
from quantmimo.core import QuantizerConfig, QuantizedVector


# ---------------------------------------------------------------------------
# scalar quantizer


def test_one_bit_is_sign_quantizer():
    cfg = QuantizerConfig(bits=1, step=2.0)
    assert core.quantize_scalar(0.7, cfg) == 1.0
    assert core.quantize_scalar(-0.2, cfg) == -1.0
    # upper saturation branch starts at r_up == 0, so 0 maps to +1
    assert core.quantize_scalar(0.0, cfg) == 1.0


def test_two_bit_interior_cell():
    cfg = QuantizerConfig(bits=2, step=0.5)
    # floor((0.3 + 0.5) / 0.5) = 1 -> -0.5 + 0.5 + 0.25
    assert core.quantize_scalar(0.3, cfg) == pytest.approx(0.25, abs=1e-15)


def test_two_bit_saturation():
    cfg = QuantizerConfig(bits=2, step=0.5)
    assert core.quantize_scalar(10.0, cfg) == pytest.approx(0.75, abs=1e-15)
    assert core.quantize_scalar(-10.0, cfg) == pytest.approx(-0.75, abs=1e-15)
    assert core.quantize_scalar(np.inf, cfg) == pytest.approx(0.75)
    assert core.quantize_scalar(-np.inf, cfg) == pytest.approx(-0.75)


def test_nan_rejected():
    cfg = QuantizerConfig(bits=2, step=0.5)
    with pytest.raises(ValueError, match="NaN"):
        core.quantize_scalar(float("nan"), cfg)


@pytest.mark.parametrize("bits", [1, 2, 3, 4])
def test_alphabet_closure(bits):
    cfg = QuantizerConfig(bits=bits, step=0.5)
    sweep = np.linspace(-4.0, 4.0, 20001)
    observed = set(core.level_values(core.quantize_levels(sweep, cfg), cfg))
    assert observed == set(cfg.output_values())
    assert len(observed) == 2**bits


@given(
    x=st.floats(min_value=-50, max_value=50),
    y=st.floats(min_value=-50, max_value=50),
    bits=st.integers(min_value=1, max_value=4),
)
def test_monotonicity(x, y, bits):
    cfg = QuantizerConfig(bits=bits, step=0.5)
    lo, hi = min(x, y), max(x, y)
    assert core.quantize_scalar(lo, cfg) <= core.quantize_scalar(hi, cfg)


@given(
    x=st.floats(min_value=-20, max_value=20),
    bits=st.integers(min_value=1, max_value=4),
)
def test_odd_symmetry_off_boundaries(x, bits):
    cfg = QuantizerConfig(bits=bits, step=0.5)
    # exclude decision thresholds, where the cell convention breaks oddness
    frac = (x - cfg.r_low) / cfg.step
    assume(abs(frac - round(frac)) > 1e-6)
    assert core.quantize_scalar(-x, cfg) == -core.quantize_scalar(x, cfg)


@pytest.mark.parametrize("bits", [1, 2, 3])
def test_boundary_inputs_pair_to_step(bits):
    # on every finite decision threshold b: Q(b) + Q(-b) == step
    cfg = QuantizerConfig(bits=bits, step=0.5)
    thresholds = cfg.r_low + cfg.step * np.arange(2**bits - 1)
    for b in thresholds:
        total = core.quantize_scalar(b, cfg) + core.quantize_scalar(-b, cfg)
        assert total == pytest.approx(cfg.step, abs=1e-15)
    assert core.quantize_scalar(0.0, cfg) == pytest.approx(
        0.5 * cfg.step, abs=1e-15)


# ---------------------------------------------------------------------------
# vector quantization


def test_vector_real_mode_matches_worked_example(demo_cfg):
    y = core.quantize_vector(np.array([1.5 + 0j, 1.0 + 0j]), demo_cfg)
    assert np.array_equal(y.values, [1.0, 1.0])


def test_zero_vector_all_positive():
    cfg = QuantizerConfig(bits=1, step=2.0)
    y = core.quantize_vector(np.zeros(3, dtype=complex), cfg)
    assert np.array_equal(y.values, [1.0, 1.0, 1.0, 1.0, 1.0, 1.0])


def test_vector_complex_stacking():
    cfg = QuantizerConfig(bits=2, step=0.5)
    y = core.quantize_vector(np.array([0.3 + 0.6j]), cfg)
    assert np.array_equal(y.values, [0.25, 0.75])


def test_vector_rejects_matrix_input():
    cfg = QuantizerConfig(bits=1, step=2.0)
    with pytest.raises(ValueError, match="1-D"):
        core.quantize_vector(np.zeros((2, 2)), cfg)


def test_quantized_vector_identity_and_negation():
    a = QuantizedVector((0, 3, 1), bits=2, step=0.5)
    b = QuantizedVector((0, 3, 1), bits=2, step=0.5)
    assert a == b and hash(a) == hash(b)
    assert (-a).levels == (3, 0, 2)
    assert np.array_equal((-a).values, -a.values)
    with pytest.raises(ValueError):
        QuantizedVector((4,), bits=2, step=0.5)


def test_quantizer_config_validation():
    with pytest.raises(ValueError):
        QuantizerConfig(bits=0, step=0.5)
    with pytest.raises(ValueError):
        QuantizerConfig(bits=2, step=0.0)
    cfg = QuantizerConfig(bits=3, step=0.25)
    assert cfg.r_low == -0.75 and cfg.r_up == 0.75
    assert cfg.r_low <= cfg.r_up


def test_cell_edges_cover_real_line():
    cfg = QuantizerConfig(bits=2, step=0.5)
    lower, upper = core.cell_edges(cfg)
    assert lower[0] == -np.inf and upper[-1] == np.inf
    assert np.array_equal(lower[1:], upper[:-1])
    # every interior sample quantizes into the cell that contains it
    rng = np.random.default_rng(0)
    for x in rng.uniform(-2, 2, 100):
        lvl = core.quantize_level(x, cfg)
        assert lower[lvl] <= x < upper[lvl]


# ---------------------------------------------------------------------------
# constellations and symbol books


def test_bpsk_book_matches_worked_example(demo_book):
    expected = np.array(
        [[1, 1], [1, -1], [-1, 1], [-1, -1]], dtype=complex)
    assert np.array_equal(demo_book.vectors, expected)
    assert np.array_equal(demo_book.vectors[3], -demo_book.vectors[0])
    assert np.array_equal(demo_book.vectors[2], -demo_book.vectors[1])


def test_bpsk_single_antenna():
    book = core.enumerate_symbols(core.bpsk(), 1)
    assert np.array_equal(book.vectors, [[1], [-1]])


@pytest.mark.parametrize(
    "c,n_t", [(core.bpsk(), 2), (core.bpsk(), 3), (core.qpsk(), 1), (core.qpsk(), 2)])
def test_book_completeness_and_antipodality(c, n_t):
    book = core.enumerate_symbols(c, n_t)
    assert book.size == c.size**n_t
    produced = {tuple(row) for row in book.vectors}
    expected = {tuple(v) for v in itertools.product(c.points, repeat=n_t)}
    assert produced == expected
    for k in range(book.size):
        assert np.array_equal(book.vectors[book.size - 1 - k], -book.vectors[k])


def test_empty_book_for_zero_antennas():
    book = core.enumerate_symbols(core.qpsk(), 0)
    assert book.size == 1 and book.vectors.shape == (1, 0)


def test_constellation_validation():
    with pytest.raises(ValueError, match="power"):
        core.Constellation("bad", (2 + 0j, -2 + 0j))
    with pytest.raises(ValueError, match="negated partner"):
        core.Constellation.from_points(
            "bad", (1 + 0j, 1j * math.sqrt(1.0)))
    reordered = core.Constellation.from_points(
        "qpsk-shuffled", np.asarray(core.qpsk().points)[[2, 0, 3, 1]])
    assert set(reordered.points) == set(core.qpsk().points)


def test_unit_power_invariant():
    for c in (core.bpsk(), core.qpsk()):
        assert abs(np.mean(np.abs(c.as_array()) ** 2) - 1.0) <= 1e-12


# ---------------------------------------------------------------------------
# channel and noise


def test_channel_sampling_deterministic():
    h1 = core.sample_channel(4, 2, np.random.default_rng(123))
    h2 = core.sample_channel(4, 2, np.random.default_rng(123))
    assert np.array_equal(h1, h2)


def test_channel_moments():
    rng = np.random.default_rng(7)
    h = core.sample_channel(100, 1000, rng)
    assert abs(np.mean(np.abs(h) ** 2) - 1.0) < 0.02
    assert abs(np.var(h.real) - 0.5) < 0.02
    assert abs(np.var(h.imag) - 0.5) < 0.02


def test_noise_spec_and_snr_conversion():
    spec = core.NoiseSpec(0.5)
    assert spec.per_component_variance == 0.25
    assert core.snr_to_sigma2(4.0, 2) == 0.5
    assert core.snr_db_to_sigma2(10.0, 2) == pytest.approx(0.2)
    with pytest.raises(ValueError):
        core.NoiseSpec(-1.0)
    with pytest.raises(ValueError):
        core.snr_to_sigma2(0.0, 2)


# ---------------------------------------------------------------------------
# transmit pipeline


def test_noise_free_transmit_matches_worked_example(demo_channel, demo_cfg, demo_book):
    y = core.transmit(demo_channel, demo_book.vectors[2], 0.0, demo_cfg)
    assert np.array_equal(y.values, [1.0, -1.0])


def test_noise_free_transmit_equals_quantized_product(demo_channel, demo_cfg):
    rng = np.random.default_rng(3)
    for _ in range(20):
        x = rng.choice([-1.0, 1.0], size=2).astype(complex)
        direct = core.quantize_vector(demo_channel @ x, demo_cfg)
        assert core.transmit(demo_channel, x, 0.0, demo_cfg) == direct


def test_noise_dominated_outputs_are_fair_coin():
    cfg = QuantizerConfig(bits=1, step=2.0)
    h = np.array([[1.0 + 0j]])
    rng = np.random.default_rng(11)
    levels = core.transmit_batch(
        h, np.ones((10_000, 1), dtype=complex), 1e6, cfg, rng)
    freqs = levels.mean(axis=0)
    assert np.all(np.abs(freqs - 0.5) < 0.02)


def test_transmit_dimension_mismatch(demo_channel, demo_cfg):
    with pytest.raises(ValueError, match="mismatch"):
        core.transmit(demo_channel, np.ones(3, dtype=complex), 0.0, demo_cfg)
    with pytest.raises(ValueError, match="generator"):
        core.transmit(demo_channel, np.ones(2, dtype=complex), 1.0, demo_cfg)


def test_transmit_batch_agrees_with_single_noiseless(demo_channel):
    cfg = QuantizerConfig(bits=2, step=0.5)
    book = core.enumerate_symbols(core.bpsk(), 2)
    batch = core.transmit_batch(demo_channel, book.vectors, 0.0, cfg)
    singles = [
        core.transmit(demo_channel, x, 0.0, cfg).levels for x in book.vectors]
    assert np.array_equal(batch, np.array(singles))


def test_vector_negation_closure_off_boundary():
    cfg = QuantizerConfig(bits=3, step=0.5)
    rng = np.random.default_rng(5)
    for _ in range(50):
        r = rng.normal(size=3) + 1j * rng.normal(size=3)
        y_pos = core.quantize_vector(r, cfg)
        y_neg = core.quantize_vector(-r, cfg)
        assert y_neg == -y_pos
