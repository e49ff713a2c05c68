import numpy as np
import pytest

from fdxsim import OfdmConfig, SubcarrierGrid, demodulate, draw_grid, modulate
from fdxsim.ofdm_baseband import qam_alphabet


def small_cfg(**kw):
    defaults = dict(n_subcarriers=64, cp_len=8, active_per_side=20, n_symbols=6)
    defaults.update(kw)
    return OfdmConfig(**defaults)


# ---------------------------------------------------------------------------
# configuration and grid drawing
# ---------------------------------------------------------------------------


def test_config_validation():
    with pytest.raises(ValueError):
        OfdmConfig(qam_order=8)
    with pytest.raises(ValueError):
        OfdmConfig(active_per_side=512)  # 2*512 == n_subcarriers
    with pytest.raises(ValueError):
        OfdmConfig(cp_len=-1)
    with pytest.raises(ValueError):
        OfdmConfig(n_symbols=0)


def test_default_layout_is_lte_like(ofdm):
    assert ofdm.n_subcarriers == 1024
    assert ofdm.cp_len == 63
    assert ofdm.subcarrier_spacing_hz == pytest.approx(15e3)
    mask = ofdm.active_mask()
    assert mask.sum() == 600
    assert not mask[0]
    assert mask[1] and mask[300] and not mask[301]
    assert mask[1023] and mask[724] and not mask[723]


def test_grid_unit_average_power():
    # 600 active bins x 100 symbols of draws
    cfg = OfdmConfig(n_symbols=100)
    grid = draw_grid(cfg, seed=1)
    power = np.mean(np.abs(grid.x[:, grid.active]) ** 2)
    assert power == pytest.approx(1.0, rel=0.01)


def test_grid_nulls_are_exactly_zero():
    cfg = small_cfg()
    grid = draw_grid(cfg, seed=2)
    assert np.all(grid.x[:, ~grid.active] == 0.0)


def test_grid_points_come_from_the_16qam_alphabet():
    cfg = small_cfg(n_symbols=20)
    grid = draw_grid(cfg, seed=3)
    alphabet = {(2 * a - 3) + 1j * (2 * b - 3) for a in range(4) for b in range(4)}
    alphabet = {p / np.sqrt(10.0) for p in alphabet}
    drawn = grid.x[:, grid.active].ravel()
    for v in drawn[:500]:
        assert any(abs(v - p) < 1e-12 for p in alphabet)


@pytest.mark.parametrize("order", [4, 16, 64])
def test_alphabet_unit_power(order):
    pts = qam_alphabet(order)
    assert pts.size == order
    assert np.mean(np.abs(pts) ** 2) == pytest.approx(1.0, rel=1e-12)


# ---------------------------------------------------------------------------
# modulate / demodulate
# ---------------------------------------------------------------------------


def test_single_bin_is_a_dft_basis_vector():
    cfg = small_cfg(n_symbols=1)
    n = cfg.n_subcarriers
    x = np.zeros((1, n), dtype=complex)
    k0 = 5
    x[0, k0] = 1.0
    stream = modulate(SubcarrierGrid(x, cfg.active_mask()), cfg)
    body = stream[cfg.cp_len :]
    expected = np.exp(2j * np.pi * k0 * np.arange(n) / n) / np.sqrt(n)
    assert np.allclose(body, expected, atol=1e-14)
    # the prefix continues the complex exponential cyclically
    assert np.allclose(stream[: cfg.cp_len], expected[n - cfg.cp_len :], atol=1e-14)


def test_parseval_per_symbol():
    cfg = small_cfg()
    grid = draw_grid(cfg, seed=4)
    stream = modulate(grid, cfg).reshape(cfg.n_symbols, cfg.symbol_len)
    body_power = np.sum(np.abs(stream[:, cfg.cp_len :]) ** 2, axis=1)
    grid_power = np.sum(np.abs(grid.x) ** 2, axis=1)
    assert np.allclose(body_power, grid_power, rtol=1e-12)


def test_cyclic_prefix_equals_symbol_tail():
    cfg = small_cfg()
    grid = draw_grid(cfg, seed=5)
    sym = modulate(grid, cfg).reshape(cfg.n_symbols, cfg.symbol_len)
    n, cp = cfg.n_subcarriers, cfg.cp_len
    assert np.array_equal(sym[:, :cp], sym[:, n : n + cp])


def test_round_trip_is_identity():
    cfg = small_cfg()
    grid = draw_grid(cfg, seed=6)
    back = demodulate(modulate(grid, cfg), cfg)
    assert np.allclose(back.x, grid.x, atol=1e-14)


def test_zero_stream_demodulates_to_zero_grid():
    cfg = small_cfg(n_symbols=2)
    out = demodulate(np.zeros(2 * cfg.symbol_len, complex), cfg)
    assert np.all(out.x == 0.0)


def test_one_sample_circular_delay_rotates_bins():
    cfg = small_cfg(n_symbols=1)
    grid = draw_grid(cfg, seed=7)
    sym = modulate(grid, cfg).reshape(1, cfg.symbol_len)
    body = np.roll(sym[:, cfg.cp_len :], 1, axis=1)
    rebuilt = np.concatenate([body[:, -cfg.cp_len :], body], axis=1).ravel()
    out = demodulate(rebuilt, cfg)
    k = np.arange(cfg.n_subcarriers)
    expected = grid.x[0] * np.exp(-2j * np.pi * k / cfg.n_subcarriers)
    assert np.allclose(out.x[0], expected, atol=1e-13)


def test_demodulate_length_mismatch():
    cfg = small_cfg()
    with pytest.raises(ValueError, match="symbols"):
        demodulate(np.zeros(cfg.symbol_len + 1, complex), cfg)


def test_modulate_grid_width_mismatch():
    cfg = small_cfg()
    bad = SubcarrierGrid(np.zeros((1, 32), complex), np.zeros(32, bool))
    with pytest.raises(ValueError):
        modulate(bad, cfg)


def test_linear_convolution_equals_circular_on_body():
    # with cp_len >= the channel delay spread, a tapped-delay-line channel
    # acting on the CP stream is exactly circular on each demodulated body
    cfg = small_cfg(n_symbols=4)
    rng = np.random.default_rng(8)
    grid = draw_grid(cfg, rng)
    stream = modulate(grid, cfg)
    taps = {0: 0.9, 1: 0.1 + 0.05j, 2: -0.02j, 4: 0.01}
    assert max(taps) <= cfg.cp_len
    convolved = np.zeros_like(stream)
    for m, h in taps.items():
        delayed = np.concatenate([np.zeros(m, complex), stream[: stream.size - m]])
        convolved += h * delayed
    out = demodulate(convolved, cfg)
    k = np.arange(cfg.n_subcarriers)
    channel_fr = sum(
        h * np.exp(-2j * np.pi * k * m / cfg.n_subcarriers) for m, h in taps.items()
    )
    assert np.allclose(out.x, grid.x * channel_fr, atol=1e-13)
