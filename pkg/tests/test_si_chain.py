import numpy as np
import pytest

from fdxsim import (
    IDEAL,
    CancellationConfig,
    ChannelProfile,
    InfeasibleAlcError,
    OfdmConfig,
    apply_alc,
    apply_dlc,
    bin_powers,
    build_chpll_mask,
    default_profile,
    draw_channel,
    expected_est_err_gains,
    expected_post_alc_gains,
    expected_post_alc_power,
    max_alc_db,
    mask_from_table,
    point_spectrum,
    realize_channel,
    run_monte_carlo,
)

# Default-profile reference numbers (30 dB separation on the 0 dB tap).
P_TOT = 1e-3 + 10 ** -6.5 + 1e-7 + 10 ** -7.5
P_TAIL = 10 ** -6.5 + 1e-7 + 10 ** -7.5


# ---------------------------------------------------------------------------
# profile and channel draws
# ---------------------------------------------------------------------------


def test_profile_validation():
    with pytest.raises(ValueError):
        ChannelProfile((1, 2), (0.0, -65.0))  # first delay must be 0
    with pytest.raises(ValueError):
        ChannelProfile((0, 2, 1), (0.0, -65.0, -70.0))
    with pytest.raises(ValueError):
        ChannelProfile((0, 1), (0.0,))


def test_default_profile_effective_gains(profile):
    g = profile.effective_gains()
    assert g[0] == pytest.approx(1e-3, rel=1e-12)
    assert profile.total_power == pytest.approx(P_TOT, rel=1e-12)
    assert profile.tail_power == pytest.approx(P_TAIL, rel=1e-12)
    assert profile.max_delay == 4


def test_direct_tap_magnitude_is_deterministic(profile, rng):
    h = draw_channel(profile, rng)
    assert abs(h[0]) ** 2 == pytest.approx(1e-3, rel=1e-12)


def test_channel_draws_are_zero_mean(profile):
    h = draw_channel(profile, np.random.default_rng(0), count=10_000)
    g = profile.effective_gains()
    # complex mean of n draws has std sqrt(g/n) per tap
    bound = 4.0 * np.sqrt(g / 10_000)
    assert np.all(np.abs(h.mean(axis=0)) < bound)


def test_channel_taps_uncorrelated(profile):
    h = draw_channel(profile, np.random.default_rng(1), count=10_000)
    for i in range(1, 4):
        corr = np.mean(h[:, 0] * np.conj(h[:, i]))
        bound = 4.0 * np.sqrt(profile.effective_gains()[0] * profile.effective_gains()[i] / 10_000)
        assert abs(corr) < bound


def test_profile_csv_round_trip(tmp_path, profile):
    path = tmp_path / "profile.csv"
    profile.to_csv(path)
    back = ChannelProfile.from_csv(path)
    assert back.delays == profile.delays
    assert back.gains_db == profile.gains_db
    path.write_text("wrong,header\n0,0\n")
    with pytest.raises(ValueError, match="header"):
        ChannelProfile.from_csv(path)


# ---------------------------------------------------------------------------
# ALC
# ---------------------------------------------------------------------------


def test_max_alc_for_default_profile(profile):
    assert max_alc_db(profile) == pytest.approx(33.4906, abs=5e-4)


def test_alc_infeasible_level_names_the_bound(profile, rng):
    h = draw_channel(profile, rng)
    with pytest.raises(InfeasibleAlcError, match="33.49"):
        apply_alc(h, 34.0, rng)
    with pytest.raises(InfeasibleAlcError):
        expected_post_alc_power(profile, 33.5)


def test_ideal_alc_removes_direct_tap(profile, rng):
    h = draw_channel(profile, rng)
    h_alc = apply_alc(h, IDEAL, rng)
    assert h_alc[0] == 0.0
    assert np.array_equal(h_alc[1:], h[1:])
    assert np.sum(np.abs(h_alc) ** 2) == pytest.approx(P_TAIL, rel=1e-12)


def test_alc_residual_power_formula(profile):
    # 30 dB on the whole signal: residual = P_tot*1e-3 - P_tail = 5.526e-7
    g = expected_post_alc_gains(profile, 30.0)
    assert g[0] == pytest.approx(5.526e-7, rel=1e-3)
    assert np.allclose(g[1:], profile.effective_gains()[1:])
    assert g.sum() == pytest.approx(P_TOT * 1e-3, rel=1e-12)


def test_alc_residual_statistics(profile):
    rng = np.random.default_rng(2)
    h = draw_channel(profile, rng)
    draws = np.array([apply_alc(h, 30.0, rng)[0] for _ in range(4000)])
    target = P_TOT * 1e-3 - P_TAIL
    assert np.mean(np.abs(draws) ** 2) == pytest.approx(target, rel=0.08)
    assert abs(np.mean(draws)) < 4.0 * np.sqrt(target / 4000)


def test_alc_untouched_tail(profile, rng):
    h = draw_channel(profile, rng)
    h_alc = apply_alc(h, 30.0, rng)
    assert np.array_equal(h_alc[1:], h[1:])


# ---------------------------------------------------------------------------
# DLC
# ---------------------------------------------------------------------------


def test_ideal_dlc_is_exact(profile, rng):
    h_alc = apply_alc(draw_channel(profile, rng), 30.0, rng)
    h_hat = apply_dlc(h_alc, IDEAL, rng)
    assert np.array_equal(h_hat, h_alc)


def test_dlc_error_budget(profile):
    # 70 dB below the expected 1.00045e-6 post-ALC power, split over 4 taps
    e = expected_est_err_gains(profile, CancellationConfig(alc=30.0, dlc=70.0))
    assert e.sum() == pytest.approx(1.00045e-13, rel=1e-3)
    assert np.allclose(e, 2.5011e-14, rtol=1e-3)


def test_dlc_error_statistics(profile):
    rng = np.random.default_rng(3)
    p_post = expected_post_alc_power(profile, 30.0)
    h_alc = apply_alc(draw_channel(profile, rng), 30.0, rng)
    errs = np.array(
        [apply_dlc(h_alc, 70.0, rng, expected_power=p_post) - h_alc for _ in range(4000)]
    )
    per_tap = np.mean(np.abs(errs) ** 2, axis=0)
    assert np.allclose(per_tap, p_post * 1e-7 / 4.0, rtol=0.1)


def test_realized_channel_invariants(profile):
    canc = CancellationConfig(alc=30.0, dlc=70.0)
    reals = [realize_channel(profile, canc, seed) for seed in range(3000)]
    res_power = np.mean([np.abs(r.h_alc[0]) ** 2 for r in reals])
    assert res_power == pytest.approx(P_TOT * 1e-3 - P_TAIL, rel=0.1)
    for r in reals[:10]:
        assert r.h_alc.shape == r.h_hat.shape == (4,)


def test_cancellation_config_validation():
    with pytest.raises(ValueError):
        CancellationConfig(alc=-5.0)
    with pytest.raises(ValueError):
        CancellationConfig(dlc="perfect")
    cfg = CancellationConfig(alc=IDEAL, dlc=IDEAL)
    assert cfg.alc_ideal and cfg.dlc_ideal


# ---------------------------------------------------------------------------
# Monte Carlo engine
# ---------------------------------------------------------------------------


def small_mc_cfg(n_symbols=100):
    return OfdmConfig(n_symbols=n_symbols)


@pytest.mark.parametrize("alc,dlc,expected", [(30.0, 70.0, 100.0), (20.0, 50.0, 70.0)])
def test_no_phase_noise_sic_is_alc_plus_dlc(profile, alc, dlc, expected):
    cfg = small_mc_cfg()
    report = run_monte_carlo(
        cfg, profile, CancellationConfig(alc=alc, dlc=dlc), None, seed=10, trials=10
    )
    assert report.sic_db == pytest.approx(expected, abs=0.25)


def test_single_tap_channel_has_no_phase_noise_residual(headline_pll):
    # the shared oscillator cancels the direct tap's rotation identically;
    # what survives is float rounding of exp(j*phi)*exp(-j*phi)
    cfg = small_mc_cfg(n_symbols=50)
    single = ChannelProfile((0,), (0.0,), antenna_separation_db=30.0)
    spec = point_spectrum(cfg, headline_pll)
    report = run_monte_carlo(
        cfg, single, CancellationConfig(alc=30.0, dlc=IDEAL), spec, seed=4, trials=5
    )
    assert np.all(report.per_bin_residual < 1e-26 * report.p_in)
    ideal = run_monte_carlo(
        cfg, single, CancellationConfig(alc=IDEAL, dlc=IDEAL), spec, seed=4, trials=5
    )
    assert np.all(ideal.per_bin_residual == 0.0)
    assert ideal.sic_db == float("inf")


def test_monte_carlo_determinism(profile, headline_pll):
    cfg = small_mc_cfg(n_symbols=20)
    spec = point_spectrum(cfg, headline_pll)
    canc = CancellationConfig()
    a = run_monte_carlo(cfg, profile, canc, spec, seed=11, trials=3)
    b = run_monte_carlo(cfg, profile, canc, spec, seed=11, trials=3)
    assert np.array_equal(a.per_bin_residual, b.per_bin_residual)
    assert a.p_in == b.p_in and a.sic_db == b.sic_db


def test_scale_invariance(headline_pll):
    # a common gain offset on every tap cancels out of the ratio
    cfg = small_mc_cfg(n_symbols=30)
    base = default_profile()
    shifted = ChannelProfile(base.delays, tuple(g + 10.0 for g in base.gains_db), 30.0)
    spec = point_spectrum(cfg, headline_pll)
    canc = CancellationConfig(alc=30.0, dlc=IDEAL)
    a = run_monte_carlo(cfg, base, canc, spec, seed=12, trials=3)
    b = run_monte_carlo(cfg, shifted, canc, spec, seed=12, trials=3)
    assert a.sic_db == pytest.approx(b.sic_db, abs=1e-6)


def test_per_trial_redraw_mode(profile):
    cfg = small_mc_cfg(n_symbols=100)
    report = run_monte_carlo(
        cfg, profile, CancellationConfig(), None, seed=13, trials=20, redraw="per_trial"
    )
    # the coarse redraw converges slower; only the level is checked
    assert report.sic_db == pytest.approx(100.0, abs=2.0)


def test_mc_precondition_errors(profile, headline_pll):
    cfg = small_mc_cfg()
    with pytest.raises(ValueError, match="delay spread"):
        run_monte_carlo(
            OfdmConfig(cp_len=2, n_symbols=4),
            profile,
            CancellationConfig(),
            None,
            trials=1,
        )
    wrong_grid = bin_powers(build_chpll_mask(headline_pll), 512, cfg.sample_rate_hz)
    with pytest.raises(ValueError, match="grid"):
        run_monte_carlo(cfg, profile, CancellationConfig(), wrong_grid, trials=1)
    with pytest.raises(InfeasibleAlcError):
        run_monte_carlo(cfg, profile, CancellationConfig(alc=35.0), None, trials=1)
    with pytest.raises(ValueError, match="redraw"):
        run_monte_carlo(cfg, profile, CancellationConfig(), None, trials=1, redraw="never")


def test_report_accounting(profile):
    cfg = small_mc_cfg(n_symbols=40)
    mask = mask_from_table([(1e2, -110.0), (1e7, -110.0)])
    spec = bin_powers(mask, cfg.n_subcarriers, cfg.sample_rate_hz)
    report = run_monte_carlo(cfg, profile, CancellationConfig(), spec, seed=14, trials=4)
    # per-bin residuals live on the active bins and sum to p_res
    active = cfg.active_mask()
    assert np.all(report.per_bin_residual[~active] == 0.0)
    assert report.per_bin_residual.sum() == pytest.approx(report.p_res, rel=1e-12)
    # input power approximates the physical channel power on the active bins
    assert report.p_in == pytest.approx(600 * P_TOT, rel=0.02)
