"""fdxsim: full-duplex radio self-interference under oscillator phase noise.

The toolkit covers the whole loop from oscillator characterization to
achieved cancellation: synthesize SSB phase-noise masks (tables or
charge-pump PLL models), generate matching phase-noise sample blocks,
simulate an OFDM transceiver whose transmit and receive mixers share one
oscillator through a multipath coupling channel with analog and digital
cancellation stages, and evaluate the same residual in closed form for
fast design sweeps.
"""

from .spectral_mask import (
    SpectralMask,
    PllParams,
    BinPowerSpectrum,
    FeasibilityError,
    SmallPhaseWarning,
    mask_from_table,
    load_mask_csv,
    save_mask_csv,
    build_chpll_mask,
    chpll_level,
    vco_level,
    reference_level,
    default_loop_bandwidth,
    feasible_lw_range,
    bin_powers,
)
from .phase_noise import PhaseNoiseBlock, generate, mix_up, mix_down, save_block_csv
from .ofdm_baseband import OfdmConfig, SubcarrierGrid, draw_grid, modulate, demodulate
from .si_chain import (
    ChannelProfile,
    CancellationConfig,
    ChannelRealization,
    SicReport,
    InfeasibleAlcError,
    IDEAL,
    default_profile,
    two_tap_profile,
    max_alc_db,
    draw_channel,
    apply_alc,
    apply_dlc,
    realize_channel,
    expected_post_alc_power,
    expected_post_alc_gains,
    expected_est_err_gains,
    run_monte_carlo,
)
from .closed_form import (
    ResidualSpectrum,
    rotation_dft,
    linearized_rotation_dft,
    expected_rotation_power,
    expected_si_power,
    total_sic,
)
from .experiments import (
    ConfigError,
    OscillatorSweep,
    ExperimentConfig,
    ResultRow,
    ResultTable,
    closed_form_sic,
    monte_carlo_sic,
    point_spectrum,
    run_experiment,
    run_two_tap,
    emit_table,
)

__version__ = "0.1.0"
