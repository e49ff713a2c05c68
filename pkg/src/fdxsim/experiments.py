"""Config-driven design-space studies with closed-form and Monte Carlo engines.

An ``ExperimentConfig`` names one study kind and the fixed/swept parameters;
``run_experiment`` evaluates every feasible point with the selected engine(s)
and returns a ``ResultTable`` that ``emit_table`` serializes as plot-ready
CSV or JSON.  Oscillator parameter pairs outside the feasibility band are
emitted as skipped rows rather than errors, so grids and curves are simply
cut where the parameter space ends.

Kinds
-----
- ``single_point``          one (l_f, l_w) point
- ``grid_lf_lw``            full (l_f, l_w) grid
- ``curve_lf``              sweep l_f at fixed l_w
- ``curve_lw``              sweep l_w at fixed l_f
- ``curve_dlc``             sweep the DLC level at fixed oscillator
- ``two_tap_attenuation``   two-tap channel, second-tap gain swept
- ``two_tap_delay``         two-tap channel, second-tap delay swept

Reproducibility: row i of a run uses seed ``config.seed + i`` (rows are
enumerated in deterministic parameter order), so results do not depend on
evaluation order.  The environment variable ``FDXSIM_SEED`` overrides the
config seed.
"""

from __future__ import annotations

import csv
import json
import os
import time
from dataclasses import dataclass, field, asdict
from itertools import product

import numpy as np
from scipy.optimize import brentq

from .closed_form import expected_si_power, total_sic
from .ofdm_baseband import OfdmConfig
from .si_chain import (
    CancellationConfig,
    ChannelProfile,
    default_profile,
    expected_est_err_gains,
    expected_post_alc_gains,
    expected_post_alc_power,
    run_monte_carlo,
    two_tap_profile,
)
from .spectral_mask import (
    BinPowerSpectrum,
    FeasibilityError,
    PllParams,
    bin_powers,
    build_chpll_mask,
)

__all__ = [
    "ConfigError",
    "OscillatorSweep",
    "ExperimentConfig",
    "ResultRow",
    "ResultTable",
    "run_experiment",
    "run_two_tap",
    "emit_table",
]

KINDS = (
    "single_point",
    "grid_lf_lw",
    "curve_lf",
    "curve_lw",
    "curve_dlc",
    "two_tap_attenuation",
    "two_tap_delay",
)

ENGINES = ("closed_form", "monte_carlo", "both")

# Default design grid: covers every oscillator quality of practical interest.
DEFAULT_LF_VALUES = tuple(np.arange(-80.0, -30.0 + 1e-9, 2.5))
DEFAULT_LW_VALUES = tuple(np.arange(-150.0, -100.0 + 1e-9, 2.5))
DEFAULT_DLC_VALUES = tuple(np.arange(30.0, 90.0 + 1e-9, 5.0))
DEFAULT_TAP_GAINS_DB = (-45.0, -55.0, -65.0, -75.0)
DEFAULT_TAP_DELAYS = (1, 2, 4, 8)


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


@dataclass(frozen=True)
class OscillatorSweep:
    """Oscillator parameters: fixed point and/or sweep values."""

    lf: float = -50.0
    lw: float = -120.0
    lf_values: tuple = DEFAULT_LF_VALUES
    lw_values: tuple = DEFAULT_LW_VALUES
    lf_offset_hz: float = 1e3
    lw_offset_hz: float = 1e6
    co_level: float = -160.0
    loop_bandwidth_hz: float | None = None
    damping: float = 0.707

    def pll(self, lf: float, lw: float) -> PllParams:
        """Materialize the PLL parameters for one grid point.

        Raises FeasibilityError for pairs outside the allowed band.
        """
        return PllParams(
            l_f=lf,
            l_w=lw,
            f_lf=self.lf_offset_hz,
            f_lw=self.lw_offset_hz,
            co_level=self.co_level,
            loop_bandwidth_hz=self.loop_bandwidth_hz,
            damping=self.damping,
        )


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str = "single_point"
    engine: str = "both"
    seed: int = 0
    trials: int = 50
    redraw: str = "per_symbol"
    ofdm: OfdmConfig = field(default_factory=OfdmConfig)
    profile: ChannelProfile = field(default_factory=default_profile)
    cancellation: CancellationConfig = field(default_factory=CancellationConfig)
    oscillator: OscillatorSweep = field(default_factory=OscillatorSweep)
    dlc_values: tuple = DEFAULT_DLC_VALUES
    second_tap_gains_db: tuple = DEFAULT_TAP_GAINS_DB
    second_tap_delays: tuple = DEFAULT_TAP_DELAYS
    two_tap_mode: str = "grid"
    contour_target_db: float = 90.0
    output_path: str | None = None
    output_format: str = "csv"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown kind {self.kind!r}; expected one of {KINDS}")
        if self.engine not in ENGINES:
            raise ConfigError(f"unknown engine {self.engine!r}; expected one of {ENGINES}")
        if self.two_tap_mode not in ("grid", "contour"):
            raise ConfigError("two_tap_mode must be 'grid' or 'contour'")
        if self.output_format not in ("csv", "json"):
            raise ConfigError("output_format must be 'csv' or 'json'")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")

    @property
    def effective_seed(self) -> int:
        env = os.environ.get("FDXSIM_SEED")
        return int(env) if env else self.seed

    # ---- JSON round trip -------------------------------------------------

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("config root must be a JSON object")
        known = {
            "kind", "engine", "seed", "trials", "redraw", "ofdm", "channel",
            "cancellation", "oscillator", "dlc_values", "second_tap_gains_db",
            "second_tap_delays", "two_tap_mode", "contour_target_db",
            "output", "format",
        }
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            ofdm = OfdmConfig(**data.get("ofdm", {}))
            ch = data.get("channel", {})
            if "taps" in ch:
                taps = ch["taps"]
                profile = ChannelProfile(
                    tuple(int(t[0]) for t in taps),
                    tuple(float(t[1]) for t in taps),
                    antenna_separation_db=float(ch.get("antenna_separation_db", 30.0)),
                )
            else:
                profile = default_profile(float(ch.get("antenna_separation_db", 30.0)))
            canc_in = data.get("cancellation", {})
            canc = CancellationConfig(
                alc=canc_in.get("alc_db", 30.0),
                dlc=canc_in.get("dlc_db", 70.0),
            )
            osc_in = dict(data.get("oscillator", {}))
            for key in ("lf_values", "lw_values"):
                if key in osc_in:
                    osc_in[key] = tuple(float(v) for v in osc_in[key])
            osc = OscillatorSweep(**osc_in)
            return cls(
                kind=data.get("kind", "single_point"),
                engine=data.get("engine", "both"),
                seed=int(data.get("seed", 0)),
                trials=int(data.get("trials", 50)),
                redraw=data.get("redraw", "per_symbol"),
                ofdm=ofdm,
                profile=profile,
                cancellation=canc,
                oscillator=osc,
                dlc_values=tuple(float(v) for v in data.get("dlc_values", DEFAULT_DLC_VALUES)),
                second_tap_gains_db=tuple(
                    float(v) for v in data.get("second_tap_gains_db", DEFAULT_TAP_GAINS_DB)
                ),
                second_tap_delays=tuple(
                    int(v) for v in data.get("second_tap_delays", DEFAULT_TAP_DELAYS)
                ),
                two_tap_mode=data.get("two_tap_mode", "grid"),
                contour_target_db=float(data.get("contour_target_db", 90.0)),
                output_path=data.get("output"),
                output_format=data.get("format", "csv"),
            )
        except ConfigError:
            raise
        except (TypeError, ValueError, KeyError, IndexError) as exc:
            raise ConfigError(f"invalid config: {exc}") from exc

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
        return cls.from_dict(data)

    def echo(self) -> dict:
        """JSON-serializable snapshot of the configuration."""
        d = {
            "kind": self.kind,
            "engine": self.engine,
            "seed": self.effective_seed,
            "trials": self.trials,
            "redraw": self.redraw,
            "ofdm": asdict(self.ofdm),
            "channel": {
                "taps": [[d_, g_] for d_, g_ in zip(self.profile.delays, self.profile.gains_db)],
                "antenna_separation_db": self.profile.antenna_separation_db,
            },
            "cancellation": {"alc_db": self.cancellation.alc, "dlc_db": self.cancellation.dlc},
            "oscillator": asdict(self.oscillator),
            "two_tap_mode": self.two_tap_mode,
            "contour_target_db": self.contour_target_db,
        }
        if self.kind == "curve_dlc":
            d["dlc_values"] = list(self.dlc_values)
        if self.kind == "two_tap_attenuation":
            d["second_tap_gains_db"] = list(self.second_tap_gains_db)
        if self.kind == "two_tap_delay":
            d["second_tap_delays"] = list(self.second_tap_delays)
        return d


@dataclass
class ResultRow:
    params: dict
    sic_cf_db: float | None = None
    sic_mc_db: float | None = None
    skipped: bool = False
    seed: int | None = None
    trials: int | None = None
    runtime_s: float = 0.0

    @property
    def engine_diff_db(self) -> float | None:
        if self.sic_cf_db is None or self.sic_mc_db is None:
            return None
        return self.sic_mc_db - self.sic_cf_db


@dataclass
class ResultTable:
    param_names: list
    rows: list
    config_echo: dict


# ---------------------------------------------------------------------------
# Engine evaluation
# ---------------------------------------------------------------------------


def point_spectrum(ofdm: OfdmConfig, pll: PllParams) -> BinPowerSpectrum:
    """CHPLL mask -> per-bin powers on the experiment's analysis grid."""
    mask = build_chpll_mask(pll, f_max_hz=ofdm.sample_rate_hz / 2.0)
    return bin_powers(mask, ofdm.n_subcarriers, ofdm.sample_rate_hz)


def closed_form_sic(
    ofdm: OfdmConfig,
    profile: ChannelProfile,
    canc: CancellationConfig,
    spec: BinPowerSpectrum | None,
) -> float:
    """Closed-form cancellation for one operating point, in dB.

    Residual is accounted on the active bins, input power against the
    physical channel, matching the Monte Carlo engine's bookkeeping.
    """
    if spec is None:
        spec = BinPowerSpectrum.zero(ofdm.n_subcarriers, ofdm.sample_rate_hz)
    g = expected_post_alc_gains(profile, canc.alc)
    e = expected_est_err_gains(profile, canc)
    sig2 = ofdm.subcarrier_powers()
    res = expected_si_power(spec, profile.delays, g, e, sig2)
    res = res.restrict(ofdm.active_mask())
    p_in = float(sig2.sum()) * profile.total_power
    return total_sic(res, p_in)


def monte_carlo_sic(
    ofdm: OfdmConfig,
    profile: ChannelProfile,
    canc: CancellationConfig,
    spec: BinPowerSpectrum | None,
    seed: int,
    trials: int,
    redraw: str = "per_symbol",
) -> float:
    report = run_monte_carlo(ofdm, profile, canc, spec, seed=seed, trials=trials, redraw=redraw)
    return report.sic_db


def _evaluate_point(
    cfg: ExperimentConfig,
    profile: ChannelProfile,
    canc: CancellationConfig,
    spec: BinPowerSpectrum | None,
    row_seed: int,
) -> tuple[float | None, float | None]:
    sic_cf = sic_mc = None
    if cfg.engine in ("closed_form", "both"):
        sic_cf = closed_form_sic(cfg.ofdm, profile, canc, spec)
    if cfg.engine in ("monte_carlo", "both"):
        sic_mc = monte_carlo_sic(
            cfg.ofdm, profile, canc, spec, seed=row_seed, trials=cfg.trials, redraw=cfg.redraw
        )
    return sic_cf, sic_mc


# ---------------------------------------------------------------------------
# Experiment kinds
# ---------------------------------------------------------------------------


def _oscillator_rows(cfg: ExperimentConfig, points, param_names) -> ResultTable:
    """Evaluate (l_f, l_w) points; infeasible pairs become skipped rows."""
    # Fixed-parameter feasibility is an error, not a skip.
    expected_post_alc_power(cfg.profile, cfg.cancellation.alc)
    base_seed = cfg.effective_seed
    rows = []
    for i, (lf, lw) in enumerate(points):
        params = {"lf_dbc_hz": lf, "lw_dbc_hz": lw}
        t0 = time.perf_counter()
        try:
            pll = cfg.oscillator.pll(lf, lw)
        except FeasibilityError:
            rows.append(ResultRow(params, skipped=True, seed=base_seed + i, trials=cfg.trials))
            continue
        spec = point_spectrum(cfg.ofdm, pll)
        sic_cf, sic_mc = _evaluate_point(cfg, cfg.profile, cfg.cancellation, spec, base_seed + i)
        rows.append(
            ResultRow(
                params,
                sic_cf_db=sic_cf,
                sic_mc_db=sic_mc,
                seed=base_seed + i,
                trials=cfg.trials,
                runtime_s=time.perf_counter() - t0,
            )
        )
    return ResultTable(param_names, rows, cfg.echo())


def _run_curve_dlc(cfg: ExperimentConfig) -> ResultTable:
    expected_post_alc_power(cfg.profile, cfg.cancellation.alc)
    pll = cfg.oscillator.pll(cfg.oscillator.lf, cfg.oscillator.lw)
    spec = point_spectrum(cfg.ofdm, pll)
    base_seed = cfg.effective_seed
    rows = []
    for i, dlc in enumerate(cfg.dlc_values):
        t0 = time.perf_counter()
        canc = CancellationConfig(alc=cfg.cancellation.alc, dlc=dlc)
        sic_cf, sic_mc = _evaluate_point(cfg, cfg.profile, canc, spec, base_seed + i)
        rows.append(
            ResultRow(
                {"dlc_db": dlc},
                sic_cf_db=sic_cf,
                sic_mc_db=sic_mc,
                seed=base_seed + i,
                trials=cfg.trials,
                runtime_s=time.perf_counter() - t0,
            )
        )
    return ResultTable(["dlc_db"], rows, cfg.echo())


def run_two_tap(cfg: ExperimentConfig) -> ResultTable:
    """Two-tap channel studies: sweep the second tap's gain or delay.

    Requires ideal ALC and ideal DLC so the oscillator effect on the second
    tap is isolated.  ``two_tap_mode='grid'`` evaluates the (l_f, l_w) grid
    per variant; ``'contour'`` reports, per l_f, the l_w at which the
    closed-form cancellation crosses ``contour_target_db``.
    """
    if cfg.kind not in ("two_tap_attenuation", "two_tap_delay"):
        raise ConfigError("run_two_tap requires a two_tap_* experiment kind")
    if not (cfg.cancellation.alc_ideal and cfg.cancellation.dlc_ideal):
        raise ConfigError("two-tap studies require alc_db='ideal' and dlc_db='ideal'")
    if cfg.kind == "two_tap_attenuation":
        variants = [("tap_gain_db", g, two_tap_profile(second_gain_db=g)) for g in cfg.second_tap_gains_db]
    else:
        variants = [("tap_delay", d, two_tap_profile(second_delay=d)) for d in cfg.second_tap_delays]

    base_seed = cfg.effective_seed
    rows = []
    if cfg.two_tap_mode == "grid":
        points = list(product(cfg.oscillator.lf_values, cfg.oscillator.lw_values))
        i = 0
        for pname, pval, profile in variants:
            for lf, lw in points:
                params = {pname: pval, "lf_dbc_hz": lf, "lw_dbc_hz": lw}
                t0 = time.perf_counter()
                try:
                    pll = cfg.oscillator.pll(lf, lw)
                except FeasibilityError:
                    rows.append(ResultRow(params, skipped=True, seed=base_seed + i, trials=cfg.trials))
                    i += 1
                    continue
                spec = point_spectrum(cfg.ofdm, pll)
                sic_cf, sic_mc = _evaluate_point(cfg, profile, cfg.cancellation, spec, base_seed + i)
                rows.append(
                    ResultRow(
                        params,
                        sic_cf_db=sic_cf,
                        sic_mc_db=sic_mc,
                        seed=base_seed + i,
                        trials=cfg.trials,
                        runtime_s=time.perf_counter() - t0,
                    )
                )
                i += 1
        names = [variants[0][0], "lf_dbc_hz", "lw_dbc_hz"]
        return ResultTable(names, rows, cfg.echo())

    # Contour mode: closed form only, root along l_w at each l_f.
    i = 0
    for pname, pval, profile in variants:
        for lf in cfg.oscillator.lf_values:
            params = {pname: pval, "lf_dbc_hz": lf}
            t0 = time.perf_counter()
            lw_at = _contour_lw(cfg, profile, lf, cfg.contour_target_db)
            if lw_at is None:
                rows.append(ResultRow(params, skipped=True, seed=base_seed + i, trials=cfg.trials))
            else:
                params = dict(params, lw_dbc_hz=lw_at)
                rows.append(
                    ResultRow(
                        params,
                        sic_cf_db=cfg.contour_target_db,
                        seed=base_seed + i,
                        trials=cfg.trials,
                        runtime_s=time.perf_counter() - t0,
                    )
                )
            i += 1
    names = [variants[0][0], "lf_dbc_hz", "lw_dbc_hz"]
    return ResultTable(names, rows, cfg.echo())


def _contour_lw(
    cfg: ExperimentConfig, profile: ChannelProfile, lf: float, target_db: float
) -> float | None:
    """l_w at which closed-form SIC crosses target_db, or None if outside."""
    osc = cfg.oscillator
    lo, hi = np.log10(osc.lw_offset_hz / osc.lf_offset_hz) * np.array([-30.0, -20.0]) + lf
    lo += 1e-9
    hi -= 1e-9  # stay strictly inside the feasibility band

    def sic_of(lw: float) -> float:
        spec = point_spectrum(cfg.ofdm, osc.pll(lf, float(lw)))
        return closed_form_sic(cfg.ofdm, profile, cfg.cancellation, spec)

    f_lo, f_hi = sic_of(lo) - target_db, sic_of(hi) - target_db
    if f_lo * f_hi > 0:
        return None
    return float(brentq(lambda lw: sic_of(lw) - target_db, lo, hi, xtol=1e-3))


def run_experiment(cfg: ExperimentConfig) -> ResultTable:
    """Evaluate the configured study; rows in deterministic parameter order."""
    osc = cfg.oscillator
    if cfg.kind == "single_point":
        return _oscillator_rows(cfg, [(osc.lf, osc.lw)], ["lf_dbc_hz", "lw_dbc_hz"])
    if cfg.kind == "grid_lf_lw":
        points = list(product(osc.lf_values, osc.lw_values))
        return _oscillator_rows(cfg, points, ["lf_dbc_hz", "lw_dbc_hz"])
    if cfg.kind == "curve_lf":
        points = [(lf, osc.lw) for lf in osc.lf_values]
        return _oscillator_rows(cfg, points, ["lf_dbc_hz", "lw_dbc_hz"])
    if cfg.kind == "curve_lw":
        points = [(osc.lf, lw) for lw in osc.lw_values]
        return _oscillator_rows(cfg, points, ["lf_dbc_hz", "lw_dbc_hz"])
    if cfg.kind == "curve_dlc":
        return _run_curve_dlc(cfg)
    return run_two_tap(cfg)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_table(table: ResultTable, path, output_format: str = "csv") -> None:
    """Write a result table as CSV or JSON; byte-stable for identical inputs.

    CSV columns: the swept parameters, then sic_cf_db, sic_mc_db, skipped,
    seed, trials.  Skipped rows carry empty sic fields.  JSON carries the
    same fields per row plus a config echo header.
    """
    if not table.rows:
        raise ValueError("refusing to emit an empty result table")
    if output_format == "csv":
        cols = list(table.param_names) + ["sic_cf_db", "sic_mc_db", "skipped", "seed", "trials"]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(cols)
            for row in table.rows:
                rec = [_fmt(row.params.get(p)) for p in table.param_names]
                rec += [
                    _fmt(row.sic_cf_db),
                    _fmt(row.sic_mc_db),
                    _fmt(row.skipped),
                    _fmt(row.seed),
                    _fmt(row.trials),
                ]
                writer.writerow(rec)
    elif output_format == "json":
        payload = {
            "config": table.config_echo,
            "rows": [
                {
                    **row.params,
                    "sic_cf_db": row.sic_cf_db,
                    "sic_mc_db": row.sic_mc_db,
                    "skipped": row.skipped,
                    "seed": row.seed,
                    "trials": row.trials,
                }
                for row in table.rows
            ],
        }
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    else:
        raise ValueError("output_format must be 'csv' or 'json'")
