"""Self-interference path model and Monte Carlo measurement.

The chain: the transmitted OFDM stream is rotated by the oscillator phase,
couples back through a short tapped-delay-line channel whose direct tap is
attenuated by the antenna separation, is partially removed by a statistical
analog canceller (ALC) acting on the direct tap, rotated back by the same
oscillator phase at the receiver, and finally has a digital replica (DLC)
subtracted.  Because one oscillator feeds both mixers, the direct tap's
rotation cancels identically; only delayed taps see a residual rotation.

Cancellation is modeled statistically: ALC replaces the direct tap with a
complex Gaussian residual sized so the expected post-ALC power matches the
requested whole-signal suppression; DLC perturbs each tap estimate with
complex Gaussian error splitting the requested residual equally across taps.
The digital replica uses estimates scaled by the per-symbol per-tap common
rotation (the DC term of the effective oscillator rotation), modeling channel
estimation that tracks the common phase error.

Powers reported in a ``SicReport`` are per OFDM symbol body: the input power
is measured against the physical channel (antenna separation included, ALC
excluded), the residual on the active bins after both cancellers, so the
reported ratio isolates the ALC+DLC effect.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass
from typing import Union

import numpy as np

from .ofdm_baseband import OfdmConfig, draw_grid
from .phase_noise import draw_phase_matrix
from .spectral_mask import BinPowerSpectrum

__all__ = [
    "ChannelProfile",
    "CancellationConfig",
    "ChannelRealization",
    "SicReport",
    "InfeasibleAlcError",
    "IDEAL",
    "default_profile",
    "two_tap_profile",
    "max_alc_db",
    "draw_channel",
    "apply_alc",
    "apply_dlc",
    "expected_post_alc_power",
    "expected_post_alc_gains",
    "expected_est_err_gains",
    "realize_channel",
    "run_monte_carlo",
]

# Sentinel for a perfect cancellation stage.
IDEAL = "ideal"

Level = Union[float, str]


class InfeasibleAlcError(ValueError):
    """Requested ALC exceeds what first-tap-only cancellation can reach."""

    def __init__(self, requested_db: float, max_db: float):
        self.requested_db = requested_db
        self.max_db = max_db
        super().__init__(
            f"ALC level {requested_db:.2f} dB is infeasible: cancelling only the "
            f"direct tap bounds the whole-signal suppression at {max_db:.2f} dB"
        )


@dataclass(frozen=True)
class ChannelProfile:
    """Coupling channel taps: (delay_samples, gain_db) plus antenna separation.

    Delays are strictly increasing with the first at 0; the separation
    attenuates only the direct (0-delay) tap.
    """

    delays: tuple
    gains_db: tuple
    antenna_separation_db: float = 30.0

    def __post_init__(self):
        delays = tuple(int(d) for d in self.delays)
        gains = tuple(float(g) for g in self.gains_db)
        if len(delays) != len(gains) or not delays:
            raise ValueError("delays and gains_db must be non-empty and aligned")
        if delays[0] != 0:
            raise ValueError("first tap delay must be 0")
        if any(b <= a for a, b in zip(delays, delays[1:])):
            raise ValueError("delays must be strictly increasing")
        object.__setattr__(self, "delays", delays)
        object.__setattr__(self, "gains_db", gains)

    @property
    def n_taps(self) -> int:
        return len(self.delays)

    @property
    def max_delay(self) -> int:
        return self.delays[-1]

    def effective_gains(self) -> np.ndarray:
        """Linear per-tap powers with the separation applied to tap 0."""
        g = 10.0 ** (np.asarray(self.gains_db) / 10.0)
        g[0] *= 10.0 ** (-self.antenna_separation_db / 10.0)
        return g

    @property
    def total_power(self) -> float:
        return float(self.effective_gains().sum())

    @property
    def tail_power(self) -> float:
        """Power in all taps except the direct one."""
        return float(self.effective_gains()[1:].sum())

    @classmethod
    def from_csv(cls, path, antenna_separation_db: float = 30.0) -> "ChannelProfile":
        """Load taps from a CSV with header ``delay_samples,gain_db``."""
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [c.strip().lower() for c in header[:2]] != [
                "delay_samples",
                "gain_db",
            ]:
                raise ValueError(f"{path}: expected header 'delay_samples,gain_db'")
            rows = [(int(r[0]), float(r[1])) for r in reader if r]
        return cls(
            tuple(r[0] for r in rows),
            tuple(r[1] for r in rows),
            antenna_separation_db=antenna_separation_db,
        )

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["delay_samples", "gain_db"])
            for d, g in zip(self.delays, self.gains_db):
                writer.writerow([d, repr(float(g))])


def default_profile(antenna_separation_db: float = 30.0) -> ChannelProfile:
    """Measured-style short coupling channel: 0/-65/-70/-75 dB at 0/1/2/4."""
    return ChannelProfile((0, 1, 2, 4), (0.0, -65.0, -70.0, -75.0), antenna_separation_db)


def two_tap_profile(
    second_gain_db: float = -65.0,
    second_delay: int = 1,
    antenna_separation_db: float = 30.0,
) -> ChannelProfile:
    """Elementary two-tap channel used for design studies."""
    return ChannelProfile((0, int(second_delay)), (0.0, second_gain_db), antenna_separation_db)


@dataclass(frozen=True)
class CancellationConfig:
    """ALC/DLC settings: a suppression level in dB, or IDEAL for a perfect stage."""

    alc: Level = 30.0
    dlc: Level = 70.0

    def __post_init__(self):
        for name, v in (("alc", self.alc), ("dlc", self.dlc)):
            if isinstance(v, str):
                if v != IDEAL:
                    raise ValueError(f"{name} must be a positive dB level or '{IDEAL}'")
            elif not v > 0.0:
                raise ValueError(f"{name} level must be > 0 dB")

    @property
    def alc_ideal(self) -> bool:
        return self.alc == IDEAL

    @property
    def dlc_ideal(self) -> bool:
        return self.dlc == IDEAL


@dataclass(frozen=True)
class ChannelRealization:
    """One draw of the post-ALC channel and its DLC estimate."""

    delays: tuple
    h_alc: np.ndarray
    h_hat: np.ndarray

    def __post_init__(self):
        if self.h_alc.shape != self.h_hat.shape or self.h_alc.shape != (len(self.delays),):
            raise ValueError("h_alc and h_hat must align with delays")


@dataclass(frozen=True)
class SicReport:
    """Monte Carlo (or closed-form) self-interference accounting.

    p_in / p_res are mean powers per OFDM symbol body; per_bin_residual holds
    the residual on the active bins (zero elsewhere) and sums to p_res.
    """

    p_in: float
    per_bin_residual: np.ndarray
    n_symbols: int
    trials: int
    seed: int | None = None
    elapsed_s: float = 0.0

    @property
    def p_res(self) -> float:
        return float(self.per_bin_residual.sum())

    @property
    def sic_db(self) -> float:
        if self.p_res == 0.0:
            return float("inf")
        return 10.0 * np.log10(self.p_in / self.p_res)


def max_alc_db(profile: ChannelProfile) -> float:
    """Whole-signal suppression bound when only the direct tap is cancelled."""
    tail = profile.tail_power
    if tail == 0.0:
        return float("inf")
    return 10.0 * np.log10(profile.total_power / tail)


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def draw_channel(profile: ChannelProfile, seed, count: int | None = None) -> np.ndarray:
    """Draw channel taps h_m = sqrt(g_m) * exp(j*theta_m), theta uniform.

    Uncorrelated-scattering model: phases i.i.d. uniform on [0, 2pi) across
    taps (and draws), magnitudes fixed by the profile.  Returns shape (M,) or
    (count, M).
    """
    rng = _as_rng(seed)
    amps = np.sqrt(profile.effective_gains())
    shape = (profile.n_taps,) if count is None else (count, profile.n_taps)
    theta = rng.uniform(0.0, 2.0 * np.pi, shape)
    return amps * np.exp(1j * theta)


def expected_post_alc_power(profile: ChannelProfile, alc: Level) -> float:
    """Expected total channel power after ALC at the given level."""
    if alc == IDEAL:
        return profile.tail_power
    limit = max_alc_db(profile)
    if float(alc) > limit:
        raise InfeasibleAlcError(float(alc), limit)
    return profile.total_power * 10.0 ** (-float(alc) / 10.0)


def expected_post_alc_gains(profile: ChannelProfile, alc: Level) -> np.ndarray:
    """Expected per-tap powers after ALC: residual on tap 0, tail unchanged."""
    g = profile.effective_gains()
    g[0] = expected_post_alc_power(profile, alc) - profile.tail_power
    # Guard against cancellation at the exact feasibility edge.
    g[0] = max(g[0], 0.0)
    return g


def expected_est_err_gains(profile: ChannelProfile, canc: CancellationConfig) -> np.ndarray:
    """Expected per-tap DLC estimation-error powers (equal split)."""
    if canc.dlc_ideal:
        return np.zeros(profile.n_taps)
    p_post = expected_post_alc_power(profile, canc.alc)
    per_tap = p_post * 10.0 ** (-float(canc.dlc) / 10.0) / profile.n_taps
    return np.full(profile.n_taps, per_tap)


def apply_alc(h: np.ndarray, alc: Level, seed) -> np.ndarray:
    """Replace the direct tap with the statistical ALC residual.

    ``ideal`` zeroes tap 0.  A level A (dB, defined on the whole signal)
    replaces tap 0 with a circular complex Gaussian of power
    P_tot*10^(-A/10) - P_tail, so the expected post-ALC power is the
    requested fraction of the total.  Raises InfeasibleAlcError when the
    tail alone already exceeds the target.
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim != 1:
        raise ValueError("h must be a 1-D tap array")
    out = h.copy()
    if alc == IDEAL:
        out[0] = 0.0
        return out
    p_tot = float(np.sum(np.abs(h) ** 2))
    p_tail = float(np.sum(np.abs(h[1:]) ** 2))
    limit = 10.0 * np.log10(p_tot / p_tail) if p_tail > 0 else float("inf")
    if float(alc) > limit:
        raise InfeasibleAlcError(float(alc), limit)
    p_res = max(p_tot * 10.0 ** (-float(alc) / 10.0) - p_tail, 0.0)
    rng = _as_rng(seed)
    noise = complex(rng.standard_normal() + 1j * rng.standard_normal())
    out[0] = noise * np.sqrt(p_res / 2.0)
    return out


def apply_dlc(
    h_alc: np.ndarray,
    dlc: Level,
    seed,
    expected_power: float | None = None,
) -> np.ndarray:
    """Produce the DLC channel estimate: h_alc plus per-tap Gaussian error.

    The target residual Sigma|h_alc - h_hat|^2 equals P*10^(-D/10) in
    expectation, split equally over the taps.  P defaults to the realized
    post-ALC power of ``h_alc``; pass ``expected_power`` to use the ensemble
    value instead (the Monte Carlo engine does, to match the closed form
    exactly).
    """
    h_alc = np.asarray(h_alc, dtype=complex)
    if dlc == IDEAL:
        return h_alc.copy()
    n_taps = h_alc.shape[-1]
    p_post = float(np.sum(np.abs(h_alc) ** 2)) if expected_power is None else expected_power
    per_tap = p_post * 10.0 ** (-float(dlc) / 10.0) / n_taps
    rng = _as_rng(seed)
    err = rng.standard_normal(h_alc.shape) + 1j * rng.standard_normal(h_alc.shape)
    return h_alc + err * np.sqrt(per_tap / 2.0)


def realize_channel(profile: ChannelProfile, canc: CancellationConfig, seed) -> ChannelRealization:
    """Draw one channel realization through both cancellation stages."""
    rng = _as_rng(seed)
    h = draw_channel(profile, rng)
    h_alc = apply_alc(h, canc.alc, rng)
    h_hat = apply_dlc(h_alc, canc.dlc, rng, expected_power=expected_post_alc_power(profile, canc.alc))
    return ChannelRealization(profile.delays, h_alc, h_hat)


def _draw_realizations(
    profile: ChannelProfile,
    canc: CancellationConfig,
    rng: np.random.Generator,
    count: int,
):
    """Vectorized (count, M) draws of physical channel, post-ALC channel,
    and DLC estimate, with the same statistics as the scalar operations."""
    m = profile.n_taps
    h_phys = draw_channel(profile, rng, count=count)
    h_alc = h_phys.copy()
    p_post = expected_post_alc_power(profile, canc.alc)
    if canc.alc_ideal:
        h_alc[:, 0] = 0.0
    else:
        p_res = max(p_post - profile.tail_power, 0.0)
        z = rng.standard_normal(count) + 1j * rng.standard_normal(count)
        h_alc[:, 0] = z * np.sqrt(p_res / 2.0)
    if canc.dlc_ideal:
        h_hat = h_alc.copy()
    else:
        per_tap = p_post * 10.0 ** (-float(canc.dlc) / 10.0) / m
        e = rng.standard_normal((count, m)) + 1j * rng.standard_normal((count, m))
        h_hat = h_alc + e * np.sqrt(per_tap / 2.0)
    return h_phys, h_alc, h_hat


def run_monte_carlo(
    cfg: OfdmConfig,
    profile: ChannelProfile,
    canc: CancellationConfig,
    spec: BinPowerSpectrum | None,
    seed: int = 0,
    trials: int = 50,
    redraw: str = "per_symbol",
) -> SicReport:
    """Measure achieved cancellation of the full chain by simulation.

    Per trial (substream ``SeedSequence(seed, spawn_key=(trial,))``, fixed
    draw order): draw a data grid, per-symbol phase blocks, channel and
    cancellation realizations; run the chain; accumulate residual per active
    bin.  ``redraw`` selects whether channel/ALC/DLC realizations are redrawn
    every symbol (default; the estimator then averages over the channel
    ensemble the way the closed form does) or held fixed within a trial.

    The phase spectrum's grid must match the OFDM config; ``spec=None`` means
    a noiseless oscillator.  Simulation uses per-symbol phase blocks aligned
    to the symbol body, with the cyclic prefix carrying the block's circular
    extension; since cp_len >= the channel delay spread, the per-symbol
    circular convolution computed here is sample-exact equal to linear
    convolution of the CP-extended stream followed by CP stripping.
    """
    n = cfg.n_subcarriers
    if spec is None:
        spec = BinPowerSpectrum.zero(n, cfg.sample_rate_hz)
    if spec.n != n:
        raise ValueError(f"spectrum grid n={spec.n} != n_subcarriers={n}")
    if abs(spec.sample_rate_hz - cfg.sample_rate_hz) > 1e-6 * cfg.sample_rate_hz:
        raise ValueError("spectrum sample rate does not match the OFDM config")
    if profile.max_delay > cfg.cp_len:
        raise ValueError(
            f"channel delay spread {profile.max_delay} exceeds cp_len {cfg.cp_len}"
        )
    if redraw not in ("per_symbol", "per_trial"):
        raise ValueError("redraw must be 'per_symbol' or 'per_trial'")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    # Validates feasibility up front (raises InfeasibleAlcError).
    expected_post_alc_power(profile, canc.alc)

    t0 = time.perf_counter()
    active = cfg.active_mask()
    nsym = cfg.n_symbols
    noiseless = spec.total_variance == 0.0
    p_in_acc = 0.0
    res_acc = np.zeros(n)

    for trial in range(trials):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial,)))
        # Draw order: data grid, phase blocks, channel/ALC/DLC realizations.
        grid = draw_grid(cfg, rng)
        x = np.fft.ifft(grid.x, axis=1, norm="ortho")
        phi = None if noiseless else draw_phase_matrix(spec, nsym, rng)
        count = nsym if redraw == "per_symbol" else 1
        h_phys, h_alc, h_hat = _draw_realizations(profile, canc, rng, count)
        if count == 1:
            h_phys = np.broadcast_to(h_phys, (nsym, profile.n_taps))
            h_alc = np.broadcast_to(h_alc, (nsym, profile.n_taps))
            h_hat = np.broadcast_to(h_hat, (nsym, profile.n_taps))

        s = x if noiseless else x * np.exp(1j * phi)
        r_phys = np.zeros_like(x)
        r_alc = np.zeros_like(x)
        replica = np.zeros_like(x)
        for i, m in enumerate(profile.delays):
            s_m = s if m == 0 else np.roll(s, m, axis=1)
            x_m = x if m == 0 else np.roll(x, m, axis=1)
            r_phys += h_phys[:, i : i + 1] * s_m
            r_alc += h_alc[:, i : i + 1] * s_m
            if noiseless or m == 0:
                c_m = 1.0 if noiseless else np.ones(nsym)
            else:
                # Per-symbol per-tap common rotation tracked by the estimator.
                c_m = np.mean(np.exp(1j * (np.roll(phi, m, axis=1) - phi)), axis=1)
            replica += (h_hat[:, i] * c_m)[:, None] * x_m
        y = r_alc if noiseless else r_alc * np.exp(-1j * phi)
        v = y - replica
        vk = np.fft.fft(v, axis=1, norm="ortho")

        p_in_acc += float(np.sum(np.abs(r_phys) ** 2))
        pb = np.sum(np.abs(vk) ** 2, axis=0)
        pb[~active] = 0.0
        res_acc += pb

    n_total = trials * nsym
    return SicReport(
        p_in=p_in_acc / n_total,
        per_bin_residual=res_acc / n_total,
        n_symbols=nsym,
        trials=trials,
        seed=seed,
        elapsed_s=time.perf_counter() - t0,
    )
