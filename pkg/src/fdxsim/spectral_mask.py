"""SSB phase-noise masks, charge-pump PLL mask synthesis, and per-bin discretization.

A mask is a single-sideband (SSB) phase-noise density L(f) in dBc/Hz over
offset frequency, represented piecewise-linearly in (log10 f, dB).  Masks are
either loaded from tables or synthesized from charge-pump PLL (CHPLL)
oscillator measurement parameters.  ``bin_powers`` discretizes a mask onto a
DFT grid as two-sided per-bin phase powers in rad^2, which is the form the
phase-noise generator and the closed-form analysis both consume.

Convention: L(f) is SSB noise relative to carrier, so the two-sided phase PSD
at offset +/-f is 10^(L/10) rad^2/Hz and each of the two symmetric DFT bins
carries 10^(L/10)*delta_f.  Real phase noise generated from these bin powers
reproduces L(f) when measured as a one-sided periodogram re-expressed in
dBc/Hz (i.e. one-sided PSD / 2).
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SpectralMask",
    "PllParams",
    "BinPowerSpectrum",
    "FeasibilityError",
    "SmallPhaseWarning",
    "mask_from_table",
    "load_mask_csv",
    "save_mask_csv",
    "build_chpll_mask",
    "chpll_level",
    "vco_level",
    "reference_level",
    "default_loop_bandwidth",
    "feasible_lw_range",
    "bin_powers",
]

# Loop-bandwidth sanity range for PLL parameters, Hz.
LOOP_BW_MIN_HZ = 1e3
LOOP_BW_MAX_HZ = 1e6

# Fallback loop bandwidth when the reference and VCO curves never intersect
# (the usual case for a clean crystal reference): a typical wideband
# charge-pump loop.  Overridable via PllParams.loop_bandwidth_hz.
FALLBACK_LOOP_BW_HZ = 650e3

# Default emission grid for synthesized masks: one bin of the finest
# anticipated analysis grid up to half the default 15.36 MHz sample rate.
DEFAULT_MASK_FMIN_HZ = 100.0
DEFAULT_MASK_FMAX_HZ = 7.68e6

# Total phase variance above (0.1 rad)^2 leaves the regime where the
# small-phase linearization of the rotation spectrum is trustworthy.
SMALL_PHASE_VARIANCE_BOUND = 0.1 ** 2


class FeasibilityError(ValueError):
    """Oscillator measurement pair outside the physically consistent band."""


class SmallPhaseWarning(UserWarning):
    """Total phase variance exceeds the small-phase justification bound."""


@dataclass(frozen=True)
class SpectralMask:
    """Piecewise log-log SSB phase-noise mask.

    ``offsets_hz`` must be strictly increasing and positive; evaluation
    between breakpoints interpolates linearly in (log10 f, dB), and
    evaluation outside the breakpoint span extrapolates with the terminal
    segment's slope.
    """

    offsets_hz: np.ndarray
    levels_dbc_hz: np.ndarray

    def __post_init__(self):
        offs = np.atleast_1d(np.asarray(self.offsets_hz, dtype=float))
        levs = np.atleast_1d(np.asarray(self.levels_dbc_hz, dtype=float))
        if offs.ndim != 1 or offs.shape != levs.shape:
            raise ValueError("offsets and levels must be 1-D arrays of equal length")
        if offs.size < 2:
            raise ValueError("a mask needs at least 2 breakpoints")
        if not np.all(np.isfinite(offs)) or not np.all(offs > 0.0):
            raise ValueError("offsets must be finite and > 0")
        if not np.all(np.diff(offs) > 0.0):
            raise ValueError("offsets must be strictly increasing")
        if not np.all(np.isfinite(levs)):
            raise ValueError("levels must be finite")
        offs.setflags(write=False)
        levs.setflags(write=False)
        object.__setattr__(self, "offsets_hz", offs)
        object.__setattr__(self, "levels_dbc_hz", levs)

    def level_dbc_hz(self, f_hz):
        """Evaluate the mask at offset(s) ``f_hz`` (Hz), in dBc/Hz."""
        f = np.asarray(f_hz, dtype=float)
        if np.any(f <= 0.0):
            raise ValueError("offset frequencies must be > 0")
        logf = np.log10(f)
        logx = np.log10(self.offsets_hz)
        y = self.levels_dbc_hz
        out = np.interp(logf, logx, y)
        # np.interp clamps outside the span; continue the terminal slopes.
        lo = logf < logx[0]
        if np.any(lo):
            s0 = (y[1] - y[0]) / (logx[1] - logx[0])
            out = np.where(lo, y[0] + s0 * (logf - logx[0]), out)
        hi = logf > logx[-1]
        if np.any(hi):
            s1 = (y[-1] - y[-2]) / (logx[-1] - logx[-2])
            out = np.where(hi, y[-1] + s1 * (logf - logx[-1]), out)
        return out if out.ndim else float(out)

    def density(self, f_hz):
        """Mask in linear units, 10^(L/10), i.e. rad^2/Hz per sideband."""
        return 10.0 ** (np.asarray(self.level_dbc_hz(f_hz)) / 10.0)


def mask_from_table(points) -> SpectralMask:
    """Build a mask from an iterable of (offset_hz, level_dbc_hz) pairs.

    Requires at least two points with strictly increasing offsets.
    """
    pts = list(points)
    if len(pts) < 2:
        raise ValueError("mask table needs at least 2 points")
    offs = np.array([p[0] for p in pts], dtype=float)
    levs = np.array([p[1] for p in pts], dtype=float)
    return SpectralMask(offs, levs)


def load_mask_csv(path) -> SpectralMask:
    """Load a mask from a two-column CSV ``offset_hz,level_dbc_hz``.

    A header row is required; offsets must be ascending.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip().lower() for c in header[:2]] != ["offset_hz", "level_dbc_hz"]:
            raise ValueError(f"{path}: expected header 'offset_hz,level_dbc_hz'")
        rows = [(float(r[0]), float(r[1])) for r in reader if r]
    return mask_from_table(rows)


def save_mask_csv(mask: SpectralMask, path) -> None:
    """Write a mask's breakpoints as ``offset_hz,level_dbc_hz`` CSV."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["offset_hz", "level_dbc_hz"])
        for f, lv in zip(mask.offsets_hz, mask.levels_dbc_hz):
            writer.writerow([repr(float(f)), repr(float(lv))])


def feasible_lw_range(l_f: float, f_lf: float = 1e3, f_lw: float = 1e6) -> tuple[float, float]:
    """Allowed [min, max] thermal measurement l_w for a flicker measurement l_f.

    The flicker measurement must sit in the -30 dB/dec region and the thermal
    measurement in the -20 dB/dec region, i.e. the VCO corner frequency must
    lie between the two measurement offsets.  With the standard offsets
    (1 kHz, 1 MHz) this reduces to l_f - 90 <= l_w <= l_f - 60.
    """
    decades = np.log10(f_lw / f_lf)
    return (l_f - 30.0 * decades, l_f - 20.0 * decades)


@dataclass(frozen=True)
class PllParams:
    """Charge-pump PLL oscillator parameters from SSB measurements.

    l_f: VCO measurement in the flicker-dominated region (dBc/Hz) at offset
    f_lf; l_w: VCO measurement in the thermal-dominated region at offset
    f_lw; co_level: crystal reference level at 1 MHz offset.  The closed
    loop is second order with natural frequency loop_bandwidth_hz (derived
    from the curves when omitted, see ``default_loop_bandwidth``) and the
    given damping.
    """

    l_f: float
    l_w: float
    f_lf: float = 1e3
    f_lw: float = 1e6
    co_level: float = -160.0
    loop_bandwidth_hz: float | None = None
    damping: float = 0.707

    def __post_init__(self):
        if not (self.l_f < 0.0 and self.l_w < 0.0):
            raise ValueError("l_f and l_w must be negative (dBc/Hz)")
        if not (self.f_lf > 0.0 and self.f_lw > self.f_lf):
            raise ValueError("measurement offsets must satisfy 0 < f_lf < f_lw")
        lo, hi = feasible_lw_range(self.l_f, self.f_lf, self.f_lw)
        if self.l_w < lo:
            raise FeasibilityError(
                f"l_w={self.l_w} dBc/Hz below the flicker-slope bound "
                f"l_f - {30.0 * np.log10(self.f_lw / self.f_lf):.1f} dB = {lo:.2f} dBc/Hz"
            )
        if self.l_w > hi:
            raise FeasibilityError(
                f"l_w={self.l_w} dBc/Hz above the thermal-slope bound "
                f"l_f - {20.0 * np.log10(self.f_lw / self.f_lf):.1f} dB = {hi:.2f} dBc/Hz"
            )
        if self.loop_bandwidth_hz is not None and not (
            LOOP_BW_MIN_HZ <= self.loop_bandwidth_hz <= LOOP_BW_MAX_HZ
        ):
            raise ValueError(
                f"loop_bandwidth_hz must be within [{LOOP_BW_MIN_HZ:g}, {LOOP_BW_MAX_HZ:g}] Hz"
            )
        if not self.damping > 0.0:
            raise ValueError("damping must be > 0")

    @property
    def flicker_coeff(self) -> float:
        """K3 such that the flicker term is K3 / f^3 (linear units)."""
        return 10.0 ** (self.l_f / 10.0) * self.f_lf ** 3

    @property
    def thermal_coeff(self) -> float:
        """K2 such that the thermal term is K2 / f^2 (linear units)."""
        return 10.0 ** (self.l_w / 10.0) * self.f_lw ** 2


def vco_level(p: PllParams, f_hz):
    """Open-loop VCO SSB density, linear units: K3/f^3 + K2/f^2."""
    f = np.asarray(f_hz, dtype=float)
    return p.flicker_coeff / f ** 3 + p.thermal_coeff / f ** 2


def reference_level(p: PllParams, f_hz):
    """Crystal reference SSB density, linear units, -20 dB/dec through
    (1 MHz, co_level)."""
    f = np.asarray(f_hz, dtype=float)
    return 10.0 ** (p.co_level / 10.0) * (1e6 / f) ** 2


def default_loop_bandwidth(p: PllParams) -> float:
    """Resolve the loop natural frequency for a parameter set, in Hz.

    An explicit loop_bandwidth_hz wins.  Otherwise the bandwidth defaults to
    the offset where the reference curve crosses the VCO curve (put the loop
    edge where the quieter source changes).  For a clean crystal reference
    the VCO sits above the reference at every offset, so no crossover
    exists; a fixed wideband default is used then.  The result is clamped to
    [LOOP_BW_MIN_HZ, LOOP_BW_MAX_HZ].
    """
    if p.loop_bandwidth_hz is not None:
        return float(p.loop_bandwidth_hz)
    ref_coeff = 10.0 ** (p.co_level / 10.0) * 1e12  # reference = ref_coeff / f^2
    k2 = p.thermal_coeff
    if ref_coeff > k2:
        fn = p.flicker_coeff / (ref_coeff - k2)
    else:
        fn = FALLBACK_LOOP_BW_HZ
    return float(min(max(fn, LOOP_BW_MIN_HZ), LOOP_BW_MAX_HZ))


def _loop_gains(f_hz, fn_hz: float, damping: float):
    """|H_lp|^2 and |1 - H_lp|^2 of the second-order type-2 closed loop.

    H_lp(s) = (2*z*wn*s + wn^2) / (s^2 + 2*z*wn*s + wn^2); the complement is
    the s^2 highpass that shapes VCO noise.
    """
    s = 1j * 2.0 * np.pi * np.asarray(f_hz, dtype=float)
    wn = 2.0 * np.pi * fn_hz
    den = s * s + 2.0 * damping * wn * s + wn * wn
    h = (2.0 * damping * wn * s + wn * wn) / den
    e = s * s / den
    return np.abs(h) ** 2, np.abs(e) ** 2


def chpll_level(p: PllParams, f_hz):
    """Composite CHPLL output SSB density (linear units) at offset(s) f_hz.

    Reference noise is shaped by the closed-loop lowpass, VCO noise by the
    complementary highpass: L(f) = |H|^2 L_ref + |1-H|^2 L_vco.
    """
    fn = default_loop_bandwidth(p)
    h2, e2 = _loop_gains(f_hz, fn, p.damping)
    return h2 * reference_level(p, f_hz) + e2 * vco_level(p, f_hz)


def build_chpll_mask(
    p: PllParams,
    f_min_hz: float = DEFAULT_MASK_FMIN_HZ,
    f_max_hz: float = DEFAULT_MASK_FMAX_HZ,
    points_per_decade: int = 40,
) -> SpectralMask:
    """Synthesize the CHPLL output mask as log-spaced breakpoints.

    The grid spans [f_min_hz, f_max_hz] with at least ``points_per_decade``
    samples per decade (>= 20 enforced); the continuous curve is evaluated by
    ``chpll_level`` and the returned mask interpolates it in log-log.
    """
    if not (0.0 < f_min_hz < f_max_hz):
        raise ValueError("need 0 < f_min_hz < f_max_hz")
    ppd = max(int(points_per_decade), 20)
    decades = np.log10(f_max_hz / f_min_hz)
    count = max(int(np.ceil(ppd * decades)) + 1, 2)
    f = np.logspace(np.log10(f_min_hz), np.log10(f_max_hz), count)
    levels = 10.0 * np.log10(chpll_level(p, f))
    return SpectralMask(f, levels)


@dataclass(frozen=True)
class BinPowerSpectrum:
    """Two-sided per-DFT-bin phase powers (rad^2) on an n-point grid.

    Bin 0 is forced to zero: the common rotation it would carry is modeled
    as part of the channel, not of the oscillator process.  Bins k and n-k
    hold equal power (real phase process).
    """

    n: int
    bin_powers: np.ndarray
    sample_rate_hz: float

    def __post_init__(self):
        bp = np.asarray(self.bin_powers, dtype=float)
        if self.n < 8:
            raise ValueError("DFT length must be >= 8")
        if bp.shape != (self.n,):
            raise ValueError("bin_powers must have shape (n,)")
        if self.sample_rate_hz <= 0.0:
            raise ValueError("sample_rate_hz must be > 0")
        if not np.all(np.isfinite(bp)) or np.any(bp < 0.0):
            raise ValueError("bin powers must be finite and >= 0")
        if bp[0] != 0.0:
            raise ValueError("bin 0 must carry zero power")
        if not np.allclose(bp[1:], bp[1:][::-1], rtol=1e-12, atol=0.0):
            raise ValueError("bin powers must satisfy bp[k] == bp[n-k]")
        total = float(bp.sum())
        if total > SMALL_PHASE_VARIANCE_BOUND:
            warnings.warn(
                f"total phase variance {total:.3e} rad^2 exceeds the small-phase "
                f"bound {SMALL_PHASE_VARIANCE_BOUND:.3e} rad^2; linearized results "
                "become approximate",
                SmallPhaseWarning,
                stacklevel=2,
            )
        bp.setflags(write=False)
        object.__setattr__(self, "bin_powers", bp)

    @property
    def delta_f_hz(self) -> float:
        return self.sample_rate_hz / self.n

    @property
    def total_variance(self) -> float:
        """Expected sample variance of the generated phase process, rad^2."""
        return float(self.bin_powers.sum())

    @classmethod
    def zero(cls, n: int, sample_rate_hz: float) -> "BinPowerSpectrum":
        """The noiseless spectrum (ideal oscillator)."""
        return cls(n, np.zeros(n), sample_rate_hz)


def bin_powers(mask: SpectralMask, n: int, sample_rate_hz: float) -> BinPowerSpectrum:
    """Discretize a mask onto an n-point DFT grid at the given sample rate.

    For 1 <= k <= n/2 each of the symmetric bins k and n-k receives
    10^(L(k*delta_f)/10) * delta_f rad^2, so the pair jointly carries the
    double-sideband power of that offset; bin 0 carries nothing.
    """
    if n < 8:
        raise ValueError("DFT length must be >= 8")
    if sample_rate_hz <= 0.0:
        raise ValueError("sample_rate_hz must be > 0")
    df = sample_rate_hz / n
    half = n // 2
    k = np.arange(1, half + 1)
    per_bin = mask.density(k * df) * df
    bp = np.zeros(n)
    bp[1 : half + 1] = per_bin
    bp[half + 1 :] = per_bin[: (n - 1) - half][::-1]
    return BinPowerSpectrum(n, bp, sample_rate_hz)
