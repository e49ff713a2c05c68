"""Closed-form residual self-interference analysis.

Core quantity: the length-N DFT of the effective oscillator rotation a
delayed tap sees when one oscillator feeds both mixers,

    R_{k,m} = (1/N) sum_n exp(j(phi_{n-m} - phi_n)) exp(-j 2 pi k n / N),

with circular delay indexing.  In the small-phase regime its expected bin
powers collapse to a two-term closed form driven only by the phase-noise
bin powers, and the per-subcarrier residual after both cancellation stages
becomes an explicit double sum: a channel-estimation-error term on the bin
itself plus inter-carrier leakage weighted by the delayed-rotation powers.
Everything here is exact arithmetic on expectations; the Monte Carlo chain
in ``si_chain`` is the cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .phase_noise import PhaseNoiseBlock
from .spectral_mask import BinPowerSpectrum

__all__ = [
    "ResidualSpectrum",
    "rotation_dft",
    "linearized_rotation_dft",
    "expected_rotation_power",
    "expected_si_power",
    "total_sic",
]


@dataclass(frozen=True)
class ResidualSpectrum:
    """Expected residual self-interference power per output bin."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1:
            raise ValueError("values must be 1-D")
        if np.any(v < 0.0) or not np.all(np.isfinite(v)):
            raise ValueError("residual powers must be finite and >= 0")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def total(self) -> float:
        return float(self.values.sum())

    def restrict(self, mask) -> "ResidualSpectrum":
        """Zero the residual outside ``mask`` (e.g. keep active bins only)."""
        m = np.asarray(mask, dtype=bool)
        if m.shape != self.values.shape:
            raise ValueError("mask shape mismatch")
        return ResidualSpectrum(np.where(m, self.values, 0.0))


def _phase_samples(phi) -> np.ndarray:
    if isinstance(phi, PhaseNoiseBlock):
        return phi.samples
    return np.asarray(phi, dtype=float)


def rotation_dft(phi, delay: int, bin_index: int | None = None):
    """DFT of the delayed-minus-direct oscillator rotation, exact form.

    Returns the full length-N array for ``bin_index=None``, otherwise the
    single complex coefficient.  Delay indexing is circular within the
    block, matching the cyclic-prefix signal model.
    """
    p = _phase_samples(phi)
    n = p.size
    m = int(delay) % n
    rot = np.exp(1j * (np.roll(p, m) - p))
    coeffs = np.fft.fft(rot) / n
    if bin_index is None:
        return coeffs
    return complex(coeffs[int(bin_index) % n])


def linearized_rotation_dft(phi, delay: int, bin_index: int | None = None):
    """Small-phase form: identity plus the DFT of the phase difference."""
    p = _phase_samples(phi)
    n = p.size
    m = int(delay) % n
    diff = np.roll(p, m) - p
    coeffs = (1j * np.fft.fft(diff) / n).astype(complex)
    coeffs[0] += 1.0
    if bin_index is None:
        return coeffs
    return complex(coeffs[int(bin_index) % n])


def expected_rotation_power(spec: BinPowerSpectrum, bin_index, delay) -> np.ndarray | float:
    """E[|R_{k,m}|^2] in the small-phase regime.

    For k != 0:  2 * bin_powers[k] * (1 - cos(2 pi k m / N)).
    For k == 0:  1.0 -- the common per-symbol rotation is carried by the
    channel estimate, so the signal path sees a unit coefficient there.
    Accepts scalars or arrays for both arguments (broadcasting).
    """
    k = np.asarray(bin_index, dtype=int) % spec.n
    m = np.asarray(delay, dtype=int)
    power = 2.0 * spec.bin_powers[k] * (1.0 - np.cos(2.0 * np.pi * k * m / spec.n))
    out = np.where(k == 0, 1.0, power)
    return out if out.ndim else float(out)


def expected_si_power(
    spec: BinPowerSpectrum,
    delays,
    residual_gains,
    est_err_gains,
    subcarrier_powers,
    cosine_index: str = "difference",
) -> ResidualSpectrum:
    """Expected per-bin residual self-interference power after ALC + DLC.

    Parameters
    ----------
    spec : BinPowerSpectrum
        Oscillator phase-noise bin powers on the analysis grid.
    delays, residual_gains, est_err_gains : array-like, aligned
        Per-tap sample delays m, expected post-ALC tap powers
        E|h_m|^2, and expected estimation-error powers E|h_m - h_hat_m|^2.
    subcarrier_powers : array-like, length N
        Average data power per bin (1 on active bins, 0 on nulls).
    cosine_index : "difference" or "output"
        Which bin index drives the leakage weight's cosine.  "difference"
        (the bin offset k-l, consistent with the delayed-rotation spectrum
        and validated against simulation) is the supported form; "output"
        evaluates the cosine at the output bin k and exists only as a
        diagnostic.

    The per-bin result is

        E|I_k|^2 = sum_m ( sigma_k^2 * e_m
                   + 2 g_m sum_{l != k} sigma_l^2 * bp[(k-l) mod N]
                     * (1 - cos(2 pi (k-l) m / N)) )

    evaluated for every k via circular convolution.
    """
    delays = np.asarray(delays, dtype=int)
    g = np.asarray(residual_gains, dtype=float)
    e = np.asarray(est_err_gains, dtype=float)
    sig2 = np.asarray(subcarrier_powers, dtype=float)
    if not (delays.shape == g.shape == e.shape):
        raise ValueError("delays, residual_gains and est_err_gains must align")
    if sig2.shape != (spec.n,):
        raise ValueError(f"subcarrier_powers must have length {spec.n}")
    if cosine_index not in ("difference", "output"):
        raise ValueError("cosine_index must be 'difference' or 'output'")

    n = spec.n
    d = np.arange(n)
    bp = spec.bin_powers
    sig2_f = np.fft.fft(sig2)
    out = sig2 * e.sum()
    for m, gm in zip(delays, g):
        if m == 0 or gm == 0.0:
            continue  # the direct tap's rotation cancels identically
        if cosine_index == "difference":
            w = 2.0 * bp * (1.0 - np.cos(2.0 * np.pi * d * m / n))
            out = out + gm * np.fft.ifft(sig2_f * np.fft.fft(w)).real
        else:
            leak = np.fft.ifft(sig2_f * np.fft.fft(2.0 * bp)).real
            out = out + gm * (1.0 - np.cos(2.0 * np.pi * d * m / n)) * leak
    # Convolution round-off can leave tiny negatives on empty bins.
    return ResidualSpectrum(np.maximum(out, 0.0))


def total_sic(res: ResidualSpectrum, p_in: float) -> float:
    """Aggregate cancellation in dB: 10*log10(p_in / total residual).

    Zero residual reports +inf.
    """
    if not p_in > 0.0:
        raise ValueError("p_in must be > 0")
    if res.total == 0.0:
        return float("inf")
    return float(10.0 * np.log10(p_in / res.total))
