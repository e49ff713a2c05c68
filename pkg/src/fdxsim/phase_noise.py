"""Generation of real phase-noise blocks matching a per-bin power spectrum.

Blocks are produced the mask-shaping way: draw circular complex Gaussian
frequency-domain coefficients with Hermitian symmetry and per-bin variance
prescribed by a ``BinPowerSpectrum``, then inverse-DFT to a real block.  With
the unitary inverse transform and coefficient variance bin_powers[k] * n, the
resulting sample variance equals the spectrum's total variance and the
averaged per-bin periodogram reproduces bin_powers.

Reproducibility: block b of master seed s is drawn from the RNG stream
``numpy.random.SeedSequence(s, spawn_key=(b,))`` with a fixed draw order
(real parts, imaginary parts, Nyquist), so any subset of blocks can be
generated in any order, in parallel, with identical results.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .spectral_mask import BinPowerSpectrum

__all__ = [
    "PhaseNoiseBlock",
    "generate",
    "mix_up",
    "mix_down",
    "save_block_csv",
]


@dataclass(frozen=True)
class PhaseNoiseBlock:
    """One block of real phase samples phi_n (radians)."""

    samples: np.ndarray
    sample_rate_hz: float
    seed_label: str

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.ndim != 1:
            raise ValueError("samples must be 1-D")
        if not np.all(np.isfinite(s)):
            raise ValueError("samples must be finite")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    def __len__(self) -> int:
        return self.samples.size


def draw_phase_matrix(spec: BinPowerSpectrum, count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``count`` independent phase blocks as a (count, n) float array.

    Single RNG stream, fixed draw order.  This is the vectorized core used
    both by ``generate`` (one call per block) and by the Monte Carlo engine
    (one call per trial).
    """
    n = spec.n
    half = n // 2
    bp = spec.bin_powers
    coeff = np.zeros((count, n), dtype=complex)
    # Independent bins 1 .. ceil(n/2)-1, conjugate-mirrored to n-k.
    top = half if n % 2 == 0 else half + 1
    zr = rng.standard_normal((count, top - 1))
    zi = rng.standard_normal((count, top - 1))
    coeff[:, 1:top] = (zr + 1j * zi) * np.sqrt(bp[1:top] * n / 2.0)
    if n % 2 == 0:
        # Real Nyquist bin.
        coeff[:, half] = rng.standard_normal(count) * np.sqrt(bp[half] * n)
    coeff[:, top + (1 if n % 2 == 0 else 0):] = np.conj(coeff[:, 1:top][:, ::-1])
    return np.fft.ifft(coeff, axis=1, norm="ortho").real


def generate(spec: BinPowerSpectrum, block_count: int, seed: int) -> list[PhaseNoiseBlock]:
    """Generate ``block_count`` mutually independent phase-noise blocks.

    Block i depends only on (seed, i); see the module docstring for the
    substream scheme.
    """
    if block_count < 1:
        raise ValueError("block_count must be >= 1")
    blocks = []
    for b in range(block_count):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(b,)))
        samples = draw_phase_matrix(spec, 1, rng)[0]
        blocks.append(
            PhaseNoiseBlock(samples, spec.sample_rate_hz, seed_label=f"seed={seed}/block={b}")
        )
    return blocks


def _as_phase_array(phi) -> np.ndarray:
    if isinstance(phi, PhaseNoiseBlock):
        return phi.samples
    return np.asarray(phi, dtype=float)


def mix_up(x, phi) -> np.ndarray:
    """Upconversion rotation: elementwise x_n * exp(+j phi_n)."""
    xa = np.asarray(x, dtype=complex)
    pa = _as_phase_array(phi)
    if xa.shape[-1] != pa.shape[-1]:
        raise ValueError(f"length mismatch: {xa.shape[-1]} samples vs {pa.shape[-1]} phases")
    return xa * np.exp(1j * pa)


def mix_down(r, phi) -> np.ndarray:
    """Downconversion rotation: elementwise r_n * exp(-j phi_n)."""
    ra = np.asarray(r, dtype=complex)
    pa = _as_phase_array(phi)
    if ra.shape[-1] != pa.shape[-1]:
        raise ValueError(f"length mismatch: {ra.shape[-1]} samples vs {pa.shape[-1]} phases")
    return ra * np.exp(-1j * pa)


def save_block_csv(block: PhaseNoiseBlock, path) -> None:
    """Dump one block as a debug CSV with columns ``n,phi_rad``."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "phi_rad"])
        for i, v in enumerate(block.samples):
            writer.writerow([i, repr(float(v))])
