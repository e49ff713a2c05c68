"""LTE-like OFDM frame generation and transforms.

Unitary DFT scaling in both directions, so per-symbol time power equals
subcarrier power exactly (Parseval) and power ratios computed in either
domain agree.  The default layout matches a 10 MHz LTE downlink: 1024
subcarriers at 15.36 MHz sampling, 300 active on each side of a null DC bin,
63-sample cyclic prefix, 16QAM data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["OfdmConfig", "SubcarrierGrid", "draw_grid", "modulate", "demodulate"]

_QAM_ORDERS = (4, 16, 64)


@dataclass(frozen=True)
class OfdmConfig:
    n_subcarriers: int = 1024
    cp_len: int = 63
    active_per_side: int = 300
    sample_rate_hz: float = 15.36e6
    qam_order: int = 16
    n_symbols: int = 200

    def __post_init__(self):
        if self.n_subcarriers < 8:
            raise ValueError("n_subcarriers must be >= 8")
        if not 0 <= self.cp_len < self.n_subcarriers:
            raise ValueError("cp_len must be in [0, n_subcarriers)")
        if not 0 < 2 * self.active_per_side < self.n_subcarriers:
            raise ValueError("2*active_per_side must be < n_subcarriers")
        if self.qam_order not in _QAM_ORDERS:
            raise ValueError(f"qam_order must be one of {_QAM_ORDERS}")
        if self.sample_rate_hz <= 0.0:
            raise ValueError("sample_rate_hz must be > 0")
        if self.n_symbols < 1:
            raise ValueError("n_symbols must be >= 1")

    @property
    def symbol_len(self) -> int:
        return self.n_subcarriers + self.cp_len

    @property
    def subcarrier_spacing_hz(self) -> float:
        return self.sample_rate_hz / self.n_subcarriers

    def active_mask(self) -> np.ndarray:
        """Boolean mask of active bins: +/-1 .. +/-active_per_side, DC null."""
        n, a = self.n_subcarriers, self.active_per_side
        mask = np.zeros(n, dtype=bool)
        mask[1 : a + 1] = True
        mask[n - a :] = True
        return mask

    def subcarrier_powers(self) -> np.ndarray:
        """Per-bin average data power: 1 on active bins, 0 on nulls."""
        return self.active_mask().astype(float)


@dataclass(frozen=True)
class SubcarrierGrid:
    """Frequency-domain data symbols, shape (n_symbols, n_subcarriers)."""

    x: np.ndarray
    active: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=complex)
        act = np.asarray(self.active, dtype=bool)
        if x.ndim != 2 or act.shape != (x.shape[1],):
            raise ValueError("x must be (n_symbols, n) with a length-n active mask")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "active", act)

    @property
    def n_symbols(self) -> int:
        return self.x.shape[0]

    @property
    def n_subcarriers(self) -> int:
        return self.x.shape[1]


def qam_alphabet(order: int) -> np.ndarray:
    """Square QAM constellation scaled to unit average power."""
    if order not in _QAM_ORDERS:
        raise ValueError(f"qam_order must be one of {_QAM_ORDERS}")
    side = int(round(np.sqrt(order)))
    levels = 2 * np.arange(side) - (side - 1)  # -3,-1,1,3 for 16QAM
    pts = (levels[:, None] + 1j * levels[None, :]).ravel()
    return pts / np.sqrt(2.0 * (order - 1) / 3.0)


def draw_grid(cfg: OfdmConfig, seed) -> SubcarrierGrid:
    """Draw i.i.d. uniform QAM data on the active bins, zeros elsewhere.

    ``seed`` may be an int, a SeedSequence, or a Generator.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    mask = cfg.active_mask()
    alphabet = qam_alphabet(cfg.qam_order)
    idx = rng.integers(0, alphabet.size, size=(cfg.n_symbols, int(mask.sum())))
    x = np.zeros((cfg.n_symbols, cfg.n_subcarriers), dtype=complex)
    x[:, mask] = alphabet[idx]
    return SubcarrierGrid(x, mask)


def modulate(grid: SubcarrierGrid, cfg: OfdmConfig) -> np.ndarray:
    """OFDM-modulate a grid into one complex sample stream.

    Per symbol: unitary inverse DFT of length N, then prepend the last
    cp_len body samples as the cyclic prefix.
    """
    if grid.n_subcarriers != cfg.n_subcarriers:
        raise ValueError("grid width does not match cfg.n_subcarriers")
    body = np.fft.ifft(grid.x, axis=1, norm="ortho")
    with_cp = np.concatenate([body[:, cfg.n_subcarriers - cfg.cp_len :], body], axis=1)
    return with_cp.ravel()


def demodulate(y, cfg: OfdmConfig) -> SubcarrierGrid:
    """Strip cyclic prefixes and forward-DFT each symbol body."""
    ya = np.asarray(y, dtype=complex).ravel()
    sym_len = cfg.symbol_len
    if ya.size == 0 or ya.size % sym_len != 0:
        raise ValueError(
            f"stream length {ya.size} is not a whole number of {sym_len}-sample symbols"
        )
    bodies = ya.reshape(-1, sym_len)[:, cfg.cp_len :]
    x = np.fft.fft(bodies, axis=1, norm="ortho")
    return SubcarrierGrid(x, cfg.active_mask())
