"""Charge-pump PLL phase-noise masks from two VCO measurements.

A practical PLL oscillator is characterized here by just three numbers: the
VCO's SSB level in the flicker region (l_f, default measured at 1 kHz), its
level in the thermal region (l_w, at 1 MHz), and the crystal reference's
level at 1 MHz.  The synthesized output mask lowpass-filters the reference
noise through the loop and highpass-filters the VCO noise with the
complementary response, so the loop bandwidth decides which source is
visible where.

Run:  python demos/01_oscillator_masks.py
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from fdxsim import PllParams, build_chpll_mask, save_mask_csv, vco_level

OUT = pathlib.Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

# Three oscillator qualities: mediocre, good, excellent.
cases = [
    ("l_f=-40, l_w=-110", PllParams(l_f=-40.0, l_w=-110.0)),
    ("l_f=-60, l_w=-120", PllParams(l_f=-60.0, l_w=-120.0)),
    ("l_f=-70, l_w=-140", PllParams(l_f=-70.0, l_w=-140.0)),
]

fig, ax = plt.subplots(figsize=(7, 5))
f = np.logspace(2, np.log10(7.68e6), 400)
for label, pll in cases:
    mask = build_chpll_mask(pll)
    ax.semilogx(f, mask.level_dbc_hz(f), label=label)
    # the open-loop VCO curve for comparison (dotted)
    ax.semilogx(f, 10 * np.log10(vco_level(pll, f)), ":", color=ax.lines[-1].get_color(), alpha=0.6)

    print(f"{label}:")
    for probe in (1e3, 1e4, 1e5, 1e6):
        print(f"  L({probe:9.0f} Hz) = {mask.level_dbc_hz(probe):8.2f} dBc/Hz")

ax.set_xlabel("offset frequency (Hz)")
ax.set_ylabel("SSB phase noise (dBc/Hz)")
ax.set_title("CHPLL output masks (solid) vs open-loop VCO (dotted)")
ax.grid(True, which="both", alpha=0.3)
ax.legend()
fig.tight_layout()
fig.savefig(OUT / "chpll_masks.png", dpi=130)
print(f"\nfigure: {OUT / 'chpll_masks.png'}")

# Masks are ordinary breakpoint tables; they serialize to two-column CSV.
save_mask_csv(build_chpll_mask(cases[1][1]), OUT / "mask_lf-60_lw-120.csv")
print(f"table:  {OUT / 'mask_lf-60_lw-120.csv'}")
