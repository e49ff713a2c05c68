"""Oscillator design map: achievable cancellation over (l_f, l_w).

Sweeps the two VCO measurement parameters over their feasible region with
the closed-form engine (fast enough for a dense grid) and draws the contour
map a designer would use to pick an oscillator for a cancellation target.
Pairs outside the feasibility band are left blank, cutting the curves the
same way the parameter space is cut.

Run:  python demos/04_design_grid.py
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from fdxsim import (
    IDEAL,
    CancellationConfig,
    ExperimentConfig,
    OfdmConfig,
    OscillatorSweep,
    emit_table,
    run_experiment,
)

OUT = pathlib.Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

lf_values = tuple(np.arange(-80.0, -29.9, 2.5))
lw_values = tuple(np.arange(-150.0, -99.9, 2.5))

for dlc, tag in ((IDEAL, "ideal DLC"), (70.0, "70 dB DLC")):
    cfg = ExperimentConfig(
        kind="grid_lf_lw",
        engine="closed_form",
        ofdm=OfdmConfig(),
        cancellation=CancellationConfig(alc=30.0, dlc=dlc),
        oscillator=OscillatorSweep(lf_values=lf_values, lw_values=lw_values),
    )
    table = run_experiment(cfg)
    fname = "design_grid_ideal_dlc" if dlc == IDEAL else "design_grid_dlc70"
    emit_table(table, OUT / f"{fname}.csv")

    grid = np.full((len(lw_values), len(lf_values)), np.nan)
    for row in table.rows:
        if row.skipped:
            continue
        i = lw_values.index(row.params["lw_dbc_hz"])
        j = lf_values.index(row.params["lf_dbc_hz"])
        grid[i, j] = row.sic_cf_db

    feasible = np.isfinite(grid)
    print(f"{tag}: {feasible.sum()} feasible points of {grid.size}, "
          f"best {np.nanmax(grid):.1f} dB, worst {np.nanmin(grid):.1f} dB")

    fig, ax = plt.subplots(figsize=(7, 5.5))
    levels = np.arange(np.floor(np.nanmin(grid)), np.ceil(np.nanmax(grid)) + 1, 1.0)
    cs = ax.contour(lf_values, lw_values, grid, levels=levels[::2], cmap="viridis")
    ax.clabel(cs, fmt="%.0f dB", fontsize=7)
    ax.set_xlabel("flicker-region VCO level l_f (dBc/Hz at 1 kHz)")
    ax.set_ylabel("thermal-region VCO level l_w (dBc/Hz at 1 MHz)")
    ax.set_title(f"Achievable cancellation, ALC 30 dB + {tag}")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(OUT / f"{fname}.png", dpi=130)
    print(f"  wrote {OUT / (fname + '.csv')} and .png")
