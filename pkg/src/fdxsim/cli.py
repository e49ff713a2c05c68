"""Command-line front end.

Subcommands
-----------
- ``fdxsim run <config.json>``   run a configured experiment, emit the table
- ``fdxsim validate <config.json>``  parse and validate a config
- ``fdxsim mask --lf ... --lw ... -o mask.csv``  emit a CHPLL mask table
- ``fdxsim point --lf ... --lw ... [--alc --dlc --engine ...]``  one point

Exit codes: 0 success, 2 config error, 3 infeasible parameters, 4 I/O error.
``FDXSIM_SEED`` in the environment overrides any configured seed.
"""

from __future__ import annotations

import argparse
import os
import sys

from .experiments import (
    ConfigError,
    ExperimentConfig,
    closed_form_sic,
    emit_table,
    monte_carlo_sic,
    point_spectrum,
    run_experiment,
)
from .ofdm_baseband import OfdmConfig
from .si_chain import IDEAL, CancellationConfig, InfeasibleAlcError, default_profile
from .spectral_mask import FeasibilityError, PllParams, build_chpll_mask, save_mask_csv

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_IO = 4


def _level(text: str):
    return IDEAL if text == IDEAL else float(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fdxsim",
        description="Full-duplex self-interference studies under oscillator phase noise",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment from a JSON config")
    p_run.add_argument("config", help="path to the experiment config (JSON)")
    p_run.add_argument("-o", "--output", help="override the config's output path")

    p_val = sub.add_parser("validate", help="check a config file without running it")
    p_val.add_argument("config", help="path to the experiment config (JSON)")

    p_mask = sub.add_parser("mask", help="emit a CHPLL phase-noise mask as CSV")
    p_mask.add_argument("--lf", type=float, required=True, help="flicker-region VCO level, dBc/Hz")
    p_mask.add_argument("--lw", type=float, required=True, help="thermal-region VCO level, dBc/Hz")
    p_mask.add_argument("--lf-offset", type=float, default=1e3, help="flicker measurement offset, Hz")
    p_mask.add_argument("--lw-offset", type=float, default=1e6, help="thermal measurement offset, Hz")
    p_mask.add_argument("--co-level", type=float, default=-160.0, help="reference level at 1 MHz, dBc/Hz")
    p_mask.add_argument("--loop-bw", type=float, default=None, help="loop bandwidth override, Hz")
    p_mask.add_argument("--damping", type=float, default=0.707)
    p_mask.add_argument("-o", "--output", required=True, help="output CSV path")

    p_pt = sub.add_parser("point", help="evaluate one oscillator/cancellation point")
    p_pt.add_argument("--lf", type=float, required=True)
    p_pt.add_argument("--lw", type=float, required=True)
    p_pt.add_argument("--lf-offset", type=float, default=1e3)
    p_pt.add_argument("--lw-offset", type=float, default=1e6)
    p_pt.add_argument("--loop-bw", type=float, default=None)
    p_pt.add_argument("--alc", type=_level, default=30.0, help="dB level or 'ideal'")
    p_pt.add_argument("--dlc", type=_level, default=70.0, help="dB level or 'ideal'")
    p_pt.add_argument("--engine", choices=("closed_form", "monte_carlo", "both"), default="both")
    p_pt.add_argument("--trials", type=int, default=50)
    p_pt.add_argument("--symbols", type=int, default=200)
    p_pt.add_argument("--seed", type=int, default=0)
    return parser


def _cmd_run(args) -> int:
    cfg = ExperimentConfig.from_json(args.config)
    output = args.output or cfg.output_path
    if output is None:
        raise ConfigError("no output path: set 'output' in the config or pass --output")
    table = run_experiment(cfg)
    emit_table(table, output, cfg.output_format)
    print(f"wrote {len(table.rows)} rows to {output}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    cfg = ExperimentConfig.from_json(args.config)
    print(f"OK: kind={cfg.kind} engine={cfg.engine} trials={cfg.trials}")
    return EXIT_OK


def _cmd_mask(args) -> int:
    pll = PllParams(
        l_f=args.lf,
        l_w=args.lw,
        f_lf=args.lf_offset,
        f_lw=args.lw_offset,
        co_level=args.co_level,
        loop_bandwidth_hz=args.loop_bw,
        damping=args.damping,
    )
    mask = build_chpll_mask(pll)
    save_mask_csv(mask, args.output)
    print(f"wrote {mask.offsets_hz.size} breakpoints to {args.output}")
    return EXIT_OK


def _cmd_point(args) -> int:
    seed = int(os.environ.get("FDXSIM_SEED", args.seed))
    pll = PllParams(
        l_f=args.lf,
        l_w=args.lw,
        f_lf=args.lf_offset,
        f_lw=args.lw_offset,
        loop_bandwidth_hz=args.loop_bw,
    )
    ofdm = OfdmConfig(n_symbols=args.symbols)
    profile = default_profile()
    canc = CancellationConfig(alc=args.alc, dlc=args.dlc)
    spec = point_spectrum(ofdm, pll)
    print(f"lf_dbc_hz={args.lf} lw_dbc_hz={args.lw} alc={args.alc} dlc={args.dlc}")
    if args.engine in ("closed_form", "both"):
        sic_cf = closed_form_sic(ofdm, profile, canc, spec)
        print(f"sic_cf_db={sic_cf:.3f}")
    if args.engine in ("monte_carlo", "both"):
        sic_mc = monte_carlo_sic(ofdm, profile, canc, spec, seed=seed, trials=args.trials)
        print(f"sic_mc_db={sic_mc:.3f}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "validate": _cmd_validate,
        "mask": _cmd_mask,
        "point": _cmd_point,
    }
    try:
        return handlers[args.command](args)
    except (FeasibilityError, InfeasibleAlcError) as exc:
        print(f"infeasible parameters: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
