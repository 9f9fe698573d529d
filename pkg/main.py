# main.py
import argparse
import logging
import re
import sys

import numpy as np

from backend.config import load_config, serialize_config, with_overrides
from backend.experiment_runner import run_experiment, write_csv
from backend.models import ExperimentConfig
from utils.errors import ConfigError, LabError

LOGGER = logging.getLogger("mimo_lab")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2

# flag -> ExperimentConfig key
OVERRIDES = {
    "detector": "detectors",
    "nt": "N_T",
    "nr": "N_R_list",
    "ebn0": "ebn0_db_grid",
    "iters": "df_iterations",
    "seed": "seed",
    "mode": "modes",
    "out": "output_path",
    "workers": "workers",
    "realizations": "realizations",
    "blocks": "blocks_per_realization",
}


class LabArgumentParser(argparse.ArgumentParser):
    """Usage errors become ConfigError so they share the config exit code."""

    def error(self, message):
        raise ConfigError(message)


def join_negative_values(argv: list) -> list:
    """
    Rewrite `--flag -6,0` as `--flag=-6,0` for every override flag.

    argparse would otherwise read a value like `-12:0:1` as an option.
    """
    out = []
    i = 0
    while i < len(argv):
        token = argv[i]
        nxt = argv[i + 1] if i + 1 < len(argv) else None
        if token.startswith("--") and token[2:] in OVERRIDES and nxt is not None and re.match(r"-[\d.]", nxt):
            out.append(f"{token}={nxt}")
            i += 2
            continue
        out.append(token)
        i += 1
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = LabArgumentParser(
        description="SC/FDE MU-MIMO uplink BER lab: semi-analytic, Monte Carlo and SIMO bound curves"
    )
    parser.add_argument("--config", help="plain-text key = value configuration file")
    parser.add_argument("--detector", help="comma-separated detectors: mf, mmse, zf, idf")
    parser.add_argument("--nt", help="number of single-antenna users (TX antennas)")
    parser.add_argument("--nr", help="comma-separated BS antenna counts")
    parser.add_argument("--ebn0", help="Eb/N0 grid in dB, comma-separated or start:stop:step")
    parser.add_argument("--iters", help="iterations of the DF detector")
    parser.add_argument("--seed", help="master seed")
    parser.add_argument("--mode", help="comma-separated modes: semi, mc, bounds")
    parser.add_argument("--out", help="output CSV path")
    parser.add_argument("--workers", help="worker processes for realization fan-out")
    parser.add_argument("--realizations", help="channel realizations per point")
    parser.add_argument("--blocks", help="Monte Carlo blocks per realization")
    parser.add_argument("--list-defaults", action="store_true", help="print the default configuration and exit")
    parser.add_argument("--quiet", action="store_true", help="no progress bars or status lines")
    parser.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    return parser


def resolve_config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    overrides = {key: getattr(args, flag) for flag, key in OVERRIDES.items() if getattr(args, flag) is not None}
    return with_overrides(cfg, overrides) if overrides else cfg


def main(argv=None) -> int:
    argv = join_negative_values(list(sys.argv[1:] if argv is None else argv))
    try:
        args = build_parser().parse_args(argv)
    except ConfigError as e:
        print(f"❌ Config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(
        level=logging.WARNING if args.quiet else getattr(logging, args.log_level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    if args.list_defaults:
        print(serialize_config(ExperimentConfig()), end="")
        return EXIT_OK

    try:
        cfg = resolve_config(args)
        if not args.quiet:
            print(f"📦 {cfg.N_T} users, N_R={cfg.N_R_list}, modes={[m.value for m in cfg.modes]}")
        records = run_experiment(cfg, progress=not args.quiet)
        path = write_csv(records, cfg.output_path)
    except ConfigError as e:
        print(f"❌ Config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (LabError, np.linalg.LinAlgError) as e:
        LOGGER.debug("run failed", exc_info=True)
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_RUNTIME

    if not args.quiet:
        print(f"✅ Wrote {len(records)} rows to {path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
