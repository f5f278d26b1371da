import argparse
import json
import logging
import os
import secrets
import sys

from flask import Config

import config as settings
from campaign import FORMATS, SETTING_KEYS, build_campaign, emit, run_campaign, write_transcripts
from errors import ConfigurationError
from eve import AttackKind
from predictions import predict
from protocols import ProtocolName
from qsim import BellOutcome

logger = logging.getLogger(__name__)


def create_cli_parser():
    parser = argparse.ArgumentParser(
        prog="qsdc",
        description="Monte Carlo campaigns for QSDC with a secret transmitting order.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("--protocol", choices=[p.value for p in ProtocolName], default=None,
                        help=f"Protocol to run (default {settings.DEFAULT_PROTOCOL}).")
    parser.add_argument("--pairs", type=int, default=None,
                        help=f"EPR pairs per session, N >= 2 (default {settings.DEFAULT_PAIRS}).")
    parser.add_argument("--check-fraction", type=float, default=None,
                        help=f"Share of pairs in the checking set, in (0, 1) (default {settings.DEFAULT_CHECK_FRACTION}).")
    parser.add_argument("--threshold", type=float, default=None,
                        help=f"Largest tolerated checking error rate (default {settings.DEFAULT_THRESHOLD}).")
    parser.add_argument("--noise-p", type=float, default=None,
                        help=f"Per-particle Pauli noise probability per transit (default {settings.DEFAULT_NOISE_P}).")
    parser.add_argument("--attack", choices=[a.value for a in AttackKind], default=None,
                        help=f"Eavesdropping strategy (default {settings.DEFAULT_ATTACK}).")
    parser.add_argument("--trials", type=int, default=None,
                        help=f"Independent sessions to run (default {settings.DEFAULT_TRIALS}).")
    parser.add_argument("--seed", type=int, default=None,
                        help="Campaign seed; a fresh one is drawn and reported when omitted.")
    parser.add_argument("--message-hex", default=None,
                        help="Fixed message as hex; a random message filling the message set is used otherwise.")
    parser.add_argument("--format", choices=FORMATS, default=None,
                        help=f"Output format (default {settings.DEFAULT_FORMAT}).")
    parser.add_argument("--out", default=None, help="Output path; standard output when omitted.")
    parser.add_argument("--dump-transcripts", metavar="DIR", default=None,
                        help="Write every trial's classical log to DIR.")
    parser.add_argument("--config", metavar="PATH", default=None,
                        help="Settings file: KEY = value Python or a .json object. Flags win over it.")
    parser.add_argument("--disable-permutation", action="store_true", default=None,
                        help="Send everything in order (negative control).")
    parser.add_argument("--initial-state", choices=[b.value for b in BellOutcome], default=None,
                        help=f"Bell state Alice prepares (default {settings.DEFAULT_INITIAL_STATE}).")
    parser.add_argument("--max-attempts", type=int, default=None,
                        help=f"Sessions per trial while they abort (default {settings.DEFAULT_MAX_ATTEMPTS}).")
    parser.add_argument("--workers", type=int, default=None, help="Worker processes (default 1).")
    parser.add_argument("--verbosity", choices=["DEBUG", "INFO", "WARNING", "ERROR"], default="WARNING",
                        help="Logging verbosity.")
    parser.add_argument("--dry-run", action="store_true",
                        help="Validate, print predicted error and detection rates, and exit.")
    return parser


def load_config_file(path):
    """
	Reads a --config file into a dict of lower-case setting names.

    Raises:
        OSError: If the file cannot be read.
        ValueError: If a .json file does not parse.
    """
    file_config = Config(os.getcwd())
    if path.endswith(".json"):
        file_config.from_file(os.path.abspath(path), load=json.load)
    else:
        file_config.from_pyfile(os.path.abspath(path))
    return {key: file_config[key.upper()] for key in SETTING_KEYS if key.upper() in file_config}


def resolve(parser, args):
    values = {}
    if args.config:
        try:
            values.update(load_config_file(args.config))
        except (OSError, ValueError) as e:
            parser.error(f"argument --config: cannot read {args.config}: {e}")
    for key in SETTING_KEYS:
        flag_value = getattr(args, key)
        if flag_value is not None:
            values[key] = flag_value
    if values.get("seed") is None:
        values["seed"] = secrets.randbits(64)
        logger.info("No seed given; using %d", values["seed"])
    try:
        campaign = build_campaign(values, vars(settings))
    except ConfigurationError as e:
        flag = "--" + (e.field or "config").replace("_", "-")
        parser.error(f"argument {flag}: {e}")
    if campaign.config.noise.active and campaign.config.abort_threshold == 0.0:
        logger.warning("Noise p=%s with threshold 0 will abort almost every session.", campaign.config.noise.p)
    return campaign


def parse_args(argv):
    """
	Turns command-line arguments into a fully resolved Campaign.

    Precedence is explicit flag, then --config file, then config.py default.
    Invalid values exit with status 2 and a message naming the flag.

    Args:
        argv (list[str]): Arguments without the program name.

    Returns:
        Campaign: The campaign to run.
    """
    parser = create_cli_parser()
    return resolve(parser, parser.parse_args(argv))


def print_summary(summary, stream):
    aggregate = summary.aggregate()
    campaign = summary.campaign
    print(f"{campaign.protocol.value}: {aggregate['trials']} trials, seed {summary.seed}", file=stream)
    print(f"  checking error rate  {aggregate['mean_error_rate']:.4f} +/- {aggregate['stddev_error_rate']:.4f}",
          file=stream)
    print(f"  abort rate           {aggregate['abort_rate']:.4f}", file=stream)
    for key in ("fidelity", "eve_dibit_accuracy", "eve_dibit_accuracy_aborted", "bits_per_transit"):
        if aggregate[key] is not None:
            print(f"  {key:<20} {aggregate[key]:.4f}", file=stream)
    print(f"  duration             {summary.duration:.2f}s", file=stream)


def main(argv=None):
    parser = create_cli_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(format="%(asctime)s [%(levelname)s] [%(name)s] %(message)s", datefmt="%Y-%m-%d %H:%M:%S")
    logging.getLogger().setLevel(args.verbosity)
    campaign = resolve(parser, args)

    if args.dry_run:
        print(json.dumps(predict(campaign.protocol, campaign.config), indent=2))
        return 0

    summary = run_campaign(campaign, progress=sys.stderr.isatty())
    try:
        if campaign.out:
            with open(campaign.out, "w", newline="") as f:
                emit(summary, campaign.output_format, f)
        else:
            emit(summary, campaign.output_format, sys.stdout)
        if campaign.dump_transcripts:
            write_transcripts(summary, campaign.dump_transcripts)
    except OSError as e:
        logger.critical("Cannot write results: %s", e)
        return 1
    print_summary(summary, sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
