import csv
import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import partial

import numpy as np
from tqdm import tqdm

from channel import NoiseModel
from coding import Message
from errors import ConfigurationError
from eve import AttackKind, check_attack_applies
from protocols import ProtocolConfig, ProtocolName, run_dialogue, run_one_way, run_round_trip
from protocols.common import ensure_capacity
from qsim import BellOutcome

logger = logging.getLogger(__name__)

FORMATS = ("jsonl", "csv")
_FLAG_WORDS = {"true": True, "yes": True, "on": True, "1": True, "false": False, "no": False, "off": False, "0": False}

# Every setting build_campaign understands.
SETTING_KEYS = (
    "protocol",
    "pairs",
    "check_fraction",
    "threshold",
    "noise_p",
    "attack",
    "trials",
    "seed",
    "message_hex",
    "format",
    "out",
    "dump_transcripts",
    "disable_permutation",
    "initial_state",
    "max_attempts",
    "workers",
)

# Column order of emitted trial rows; names are part of the output schema.
TRIAL_FIELDS = (
    "trial",
    "aborted",
    "error_rate",
    "fidelity_exact",
    "eve_dibit_accuracy",
    "attempts",
    "pairs_checked",
    "check_errors",
    "eve_interceptions",
    "eve_dibits_correct",
    "eve_dibits_total",
    "message_bits",
    "particle_transits",
)


@dataclass
class Campaign:
    """
	A Monte Carlo campaign: one protocol configuration run over many trials.

    ``config.seed`` seeds the whole campaign. Trial ``t``, attempt ``a`` draws
    from ``default_rng([seed, t, a])`` and nothing else.
    """

    protocol: ProtocolName
    config: ProtocolConfig
    trials: int
    message_hex: str = None
    output_format: str = "jsonl"
    out: str = None
    dump_transcripts: str = None
    max_attempts: int = 1
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigurationError(f"A campaign needs at least one trial, got {self.trials}.", "trials")
        if self.max_attempts < 1:
            raise ConfigurationError(f"max_attempts must be at least 1, got {self.max_attempts}.", "max_attempts")
        if self.workers < 1:
            raise ConfigurationError(f"workers must be at least 1, got {self.workers}.", "workers")
        if self.output_format not in FORMATS:
            raise ConfigurationError(f"Unknown output format {self.output_format!r}.", "format")
        if self.message_hex is not None:
            try:
                message = Message.from_hex(self.message_hex)
            except ValueError:
                raise ConfigurationError(f"{self.message_hex!r} is not a hex string.", "message_hex")
            ensure_capacity(self.config, message)

    @property
    def fixed_message(self):
        return None if self.message_hex is None else Message.from_hex(self.message_hex)

    def to_dict(self):
        return {
            "protocol": self.protocol.value,
            **self.config.to_dict(),
            "trials": self.trials,
            "message_hex": self.message_hex,
            "max_attempts": self.max_attempts,
        }


@dataclass
class TrialRecord:
    trial: int
    aborted: bool
    error_rate: float
    fidelity_exact: bool = None
    eve_dibit_accuracy: float = None
    attempts: int = 1
    pairs_checked: int = 0
    check_errors: int = 0
    eve_interceptions: int = 0
    eve_dibits_correct: int = 0
    eve_dibits_total: int = 0
    message_bits: int = 0
    particle_transits: int = 0
    transcript: list = field(default_factory=list)

    def to_row(self):
        row = asdict(self)
        return {name: row[name] for name in TRIAL_FIELDS}


def _pooled(records, numerator, denominator):
    total = sum(getattr(r, denominator) for r in records)
    if not total:
        return None
    return sum(getattr(r, numerator) for r in records) / total


@dataclass
class CampaignSummary:
    campaign: Campaign
    records: list
    duration: float = 0.0

    @property
    def seed(self):
        return self.campaign.config.seed

    def aggregate(self):
        """
	Campaign-level statistics.

        Fidelity and bits per transit cover non-aborted trials only; Eve's
        accuracy is pooled over dibits, separately for completed and aborted
        trials. Wall-clock duration is left out so that reruns compare equal.

        Returns:
            dict: Aggregate fields keyed by their stable output names.
        """
        rates = np.array([r.error_rate for r in self.records], dtype=float)
        completed = [r for r in self.records if not r.aborted]
        aborted = [r for r in self.records if r.aborted]
        return {
            "trials": len(self.records),
            "mean_error_rate": float(rates.mean()),
            "stddev_error_rate": float(rates.std(ddof=1)) if len(rates) > 1 else 0.0,
            "abort_rate": len(aborted) / len(self.records),
            "fidelity": (
                sum(1 for r in completed if r.fidelity_exact) / len(completed) if completed else None
            ),
            "eve_dibit_accuracy": _pooled(completed, "eve_dibits_correct", "eve_dibits_total"),
            "eve_dibit_accuracy_aborted": _pooled(aborted, "eve_dibits_correct", "eve_dibits_total"),
            "bits_per_transit": _pooled(completed, "message_bits", "particle_transits"),
            "mean_attempts": float(np.mean([r.attempts for r in self.records])),
        }


def trial_rng(seed, trial, attempt=0):
    return np.random.default_rng([seed, trial, attempt])


def _draw_messages(campaign, rng):
    fixed = campaign.fixed_message
    count = 2 if campaign.protocol is ProtocolName.DIALOGUE else 1
    if fixed is not None:
        return [fixed] * count
    bits = 2 * campaign.config.message_capacity
    return [Message.random(bits, rng) for _ in range(count)]


def run_protocol(protocol, config, messages, rng):
    if protocol is ProtocolName.ROUND_TRIP:
        return run_round_trip(config, messages[0], rng)
    if protocol is ProtocolName.ONE_WAY:
        return run_one_way(config, messages[0], rng)
    return run_dialogue(config, messages[0], messages[1], rng)


def run_trial(campaign, trial):
    """
	Runs one trial, retrying aborted sessions up to ``max_attempts`` times.

    Every attempt draws a fresh stream from ``(seed, trial, attempt)``; the
    message drawn on the first attempt is sent again on retries.

    Args:
        campaign (Campaign): The campaign.
        trial (int): Trial index.

    Returns:
        TrialRecord: Counters of the last attempt, with ``particle_transits``
        summed over all attempts.
    """
    messages = None
    transits = 0
    for attempt in range(campaign.max_attempts):
        rng = trial_rng(campaign.config.seed, trial, attempt)
        if messages is None:
            messages = _draw_messages(campaign, rng)
        outcome = run_protocol(campaign.protocol, campaign.config, messages, rng)
        transits += outcome.counters["particle_transits"]
        if not outcome.aborted:
            break
        logger.debug("Trial %d attempt %d aborted", trial, attempt)

    fidelity = None
    if not outcome.aborted:
        if campaign.protocol is ProtocolName.DIALOGUE:
            # decoded_message is Bob's message read by Alice.
            fidelity = outcome.decoded_message == messages[1] and outcome.decoded_message_peer == messages[0]
        else:
            fidelity = outcome.decoded_message == messages[0]
    counters = outcome.counters
    return TrialRecord(
        trial=trial,
        aborted=outcome.aborted,
        error_rate=outcome.checking_error_rate,
        fidelity_exact=fidelity,
        eve_dibit_accuracy=outcome.eve_dibit_accuracy,
        attempts=attempt + 1,
        pairs_checked=counters["pairs_checked"],
        check_errors=counters["check_errors"],
        eve_interceptions=counters["eve_interceptions"],
        eve_dibits_correct=counters["eve_dibits_correct"],
        eve_dibits_total=counters["eve_dibits_total"],
        message_bits=counters["message_bits"],
        particle_transits=transits,
        transcript=outcome.transcript.to_list(),
    )


def run_campaign(campaign, progress=False):
    """
	Runs every trial of a campaign.

    With ``workers > 1`` trials run in a process pool; records come back in
    trial order either way.

    Args:
        campaign (Campaign): A validated campaign.
        progress (bool): Show a tqdm progress bar on stderr.

    Returns:
        CampaignSummary: Per-trial records and the campaign they came from.
    """
    started = time.perf_counter()
    trials = range(campaign.trials)
    worker = partial(run_trial, campaign)
    if campaign.workers > 1:
        with ProcessPoolExecutor(max_workers=campaign.workers) as pool:
            chunksize = max(1, campaign.trials // (4 * campaign.workers))
            results = pool.map(worker, trials, chunksize=chunksize)
            records = list(tqdm(results, total=campaign.trials, disable=not progress, desc="trials"))
    else:
        records = [worker(t) for t in tqdm(trials, disable=not progress, desc="trials")]
    summary = CampaignSummary(campaign, records, time.perf_counter() - started)
    logger.info(
        "Ran %d %s trials in %.2fs (seed %d)",
        campaign.trials,
        campaign.protocol.value,
        summary.duration,
        summary.seed,
    )
    return summary


def _csv_value(value):
    return "" if value is None else value


def emit(summary, fmt, stream):
    """
	Writes a summary as JSON lines or CSV.

    JSON lines: one ``{"type": "trial"}`` object per trial, then one
    ``{"type": "aggregate"}`` object carrying the seed and the resolved
    configuration. CSV: a ``# seed=`` comment, the header, one row per trial and
    ``# key=value`` footer lines for the aggregate.

    Args:
        summary (CampaignSummary): What to write.
        fmt (str): ``jsonl`` or ``csv``.
        stream (TextIO): Destination.
    """
    aggregate = summary.aggregate()
    if fmt == "jsonl":
        for record in summary.records:
            stream.write(json.dumps({"type": "trial", **record.to_row()}) + "\n")
        stream.write(
            json.dumps({"type": "aggregate", **aggregate, "seed": summary.seed, "config": summary.campaign.to_dict()})
            + "\n"
        )
    elif fmt == "csv":
        stream.write(f"# seed={summary.seed}\n")
        writer = csv.DictWriter(stream, fieldnames=TRIAL_FIELDS, lineterminator="\n")
        writer.writeheader()
        for record in summary.records:
            writer.writerow({k: _csv_value(v) for k, v in record.to_row().items()})
        for key, value in aggregate.items():
            stream.write(f"# {key}={_csv_value(value)}\n")
    else:
        raise ConfigurationError(f"Unknown output format {fmt!r}.")


def write_transcripts(summary, directory):
    """Writes each trial's classical log to ``<directory>/trial-<index>.json``."""
    os.makedirs(directory, exist_ok=True)
    for record in summary.records:
        path = os.path.join(directory, f"trial-{record.trial:06d}.json")
        with open(path, "w") as f:
            json.dump(record.transcript, f, indent=2)


def _integer(value):
    if isinstance(value, float) and not value.is_integer():
        raise ValueError(f"{value!r} is not integral.")
    return int(value)


def _flag(value):
    """Reads a boolean from a flag, a JSON bool or a string such as ``"false"``."""
    if isinstance(value, bool):
        return value
    if isinstance(value, int) and value in (0, 1):
        return bool(value)
    if isinstance(value, str) and value.strip().lower() in _FLAG_WORDS:
        return _FLAG_WORDS[value.strip().lower()]
    raise ValueError(f"{value!r} is not a boolean.")


def _coerce(values, key, cast, default):
    value = values.get(key)
    if value is None:
        return default
    try:
        return cast(value)
    except (TypeError, ValueError):
        raise ConfigurationError(f"{value!r} is not a valid {key}.", key)


def _enum(enum_cls, key, value):
    try:
        return enum_cls(value)
    except ValueError:
        choices = ", ".join(member.value for member in enum_cls)
        raise ConfigurationError(f"{value!r} is not a valid {key}; choose from {choices}.", key)


def build_campaign(values, defaults, trial_limit=None):
    """
	Validates loose settings into a Campaign.

    Shared by the command line and the HTTP API. Missing keys fall back to
    ``defaults``, the ``DEFAULT_*`` names of the config module.

    Args:
        values (dict): Lower-case setting names (``pairs``, ``check_fraction``,
            ``noise_p``, ...) mapped to raw values. ``seed`` must be present.
        defaults (Mapping): Default settings keyed like the config module.
        trial_limit (int, optional): Largest accepted ``trials``; the command line
            passes none.

    Returns:
        Campaign: A campaign ready to run.

    Raises:
        ConfigurationError: With ``field`` naming the offending setting.
    """
    protocol = _enum(ProtocolName, "protocol", values.get("protocol") or defaults["DEFAULT_PROTOCOL"])
    attack = _enum(AttackKind, "attack", values.get("attack") or defaults["DEFAULT_ATTACK"])
    initial_state = _enum(
        BellOutcome, "initial_state", values.get("initial_state") or defaults["DEFAULT_INITIAL_STATE"]
    )
    check_attack_applies(attack, protocol.value)

    noise_p = _coerce(values, "noise_p", float, defaults["DEFAULT_NOISE_P"])
    trials = _coerce(values, "trials", _integer, defaults["DEFAULT_TRIALS"])
    if trial_limit is not None and trials > trial_limit:
        raise ConfigurationError(f"At most {trial_limit} trials per campaign, got {trials}.", "trials")

    config = ProtocolConfig(
        n_pairs=_coerce(values, "pairs", _integer, defaults["DEFAULT_PAIRS"]),
        check_fraction=_coerce(values, "check_fraction", float, defaults["DEFAULT_CHECK_FRACTION"]),
        abort_threshold=_coerce(values, "threshold", float, defaults["DEFAULT_THRESHOLD"]),
        noise=NoiseModel.pauli(noise_p),
        attack=attack,
        seed=_coerce(values, "seed", _integer, 0),
        permute=not _coerce(values, "disable_permutation", _flag, False),
        initial_state=initial_state,
        audit=bool(defaults.get("AUDIT_REGISTRY", False)),
    )
    return Campaign(
        protocol=protocol,
        config=config,
        trials=trials,
        message_hex=values.get("message_hex"),
        output_format=values.get("format") or defaults["DEFAULT_FORMAT"],
        out=values.get("out"),
        dump_transcripts=values.get("dump_transcripts"),
        max_attempts=_coerce(values, "max_attempts", _integer, defaults["DEFAULT_MAX_ATTEMPTS"]),
        workers=_coerce(values, "workers", _integer, 1),
    )
