import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum

from channel import ClassicalLog, NoiseModel
from coding import chunk_message, random_dibits
from errors import CapacityError, ConfigurationError, ProtocolFault
from eve import AttackKind, build_attack
from qsim import BellOutcome, EntanglementRegistry

logger = logging.getLogger(__name__)


class ProtocolName(Enum):
    ROUND_TRIP = "round_trip"
    ONE_WAY = "one_way"
    DIALOGUE = "dialogue"


class Phase(Enum):
    INIT = "init"
    PREPARED = "prepared"
    ALICE_ENCODED = "alice_encoded"
    FORWARD_SENT = "forward_sent"
    SPLIT_ANNOUNCED = "split_announced"
    ENCODED = "encoded"
    RETURNED = "returned"
    CHECK_ORDER_ANNOUNCED = "check_order_announced"
    CHECK_RESULTS_ANNOUNCED = "check_results_announced"
    CHECKING_TRUTH_ANNOUNCED = "checking_truth_announced"
    CHECK_PASSED = "check_passed"
    ABORTED = "aborted"
    MESSAGE_ORDER_DISCLOSED = "message_order_disclosed"
    MESSAGE_RESULTS_ANNOUNCED = "message_results_announced"
    DECODED = "decoded"


def checking_set_size(n, fraction):
    """
	Size of the checking set for ``n`` pairs.

    Rounds half up, then clamps so both the checking and the message set keep at
    least one pair.

    Raises:
        ConfigurationError: If ``n`` < 2 or ``fraction`` is outside (0, 1).
    """
    if n < 2:
        raise ConfigurationError(f"At least 2 pairs are needed, got {n}.", "pairs")
    if not 0.0 < fraction < 1.0:
        raise ConfigurationError(f"Check fraction {fraction} is outside (0, 1).", "check_fraction")
    size = int(math.floor(fraction * n + 0.5))
    return min(max(1, size), n - 1)


@dataclass(frozen=True)
class ProtocolConfig:
    """
	Everything a session needs besides its messages and RNG.

    ``seed`` is provenance only; sessions draw from the generator they are given.
    ``permute=False`` replaces every secret order with the identity.
    """

    n_pairs: int
    check_fraction: float = 0.25
    abort_threshold: float = 0.0
    noise: NoiseModel = field(default_factory=NoiseModel)
    attack: AttackKind = AttackKind.NONE
    seed: int = 0
    permute: bool = True
    initial_state: BellOutcome = BellOutcome.PSI_MINUS
    audit: bool = False

    def __post_init__(self):
        checking_set_size(self.n_pairs, self.check_fraction)
        if not 0.0 <= self.abort_threshold <= 1.0:
            raise ConfigurationError(f"Abort threshold {self.abort_threshold} is outside [0, 1].", "threshold")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigurationError(f"Seed {self.seed} is not a 64-bit unsigned integer.", "seed")

    @property
    def check_size(self):
        return checking_set_size(self.n_pairs, self.check_fraction)

    @property
    def message_capacity(self):
        """Dibits the message set can carry."""
        return self.n_pairs - self.check_size

    def to_dict(self):
        return {
            "n_pairs": self.n_pairs,
            "check_fraction": self.check_fraction,
            "abort_threshold": self.abort_threshold,
            "noise_p": self.noise.p if self.noise.active else 0.0,
            "attack": self.attack.value,
            "seed": self.seed,
            "permute": self.permute,
            "initial_state": self.initial_state.value,
        }


@dataclass
class RunOutcome:
    aborted: bool
    checking_error_rate: float
    decoded_message: object = None
    decoded_message_peer: object = None
    transcript: ClassicalLog = field(default_factory=ClassicalLog)
    counters: Counter = field(default_factory=Counter)

    @property
    def eve_dibit_accuracy(self):
        total = self.counters.get("eve_dibits_total", 0)
        if not total:
            return None
        return self.counters["eve_dibits_correct"] / total


def select_checking_set(n, fraction, rng):
    """
	Splits pair indices into a random checking set and the message set.

    Args:
        n (int): Number of pairs, at least 2.
        fraction (float): Target share of checking pairs, in (0, 1).
        rng (numpy.random.Generator): The trial's generator.

    Returns:
        tuple[list[int], list[int]]: Sorted C-set and M-set indices.

    Raises:
        ConfigurationError: On degenerate sizing.
    """
    size = checking_set_size(n, fraction)
    chosen = set(int(i) for i in rng.choice(n, size=size, replace=False))
    check = sorted(chosen)
    message = [i for i in range(n) if i not in chosen]
    return check, message


def check_security(expected, observed, threshold):
    """
	Compares checking dibits and decides whether to abort.

    Args:
        expected (Sequence[Dibit]): Dibits the checker encoded.
        observed (Sequence[Dibit]): Dibits the other side reported.
        threshold (float): Largest tolerated error rate.

    Returns:
        tuple[float, bool]: The error rate and whether to abort.

    Raises:
        ProtocolFault: If the sequences are empty or differ in length.
    """
    if len(expected) != len(observed):
        raise ProtocolFault(
            f"Cannot compare {len(expected)} checking dibits with {len(observed)} results."
        )
    if not expected:
        raise ProtocolFault("Security check needs at least one checking pair.")
    errors = sum(1 for e, o in zip(expected, observed) if e != o)
    rate = errors / len(expected)
    return rate, rate > threshold


def ensure_capacity(config, message):
    needed = len(chunk_message(message))
    if needed > config.message_capacity:
        raise CapacityError(
            f"Message of {message.length} bits needs {needed} pairs but the message set "
            f"holds {config.message_capacity}."
        )


def fill_message_set(message, message_set, rng):
    """Message dibits on the first M-set pairs in index order, random filler on the rest."""
    chunks = chunk_message(message)
    filler = random_dibits(len(message_set) - len(chunks), rng)
    return dict(zip(message_set, chunks + filler))


class Session:
    """
	Shared plumbing for the protocol state machines.

    A session owns one registry, one classical log and one eavesdropper. Steps
    must run in protocol order; ``_advance`` enforces it.
    """

    protocol = None

    def __init__(self, config, rng, attack=None):
        self.config = config
        self.rng = rng
        self.registry = EntanglementRegistry(audit=config.audit)
        self.log = ClassicalLog()
        self.attack = attack or build_attack(config.attack, self.protocol.value, config.n_pairs)
        self.counters = Counter()
        self.phase = Phase.INIT
        self.checking_error_rate = None

    def _advance(self, expected, new):
        if not isinstance(expected, tuple):
            expected = (expected,)
        if self.phase not in expected:
            raise ProtocolFault(
                f"{type(self).__name__} cannot move to {new.value} from {self.phase.value}."
            )
        logger.debug("%s: %s -> %s", type(self).__name__, self.phase.value, new.value)
        self.phase = new

    def _hook(self, direction):
        return self.attack.hook(direction)

    def _record_check(self, expected, observed):
        rate, abort = check_security(expected, observed, self.config.abort_threshold)
        self.checking_error_rate = rate
        self.counters["pairs_checked"] += len(expected)
        self.counters["check_errors"] += sum(1 for e, o in zip(expected, observed) if e != o)
        return rate, abort

    def _score_eve(self, message_pairs, true_dibits):
        self.attack.finalize(self.log.view(), self.registry, self.rng)
        self.counters["eve_interceptions"] += self.attack.interceptions
        if not self.attack.active or not message_pairs:
            return
        guesses = self.attack.guess_message(message_pairs)
        self.counters["eve_dibits_total"] += len(message_pairs)
        self.counters["eve_dibits_correct"] += sum(
            1 for g, t in zip(guesses, true_dibits) if g == t
        )

    def outcome(self, decoded=None, decoded_peer=None):
        aborted = self.phase is Phase.ABORTED
        if aborted:
            logger.info(
                "%s aborted with checking error rate %.3f", self.protocol.value, self.checking_error_rate
            )
        return RunOutcome(
            aborted=aborted,
            checking_error_rate=self.checking_error_rate,
            decoded_message=None if aborted else decoded,
            decoded_message_peer=None if aborted else decoded_peer,
            transcript=self.log,
            counters=self.counters,
        )
