import copy
import logging
from dataclasses import dataclass, field
from enum import Enum

from errors import ConfigurationError, ProtocolFault
from qsim import PauliLabel, apply_pauli

logger = logging.getLogger(__name__)

_NOISE_PAULIS = (PauliLabel.X, PauliLabel.Y, PauliLabel.Z)

# Announcement kinds on the classical channel.
SPLIT = "split"
INITIAL_STATE = "initial_state"
CHECK_ORDER = "check_order"
CHECK_MATCHING = "check_matching"
CHECK_RESULTS = "check_results"
CHECKING_TRUTH = "checking_truth"
ABORT = "abort"
MESSAGE_ORDER = "message_order"
MESSAGE_MATCHING = "message_matching"
MESSAGE_RESULTS = "message_results"

# Kinds that carry the secret order of the message set.
MESSAGE_ORDER_KINDS = frozenset({MESSAGE_ORDER, MESSAGE_MATCHING})


class NoiseKind(Enum):
    NONE = "none"
    PAULI = "pauli"


@dataclass(frozen=True)
class NoiseModel:
    """Independent per-particle, per-transit Pauli noise."""

    kind: NoiseKind = NoiseKind.NONE
    p: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ConfigurationError(f"Noise probability {self.p} is outside [0, 1].", "noise_p")

    @classmethod
    def pauli(cls, p):
        return cls(NoiseKind.PAULI, p) if p > 0 else cls()

    @property
    def active(self):
        return self.kind is NoiseKind.PAULI and self.p > 0

    def sample(self, n, rng):
        """
	Draws the noise events for ``n`` particles.

        Args:
            n (int): Number of particles in transit.
            rng (numpy.random.Generator): The trial's generator.

        Returns:
            list[PauliLabel | None]: One entry per particle; None means untouched.
        """
        if not self.active:
            return [None] * n
        hits = rng.random(n) < self.p
        choices = rng.integers(0, 3, size=n)
        return [_NOISE_PAULIS[c] if hit else None for hit, c in zip(hits, choices)]


class Direction(Enum):
    FORWARD = "forward"
    RETURN = "return"


class Party(Enum):
    ALICE = "alice"
    BOB = "bob"


@dataclass(frozen=True)
class TransitBatch:
    items: tuple
    direction: Direction
    sender: Party
    receiver: Party

    def __post_init__(self):
        items = tuple(self.items)
        if len(set(items)) != len(items):
            raise ProtocolFault("A transit batch cannot carry the same particle twice.")
        object.__setattr__(self, "items", items)

    def __len__(self):
        return len(self.items)

    def with_items(self, items):
        return TransitBatch(tuple(items), self.direction, self.sender, self.receiver)


def apply_noise(items, noise, registry, rng):
    events = noise.sample(len(items), rng)
    flips = 0
    for handle, op in zip(items, events):
        if op is not None:
            apply_pauli(registry, handle, op)
            flips += 1
    return flips


def transmit(batch, noise, eve_hook, registry, rng, counters=None):
    """
	Carries a batch of particles across the quantum channel.

    Noise acts on each physical segment: before Eve on the forward leg and after
    her on the return leg. The channel itself never reorders or drops particles;
    Eve may substitute handles but must forward exactly as many as she received.

    Args:
        batch (TransitBatch): Particles in flight.
        noise (NoiseModel): Per-particle noise for this traversal.
        eve_hook (Callable | None): ``hook(batch, registry, rng) -> TransitBatch``.
        registry (EntanglementRegistry): The trial's registry.
        rng (numpy.random.Generator): The trial's generator.
        counters (collections.Counter, optional): Receives ``noise_events`` and
            ``particle_transits``.

    Returns:
        TransitBatch: The batch as delivered to the receiver.

    Raises:
        ProtocolFault: On dead handles or when Eve changes the batch length.
    """
    registry.require(batch.items)
    flips = 0
    if batch.direction is Direction.FORWARD:
        flips += apply_noise(batch.items, noise, registry, rng)
        batch = _intercept(batch, eve_hook, registry, rng)
    else:
        batch = _intercept(batch, eve_hook, registry, rng)
        flips += apply_noise(batch.items, noise, registry, rng)
    if counters is not None:
        counters["noise_events"] += flips
        counters["particle_transits"] += len(batch)
    logger.debug("Delivered %d particles %s with %d noise events", len(batch), batch.direction.value, flips)
    return batch


def _intercept(batch, eve_hook, registry, rng):
    if eve_hook is None:
        return batch
    delivered = eve_hook(batch, registry, rng)
    if len(delivered) != len(batch):
        raise ProtocolFault(
            f"Eavesdropper forwarded {len(delivered)} particles but received {len(batch)}."
        )
    registry.require(delivered.items)
    return delivered


@dataclass(frozen=True)
class Announcement:
    sender: Party
    kind: str
    payload: dict = field(default_factory=dict)

    def to_dict(self):
        return {"sender": self.sender.value, "kind": self.kind, "payload": copy.deepcopy(self.payload)}


class ClassicalLog:
    """
	Authenticated, append-only public channel.

    Only the legitimate parties hold the log itself; everybody else, the
    eavesdropper included, gets a LogView that can read but never announce.
    """

    def __init__(self):
        self._entries = []

    def announce(self, sender, kind, payload=None):
        if not isinstance(sender, Party):
            raise ProtocolFault(f"{sender!r} cannot announce on the classical channel.")
        entry = Announcement(sender, kind, copy.deepcopy(payload or {}))
        self._entries.append(entry)
        logger.debug("%s announced %s", sender.value, kind)
        return entry

    def read(self):
        return tuple(self._entries)

    def latest(self, kind):
        return self.view().latest(kind)

    def view(self):
        return LogView(self)

    def to_list(self):
        return [entry.to_dict() for entry in self._entries]

    def __len__(self):
        return len(self._entries)


class LogView:
    """Read-only window on a ClassicalLog."""

    def __init__(self, log):
        self._log = log

    def read(self):
        return self._log.read()

    def latest(self, kind):
        for entry in reversed(self._log.read()):
            if entry.kind == kind:
                return entry
        return None


def announce(log, sender, kind, payload=None):
    return log.announce(sender, kind, payload)


def read_log(log):
    return log.read()
