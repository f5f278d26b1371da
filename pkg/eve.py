import logging
from enum import Enum

from channel import INITIAL_STATE, MESSAGE_MATCHING, MESSAGE_ORDER, Direction
from coding import Dibit, decode_outcome, decode_relative, dibit_to_pauli
from errors import ConfigurationError, ProtocolFault
from qsim import (
    BellOutcome,
    apply_cnot,
    apply_pauli,
    bell_measure,
    make_epr,
    prepare_bell,
    z_measure,
)

logger = logging.getLogger(__name__)

ROUND_TRIP = "round_trip"
ONE_WAY = "one_way"
DIALOGUE = "dialogue"
ALL_PROTOCOLS = frozenset({ROUND_TRIP, ONE_WAY, DIALOGUE})

_PSI_CLASS = frozenset({BellOutcome.PSI_MINUS, BellOutcome.PSI_PLUS})


class AttackKind(Enum):
    NONE = "none"
    INTERCEPT_RESEND_EPR = "intercept_resend_epr"
    MEASURE_RESEND_Z = "measure_resend_z"
    INTERCEPT_BELL_GUESS = "intercept_bell_guess"
    ENTANGLE_MEASURE = "entangle_measure"


class Eavesdropper:
    """
	Base eavesdropper; on its own it is the absent attacker.

    Subclasses touch particles only inside the hooks they hand to the quantum
    channel and read the classical channel only through a LogView handed to
    ``finalize``. Guesses are made per pair index for the protocol's primary
    message (Bob's in the round trip and dialogue, Alice's one way).

    Args:
        protocol (str): One of ``round_trip``, ``one_way``, ``dialogue``.
        n_pairs (int): Number of EPR pairs in the session, public knowledge.

    Raises:
        ConfigurationError: If the attack cannot be mounted on ``protocol``.
    """

    kind = AttackKind.NONE
    protocols = ALL_PROTOCOLS

    def __init__(self, protocol, n_pairs):
        check_attack_applies(self.kind, protocol)
        self.protocol = protocol
        self.n_pairs = n_pairs
        self.interceptions = 0
        self.log = None

    @property
    def active(self):
        return self.kind is not AttackKind.NONE

    def hook(self, direction):
        return None

    def finalize(self, log, registry, rng):
        self.log = log

    def guess_message(self, pairs):
        return [Dibit(0b00) for _ in pairs]

    def _return_position(self, pair):
        """Return-leg position of ``pair``; assumes no reordering until the order is disclosed."""
        entry = self.log.latest(MESSAGE_ORDER) if self.log else None
        if entry is None:
            return pair
        return dict((p, pos) for p, pos in entry.payload["positions"]).get(pair, pair)

    def _pair_positions(self, pair):
        entry = self.log.latest(MESSAGE_MATCHING) if self.log else None
        if entry is not None:
            for p, first, second in entry.payload["pairs"]:
                if p == pair:
                    return first, second
        return 2 * pair, 2 * pair + 1

    def _initial_state(self):
        entry = self.log.latest(INITIAL_STATE) if self.log else None
        if entry is None:
            return BellOutcome.PSI_MINUS
        return BellOutcome(entry.payload["state"])


class InterceptResendEPR(Eavesdropper):
    """
	Swaps the travel sequence for halves of Eve's own singlets.

    On the forward leg Eve keeps the genuine particles and sends her own. On
    the return leg she Bell-measures each arriving particle with the home half
    she holds for that position, reads the dibit, applies the same operation to
    the genuine particle of that position and releases it. Without a reordered
    return leg this recovers every dibit silently.
    """

    kind = AttackKind.INTERCEPT_RESEND_EPR
    protocols = frozenset({ROUND_TRIP, DIALOGUE})

    def __init__(self, protocol, n_pairs):
        super().__init__(protocol, n_pairs)
        self.captured = {}
        self.home = {}
        self.records = {}

    def hook(self, direction):
        if direction is Direction.FORWARD:
            return self.intercept_forward
        return self.intercept_return

    def intercept_forward(self, batch, registry, rng):
        forwarded = []
        for position, genuine in enumerate(batch.items):
            home, travel = make_epr(registry)
            self.captured[position] = genuine
            self.home[position] = home
            forwarded.append(travel)
        self.interceptions += len(batch)
        return batch.with_items(forwarded)

    def intercept_return(self, batch, registry, rng):
        released = []
        for position, received in enumerate(batch.items):
            outcome = bell_measure(registry, self.home[position], received, rng)
            dibit = decode_outcome(outcome)
            self.records[position] = dibit
            genuine = self.captured[position]
            apply_pauli(registry, genuine, dibit_to_pauli(dibit))
            released.append(genuine)
        self.interceptions += len(batch)
        return batch.with_items(released)

    def guess_message(self, pairs):
        # Her records are fixed at return time; a later disclosure cannot re-pair them.
        return [self.records.get(pair, Dibit(0b00)) for pair in pairs]


class _ZRecordDecoder(Eavesdropper):
    """Guesses the Psi/Phi class change of each pair from Z-basis records."""

    def __init__(self, protocol, n_pairs):
        super().__init__(protocol, n_pairs)
        self.z_records = {}

    def guess_message(self, pairs):
        guesses = []
        for pair in pairs:
            if self.protocol == ONE_WAY:
                first, second = self._pair_positions(pair)
                a = self.z_records.get((Direction.FORWARD, first))
                b = self.z_records.get((Direction.FORWARD, second))
                class_changed = None if None in (a, b) else (a != b) != (self._initial_state() in _PSI_CLASS)
            else:
                a = self.z_records.get((Direction.FORWARD, pair))
                b = self.z_records.get((Direction.RETURN, self._return_position(pair)))
                class_changed = None if None in (a, b) else a != b
            # X and Y change the class, I and Z keep it; within a class she can only guess.
            guesses.append(Dibit(0b01 if class_changed else 0b00))
        return guesses


class MeasureResendZ(_ZRecordDecoder):
    """Measures every particle in transit in the Z basis and forwards it collapsed."""

    kind = AttackKind.MEASURE_RESEND_Z

    def hook(self, direction):
        def measure_resend(batch, registry, rng):
            for position, handle in enumerate(batch.items):
                self.z_records[(direction, position)] = z_measure(registry, handle, rng)
            self.interceptions += len(batch)
            return batch

        return measure_resend


class EntangleMeasure(_ZRecordDecoder):
    """
	Copies Z-basis information of each particle onto an ancilla with a CNOT.

    Ancillas stay unmeasured until ``finalize``, after every order disclosure has
    reached the classical channel.
    """

    kind = AttackKind.ENTANGLE_MEASURE

    def __init__(self, protocol, n_pairs):
        super().__init__(protocol, n_pairs)
        self.ancillas = {}

    def hook(self, direction):
        def entangle(batch, registry, rng):
            for position, handle in enumerate(batch.items):
                ancilla = registry.new_qubit()
                apply_cnot(registry, handle, ancilla)
                self.ancillas[(direction, position)] = ancilla
            self.interceptions += len(batch)
            return batch

        return entangle

    def finalize(self, log, registry, rng):
        super().finalize(log, registry, rng)
        for key, ancilla in self.ancillas.items():
            self.z_records[key] = z_measure(registry, ancilla, rng)


class InterceptBellGuess(Eavesdropper):
    """
	Captures all 2N particles of the one-way transit and pairs them by guesswork.

    Positions are matched by a uniformly random perfect matching; each guessed
    pair is Bell-measured and replaced by a fresh pair in the measured state.
    """

    kind = AttackKind.INTERCEPT_BELL_GUESS
    protocols = frozenset({ONE_WAY})

    def __init__(self, protocol, n_pairs):
        super().__init__(protocol, n_pairs)
        self.matching = {}

    def hook(self, direction):
        if direction is Direction.FORWARD:
            return self.intercept
        return None

    def intercept(self, batch, registry, rng):
        n = len(batch)
        if n % 2:
            raise ProtocolFault(f"Cannot pair up an odd batch of {n} particles.")
        order = rng.permutation(n)
        forwarded = list(batch.items)
        for k in range(0, n, 2):
            a, b = sorted((int(order[k]), int(order[k + 1])))
            outcome = bell_measure(registry, batch.items[a], batch.items[b], rng)
            self.matching[(a, b)] = outcome
            forwarded[a], forwarded[b] = prepare_bell(registry, outcome)
        self.interceptions += n
        return batch.with_items(forwarded)

    def guess_message(self, pairs):
        initial = self._initial_state()
        guesses = []
        for pair in pairs:
            outcome = self.matching.get(tuple(sorted(self._pair_positions(pair))))
            guesses.append(Dibit(0b00) if outcome is None else decode_relative(outcome, initial))
        return guesses


ATTACKS = {
    AttackKind.NONE: Eavesdropper,
    AttackKind.INTERCEPT_RESEND_EPR: InterceptResendEPR,
    AttackKind.MEASURE_RESEND_Z: MeasureResendZ,
    AttackKind.INTERCEPT_BELL_GUESS: InterceptBellGuess,
    AttackKind.ENTANGLE_MEASURE: EntangleMeasure,
}


def build_attack(kind, protocol, n_pairs):
    """
	Instantiates the eavesdropper for a session.

    Args:
        kind (AttackKind): Which strategy.
        protocol (str): Protocol name the session runs.
        n_pairs (int): Number of EPR pairs.

    Returns:
        Eavesdropper: A fresh attacker with empty memory.

    Raises:
        ConfigurationError: If the strategy does not apply to ``protocol``.
    """
    return ATTACKS[kind](protocol, n_pairs)


def check_attack_applies(kind, protocol):
    attack_cls = ATTACKS[kind]
    if protocol not in attack_cls.protocols:
        raise ConfigurationError(
            f"Attack {kind.value} cannot be mounted on the {protocol} protocol; "
            f"it applies to {', '.join(sorted(attack_cls.protocols))}.",
            "attack",
        )
