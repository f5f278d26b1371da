import logging

from channel import (
    ABORT,
    CHECK_ORDER,
    CHECK_RESULTS,
    MESSAGE_ORDER,
    Direction,
    Party,
    TransitBatch,
    transmit,
)
from coding import (
    Dibit,
    Permutation,
    apply_permutation,
    chunk_message,
    decode_relative,
    dibit_to_pauli,
    dibits_needed,
    dibits_to_message,
    invert_permutation,
    random_dibits,
    random_permutation,
)
from errors import ProtocolFault
from qsim import apply_pauli, bell_measure, prepare_bell

from .common import (
    Phase,
    ProtocolName,
    Session,
    ensure_capacity,
    fill_message_set,
    select_checking_set,
)

logger = logging.getLogger(__name__)


class RoundTripSession(Session):
    """
	Two-step QSDC with a secret return order.

    Alice keeps the home halves and sends the travel halves out. Bob encodes on
    the travel halves, shuffles them and sends them back. Nothing passes from Bob
    to Alice except through the quantum channel or the classical log.
    """

    protocol = ProtocolName.ROUND_TRIP

    def __init__(self, config, rng, attack=None):
        super().__init__(config, rng, attack)
        self.home = []
        self.travel = []
        # Bob's private state.
        self.bob_received = []
        self.check_set = []
        self.message_set = []
        self.bob_dibits = {}
        self.order = None
        # Alice's private state.
        self.alice_received = []

    def prepare(self):
        for _ in range(self.config.n_pairs):
            home, travel = prepare_bell(self.registry, self.config.initial_state)
            self.home.append(home)
            self.travel.append(travel)
        self._advance(Phase.INIT, Phase.PREPARED)

    def send_forward(self):
        self._forward_leg()
        self._advance(Phase.PREPARED, Phase.FORWARD_SENT)

    def _forward_leg(self):
        batch = TransitBatch(self.travel, Direction.FORWARD, Party.ALICE, Party.BOB)
        delivered = transmit(
            batch, self.config.noise, self._hook(Direction.FORWARD), self.registry, self.rng, self.counters
        )
        self.bob_received = list(delivered.items)

    def bob_encode(self, message):
        self.check_set, self.message_set = select_checking_set(
            self.config.n_pairs, self.config.check_fraction, self.rng
        )
        checks = random_dibits(len(self.check_set), self.rng)
        self.bob_dibits = dict(zip(self.check_set, checks))
        self.bob_dibits.update(fill_message_set(message, self.message_set, self.rng))
        self._encode_received(self.bob_dibits)
        self._advance(Phase.FORWARD_SENT, Phase.ENCODED)
        logger.debug("Bob checks %d of %d pairs", len(self.check_set), self.config.n_pairs)

    def _encode_received(self, dibits):
        for pair, dibit in dibits.items():
            apply_pauli(self.registry, self.bob_received[pair], dibit_to_pauli(dibit))

    def bob_return(self):
        self._return_leg()
        self._advance(Phase.ENCODED, Phase.RETURNED)

    def _return_leg(self):
        n = self.config.n_pairs
        self.order = random_permutation(n, self.rng) if self.config.permute else Permutation.identity(n)
        shuffled = apply_permutation(self.order, self.bob_received)
        batch = TransitBatch(shuffled, Direction.RETURN, Party.BOB, Party.ALICE)
        delivered = transmit(
            batch, self.config.noise, self._hook(Direction.RETURN), self.registry, self.rng, self.counters
        )
        self.alice_received = list(delivered.items)

    def _positions(self, pairs):
        inverse = invert_permutation(self.order)
        return [[pair, inverse.mapping[pair]] for pair in pairs]

    def announce_check_order(self):
        self.log.announce(Party.BOB, CHECK_ORDER, {"positions": self._positions(self.check_set)})
        self._advance(Phase.RETURNED, Phase.CHECK_ORDER_ANNOUNCED)

    def _alice_measure(self, positions):
        results = []
        for pair, position in positions:
            outcome = bell_measure(self.registry, self.home[pair], self.alice_received[position], self.rng)
            results.append([pair, int(decode_relative(outcome, self.config.initial_state))])
        return results

    def alice_measure_check(self):
        entry = self.log.latest(CHECK_ORDER)
        results = self._alice_measure(entry.payload["positions"])
        self.log.announce(Party.ALICE, CHECK_RESULTS, {"results": results})
        self._advance(Phase.CHECK_ORDER_ANNOUNCED, Phase.CHECK_RESULTS_ANNOUNCED)

    def bob_verify(self):
        results = self.log.latest(CHECK_RESULTS).payload["results"]
        expected = [self.bob_dibits[pair] for pair, _ in results]
        observed = [Dibit(d) for _, d in results]
        self._conclude_check(expected, observed, Phase.CHECK_RESULTS_ANNOUNCED, Party.BOB)

    def _conclude_check(self, expected, observed, current, checker):
        rate, abort = self._record_check(expected, observed)
        if abort:
            self.log.announce(checker, ABORT, {"error_rate": rate})
            self._advance(current, Phase.ABORTED)
        else:
            self._advance(current, Phase.CHECK_PASSED)

    def disclose_message_order(self, bit_length):
        if self.phase is not Phase.CHECK_PASSED:
            raise ProtocolFault(f"Message order cannot be disclosed in phase {self.phase.value}.")
        self.log.announce(
            Party.BOB,
            MESSAGE_ORDER,
            {"positions": self._positions(self.message_set), "message_bits": bit_length},
        )
        self._advance(Phase.CHECK_PASSED, Phase.MESSAGE_ORDER_DISCLOSED)

    def alice_decode(self):
        payload = self.log.latest(MESSAGE_ORDER).payload
        results = self._alice_measure(payload["positions"])
        bit_length = payload["message_bits"]
        dibits = [Dibit(d) for _, d in results][:dibits_needed(bit_length)]
        self._advance(Phase.MESSAGE_ORDER_DISCLOSED, Phase.DECODED)
        return dibits_to_message(dibits, bit_length)

    def run(self, message):
        """
	Runs every step in order and returns the RunOutcome.

        Raises:
            CapacityError: Before any particle is prepared, if ``message`` does
                not fit the message set.
        """
        ensure_capacity(self.config, message)
        self.counters["message_bits"] = message.length
        self.prepare()
        self.send_forward()
        self.bob_encode(message)
        self.bob_return()
        self.announce_check_order()
        self.alice_measure_check()
        self.bob_verify()
        decoded = None
        if self.phase is Phase.CHECK_PASSED:
            self.disclose_message_order(message.length)
            decoded = self.alice_decode()
        used = self.message_set[:len(chunk_message(message))]
        self._score_eve(used, [self.bob_dibits[pair] for pair in used])
        return self.outcome(decoded)


def run_round_trip(config, bob_message, rng, attack=None):
    """
	Sends ``bob_message`` from Bob to Alice over one round-trip session.

    Args:
        config (ProtocolConfig): Session parameters.
        bob_message (Message): Bits Bob encodes on the message set.
        rng (numpy.random.Generator): The trial's only source of randomness.
        attack (Eavesdropper, optional): Prebuilt attacker; built from
            ``config.attack`` when omitted.

    Returns:
        RunOutcome: Aborted runs carry no decoded message.
    """
    return RoundTripSession(config, rng, attack).run(bob_message)
